//! Arm-selection policies.
//!
//! All policies see the same [`PolicyState`]: per-arm records of shifted
//! rewards in `[-1, 0]` and the index of the round about to be played.
//! Initialisation (each arm once, in index order) is handled by
//! [`policy_step`], so [`Policy::choose`] is only asked once every arm has
//! at least one observation.

use crate::dist::EmpiricalState;
use crate::dmin::{dmin, DminResult, SolverParams, EXACT_BUDGET};
use crate::error::{Error, Result};
use crate::rng::{sample_index, RandomStream};

/// Observations of all arms and the round counter `n` (1-based).
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyState {
    arms: Vec<EmpiricalState>,
    round: u64,
    last_choice: Option<usize>,
}

impl PolicyState {
    pub fn new(k: usize) -> Self {
        Self {
            arms: vec![EmpiricalState::new(); k],
            round: 1,
            last_choice: None,
        }
    }

    pub fn k(&self) -> usize {
        self.arms.len()
    }

    /// Index `n` of the round about to be played.
    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn arms(&self) -> &[EmpiricalState] {
        &self.arms
    }

    pub fn arm(&self, j: usize) -> &EmpiricalState {
        &self.arms[j]
    }

    /// Arm chosen in the previous round, `J_{n-1}`.
    pub fn last_choice(&self) -> Option<usize> {
        self.last_choice
    }

    /// `T'_j(n)`, the number of pulls of arm `j` before round `n`.
    pub fn pulls(&self, j: usize) -> u64 {
        self.arms[j].pulls()
    }

    pub fn is_initialized(&self) -> bool {
        self.arms.iter().all(|a| a.pulls() > 0)
    }

    /// Empirical means of all arms; `None` before initialisation completes.
    pub fn means(&self) -> Option<Vec<f64>> {
        self.arms.iter().map(EmpiricalState::mean).collect()
    }

    /// `max_j mu_hat_j(n)` over pulled arms.
    pub fn best_mean(&self) -> Option<f64> {
        self.arms
            .iter()
            .filter_map(EmpiricalState::mean)
            .reduce(f64::max)
    }

    /// Records a shifted reward for `arm` and advances to the next round.
    pub fn record(&mut self, arm: usize, shifted_reward: f64) {
        self.arms[arm].record(shifted_reward);
        self.last_choice = Some(arm);
        self.round += 1;
    }
}

/// Outcome of one selection.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub arm: usize,
    /// Selection probabilities, for randomised index policies.
    pub probabilities: Option<Vec<f64>>,
}

impl Decision {
    fn deterministic(arm: usize) -> Self {
        Self {
            arm,
            probabilities: None,
        }
    }
}

pub trait Policy: Send {
    /// Chooses the arm for round `state.round()`. Every arm has been pulled.
    fn choose(&mut self, state: &PolicyState, stream: &mut RandomStream) -> Result<Decision>;

    /// Cached MED quantities after the latest `choose`, if this is a MED policy.
    fn med_cache(&self) -> Option<&[MedArmCache]> {
        None
    }
}

/// One round: forced initialisation pull or the policy's choice, then the
/// environment's shifted reward is recorded.
pub fn policy_step<P, R>(
    policy: &mut P,
    state: &mut PolicyState,
    stream: &mut RandomStream,
    mut reward: R,
) -> Result<(Decision, f64)>
where
    P: Policy + ?Sized,
    R: FnMut(usize, &mut RandomStream) -> Result<f64>,
{
    let decision = select(policy, state, stream)?;
    let x = reward(decision.arm, stream)?;
    state.record(decision.arm, x);
    Ok((decision, x))
}

/// The arm for round `state.round()`: index order during initialisation,
/// the policy's choice afterwards.
pub fn select<P>(policy: &mut P, state: &PolicyState, stream: &mut RandomStream) -> Result<Decision>
where
    P: Policy + ?Sized,
{
    let n = state.round();
    let decision = if n <= state.k() as u64 {
        Decision::deterministic((n - 1) as usize)
    } else {
        policy.choose(state, stream)?
    };
    if decision.arm >= state.k() {
        return Err(Error::Input(format!(
            "policy chose arm {} of {}",
            decision.arm,
            state.k()
        )));
    }
    Ok(decision)
}

// ---------------------------------------------------------------------------
// MED

/// `w_j = exp(-T'_j D_j)`. An infinite divergence gives weight 0.
pub fn med_weights(pulls: &[u64], divergences: &[f64]) -> Vec<f64> {
    pulls
        .iter()
        .zip(divergences)
        .map(|(&t, &d)| {
            if d == 0.0 {
                1.0
            } else {
                (-(t as f64) * d).exp()
            }
        })
        .collect()
}

/// Normalises weights into probabilities `w_j / sum_i w_i`.
pub fn normalize(weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    weights.iter().map(|w| w / total).collect()
}

/// Draws an arm with probability proportional to its weight.
pub fn med_select(weights: &[f64], stream: &mut RandomStream) -> Result<usize> {
    sample_index(weights, stream.uniform())
        .ok_or_else(|| Error::Input("all MED weights are zero".into()))
}

/// Per-arm state of the cached MED implementation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MedArmCache {
    /// Current divergence estimate, possibly `+inf`.
    pub d_hat: f64,
    /// Dual slope used for first-order updates.
    pub nu: f64,
    /// Value of the best empirical mean at which `d_hat` was last anchored.
    pub m: f64,
    /// Divergence returned by the most recent exact solve.
    pub d_solved: f64,
}

impl MedArmCache {
    fn anchored(d: f64, nu: f64, m: f64) -> Self {
        Self {
            d_hat: d,
            nu,
            m,
            d_solved: d,
        }
    }
}

/// Where the anchor `m_i` moves after an update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AnchorRule {
    /// `m_i` tracks the best empirical mean after both exact and linear updates.
    #[default]
    BestMean,
    /// Compatibility mode: an exact solve anchors `m_i` at the arm's own mean
    /// and the linear branch leaves `m_i` unchanged.
    OwnMean,
    /// `m_i` stays at the best mean of the last exact solve and
    /// `D_i = D_solved + nu_i (mu_hat* - m_i)`, so the drift test sees the
    /// total movement since that solve.
    LastSolve,
}

/// MED with per-arm caching of `(D_i, nu_i, m_i)`.
///
/// With drift threshold `d = 0` every round re-solves every arm, which is the
/// ideal policy.
#[derive(Debug, Clone)]
pub struct MedPolicy {
    budget: u32,
    drift: f64,
    anchor: AnchorRule,
    cache: Vec<MedArmCache>,
}

impl MedPolicy {
    pub fn practical(r: u32, d: f64) -> Self {
        Self {
            budget: r.max(1),
            drift: d.max(0.0),
            anchor: AnchorRule::BestMean,
            cache: Vec::new(),
        }
    }

    pub fn ideal(r: u32) -> Self {
        Self::practical(r, 0.0)
    }

    pub fn with_anchor(mut self, anchor: AnchorRule) -> Self {
        self.anchor = anchor;
        self
    }

    pub fn cache(&self) -> &[MedArmCache] {
        &self.cache
    }

    fn solve(&self, state: &PolicyState, j: usize, target: f64, nu0: f64) -> Result<DminResult> {
        let f = state.arm(j).to_distribution()?;
        dmin(&f, target, SolverParams::with_budget(self.budget).warm(nu0))
    }

    /// Brings every `D_i` up to date for round `state.round()`.
    pub fn update(&mut self, state: &PolicyState) -> Result<()> {
        let best = state.best_mean().ok_or(Error::EmptyState)?;
        let means = state.means().ok_or(Error::EmptyState)?;

        if self.cache.len() != state.k() {
            self.cache = (0..state.k())
                .map(|j| {
                    let r = if means[j] == best {
                        DminResult::ZERO
                    } else {
                        self.solve(state, j, best, 0.0)?
                    };
                    Ok(MedArmCache::anchored(r.value, r.nu_star, best))
                })
                .collect::<Result<_>>()?;
        }

        for j in 0..state.k() {
            let c = self.cache[j];
            if means[j] == best {
                // G = F_hat_j is feasible, so D_j is exactly 0
                self.cache[j] = MedArmCache::anchored(0.0, 0.0, best);
                continue;
            }
            let delta = best - c.m;
            let linear = state.last_choice() != Some(j)
                && delta.abs() < self.drift
                && c.d_hat.is_finite()
                && c.nu.is_finite();
            self.cache[j] = if linear {
                match self.anchor {
                    AnchorRule::BestMean => MedArmCache {
                        d_hat: (c.d_hat + c.nu * delta).max(0.0),
                        m: best,
                        ..c
                    },
                    AnchorRule::OwnMean => MedArmCache {
                        d_hat: (c.d_hat + c.nu * delta).max(0.0),
                        ..c
                    },
                    AnchorRule::LastSolve => MedArmCache {
                        d_hat: (c.d_solved + c.nu * delta).max(0.0),
                        ..c
                    },
                }
            } else {
                let warm = if c.nu.is_finite() { c.nu } else { 0.0 };
                let r = self.solve(state, j, best, warm)?;
                let m = match self.anchor {
                    AnchorRule::BestMean | AnchorRule::LastSolve => best,
                    AnchorRule::OwnMean => means[j],
                };
                MedArmCache::anchored(r.value.max(0.0), r.nu_star, m)
            };
        }
        Ok(())
    }

    pub fn weights(&self, state: &PolicyState) -> Vec<f64> {
        let pulls: Vec<u64> = (0..state.k()).map(|j| state.pulls(j)).collect();
        let d: Vec<f64> = self.cache.iter().map(|c| c.d_hat).collect();
        med_weights(&pulls, &d)
    }
}

impl Policy for MedPolicy {
    fn choose(&mut self, state: &PolicyState, stream: &mut RandomStream) -> Result<Decision> {
        self.update(state)?;
        let w = self.weights(state);
        let arm = med_select(&w, stream)?;
        Ok(Decision {
            arm,
            probabilities: Some(normalize(&w)),
        })
    }

    fn med_cache(&self) -> Option<&[MedArmCache]> {
        Some(&self.cache)
    }
}

/// Ideal MED round: every `D_j` solved afresh, then weights and a draw.
pub fn med_ideal_round(
    state: &PolicyState,
    params: SolverParams,
    stream: &mut RandomStream,
) -> Result<(Vec<f64>, usize)> {
    let best = state.best_mean().ok_or(Error::EmptyState)?;
    let d = (0..state.k())
        .map(|j| {
            let f = state.arm(j).to_distribution()?;
            if state.arm(j).mean() == Some(best) {
                Ok(0.0)
            } else {
                Ok(dmin(&f, best, params)?.value)
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let pulls: Vec<u64> = (0..state.k()).map(|j| state.pulls(j)).collect();
    let w = med_weights(&pulls, &d);
    let arm = med_select(&w, stream)?;
    Ok((normalize(&w), arm))
}

// ---------------------------------------------------------------------------
// UCB baselines, on rewards normalised to [0, 1]

fn mean01(state: &PolicyState, j: usize) -> f64 {
    // shifted rewards live in [-1, 0]; +1 maps them back to [0, 1]
    state.arm(j).mean().expect("arm pulled") + 1.0
}

fn argmax_lowest(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (j, v) in values.enumerate() {
        if v > best.1 {
            best = (j, v);
        }
    }
    best.0
}

/// `mu_hat_j + sqrt(2 ln n / T'_j)` with `n` the current round.
pub fn ucb1_index(state: &PolicyState, j: usize) -> f64 {
    let n = state.round() as f64;
    let t = state.pulls(j) as f64;
    mean01(state, j) + (2.0 * n.ln() / t).sqrt()
}

/// `mu_hat_j + sqrt(ln n / T'_j * min(1/4, V_j))`, `V_j = s_j^2 + sqrt(2 ln n / T'_j)`.
pub fn ucb_tuned_index(state: &PolicyState, j: usize) -> f64 {
    let n = state.round() as f64;
    let t = state.pulls(j) as f64;
    let var = state.arm(j).variance().expect("arm pulled");
    let v = var + (2.0 * n.ln() / t).sqrt();
    mean01(state, j) + (n.ln() / t * v.min(0.25)).sqrt()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Ucb1;

impl Policy for Ucb1 {
    fn choose(&mut self, state: &PolicyState, _: &mut RandomStream) -> Result<Decision> {
        Ok(Decision::deterministic(argmax_lowest(
            (0..state.k()).map(|j| ucb1_index(state, j)),
        )))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct UcbTuned;

impl Policy for UcbTuned {
    fn choose(&mut self, state: &PolicyState, _: &mut RandomStream) -> Result<Decision> {
        Ok(Decision::deterministic(argmax_lowest(
            (0..state.k()).map(|j| ucb_tuned_index(state, j)),
        )))
    }
}

/// UCB2: arms are played in epochs of length `tau(r + 1) - tau(r)`,
/// `tau(r) = ceil((1 + alpha)^r)`.
#[derive(Debug, Clone)]
pub struct Ucb2 {
    alpha: f64,
    epochs: Vec<u64>,
    current: Option<(usize, u64)>,
}

impl Ucb2 {
    pub fn new(alpha: f64) -> Self {
        Self {
            alpha,
            epochs: Vec::new(),
            current: None,
        }
    }

    pub fn tau(&self, r: u64) -> u64 {
        (1.0 + self.alpha).powf(r as f64).ceil() as u64
    }

    /// `sqrt((1 + alpha) ln(e n / tau) / (2 tau))`, `n` = plays so far.
    pub fn bonus(&self, plays: u64, r: u64) -> f64 {
        let tau = self.tau(r) as f64;
        let log = (std::f64::consts::E * plays as f64 / tau).ln().max(0.0);
        ((1.0 + self.alpha) * log / (2.0 * tau)).sqrt()
    }

    pub fn epoch(&self, j: usize) -> u64 {
        self.epochs.get(j).copied().unwrap_or(0)
    }
}

/// UCB2 selection at the start of an epoch: the arm with the largest index.
pub fn ucb2_select(state: &PolicyState, ucb2: &Ucb2) -> usize {
    let plays = state.round() - 1;
    argmax_lowest((0..state.k()).map(|j| mean01(state, j) + ucb2.bonus(plays, ucb2.epoch(j))))
}

impl Policy for Ucb2 {
    fn choose(&mut self, state: &PolicyState, _: &mut RandomStream) -> Result<Decision> {
        if self.epochs.len() != state.k() {
            self.epochs = vec![0; state.k()];
        }
        if let Some((arm, left)) = self.current {
            if left > 0 {
                self.current = Some((arm, left - 1));
                return Ok(Decision::deterministic(arm));
            }
        }
        let arm = ucb2_select(state, self);
        // zero-length epochs leave the index unchanged, so the same arm is
        // selected again until an epoch with at least one play begins
        let mut len = 0;
        while len == 0 {
            let r = self.epochs[arm];
            len = self.tau(r + 1) - self.tau(r);
            self.epochs[arm] = r + 1;
        }
        self.current = Some((arm, len - 1));
        Ok(Decision::deterministic(arm))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct UniformRandom;

impl Policy for UniformRandom {
    fn choose(&mut self, state: &PolicyState, stream: &mut RandomStream) -> Result<Decision> {
        let k = state.k();
        let arm = ((stream.uniform() * k as f64) as usize).min(k - 1);
        Ok(Decision::deterministic(arm))
    }
}

// ---------------------------------------------------------------------------
// configuration

/// A policy and its parameters, as written in experiment configs.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicyConfig {
    Med { r: u32, d: f64, anchor: AnchorRule },
    MedIdeal { r: u32 },
    Ucb1,
    UcbTuned,
    Ucb2 { alpha: f64 },
    UniformRandom,
}

impl PolicyConfig {
    pub fn med(r: u32, d: f64) -> Self {
        PolicyConfig::Med {
            r,
            d,
            anchor: AnchorRule::BestMean,
        }
    }

    pub fn med_ideal() -> Self {
        PolicyConfig::MedIdeal { r: EXACT_BUDGET }
    }

    /// Config-file name of the policy kind.
    pub fn kind(&self) -> &'static str {
        match self {
            PolicyConfig::Med { .. } => "med",
            PolicyConfig::MedIdeal { .. } => "med-ideal",
            PolicyConfig::Ucb1 => "ucb1",
            PolicyConfig::UcbTuned => "ucb-tuned",
            PolicyConfig::Ucb2 { .. } => "ucb2",
            PolicyConfig::UniformRandom => "uniform-random",
        }
    }

    pub fn build(&self) -> Box<dyn Policy> {
        match *self {
            PolicyConfig::Med { r, d, anchor } => {
                Box::new(MedPolicy::practical(r, d).with_anchor(anchor))
            }
            PolicyConfig::MedIdeal { r } => Box::new(MedPolicy::ideal(r)),
            PolicyConfig::Ucb1 => Box::new(Ucb1),
            PolicyConfig::UcbTuned => Box::new(UcbTuned),
            PolicyConfig::Ucb2 { alpha } => Box::new(Ucb2::new(alpha)),
            PolicyConfig::UniformRandom => Box::new(UniformRandom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{derive_stream, SeedSpec};
    use approx::assert_abs_diff_eq;

    fn state_with(rewards: &[&[f64]]) -> PolicyState {
        let mut s = PolicyState::new(rewards.len());
        let longest = rewards.iter().map(|r| r.len()).max().unwrap();
        for i in 0..longest {
            for (j, r) in rewards.iter().enumerate() {
                if let Some(&x) = r.get(i) {
                    s.record(j, x);
                }
            }
        }
        s
    }

    #[test]
    fn weights_examples() {
        let w = med_weights(&[10, 5], &[0.0, 0.2]);
        assert_eq!(w, vec![1.0, (-1.0f64).exp()]);
        let p = normalize(&w);
        assert_abs_diff_eq!(p[0], 0.7311, epsilon = 1e-4);
        assert_abs_diff_eq!(p[1], 0.2689, epsilon = 1e-4);

        let p = normalize(&med_weights(&[3, 7, 1], &[0.0, 0.0, 0.0]));
        assert!(p.iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-15));

        let p = normalize(&med_weights(&[3, 7, 1], &[0.0, f64::INFINITY, 0.1]));
        assert_eq!(p[1], 0.0);
        assert_abs_diff_eq!(p[0] + p[2], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn select_frequencies() {
        let mut s = derive_stream(SeedSpec::new(11, 0, 0));
        assert!((0..1000).all(|_| med_select(&[1.0, 0.0], &mut s).unwrap() == 0));
        assert!(med_select(&[0.0, 0.0], &mut s).is_err());

        let n = 100_000;
        let zeros = (0..n)
            .filter(|_| med_select(&[1.0, 1.0], &mut s).unwrap() == 0)
            .count();
        assert!((zeros as f64 / n as f64 - 0.5).abs() <= 0.005);

        let w = [1.0, (-1.0f64).exp()];
        let p1 = w[1] / (w[0] + w[1]);
        let ones = (0..n)
            .filter(|_| med_select(&w, &mut s).unwrap() == 1)
            .count();
        let sd = (p1 * (1.0 - p1) / n as f64).sqrt();
        assert!((ones as f64 / n as f64 - p1).abs() <= 4.0 * sd);
    }

    #[test]
    fn ideal_round_after_initialisation() {
        let state = state_with(&[&[-0.2], &[-0.7], &[-0.5]]);
        assert_eq!(state.round(), 4);
        let mut s = derive_stream(SeedSpec::new(0, 0, 0));
        let (p, arm) = med_ideal_round(&state, SolverParams::default(), &mut s).unwrap();
        assert!(arm < 3);
        assert!(p[0] >= 1.0 / 3.0);
        let mut policy = MedPolicy::ideal(EXACT_BUDGET);
        policy.update(&state).unwrap();
        let w = policy.weights(&state);
        assert_eq!(w[0], 1.0);
        assert!(w[1] < 1.0 && w[2] < 1.0);
    }

    #[test]
    fn infinite_divergence_when_best_is_the_upper_end() {
        // arm 0 always paid the maximum; arm 1 saw a lower reward
        let state = state_with(&[&[0.0, 0.0], &[-0.3, 0.0]]);
        let mut policy = MedPolicy::practical(2, 0.01);
        policy.update(&state).unwrap();
        assert_eq!(policy.cache()[1].d_hat, f64::INFINITY);
        assert_eq!(policy.weights(&state), vec![1.0, 0.0]);
    }

    #[test]
    fn linear_branch_leaves_unchanged_when_anchor_matches() {
        let mut state = state_with(&[&[-0.2, -0.3], &[-0.6, -0.9]]);
        let mut policy = MedPolicy::practical(2, 0.01);
        policy.update(&state).unwrap();
        let before = policy.cache()[1];
        // pull arm 0 with a reward equal to its mean: mu_hat* unchanged
        state.record(0, -0.25);
        policy.update(&state).unwrap();
        assert_eq!(policy.cache()[1], before);
    }

    #[test]
    fn last_choice_forces_exact_solve() {
        let mut state = state_with(&[&[-0.2, -0.3], &[-0.6, -0.9]]);
        let mut policy = MedPolicy::practical(50, 10.0);
        policy.update(&state).unwrap();
        state.record(1, -0.8);
        policy.update(&state).unwrap();
        let f = state.arm(1).to_distribution().unwrap();
        let exact = dmin(&f, state.best_mean().unwrap(), SolverParams::default()).unwrap();
        assert_abs_diff_eq!(policy.cache()[1].d_hat, exact.value, epsilon = 1e-12);
    }

    #[test]
    fn linear_update_and_anchor_rules() {
        let mut state = state_with(&[&[-0.2, -0.3], &[-0.6, -0.9], &[-0.5]]);
        let mut best = MedPolicy::practical(50, 0.5);
        let mut own = MedPolicy::practical(50, 0.5).with_anchor(AnchorRule::OwnMean);
        best.update(&state).unwrap();
        own.update(&state).unwrap();
        let c_best = best.cache()[1];
        let c_own = own.cache()[1];
        state.record(0, -0.1); // best mean rises from -0.25 to -0.2
        best.update(&state).unwrap();
        own.update(&state).unwrap();
        let target = state.best_mean().unwrap();
        let after = best.cache()[1];
        assert_abs_diff_eq!(
            after.d_hat,
            c_best.d_hat + c_best.nu * (target - c_best.m),
            epsilon = 1e-15
        );
        assert_eq!(after.m, target);
        // the compatibility rule keeps the own-mean anchor through linear steps
        assert_eq!(own.cache()[1].m, c_own.m);
    }

    #[test]
    fn ucb1_example() {
        let state = state_with(&[&[0.0], &[-1.0]]);
        assert_eq!(state.round(), 3);
        let b = (2.0 * 3f64.ln()).sqrt();
        assert_abs_diff_eq!(ucb1_index(&state, 0), 1.0 + b, epsilon = 1e-15);
        assert_abs_diff_eq!(ucb1_index(&state, 1), b, epsilon = 1e-15);
        let mut s = derive_stream(SeedSpec::new(0, 0, 0));
        assert_eq!(Ucb1.choose(&state, &mut s).unwrap().arm, 0);
    }

    #[test]
    fn ucb_tuned_zero_variance_clamp() {
        let state = state_with(&[&[-0.4, -0.4, -0.4, -0.4], &[-1.0, 0.0, -1.0, 0.0]]);
        let n = state.round() as f64;
        let t = 4.0;
        let v = (2.0 * n.ln() / t).sqrt();
        let expected = 0.6 + (n.ln() / t * v.min(0.25)).sqrt();
        assert_abs_diff_eq!(ucb_tuned_index(&state, 0), expected, epsilon = 1e-15);
        let v1 = 0.25 + (2.0 * n.ln() / t).sqrt();
        assert_abs_diff_eq!(
            ucb_tuned_index(&state, 1),
            0.5 + (n.ln() / t * v1.min(0.25)).sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn ucb2_epochs() {
        let u = Ucb2::new(0.001);
        assert_eq!(u.tau(0), 1);
        assert_eq!(u.tau(1), 2);
        assert_eq!(u.tau(2), 2);
        let u = Ucb2::new(0.5);
        assert_eq!(
            (0..6).map(|r| u.tau(r)).collect::<Vec<_>>(),
            vec![1, 2, 3, 4, 6, 8]
        );

        // alpha = 0.5: arm 0 (mean 1) plays epochs 0, 1, 2 of length 1 and
        // epoch 3 of length 2. At the sixth pick (7 plays so far) arm 1's bonus
        // sqrt(0.75 ln 7e) = 1.486 beats 1 + sqrt(1.5 ln(7e/6) / 12) = 1.380.
        let mut policy = Ucb2::new(0.5);
        let mut state = state_with(&[&[0.0], &[-1.0]]);
        let mut s = derive_stream(SeedSpec::new(0, 0, 0));
        let mut picks = Vec::new();
        for _ in 0..6 {
            let d = policy.choose(&state, &mut s).unwrap();
            picks.push(d.arm);
            state.record(d.arm, if d.arm == 0 { 0.0 } else { -1.0 });
        }
        assert_eq!(picks, vec![0, 0, 0, 0, 0, 1]);
        assert_eq!(policy.epoch(0), 4);
        assert_eq!(policy.epoch(1), 1);
    }

    #[test]
    fn policy_step_counts_and_initialisation() {
        let mut policy = UniformRandom;
        let mut state = PolicyState::new(2);
        let mut s = derive_stream(SeedSpec::new(1, 2, 3));
        let mut arms = Vec::new();
        for _ in 0..3 {
            let (d, _) = policy_step(&mut policy, &mut state, &mut s, |_, _| Ok(-0.5)).unwrap();
            arms.push(d.arm);
        }
        assert_eq!(&arms[..2], &[0, 1]);
        assert_eq!(state.pulls(0) + state.pulls(1), 3);
        assert_eq!(state.round(), 4);
    }

    #[test]
    fn policy_kinds_build() {
        for cfg in [
            PolicyConfig::med(2, 0.01),
            PolicyConfig::med_ideal(),
            PolicyConfig::Ucb1,
            PolicyConfig::UcbTuned,
            PolicyConfig::Ucb2 { alpha: 0.001 },
            PolicyConfig::UniformRandom,
        ] {
            let mut p = cfg.build();
            let state = state_with(&[&[-0.1], &[-0.9]]);
            let mut s = derive_stream(SeedSpec::new(0, 0, 0));
            assert!(p.choose(&state, &mut s).unwrap().arm < 2);
            assert_eq!(p.med_cache().is_some(), cfg.kind().starts_with("med"));
        }
    }
}
