//! Replicated bandit episodes and their metrics.

use std::borrow::Cow;

use rayon::prelude::*;

use crate::dist::{ArmModel, Bounds};
use crate::dmin::{dmin, SolverParams};
use crate::error::{Error, Result};
use crate::policy::{select, Decision, Policy, PolicyConfig, PolicyState};
use crate::rng::{derive_stream, RandomStream, SeedSpec};

/// Default number of quantile atoms standing in for a beta arm in the bound.
pub const DEFAULT_BETA_ATOMS: usize = 10_000;

/// Largest `|cached - exact|` counted as agreement by the shadow check.
pub const SHADOW_TOLERANCE: f64 = 0.02;

/// Arms with their exact means.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    arms: Vec<ArmModel>,
    bounds: Bounds,
    means: Vec<f64>,
    best_mean: f64,
}

impl Environment {
    pub fn new(arms: Vec<ArmModel>) -> Result<Self> {
        if arms.len() < 2 {
            return Err(Error::Input(format!(
                "need at least 2 arms, got {}",
                arms.len()
            )));
        }
        let bounds = arms[0].bounds();
        if arms.iter().any(|a| a.bounds() != bounds) {
            return Err(Error::Input("all arms must share the same bounds".into()));
        }
        let means: Vec<f64> = arms.iter().map(ArmModel::mean).collect();
        let best_mean = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            arms,
            bounds,
            means,
            best_mean,
        })
    }

    pub fn k(&self) -> usize {
        self.arms.len()
    }

    pub fn arms(&self) -> &[ArmModel] {
        &self.arms
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    /// `mu* = max_j mu_j`.
    pub fn best_mean(&self) -> f64 {
        self.best_mean
    }

    pub fn is_optimal(&self, j: usize) -> bool {
        self.means[j] == self.best_mean
    }

    pub fn gap(&self, j: usize) -> f64 {
        self.best_mean - self.means[j]
    }

    /// One reward from arm `j`, shifted onto `[-1, 0]`.
    pub fn pull(&self, j: usize, stream: &mut RandomStream) -> Result<f64> {
        self.bounds.shift(self.arms[j].sample(stream))
    }
}

/// `sum_{i: mu_i < mu*} (mu* - mu_i) T_i(n)`.
pub fn regret(env: &Environment, counts: &[u64]) -> f64 {
    counts
        .iter()
        .enumerate()
        .filter(|&(j, _)| !env.is_optimal(j))
        .map(|(j, &t)| env.gap(j) * t as f64)
        .sum()
}

/// The asymptotic lower-bound curve `c * ln n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DminBound {
    /// `c = sum_{i: mu_i < mu*} (mu* - mu_i) / D_min(F_i, mu*)`.
    pub coefficient: f64,
    /// Whether some suboptimal arm was replaced by a discretisation.
    pub approximated: bool,
}

impl DminBound {
    pub fn at(&self, n: u64) -> f64 {
        if self.coefficient == 0.0 {
            0.0
        } else {
            self.coefficient * (n as f64).ln()
        }
    }
}

/// Computes the bound curve on shifted distributions. Beta arms are replaced by
/// `beta_atoms` quantile atoms.
pub fn dmin_bound_curve(env: &Environment, beta_atoms: usize) -> Result<DminBound> {
    let target = env.bounds.shift(env.best_mean)?;
    let mut coefficient = 0.0;
    let mut approximated = false;
    for (j, arm) in env.arms.iter().enumerate() {
        if env.is_optimal(j) {
            continue;
        }
        approximated |= !arm.is_finite_support();
        let f = arm.finite_approximation(beta_atoms)?.shifted(env.bounds)?;
        let d = dmin(&f, target, SolverParams::with_budget(100))?;
        if !(d.value > 0.0) {
            return Err(Error::Input(format!(
                "arm {j} is suboptimal but D_min(F_{j}, mu*) = {}",
                d.value
            )));
        }
        coefficient += env.gap(j) / d.value;
    }
    Ok(DminBound {
        coefficient,
        approximated,
    })
}

/// Bound value at round `n`.
pub fn dmin_bound(env: &Environment, n: u64) -> Result<f64> {
    Ok(dmin_bound_curve(env, DEFAULT_BETA_ATOMS)?.at(n))
}

/// `{10, 20, 50, 100, 200, 500, ...}` up to `horizon`, always ending at `horizon`.
pub fn log_checkpoints(horizon: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut decade = 10u64;
    'outer: loop {
        for m in [1, 2, 5] {
            let c = decade.saturating_mul(m);
            if c >= horizon {
                break 'outer;
            }
            out.push(c);
        }
        decade = decade.saturating_mul(10);
    }
    out.push(horizon);
    out
}

/// Agreement counts between cached and freshly solved MED divergences.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ShadowStats {
    pub pairs: u64,
    pub within: u64,
    pub max_abs_error: f64,
}

impl ShadowStats {
    pub fn fraction_within(&self) -> f64 {
        if self.pairs == 0 {
            1.0
        } else {
            self.within as f64 / self.pairs as f64
        }
    }

    pub fn merge(&mut self, other: &ShadowStats) {
        self.pairs += other.pairs;
        self.within += other.within;
        self.max_abs_error = self.max_abs_error.max(other.max_abs_error);
    }
}

/// What happened in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: u64,
    pub arm: usize,
    /// Reward on the original scale.
    pub reward: f64,
    pub probabilities: Option<Vec<f64>>,
}

/// One episode, stepped round by round.
pub struct Episode<'a> {
    env: Cow<'a, Environment>,
    policy: Box<dyn Policy>,
    state: PolicyState,
    stream: RandomStream,
    shadow: Option<ShadowStats>,
}

impl<'a> Episode<'a> {
    pub fn new(env: &'a Environment, policy: &PolicyConfig, seed: SeedSpec) -> Self {
        Self::with_policy(env, policy.build(), seed)
    }

    pub fn with_policy(env: &'a Environment, policy: Box<dyn Policy>, seed: SeedSpec) -> Self {
        Self::from_cow(Cow::Borrowed(env), policy, seed)
    }

    /// An episode that owns its environment.
    pub fn owned(env: Environment, policy: &PolicyConfig, seed: SeedSpec) -> Episode<'static> {
        Episode::from_cow(Cow::Owned(env), policy.build(), seed)
    }

    fn from_cow(env: Cow<'a, Environment>, policy: Box<dyn Policy>, seed: SeedSpec) -> Self {
        Self {
            policy,
            state: PolicyState::new(env.k()),
            env,
            stream: derive_stream(seed),
            shadow: None,
        }
    }

    /// Compare every cached MED divergence with a fresh exact solve each round.
    pub fn with_shadow_check(mut self) -> Self {
        self.shadow = Some(ShadowStats::default());
        self
    }

    pub fn environment(&self) -> &Environment {
        &self.env
    }

    pub fn state(&self) -> &PolicyState {
        &self.state
    }

    pub fn policy(&self) -> &dyn Policy {
        self.policy.as_ref()
    }

    pub fn shadow(&self) -> Option<&ShadowStats> {
        self.shadow.as_ref()
    }

    pub fn counts(&self) -> Vec<u64> {
        (0..self.env.k()).map(|j| self.state.pulls(j)).collect()
    }

    pub fn step(&mut self) -> Result<RoundRecord> {
        let round = self.state.round();
        let Decision { arm, probabilities } =
            select(self.policy.as_mut(), &self.state, &mut self.stream)?;
        if round > self.env.k() as u64 {
            self.shadow_compare()?;
        }
        let reward = self.env.arms[arm].sample(&mut self.stream);
        self.state.record(arm, self.env.bounds.shift(reward)?);
        Ok(RoundRecord {
            round,
            arm,
            reward,
            probabilities,
        })
    }

    fn shadow_compare(&mut self) -> Result<()> {
        let (Some(stats), Some(cache)) = (self.shadow.as_mut(), self.policy.med_cache()) else {
            return Ok(());
        };
        let best = self.state.best_mean().ok_or(Error::EmptyState)?;
        for (j, c) in cache.iter().enumerate() {
            let arm = self.state.arm(j);
            let exact = if arm.mean() == Some(best) {
                0.0
            } else {
                dmin(&arm.to_distribution()?, best, SolverParams::default())?.value
            };
            let err = if exact == c.d_hat {
                0.0
            } else {
                (exact - c.d_hat).abs()
            };
            stats.pairs += 1;
            if err <= SHADOW_TOLERANCE {
                stats.within += 1;
            }
            if err.is_finite() {
                stats.max_abs_error = stats.max_abs_error.max(err);
            }
        }
        Ok(())
    }
}

/// Per-checkpoint results of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub checkpoints: Vec<u64>,
    pub regret: Vec<f64>,
    /// `T_j(n)` at each checkpoint.
    pub pulls: Vec<Vec<u64>>,
    /// Fraction of rounds spent on optimal arms, in `[0, 1]`.
    pub best_fraction: Vec<f64>,
    pub shadow: Option<ShadowStats>,
}

/// Plays `horizon` rounds and samples metrics at `checkpoints` (sorted, `<= horizon`).
pub fn run_episode(
    env: &Environment,
    policy: &PolicyConfig,
    horizon: u64,
    seed: SeedSpec,
    checkpoints: &[u64],
    shadow_check: bool,
) -> Result<RunMetrics> {
    if horizon < env.k() as u64 {
        return Err(Error::Input(format!(
            "horizon {horizon} is shorter than the {} initialisation rounds",
            env.k()
        )));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1])
        || checkpoints.first().is_some_and(|&c| c == 0)
        || checkpoints.last().is_some_and(|&c| c > horizon)
    {
        return Err(Error::Input(
            "checkpoints must be strictly increasing within [1, horizon]".into(),
        ));
    }
    let mut episode = Episode::new(env, policy, seed);
    if shadow_check {
        episode = episode.with_shadow_check();
    }
    let mut metrics = RunMetrics {
        checkpoints: checkpoints.to_vec(),
        regret: Vec::with_capacity(checkpoints.len()),
        pulls: Vec::with_capacity(checkpoints.len()),
        best_fraction: Vec::with_capacity(checkpoints.len()),
        shadow: None,
    };
    let mut next = checkpoints.iter().peekable();
    for n in 1..=horizon {
        episode.step()?;
        if next.peek() == Some(&&n) {
            next.next();
            let counts = episode.counts();
            let on_best: u64 = (0..env.k())
                .filter(|&j| env.is_optimal(j))
                .map(|j| counts[j])
                .sum();
            metrics.regret.push(regret(env, &counts));
            metrics.best_fraction.push(on_best as f64 / n as f64);
            metrics.pulls.push(counts);
        }
    }
    metrics.shadow = episode.shadow().copied();
    Ok(metrics)
}

/// Runs `runs` episodes with seeds `(master_seed, run, policy_index)` on a pool
/// of `workers` threads. The result is ordered by run index and does not
/// depend on `workers`.
#[allow(clippy::too_many_arguments)]
pub fn run_replicated(
    env: &Environment,
    policy: &PolicyConfig,
    policy_index: u64,
    master_seed: u64,
    runs: u64,
    horizon: u64,
    checkpoints: &[u64],
    shadow_check: bool,
    workers: usize,
) -> Result<Vec<RunMetrics>> {
    let job = |run: u64| {
        let seed = SeedSpec::new(master_seed, run, policy_index);
        run_episode(env, policy, horizon, seed, checkpoints, shadow_check)
            .map_err(|e| Error::Input(format!("policy {} run {run}: {e}", policy.kind())))
    };
    if workers <= 1 {
        return (0..runs).map(job).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Input(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| (0..runs).into_par_iter().map(job).collect())
}

/// Mean and standard error across runs, with the bound curve.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateCurve {
    pub checkpoints: Vec<u64>,
    pub regret_mean: Vec<f64>,
    pub regret_stderr: Vec<f64>,
    pub best_fraction_mean: Vec<f64>,
    pub best_fraction_stderr: Vec<f64>,
    pub dmin_bound: Vec<f64>,
    pub runs: usize,
}

/// Sample mean and `sd / sqrt(runs)` (zero for a single run).
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn aggregate(runs: &[RunMetrics], bound: &DminBound) -> Result<AggregateCurve> {
    let first = runs
        .first()
        .ok_or_else(|| Error::Input("nothing to aggregate".into()))?;
    if runs.iter().any(|r| r.checkpoints != first.checkpoints) {
        return Err(Error::Input("runs have mismatched checkpoint grids".into()));
    }
    let m = first.checkpoints.len();
    let mut curve = AggregateCurve {
        checkpoints: first.checkpoints.clone(),
        regret_mean: Vec::with_capacity(m),
        regret_stderr: Vec::with_capacity(m),
        best_fraction_mean: Vec::with_capacity(m),
        best_fraction_stderr: Vec::with_capacity(m),
        dmin_bound: first.checkpoints.iter().map(|&n| bound.at(n)).collect(),
        runs: runs.len(),
    };
    for i in 0..m {
        let regrets: Vec<f64> = runs.iter().map(|r| r.regret[i]).collect();
        let fractions: Vec<f64> = runs.iter().map(|r| r.best_fraction[i]).collect();
        let (rm, rs) = mean_and_stderr(&regrets);
        let (fm, fs) = mean_and_stderr(&fractions);
        curve.regret_mean.push(rm);
        curve.regret_stderr.push(rs);
        curve.best_fraction_mean.push(fm);
        curve.best_fraction_stderr.push(fs);
    }
    Ok(curve)
}
