//! Reward models, empirical records and the shift onto `[-1, 0]`.

use std::collections::BTreeMap;

use ordered_float::OrderedFloat;
use rand_distr::Distribution;

use crate::error::{Error, Result};
use crate::rng::{sample_index, RandomStream};

/// Tolerance on the total mass of a [`FiniteDistribution`].
pub const MASS_TOLERANCE: f64 = 1e-12;

/// A probability mass function on finitely many strictly increasing points.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDistribution {
    points: Vec<f64>,
    probs: Vec<f64>,
}

impl FiniteDistribution {
    pub fn new(points: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        if points.len() != probs.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} points but {} probabilities",
                points.len(),
                probs.len()
            )));
        }
        if let Some(x) = points.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidDistribution(format!("non-finite point {x}")));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidDistribution(
                "points must be strictly increasing".into(),
            ));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidDistribution(format!(
                "invalid probability {p}"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self { points, probs })
    }

    /// Builds a distribution from non-negative weights, normalising them.
    pub fn from_weights(points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidDistribution(format!(
                "weights must have a positive finite sum, got {total}"
            )));
        }
        let probs = weights.iter().map(|w| w / total).collect();
        Self::new(points, probs)
    }

    pub fn point_mass(x: f64) -> Self {
        Self {
            points: vec![x],
            probs: vec![1.0],
        }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(x, p)| x * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.iter().map(|(x, p)| p * (x - m) * (x - m)).sum()
    }

    /// Mass placed exactly on `x`.
    pub fn mass_at(&self, x: f64) -> f64 {
        self.points
            .binary_search_by(|p| p.total_cmp(&x))
            .map(|i| self.probs[i])
            .unwrap_or(0.0)
    }

    pub fn is_within(&self, lo: f64, hi: f64) -> bool {
        self.points[0] >= lo && self.points[self.points.len() - 1] <= hi
    }

    /// Applies the affine shift of `bounds` to every point.
    pub fn shifted(&self, bounds: Bounds) -> Result<Self> {
        let points = self
            .points
            .iter()
            .map(|&x| bounds.shift(x))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            points,
            probs: self.probs.clone(),
        })
    }
}

/// Mean of a finite distribution.
pub fn mean(d: &FiniteDistribution) -> f64 {
    d.mean()
}

/// Known reward interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lo: f64,
    pub hi: f64,
}

impl Bounds {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Domain(format!(
                "bounds [{lo}, {hi}] must satisfy a < b"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn unit() -> Self {
        Self { lo: 0.0, hi: 1.0 }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.lo..=self.hi).contains(&x)
    }

    pub fn shift(&self, x: f64) -> Result<f64> {
        shift_reward(x, self.lo, self.hi)
    }

    /// Maps `x` in `[lo, hi]` to `[0, 1]`.
    pub fn normalize(&self, x: f64) -> f64 {
        (x - self.lo) / self.width()
    }
}

/// Maps `x` in `[a, b]` onto `[-1, 0]` by `(x - b) / (b - a)`.
pub fn shift_reward(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(a < b) {
        return Err(Error::Domain(format!(
            "bounds [{a}, {b}] must satisfy a < b"
        )));
    }
    if !(a <= x && x <= b) {
        return Err(Error::Domain(format!("reward {x} outside [{a}, {b}]")));
    }
    // + 0.0 turns a -0.0 into 0.0 so that the upper endpoint has one key
    Ok(((x - b) / (b - a)).clamp(-1.0, 0.0) + 0.0)
}

/// Running record of one arm's shifted rewards, keyed by exact value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmpiricalState {
    counts: BTreeMap<OrderedFloat<f64>, u64>,
    pulls: u64,
    sum: f64,
    sum_sq: f64,
}

impl EmpiricalState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, shifted_reward: f64) {
        debug_assert!(
            (-1.0..=0.0).contains(&shifted_reward),
            "shifted reward {shifted_reward} outside [-1, 0]"
        );
        let x = shifted_reward + 0.0;
        *self.counts.entry(OrderedFloat(x)).or_insert(0) += 1;
        self.pulls += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn pulls(&self) -> u64 {
        self.pulls
    }

    pub fn sum(&self) -> f64 {
        self.sum
    }

    pub fn support_size(&self) -> usize {
        self.counts.len()
    }

    pub fn count_of(&self, x: f64) -> u64 {
        self.counts
            .get(&OrderedFloat(x + 0.0))
            .copied()
            .unwrap_or(0)
    }

    /// `sum / pulls`, or `None` before the first observation.
    pub fn mean(&self) -> Option<f64> {
        (self.pulls > 0).then(|| self.sum / self.pulls as f64)
    }

    /// Biased sample variance `E[x^2] - mean^2`, floored at zero.
    pub fn variance(&self) -> Option<f64> {
        let m = self.mean()?;
        Some((self.sum_sq / self.pulls as f64 - m * m).max(0.0))
    }

    /// True when every observation equals `x`.
    pub fn is_point_mass_at(&self, x: f64) -> bool {
        self.pulls > 0 && self.count_of(x) == self.pulls
    }

    pub fn to_distribution(&self) -> Result<FiniteDistribution> {
        if self.pulls == 0 {
            return Err(Error::EmptyState);
        }
        let t = self.pulls as f64;
        let (points, probs) = self
            .counts
            .iter()
            .map(|(x, &c)| (x.0, c as f64 / t))
            .unzip();
        FiniteDistribution::from_weights(points, probs)
    }
}

/// Shape of a reward model.
#[derive(Debug, Clone, PartialEq)]
pub enum ArmKind {
    /// Reward `hi` with probability `p`, `lo` otherwise.
    Bernoulli {
        p: f64,
    },
    Discrete(FiniteDistribution),
    /// Beta law rescaled from `[0, 1]` onto the bounds.
    Beta {
        alpha: f64,
        beta: f64,
    },
}

/// A reward distribution with its declared bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmModel {
    kind: ArmKind,
    bounds: Bounds,
}

impl ArmModel {
    pub fn new(kind: ArmKind, bounds: Bounds) -> Result<Self> {
        match &kind {
            ArmKind::Bernoulli { p } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::Domain(format!("bernoulli p = {p} not in [0, 1]")));
                }
            }
            ArmKind::Beta { alpha, beta } => {
                if !(alpha.is_finite() && beta.is_finite() && *alpha > 0.0 && *beta > 0.0) {
                    return Err(Error::Domain(format!(
                        "beta parameters ({alpha}, {beta}) must be positive"
                    )));
                }
            }
            ArmKind::Discrete(d) => {
                if !d.is_within(bounds.lo, bounds.hi) {
                    return Err(Error::Domain(format!(
                        "discrete support outside bounds [{}, {}]",
                        bounds.lo, bounds.hi
                    )));
                }
            }
        }
        Ok(Self { kind, bounds })
    }

    pub fn bernoulli(p: f64) -> Result<Self> {
        Self::new(ArmKind::Bernoulli { p }, Bounds::unit())
    }

    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(ArmKind::Beta { alpha, beta }, Bounds::unit())
    }

    pub fn discrete(points: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        Self::new(
            ArmKind::Discrete(FiniteDistribution::new(points, probs)?),
            Bounds::unit(),
        )
    }

    pub fn kind(&self) -> &ArmKind {
        &self.kind
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn is_finite_support(&self) -> bool {
        !matches!(self.kind, ArmKind::Beta { .. })
    }

    pub fn mean(&self) -> f64 {
        let Bounds { lo, hi } = self.bounds;
        match &self.kind {
            ArmKind::Bernoulli { p } => lo + (hi - lo) * p,
            ArmKind::Discrete(d) => d.mean(),
            ArmKind::Beta { alpha, beta } => lo + (hi - lo) * (alpha / (alpha + beta)),
        }
    }

    pub fn sample(&self, stream: &mut RandomStream) -> f64 {
        let Bounds { lo, hi } = self.bounds;
        match &self.kind {
            ArmKind::Bernoulli { p } => {
                if stream.uniform() < *p {
                    hi
                } else {
                    lo
                }
            }
            ArmKind::Discrete(d) => {
                let j = sample_index(d.probs(), stream.uniform())
                    .expect("distribution has positive mass");
                d.points()[j]
            }
            ArmKind::Beta { alpha, beta } => {
                let law = rand_distr::Beta::new(*alpha, *beta).expect("validated parameters");
                let x: f64 = law.sample(stream.rng());
                (lo + (hi - lo) * x).clamp(lo, hi)
            }
        }
    }

    /// A finite-support stand-in for this arm, in original coordinates.
    ///
    /// Finite arms are returned exactly. Beta arms become `atoms` equiprobable
    /// atoms placed at the quantiles `(k + 1/2) / atoms`; atoms that coincide
    /// in floating point are merged.
    pub fn finite_approximation(&self, atoms: usize) -> Result<FiniteDistribution> {
        let Bounds { lo, hi } = self.bounds;
        match &self.kind {
            ArmKind::Bernoulli { p } => {
                FiniteDistribution::from_weights(vec![lo, hi], vec![1.0 - p, *p])
            }
            ArmKind::Discrete(d) => Ok(d.clone()),
            ArmKind::Beta { alpha, beta } => {
                if atoms == 0 {
                    return Err(Error::Domain(
                        "beta discretisation needs at least one atom".into(),
                    ));
                }
                let mut merged: BTreeMap<OrderedFloat<f64>, f64> = BTreeMap::new();
                for k in 0..atoms {
                    let q = (k as f64 + 0.5) / atoms as f64;
                    let x = statrs::function::beta::inv_beta_reg(*alpha, *beta, q).clamp(0.0, 1.0);
                    let y = (lo + (hi - lo) * x).clamp(lo, hi);
                    *merged.entry(OrderedFloat(y)).or_insert(0.0) += 1.0;
                }
                let (points, weights) = merged.into_iter().map(|(x, w)| (x.0, w)).unzip();
                FiniteDistribution::from_weights(points, weights)
            }
        }
    }
}

/// Exact expected value of an arm.
pub fn arm_mean(m: &ArmModel) -> f64 {
    m.mean()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{derive_stream, SeedSpec};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn fd(points: &[f64], probs: &[f64]) -> FiniteDistribution {
        FiniteDistribution::new(points.to_vec(), probs.to_vec()).unwrap()
    }

    #[test]
    fn table_means() {
        assert_abs_diff_eq!(fd(&[0.0, 1.0], &[0.45, 0.55]).mean(), 0.55, epsilon = 1e-15);
        assert_abs_diff_eq!(fd(&[0.5], &[1.0]).mean(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(fd(&[0.2, 0.6], &[0.5, 0.5]).mean(), 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(
            arm_mean(&ArmModel::beta(0.9, 0.1).unwrap()),
            0.9,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            arm_mean(&ArmModel::beta(7.0, 3.0).unwrap()),
            0.7,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            arm_mean(&ArmModel::bernoulli(0.01).unwrap()),
            0.01,
            epsilon = 1e-15
        );
    }

    #[test]
    fn distribution_validation() {
        assert!(FiniteDistribution::new(vec![0.0, 0.0], vec![0.5, 0.5]).is_err());
        assert!(FiniteDistribution::new(vec![1.0, 0.0], vec![0.5, 0.5]).is_err());
        assert!(FiniteDistribution::new(vec![0.0, 1.0], vec![0.5, 0.6]).is_err());
        assert!(FiniteDistribution::new(vec![0.0, 1.0], vec![-0.5, 1.5]).is_err());
        assert!(FiniteDistribution::new(vec![], vec![]).is_err());
        assert!(FiniteDistribution::new(vec![0.0], vec![0.5, 0.5]).is_err());
        assert!(ArmModel::bernoulli(1.2).is_err());
        assert!(ArmModel::beta(0.0, 1.0).is_err());
        assert!(ArmModel::discrete(vec![0.0, 1.5], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn shift_examples() {
        assert_eq!(shift_reward(1.0, 0.0, 1.0).unwrap(), 0.0);
        assert!(shift_reward(1.0, 0.0, 1.0).unwrap().is_sign_positive());
        assert_abs_diff_eq!(
            shift_reward(0.55, 0.0, 1.0).unwrap(),
            -0.45,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(shift_reward(0.5, 0.0, 2.0).unwrap(), -0.75, epsilon = 1e-15);
        assert_eq!(shift_reward(0.0, 0.0, 1.0).unwrap(), -1.0);
        assert!(matches!(shift_reward(1.5, 0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(
            shift_reward(-0.1, 0.0, 1.0),
            Err(Error::Domain(_))
        ));
        assert!(shift_reward(0.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn degenerate_samples() {
        let mut s = derive_stream(SeedSpec::new(1, 0, 0));
        let always = ArmModel::bernoulli(1.0).unwrap();
        let point = ArmModel::discrete(vec![0.3], vec![1.0]).unwrap();
        for _ in 0..1000 {
            assert_eq!(always.sample(&mut s), 1.0);
            assert_eq!(point.sample(&mut s), 0.3);
        }
    }

    #[test]
    fn beta_sample_mean_and_variance() {
        let arm = ArmModel::beta(2.0, 2.0).unwrap();
        let mut s = derive_stream(SeedSpec::new(2024, 0, 0));
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| arm.sample(&mut s)).collect();
        assert!(draws.iter().all(|x| (0.0..=1.0).contains(x)));
        let m = draws.iter().sum::<f64>() / n as f64;
        // Var Be(2,2) = 0.05, so the standard error of the mean is sqrt(0.05 / n)
        let exact_sd = (2.0 * 2.0 / (16.0 * 5.0f64)).sqrt();
        assert!((m - 0.5).abs() <= 3.0 * exact_sd / (n as f64).sqrt());
        let v = draws.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n as f64 - 1.0);
        assert!((v - 0.05).abs() < 0.002, "variance {v}");
    }

    #[test]
    fn discrete_frequencies_converge() {
        let points: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let mut probs = vec![0.08; 10];
        probs.push(0.2);
        let arm = ArmModel::discrete(points.clone(), probs.clone()).unwrap();
        let mut s = derive_stream(SeedSpec::new(5, 0, 0));
        let n = 100_000;
        let mut counts = vec![0u64; points.len()];
        for _ in 0..n {
            let x = arm.sample(&mut s);
            counts[points.iter().position(|&p| p == x).unwrap()] += 1;
        }
        for (c, p) in counts.iter().zip(&probs) {
            let freq = *c as f64 / n as f64;
            assert!((freq - p).abs() <= 5.0 * (p * (1.0 - p) / n as f64).sqrt());
        }
    }

    #[test]
    fn record_and_empirical_distribution() {
        let mut s = EmpiricalState::new();
        assert!(matches!(s.to_distribution(), Err(Error::EmptyState)));
        assert_eq!(s.mean(), None);
        s.record(-0.45);
        assert_eq!(s.pulls(), 1);
        assert_eq!(s.mean(), Some(-0.45));

        let mut s = EmpiricalState::new();
        for _ in 0..3 {
            s.record(-1.0);
        }
        s.record(-1.0);
        assert_eq!(s.count_of(-1.0), 4);
        assert_eq!(s.support_size(), 1);

        let mut s = EmpiricalState::new();
        s.record(-1.0);
        s.record(0.0);
        let d = s.to_distribution().unwrap();
        assert_eq!(d.points(), &[-1.0, 0.0]);
        assert_eq!(d.probs(), &[0.5, 0.5]);

        let mut s = EmpiricalState::new();
        s.record(-0.45);
        s.record(-0.45);
        assert_eq!(
            s.to_distribution().unwrap(),
            FiniteDistribution::point_mass(-0.45)
        );

        let mut s = EmpiricalState::new();
        for _ in 0..45 {
            s.record(-1.0);
        }
        for _ in 0..55 {
            s.record(-0.0);
        }
        assert_eq!(s.support_size(), 2);
        let d = s.to_distribution().unwrap();
        assert_abs_diff_eq!(d.probs()[0], 0.45, epsilon = 1e-15);
        assert_abs_diff_eq!(d.probs()[1], 0.55, epsilon = 1e-15);
        assert_abs_diff_eq!(d.mean(), -0.45, epsilon = 1e-15);
    }

    #[test]
    fn continuous_draws_grow_the_support() {
        let arm = ArmModel::beta(0.5, 0.5).unwrap();
        let mut s = derive_stream(SeedSpec::new(9, 0, 0));
        let mut e = EmpiricalState::new();
        for _ in 0..10 {
            e.record(arm.bounds().shift(arm.sample(&mut s)).unwrap());
        }
        assert_eq!(e.support_size(), 10);
    }

    #[test]
    fn beta_discretisation_keeps_the_mean() {
        for (a, b) in [(0.9, 0.1), (7.0, 3.0), (0.5, 0.5), (3.0, 7.0), (0.1, 0.9)] {
            let arm = ArmModel::beta(a, b).unwrap();
            let d = arm.finite_approximation(10_000).unwrap();
            assert!(d.is_within(0.0, 1.0));
            assert!(
                (d.mean() - arm.mean()).abs() < 2e-3,
                "Be({a},{b}) mean {}",
                d.mean()
            );
        }
    }

    proptest! {
        #[test]
        fn empirical_distribution_is_valid(values in prop::collection::vec(0usize..20, 1..200)) {
            let mut s = EmpiricalState::new();
            for v in &values {
                s.record(-(*v as f64) / 19.0);
            }
            let d = s.to_distribution().unwrap();
            prop_assert!(d.points().windows(2).all(|w| w[0] < w[1]));
            prop_assert!((d.probs().iter().sum::<f64>() - 1.0).abs() <= MASS_TOLERANCE);
            prop_assert!(d.is_within(-1.0, 0.0));
            prop_assert!((d.mean() - s.sum() / s.pulls() as f64).abs() <= 1e-12);
        }

        #[test]
        fn shift_is_increasing_onto_unit_interval(
            a in -10.0f64..10.0, w in 0.01f64..10.0, t1 in 0.0f64..=1.0, t2 in 0.0f64..=1.0
        ) {
            let b = a + w;
            let (x1, x2) = (a + t1 * w, a + t2 * w);
            let (x1, x2) = (x1.min(b), x2.min(b));
            let (y1, y2) = (shift_reward(x1, a, b).unwrap(), shift_reward(x2, a, b).unwrap());
            prop_assert!((-1.0..=0.0).contains(&y1));
            if x1 < x2 { prop_assert!(y1 <= y2); }
            prop_assert_eq!(shift_reward(b, a, b).unwrap(), 0.0);
            prop_assert_eq!(shift_reward(a, a, b).unwrap(), -1.0);
        }
    }
}
