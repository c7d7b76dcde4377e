//! Minimum empirical divergence `D_min(F, mu)`.
//!
//! For a distribution `F` supported in `[-1, 0]` and a target mean `mu`,
//! `D_min(F, mu)` is the smallest KL divergence `D(F || G)` over distributions
//! `G` on the interval with `E(G) >= mu`. It is computed through the concave
//! dual
//!
//! ```text
//! h(nu) = sum_i f_i * ln(1 - (x_i - mu) * nu),      0 <= nu <= -1/mu
//! ```
//!
//! whose maximum equals `D_min` and whose maximiser `nu*` is the slope of
//! `D_min` in `mu`. The maximisation uses a Newton iteration safeguarded by a
//! bracket `[nu_lo, nu_hi]` that is bisected whenever a Newton step leaves it.

use crate::dist::FiniteDistribution;
use crate::error::{Error, Result};

pub mod oracle;

pub use oracle::{dmin_oracle, dmin_oracle_exhaustive};

/// Iteration budget used where accuracy matters more than speed.
pub const EXACT_BUDGET: u32 = 50;

/// Divergence value with its dual optimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DminResult {
    /// `D_min` in nats, possibly `+inf`.
    pub value: f64,
    /// Maximiser of `h`; `+inf` when `value` is.
    pub nu_star: f64,
}

impl DminResult {
    pub const ZERO: DminResult = DminResult {
        value: 0.0,
        nu_star: 0.0,
    };

    pub const INFINITE: DminResult = DminResult {
        value: f64::INFINITY,
        nu_star: f64::INFINITY,
    };

    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }
}

/// Iteration budget `r` and warm start `nu0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    pub r: u32,
    pub nu0: f64,
}

impl SolverParams {
    pub fn new(r: u32, nu0: f64) -> Result<Self> {
        if r == 0 {
            return Err(Error::Domain(
                "iteration budget r must be at least 1".into(),
            ));
        }
        if !(nu0 >= 0.0) {
            return Err(Error::Domain(format!(
                "warm start nu0 = {nu0} must be >= 0"
            )));
        }
        Ok(Self { r, nu0 })
    }

    pub fn with_budget(r: u32) -> Self {
        Self {
            r: r.max(1),
            nu0: 0.0,
        }
    }

    pub fn warm(self, nu0: f64) -> Self {
        Self {
            nu0: if nu0 >= 0.0 { nu0 } else { 0.0 },
            ..self
        }
    }
}

impl Default for SolverParams {
    fn default() -> Self {
        Self::with_budget(EXACT_BUDGET)
    }
}

fn check_support(f: &FiniteDistribution) -> Result<()> {
    if f.is_within(-1.0, 0.0) {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "support [{}, {}] is not inside [-1, 0]; shift rewards first",
            f.points()[0],
            f.points()[f.len() - 1]
        )))
    }
}

fn check_arguments(f: &FiniteDistribution, mu: f64, nu: f64) -> Result<()> {
    check_support(f)?;
    if !mu.is_finite() || !nu.is_finite() {
        return Err(Error::Domain(format!(
            "non-finite argument mu = {mu}, nu = {nu}"
        )));
    }
    for (x, p) in f.iter() {
        if p > 0.0 && 1.0 - (x - mu) * nu <= 0.0 {
            return Err(Error::Domain(format!(
                "1 - (x - mu) * nu <= 0 at x = {x} (mu = {mu}, nu = {nu})"
            )));
        }
    }
    Ok(())
}

/// `h(nu)`, or `-inf` where a positive-mass term leaves the log's domain.
pub(crate) fn h_extended(f: &FiniteDistribution, mu: f64, nu: f64) -> f64 {
    let mut acc = 0.0;
    for (x, p) in f.iter() {
        if p == 0.0 {
            continue;
        }
        let arg = 1.0 - (x - mu) * nu;
        if arg <= 0.0 {
            return f64::NEG_INFINITY;
        }
        acc += p * arg.ln();
    }
    acc
}

/// `(h'(nu), h''(nu))` in one pass. Caller guarantees every argument is positive.
fn derivatives(f: &FiniteDistribution, mu: f64, nu: f64) -> (f64, f64) {
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    for (x, p) in f.iter() {
        if p == 0.0 {
            continue;
        }
        let c = x - mu;
        let q = c / (1.0 - c * nu);
        d1 -= p * q;
        d2 -= p * q * q;
    }
    (d1, d2)
}

/// `h(nu) = E_F[ln(1 - (X - mu) nu)]`.
pub fn h(f: &FiniteDistribution, mu: f64, nu: f64) -> Result<f64> {
    check_arguments(f, mu, nu)?;
    Ok(h_extended(f, mu, nu))
}

/// `h'(nu) = -sum f_i (x_i - mu) / (1 - (x_i - mu) nu)`.
pub fn h_prime(f: &FiniteDistribution, mu: f64, nu: f64) -> Result<f64> {
    check_arguments(f, mu, nu)?;
    Ok(derivatives(f, mu, nu).0)
}

/// `h''(nu) = -sum f_i (x_i - mu)^2 / (1 - (x_i - mu) nu)^2`.
pub fn h_double_prime(f: &FiniteDistribution, mu: f64, nu: f64) -> Result<f64> {
    check_arguments(f, mu, nu)?;
    Ok(derivatives(f, mu, nu).1)
}

/// `E_F[mu / X]`, defined as `+inf` when `F` puts mass on 0.
pub fn expected_mu_over_x(f: &FiniteDistribution, mu: f64) -> f64 {
    let mut acc = 0.0;
    for (x, p) in f.iter() {
        if p == 0.0 {
            continue;
        }
        if x == 0.0 {
            return f64::INFINITY;
        }
        acc += p * mu / x;
    }
    acc
}

/// Lower end of the bracket that always contains `nu*`: `(mu - E(F)) / (-mu (1 + mu))`.
pub fn nu_lower_bound(mean: f64, mu: f64) -> f64 {
    (mu - mean) / (-mu * (1.0 + mu))
}

/// Solves `D_min(F, mu)` with iteration budget `params.r` and warm start `params.nu0`.
///
/// `F` must be supported in `[-1, 0]`. Targets above the mean of `F` give zero,
/// `mu = 0` gives `+inf` unless `F` is the point mass at 0, and `mu > 0` is
/// infeasible (`+inf`).
pub fn dmin(f: &FiniteDistribution, mu: f64, params: SolverParams) -> Result<DminResult> {
    check_support(f)?;
    if mu.is_nan() {
        return Err(Error::Domain("mu is NaN".into()));
    }
    let mean = f.mean();
    if mu <= mean {
        return Ok(DminResult::ZERO);
    }
    if mu >= 0.0 {
        // every G with E(G) >= 0 is the point mass at 0 and F is not
        return Ok(DminResult::INFINITE);
    }

    let nu_max = -1.0 / mu;
    if expected_mu_over_x(f, mu) <= 1.0 {
        return Ok(DminResult {
            value: h_extended(f, mu, nu_max),
            nu_star: nu_max,
        });
    }

    let mut lo = nu_lower_bound(mean, mu);
    let mut hi = nu_max;
    let mut nu = lo;
    if params.nu0 > lo && params.nu0 < hi {
        nu = params.nu0;
    }
    for _ in 0..params.r.max(1) {
        let (d1, d2) = derivatives(f, mu, nu);
        if d1 > 0.0 {
            lo = nu;
        } else {
            hi = nu;
        }
        let newton = nu - d1 / d2;
        // a flat or non-finite curvature falls back to bisection
        nu = if d2 < 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }

    let mut best = DminResult {
        value: h_extended(f, mu, lo),
        nu_star: lo,
    };
    for cand in [hi, nu] {
        let v = h_extended(f, mu, cand);
        if v > best.value {
            best = DminResult {
                value: v,
                nu_star: cand,
            };
        }
    }
    Ok(best)
}
