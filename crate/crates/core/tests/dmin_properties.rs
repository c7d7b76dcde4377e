use proptest::prelude::*;

use med_bandit::dist::FiniteDistribution;
use med_bandit::dmin::{dmin, dmin_oracle, h, h_double_prime, h_prime, SolverParams};

/// Distribution on [-1, 0] with 2 to `max_atoms` atoms, optionally with an atom at 0.
fn dist(max_atoms: usize) -> impl Strategy<Value = FiniteDistribution> {
    (
        prop::collection::btree_set(1u32..1000, 2..=max_atoms),
        any::<bool>(),
        prop::collection::vec(0.05f64..1.0, max_atoms),
    )
        .prop_map(|(grid, zero, weights)| {
            let mut points: Vec<f64> = grid.iter().map(|&k| -(k as f64) / 1000.0).collect();
            if zero {
                points.push(0.0);
            }
            points.sort_by(f64::total_cmp);
            let w = weights.iter().cycle().take(points.len()).copied().collect();
            FiniteDistribution::from_weights(points, w).unwrap()
        })
}

/// `(F, mu)` with `E(F) < mu < 0`, `t` picking the position in that interval.
fn instance() -> impl Strategy<Value = (FiniteDistribution, f64)> {
    (dist(8), 0.001f64..0.999).prop_map(|(f, t)| {
        let mu = f.mean() * (1.0 - t);
        (f, mu)
    })
}

fn kl(f: &FiniteDistribution, g: &[(f64, f64)]) -> f64 {
    f.iter()
        .map(|(x, p)| {
            let q: f64 = g.iter().filter(|(y, _)| *y == x).map(|(_, q)| q).sum();
            if q == 0.0 {
                f64::INFINITY
            } else {
                p * (p / q).ln()
            }
        })
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn h_is_strictly_concave((f, mu) in instance(), t in 0.0f64..0.999) {
        let nu = t * (-1.0 / mu);
        prop_assert!(h_double_prime(&f, mu, nu).unwrap() < 0.0);
    }

    #[test]
    fn h_prime_matches_finite_difference((f, mu) in instance(), t in 0.0f64..0.95) {
        let eps = 1e-6;
        let nu = eps + t * (-1.0 / mu - 2.0 * eps);
        let fd = (h(&f, mu, nu + eps).unwrap() - h(&f, mu, nu - eps).unwrap()) / (2.0 * eps);
        let d = h_prime(&f, mu, nu).unwrap();
        prop_assert!((fd - d).abs() <= 1e-4 * d.abs(), "fd {fd} vs h' {d}");
    }

    #[test]
    fn solution_lies_in_the_dual_bracket((f, mu) in instance()) {
        let res = dmin(&f, mu, SolverParams::default()).unwrap();
        let lo = (mu - f.mean()) / (-mu * (1.0 + mu));
        prop_assert!(lo <= res.nu_star && res.nu_star <= -1.0 / mu);
    }

    #[test]
    fn dmin_is_increasing_with_the_gap_bound((f, mu) in instance(), s in 0.001f64..0.999) {
        let mu_hi = mu * (1.0 - s);
        let lo = dmin(&f, mu, SolverParams::default()).unwrap().value;
        let hi = dmin(&f, mu_hi, SolverParams::default()).unwrap().value;
        let c = (mu_hi - mu).powi(2) / (-2.0 * mu * (1.0 + mu_hi));
        prop_assert!(hi >= lo);
        prop_assert!(hi - lo >= c - 1e-9, "gain {} below bound {c}", hi - lo);
    }

    #[test]
    fn solver_never_exceeds_the_oracle((f, mu) in instance()) {
        let res = dmin(&f, mu, SolverParams::default()).unwrap();
        let oracle = dmin_oracle(&f, mu, 1e-6);
        // any feasible nu gives a lower bound, so the solver cannot beat the sup
        prop_assert!(res.value <= oracle + 1e-9);
        prop_assert!(res.value >= oracle - 1e-9);
        prop_assert_eq!(res.value, h(&f, mu, res.nu_star).unwrap());
    }

    #[test]
    fn two_point_distribution_is_binary_kl(q in 0.01f64..0.99, t in 0.001f64..0.999) {
        let f = FiniteDistribution::new(vec![-1.0, 0.0], vec![q, 1.0 - q]).unwrap();
        let mu = -q * (1.0 - t);
        let expected = q * (q / -mu).ln() + (1.0 - q) * ((1.0 - q) / (1.0 + mu)).ln();
        let got = dmin(&f, mu, SolverParams::default()).unwrap().value;
        prop_assert!((got - expected).abs() <= 1e-10 * expected.max(1.0), "{got} vs {expected}");
    }
}

/// Minimum of `KL(F || G)` over a grid of `G` on `supp(F) ∪ {0, extra}` with `E(G) >= mu`.
///
/// Any mass outside `supp(F)` costs nothing in the divergence, so for a fixed
/// total `s` of it the constraint is easiest to meet with all of `s` at the
/// largest outside point, 0. The grid covers `s` and the split of `1 - s`
/// between the two atoms of `F`; `extra` also receives mass to show it never helps.
fn primal_grid(f: &FiniteDistribution, mu: f64, extra: f64, steps: usize) -> f64 {
    let (x, p) = (f.points(), f.probs());
    assert_eq!(x.len(), 2);
    let mut best = f64::INFINITY;
    for i in 0..steps {
        let s = i as f64 / steps as f64;
        for j in 1..steps {
            let u = j as f64 / steps as f64;
            for share in [1.0, 0.5] {
                let g = [
                    (x[0], (1.0 - s) * u),
                    (x[1], (1.0 - s) * (1.0 - u)),
                    (0.0, s * share),
                    (extra, s * (1.0 - share)),
                ];
                let mean: f64 = g.iter().map(|(y, q)| y * q).sum();
                if mean >= mu {
                    best = best.min(kl(f, &g));
                }
            }
        }
    }
    assert!(p.iter().all(|&q| q > 0.0));
    best
}

#[test]
fn support_beyond_supp_f_and_zero_does_not_help() {
    let cases = [
        (vec![-0.9, -0.3], vec![0.5, 0.5], -0.4, -0.2),
        (vec![-1.0, -0.5], vec![0.3, 0.7], -0.5, -0.05),
        (vec![-0.7, -0.6], vec![0.8, 0.2], -0.3, -0.4),
        (vec![-1.0, -0.2], vec![0.5, 0.5], -0.4, -0.1),
    ];
    for (points, probs, mu, extra) in cases {
        let f = FiniteDistribution::new(points, probs).unwrap();
        let d = dmin_oracle(&f, mu, 1e-6);
        let primal = primal_grid(&f, mu, extra, 400);
        // weak duality: no feasible G does better than the dual optimum
        assert!(primal >= d - 1e-9, "primal {primal} below dual {d}");
        // and the grid gets close, so the dual value is attained on supp(F) ∪ {0}
        assert!(primal - d < 5e-3, "primal {primal} vs dual {d}");
    }
}

#[test]
fn frozen_interior_instance() {
    // F = {-1: 0.5, -0.2: 0.5}, mu = -0.4; optimum at nu = 5/3 where h = ln(4/3) / 2
    let f = FiniteDistribution::new(vec![-1.0, -0.2], vec![0.5, 0.5]).unwrap();
    let res = dmin(&f, -0.4, SolverParams::default()).unwrap();
    assert!((res.value - 1.438_410_362_258_903_7e-1).abs() < 1e-12);
    assert!((res.nu_star - 5.0 / 3.0).abs() < 1e-9);
}
