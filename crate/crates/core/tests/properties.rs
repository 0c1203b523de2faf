//! Property tests for the invariants of each module.

use proptest::prelude::*;
use pucci_profile::nonlinearity::GateVerdict;
use pucci_profile::profile::{flux_to_slope, heteroclinic_profile, slope_to_flux, ProfileGrid};
use pucci_profile::pucci::{mminus, mplus, OperatorSpec, SymMatrix};
use pucci_profile::shooting::{classify, ClassifyOptions, Regime};
use pucci_profile::strip::{build_grid, counterexample_residual, hessian_eigs_2d, BoundaryKind, Field2D};
use pucci_profile::{NonlinearitySpec, PucciParams, ReducedNonlinearity};

fn cubic(a: f64, big_a: f64, alpha: f64) -> ReducedNonlinearity {
    ReducedNonlinearity::new(&NonlinearitySpec::cubic(), PucciParams::new(a, big_a, alpha).unwrap()).unwrap()
}

fn params() -> impl Strategy<Value = (f64, f64)> {
    (0.2..5.0f64, 1.0..3.0f64).prop_map(|(a, ratio)| (a, a * ratio))
}

fn sym(n: usize) -> impl Strategy<Value = SymMatrix> {
    prop::collection::vec(-5.0..5.0f64, n * n).prop_map(move |v| {
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, v[i * n + j]);
            }
        }
        m
    })
}

/// `G Gᵀ`, positive semidefinite by construction.
fn psd(n: usize) -> impl Strategy<Value = SymMatrix> {
    prop::collection::vec(-2.0..2.0f64, n * n).prop_map(move |g| {
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, (0..n).map(|k| g[i * n + k] * g[j * n + k]).sum());
            }
        }
        m
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn reduced_keeps_the_sign_of_f((a, big_a) in params(), t in -2.0..2.0f64) {
        let r = cubic(a, big_a, 0.0);
        prop_assert_eq!(r.value(t).signum(), r.f(t).signum());
    }

    #[test]
    fn equal_constants_divide_by_a(a in 0.2..5.0f64, t in -1.5..1.5f64) {
        let r = cubic(a, a, 0.5);
        prop_assert_eq!(r.value(t), r.f(t) / a);
    }

    #[test]
    fn delta1_decreases_in_a(a in 0.2..4.0f64, step in 0.01..1.0f64, alpha in -0.5..3.0f64) {
        let lo = cubic(a, 5.0, alpha).delta1().unwrap();
        let hi = cubic(a + step, 5.0, alpha).delta1().unwrap();
        prop_assert!(hi < lo);
    }

    #[test]
    fn theta_plus_increases_in_delta(s in 0.01..0.98f64, gap in 0.001..0.01f64, alpha in -0.5..2.0f64) {
        let r = cubic(1.0, 1.3, alpha);
        let d1 = r.delta1().unwrap();
        let (x, y) = (s * d1, (s + gap) * d1);
        prop_assert!(r.theta_plus(x).unwrap() < r.theta_plus(y).unwrap());
    }

    /// The five-point central difference is exact on quartics, and `F` is a
    /// quartic on each side of 0 for the cubic.
    #[test]
    fn antiderivative_differentiates_to_reduced((a, big_a) in params(), t in prop_oneof![-0.95..-0.05f64, 0.05..0.95f64]) {
        let r = cubic(a, big_a, 0.0);
        let h = 0.01;
        let f = |x: f64| r.antiderivative(x).unwrap();
        let d = (f(t - 2.0 * h) - 8.0 * f(t - h) + 8.0 * f(t + h) - f(t + 2.0 * h)) / (12.0 * h);
        prop_assert!((d - r.value(t)).abs() <= 10.0 * pucci_profile::tol::QUAD, "{} vs {}", d, r.value(t));
    }

    #[test]
    fn unequal_constants_break_balance(a in 0.2..5.0f64, ratio in 1.01..4.0f64, alpha in -0.5..2.0f64) {
        let report = cubic(a, a * ratio, alpha).existence_gate().unwrap();
        prop_assert_eq!(report.verdict, GateVerdict::BalanceViolated);
    }

    #[test]
    fn pucci_duality_and_sandwich((a, big_a) in params(), m in sym(3), n in psd(3), t in prop::sample::select(vec![0.5, 2.0, 10.0])) {
        let p = PucciParams::new(a, big_a, 0.0).unwrap();
        let tol = pucci_profile::tol::ELLIPTICITY;
        let scale = |x: f64| tol * (x.abs() + 1.0);
        let plus = mplus(&p, &m).unwrap();
        prop_assert!((mminus(&p, &m).unwrap() + mplus(&p, &m.scale(-1.0)).unwrap()).abs() <= scale(plus));
        let diff = mplus(&p, &m.add(&n).unwrap()).unwrap() - plus;
        let tr = n.trace();
        prop_assert!(diff >= a * tr - scale(tr) && diff <= big_a * tr + scale(tr));
        for op in [OperatorSpec::pucci_plus(p), OperatorSpec::pucci_minus(p)] {
            let v = op.apply(&m).unwrap();
            prop_assert!((op.apply(&m.scale(t)).unwrap() - t * v).abs() <= scale(t * v));
        }
        let eq = PucciParams::new(a, a, 0.0).unwrap();
        prop_assert!((mplus(&eq, &m).unwrap() - a * m.trace()).abs() <= 1e-12 * (m.trace().abs() + 10.0));
    }

    #[test]
    fn phase_recovery_round_trip(s in -10.0..10.0f64, alpha in -0.9..4.0f64) {
        let back = flux_to_slope(slope_to_flux(s, alpha), alpha);
        prop_assert!((back - s).abs() <= 1e-12 * (s.abs() + 1.0));
    }

    #[test]
    fn counterexample_middle_branch_vanishes(m in 0u32..4, x in 0.0..1.0f64) {
        let (lo, hi) = (std::f64::consts::PI, (2 * m + 2) as f64 * std::f64::consts::PI);
        let point = lo + 1e-5 + x * (hi - lo - 2e-5);
        prop_assert!(counterexample_residual(0, m, &[point]).unwrap() <= 1e-12);
    }

    #[test]
    fn hessian_exact_on_quadratics(p in -3.0..3.0f64, q in -3.0..3.0f64, r in -3.0..3.0f64, i in 2usize..18, j in 2usize..14) {
        let grid = build_grid(1.0, 1.6, 21, 16, BoundaryKind::Dirichlet).unwrap();
        let field = Field2D::from_fn(grid, |x1, x2| p * x1 * x1 + 2.0 * q * x1 * x2 + r * x2 * x2);
        let (l1, l2) = hessian_eigs_2d(&field, i, j).unwrap();
        let mean = p + r;
        let radius = (p - r).hypot(2.0 * q);
        prop_assert!((l1 - (mean - radius)).abs() < 1e-10 && (l2 - (mean + radius)).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn profiles_are_strictly_monotone(a in 0.5..3.0f64, alpha in -0.5..2.0f64) {
        let r = cubic(a, a, alpha);
        let profile = heteroclinic_profile(&r, &ProfileGrid { points: 401, ..ProfileGrid::default() }).unwrap();
        prop_assert!(profile.u.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(profile.x.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(profile.du.iter().all(|&d| d > 0.0));
    }

    #[test]
    fn oscillating_envelopes_stay_inside((a, big_a) in params(), s in 0.05..0.95f64, alpha in -0.5..1.0f64) {
        let r = cubic(a, big_a, alpha);
        let delta = s * r.delta1().unwrap().min(r.delta1_minus().unwrap());
        let out = classify(&r, delta, &ClassifyOptions { x_span: (-15.0, 15.0), ..ClassifyOptions::default() }).unwrap();
        prop_assert_eq!(out.regime, Regime::Oscillating);
        let env = out.evidence.envelope.unwrap();
        prop_assert!(env.theta_minus > -1.0 && env.theta_plus < 1.0);
    }

    #[test]
    fn flux_bound_in_unbounded_regimes(s in 1.05..2.0f64, sign in prop::sample::select(vec![-1.0, 1.0]), alpha in -0.5..1.0f64) {
        let r = cubic(1.0, 1.0, alpha);
        let out = classify(&r, sign * s * r.delta1().unwrap(), &ClassifyOptions::default()).unwrap();
        let expected = if sign > 0.0 { Regime::UnboundedIncreasing } else { Regime::UnboundedDecreasing };
        prop_assert_eq!(out.regime, expected);
        prop_assert!(out.evidence.growth.unwrap().holds());
    }
}
