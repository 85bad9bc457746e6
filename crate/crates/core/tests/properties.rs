//! Randomized invariants of the closed-form solution.

use benchtrack::model::kappa_roots;
use benchtrack::primal::{Primal, WarmStart};
use benchtrack::{BenchmarkParams, MarketParams, Model, ModelParams, Preferences};
use proptest::prelude::*;

fn scalar_model() -> impl Strategy<Value = Model> {
    (0.2..2.0f64, 0.5..2.0f64, 0.0..3.0f64, 0.0..1.5f64, 1.0..8.0f64, -3.0..0.9f64, 0.5..5.0f64).prop_filter_map(
        "model must be admissible",
        |(mu, sigma, mu_z, sigma_z, gap, p, beta)| {
            Model::new(ModelParams {
                market: MarketParams::scalar(mu, sigma),
                benchmark: BenchmarkParams::scalar(mu_z, sigma_z),
                preferences: Preferences { rho: mu_z + gap, p, beta, v0: 2.0, z0: 1.0 },
            })
            .ok()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn kappa_solves_its_quadratic(alpha in 0.01..3.0f64, eta in -2.0..2.0f64, rho in 0.5..10.0f64, mu_z in -1.0..3.0f64) {
        prop_assume!(mu_z < rho);
        let (k, kh) = kappa_roots(alpha, eta, rho, mu_z).unwrap();
        let q = |k: f64| alpha * k * k + (rho - eta - alpha) * k + (mu_z - rho);
        let scale = alpha + (rho - eta - alpha).abs() + (mu_z - rho).abs();
        prop_assert!(q(k).abs() < 1e-12 * scale * (1.0 + k * k));
        prop_assert!(k >= kh);
        prop_assert!(k > 0.0);
    }

    #[test]
    fn marginal_value_is_decreasing_and_capped(m in scalar_model(), x in 0.0..30.0f64, dx in 0.01..5.0f64, z in 0.0..10.0f64) {
        let pr = Primal::new(&m);
        let f1 = pr.solve_f(x, z).unwrap();
        let f2 = pr.solve_f(x + dx, z).unwrap();
        prop_assert!(f1 <= m.beta() * (1.0 + 1e-12));
        prop_assert!(f2 < f1);
        prop_assert!(pr.value(x + dx, z).unwrap() > pr.value(x, z).unwrap());
    }

    #[test]
    fn value_is_dual_plus_linear_term(m in scalar_model(), x in 0.0..30.0f64, z in 0.0..10.0f64) {
        let pr = Primal::new(&m);
        let f = pr.solve_f(x, z).unwrap();
        let v = pr.value(x, z).unwrap();
        let direct = pr.dual.v_hat(f, z).unwrap() + x * f;
        prop_assert!((v - direct).abs() <= 1e-12 * (1.0 + v.abs()));
    }

    #[test]
    fn tracked_controls_match_direct_solve(m in scalar_model(), x in 0.0..20.0f64, z in 0.0..5.0f64, dx in -0.05..0.05f64) {
        let pr = Primal::new(&m);
        let mut warm = WarmStart::default();
        pr.controls_tracked(x, z, &mut warm).unwrap();
        let x2 = (x + dx).max(0.0);
        let (theta, c) = pr.controls_tracked(x2, z, &mut warm).unwrap();
        let pt = pr.policy(x2, z).unwrap();
        prop_assert!((theta - pt.theta[0]).abs() <= 1e-9 * (1.0 + pt.theta[0].abs()));
        prop_assert!((c - pt.c).abs() <= 1e-9 * (1.0 + pt.c));
        prop_assert!(pt.c > 0.0);
    }

    #[test]
    fn shortfall_is_bought_at_beta(m in scalar_model(), z in 0.1..5.0f64, frac in 0.0..1.0f64) {
        let pr = Primal::new(&m);
        let v0 = frac * z;
        let w = pr.w_value(v0, z).unwrap();
        let expected = pr.value(0.0, z).unwrap() - m.beta() * (z - v0);
        prop_assert!((w - expected).abs() <= 1e-12 * (1.0 + w.abs()));
    }
}
