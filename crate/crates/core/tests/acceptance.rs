//! End-to-end acceptance checks. Each test prints one PASS/FAIL line, written
//! straight to stdout so it shows without `--nocapture`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;

use benchtrack::dual::DualSurface;
use benchtrack::primal::{Convexity, Primal, Regime};
use benchtrack::sim::{self, skorokhod, PolicySource, Reflection, SimConfig};
use benchtrack::{presets, BenchmarkParams, MarketParams, Model, ModelParams, Preferences};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PRESETS: [&str; 13] = [
    "fig1", "fig2a", "fig2b", "fig3a", "fig3b", "fig4", "fig5", "fig6", "fig7a", "fig7b", "fig8", "fig9", "fig10",
];

fn model(id: &str) -> Model {
    Model::new(presets::preset(id).unwrap()).unwrap()
}

fn verdict(n: u32, pass: bool, detail: String) {
    let line = format!("criterion {n:2}: {} {detail}\n", if pass { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    assert!(pass, "criterion {n} failed: {detail}");
}

fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

#[test]
fn c01_dual_pde_exact() {
    let mut worst = 0.0f64;
    for id in PRESETS {
        let m = model(id);
        let d = DualSurface::new(&m);
        let beta = m.beta();
        for y in grid(0.01 * beta, beta, 50) {
            for z in grid(0.0, 5.0, 50) {
                let r = d.dual_pde_residual(y, z).unwrap();
                let scale = 1.0 + (m.rho() * d.v_hat(y, z).unwrap()).abs();
                worst = worst.max(r.abs() / scale);
            }
        }
    }
    verdict(1, worst < 1e-9, format!("worst scaled residual {worst:.3e} over {} presets", PRESETS.len()));
}

#[test]
fn c02_neumann_boundary() {
    let mut worst_vy = 0.0f64;
    let mut worst_fd = 0.0f64;
    for id in ["fig1", "fig4", "fig7b"] {
        let m = model(id);
        let pr = Primal::new(&m);
        let beta = m.beta();
        for z in [0.0, 0.8, 1.0, 5.0] {
            let vy = pr.dual.v_hat_derivs(beta, z).unwrap().vy;
            worst_vy = worst_vy.max(vy.abs());
            // second-order one-sided difference
            let h = 1e-6;
            let v = |x: f64| pr.value(x, z).unwrap();
            let fd = (4.0 * v(h) - 3.0 * v(0.0) - v(2.0 * h)) / (2.0 * h);
            worst_fd = worst_fd.max(rel(fd, beta));
        }
    }
    let pass = worst_vy < 1e-6 && worst_fd < 1e-6;
    verdict(2, pass, format!("max |v_y(beta,z)| {worst_vy:.3e}, max rel |v_x(0+) - beta| {worst_fd:.3e}"));
}

#[test]
fn c03_fig1_critical_exponent() {
    let p1 = model("fig1").derived.p1;
    let err = (p1 + 2.6357).abs();
    verdict(3, err <= 5e-4, format!("p1 = {p1:.6}, |p1 + 2.6357| = {err:.2e}"));
}

#[test]
fn c04_critical_policy_matches_generic() {
    let pr = Primal::new(&model("fig1"));
    let mut worst = 0.0f64;
    for z in [0.8, 1.0] {
        for x in grid(0.0, 20.0, 200) {
            let (theta, c) = pr.critical_policy(x, z).unwrap();
            let pt = pr.policy(x, z).unwrap();
            worst = worst.max(rel(pt.theta[0], theta[0])).max(rel(pt.c, c));
        }
    }
    verdict(4, worst < 1e-9, format!("max relative gap {worst:.3e}"));
}

fn no_benchmark(p: f64, beta: f64) -> Model {
    Model::new(ModelParams {
        market: MarketParams::scalar(0.5, 1.0),
        benchmark: BenchmarkParams::scalar(0.0, 0.0),
        preferences: Preferences { rho: 1.0, p, beta, v0: 2.0, z0: 1.0 },
    })
    .unwrap()
}

#[test]
fn c05_merton_degeneration() {
    let (mu, s2, z) = (0.5, 1.0, 1.0);
    let xs = [0.1, 1.0, 10.0];
    let mut worst_inf = 0.0f64;
    let mut worst_const = 0.0f64;
    let mut worst_formula = 0.0f64;
    for p in [-2.0, 0.0, 0.5] {
        let m = no_benchmark(p, f64::INFINITY);
        let pr = Primal::new(&m);
        for x in xs {
            let pt = pr.policy(x, z).unwrap();
            let theta = mu * x / (s2 * (1.0 - p));
            worst_inf = worst_inf.max(rel(pt.theta[0], theta)).max(rel(pt.c, m.derived.c_star * x));
        }

        let beta = 2.0;
        let m = no_benchmark(p, beta);
        let pr = Primal::new(&m);
        let k = m.k();
        let shift = beta.powf(-1.0 / (1.0 - p));
        let expected = (mu / s2 * (1.0 - p) / k * shift, shift);
        let adj: Vec<(f64, f64)> = xs
            .iter()
            .map(|&x| {
                let pt = pr.policy(x, z).unwrap();
                (pt.theta[0] - mu * x / (s2 * (1.0 - p)), pt.c - m.derived.c_star * x)
            })
            .collect();
        for (i, a) in adj.iter().enumerate() {
            let pt = pr.policy(xs[i], z).unwrap();
            let scale_t = 1.0 + pt.theta[0].abs();
            let scale_c = 1.0 + pt.c.abs();
            worst_const = worst_const.max((a.0 - adj[0].0).abs() / scale_t).max((a.1 - adj[0].1).abs() / scale_c);
            worst_formula = worst_formula.max((a.0 - expected.0).abs() / scale_t).max((a.1 - expected.1).abs() / scale_c);
        }
    }
    let pass = worst_inf < 1e-12 && worst_const < 1e-12 && worst_formula < 1e-12;
    verdict(
        5,
        pass,
        format!("beta=inf rel gap {worst_inf:.2e}; finite beta shift spread {worst_const:.2e}, vs formula {worst_formula:.2e}"),
    );
}

fn second_differences(mut g: impl FnMut(f64) -> f64) -> Vec<f64> {
    let h: f64 = 1e-3;
    let n = ((20.0 - 0.1) / h).round() as usize;
    let vals: Vec<f64> = (0..=n + 2).map(|i| g(0.1 - h + i as f64 * h)).collect();
    vals.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2]).collect()
}

fn count_violations(d2: &[f64], want: Convexity) -> usize {
    d2.iter()
        .filter(|&&v| match want {
            Convexity::StrictlyConvex => !(v > 0.0),
            Convexity::StrictlyConcave => !(v < 0.0),
            Convexity::Linear => false,
        })
        .count()
}

#[test]
fn c06_regime_signs() {
    // (preset, control, expected sign): fig3a sits below p1, fig2a between the
    // critical exponents, fig4 above p2
    let cases = [
        ("fig3a", "theta", Convexity::StrictlyConvex),
        ("fig2a", "theta", Convexity::StrictlyConcave),
        ("fig4", "theta", Convexity::StrictlyConvex),
        ("fig4", "c", Convexity::StrictlyConvex),
        ("fig3a", "c", Convexity::StrictlyConcave),
    ];
    let mut total = 0;
    let mut notes = Vec::new();
    for (id, which, want) in cases {
        let m = model(id);
        let pr = Primal::new(&m);
        let z = m.params.preferences.z0;
        let diag = pr.regime_diagnostics(z).unwrap();
        let predicted = if which == "c" { diag.c_convexity } else { diag.theta_convexity };
        assert_eq!(predicted, want, "{id} {which}");
        let mut hint = None;
        let d2 = second_differences(|x| {
            let pt = pr.policy_hint(x, z, hint).unwrap();
            hint = Some(pt.f);
            if which == "c" { pt.c } else { pt.theta[0] }
        });
        let bad = count_violations(&d2, want);
        total += bad;
        notes.push(format!("{id}/{which} {bad}"));
    }
    verdict(6, total == 0, format!("sign violations: {}", notes.join(", ")));
}

#[test]
fn c07_asymptotic_ratios() {
    let x = 1e6;
    let mut worst = 0.0f64;
    let mut seen = Vec::new();
    for id in ["fig4", "fig1", "fig3a"] {
        let m = model(id);
        let pr = Primal::new(&m);
        let z = m.params.preferences.z0;
        let lim = pr.asymptotic_ratios(z).unwrap();
        let pt = pr.policy(x, z).unwrap();
        worst = worst.max((pt.theta[0] / x - lim.theta_ratio).abs()).max((pt.c / x - lim.c_ratio).abs());
        seen.push(lim.regime);
    }
    assert_eq!(seen, vec![Regime::AboveP1, Regime::AtP1, Regime::BelowP1]);
    verdict(7, worst < 1e-3, format!("max |ratio - limit| at x = 1e6: {worst:.3e}"));
}

#[test]
fn c08_growth_and_lipschitz_envelopes() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut violations = 0usize;
    let mut checked = 0usize;
    for id in PRESETS {
        let m = model(id);
        let pr = Primal::new(&m);
        let beta = m.beta();
        for _ in 0..10_000 {
            let x = 50.0 * rng.random::<f64>();
            let z = 50.0 * rng.random::<f64>();
            let x2 = 50.0 * rng.random::<f64>();
            let pt = pr.policy(x, z).unwrap();
            let env = pr.growth_envelopes(x, z);
            let lip = (pt.value - pr.value(x2, z).unwrap()).abs();
            let slack = 1e-12 * (1.0 + pt.value.abs());
            if pt.theta[0].abs() > env.theta_bound || pt.c > env.c_bound || lip > beta * (x - x2).abs() + slack {
                violations += 1;
            }
            checked += 1;
        }
    }
    verdict(8, violations == 0, format!("{violations} violations in {checked} points"));
}

#[test]
fn c09_monte_carlo_value() {
    let m = model("fig1");
    let target = Primal::new(&m).value(1.2, 0.8).unwrap();
    let cfg = SimConfig::new(4.5, 1e-3, 200_000, 2024)
        .unwrap()
        .with_reflection(Reflection::BridgeMinimum)
        .with_extrapolation(true)
        .unwrap();
    let est = sim::estimate_objective(&m, &cfg).unwrap();
    let tail_ok = est.horizon_tail_bound < 1e-4 * target.abs();
    let gap = (est.mean - target).abs();
    let band = 3.0 * est.std_error + est.horizon_tail_bound;
    verdict(
        9,
        tail_ok && gap <= band && est.non_finite == 0,
        format!(
            "mean {:.6} vs value {target:.6}, gap {gap:.2e} <= {band:.2e} (se {:.2e}, tail {:.2e})",
            est.mean, est.std_error, est.horizon_tail_bound
        ),
    );
}

#[test]
fn c10_injection_bounds() {
    let m = model("fig1");
    let pr = Primal::new(&m);
    let z = m.params.preferences.z0;
    let cfg = SimConfig::new(4.5, 1e-3, 20_000, 10)
        .unwrap()
        .with_reflection(Reflection::BridgeMinimum)
        .with_extrapolation(true)
        .unwrap();
    let est = sim::estimate_injection(&m, &cfg).unwrap();
    let floor = pr.injection_lower_bound(m.params.preferences.v0, z).unwrap();
    let floor_ok = est.mean >= floor - 2.0 * est.std_error;

    // Affine envelope M (1 + v0 + z) pinned at the smallest v0; every larger
    // start must sit below it by more than two standard errors.
    let runs: Vec<(f64, f64, f64)> = [1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|&v0| {
            let mv = m.with_params(|p| p.preferences.v0 = v0).unwrap();
            let e = sim::estimate_injection(&mv, &cfg).unwrap();
            (v0, e.mean + e.horizon_tail_bound, e.std_error)
        })
        .collect();
    let slope = runs[0].1 / (1.0 + runs[0].0 + z);
    let finite = runs.iter().all(|r| r.1.is_finite() && r.1 >= 0.0);
    let under = runs[1..].iter().all(|&(v0, e, se)| e < slope * (1.0 + v0 + z) - 2.0 * se);
    let listing: Vec<String> = runs.iter().map(|r| format!("{}:{:.4}", r.0, r.1)).collect();
    verdict(
        10,
        floor_ok && finite && under && slope > 0.0,
        format!(
            "E inj {:.5} (se {:.1e}) >= floor {floor:.5}; by v0 [{}] under {slope:.4}(1+v0+z)",
            est.mean,
            est.std_error,
            listing.join(" ")
        ),
    );
}

#[test]
fn c11_merton_is_suboptimal() {
    let mut lines = Vec::new();
    let mut pass = true;
    for id in ["fig1", "fig4"] {
        let m = model(id);
        // Projection lands exactly on X = 0, where Merton consumption vanishes;
        // for p < 0 that path's utility is -inf, the true Merton objective.
        let cfg = SimConfig::new(4.5, 2e-3, 20_000, 11).unwrap();
        let opt = sim::estimate_objective(&m, &cfg).unwrap();
        let mer = sim::estimate_objective(&m, &cfg.clone().with_policy(PolicySource::Merton)).unwrap();
        let se = (opt.std_error.powi(2) + mer.std_error.powi(2)).sqrt();
        let ok = mer.mean < opt.mean - 2.0 * se;
        pass &= ok;
        lines.push(format!(
            "{id}: merton {:.5} ({} non-finite) vs optimal {:.5} (combined se {se:.1e})",
            mer.mean, mer.non_finite, opt.mean
        ));
        pass &= opt.non_finite == 0;
    }
    verdict(11, pass, lines.join("; "));
}

#[test]
fn c12_probabilistic_dual() {
    let m = model("fig1");
    let d = DualSurface::new(&m);
    let cfg = SimConfig::new(5.0, 2e-3, 100_000, 12).unwrap();
    let mut pass = true;
    let mut lines = Vec::new();
    for (r, h) in [(0.5, 0.5), (1.0, 1.0), (3.0, 0.0)] {
        let exact = d.u_log_coords(r, h).unwrap();
        let est = sim::dual_probabilistic_check(&m, r, h, &cfg).unwrap();
        let gap = (est.mean - exact).abs();
        let band = 3.0 * est.std_error + est.horizon_tail_bound;
        pass &= gap <= band;
        lines.push(format!("({r},{h}) gap {gap:.1e} <= {band:.1e}"));
    }
    verdict(12, pass, lines.join("; "));
}

#[test]
fn c13_skorokhod_equivalence() {
    let m = model("fig1");
    let cfg = SimConfig::new(1.0, 1e-3, 100, 13).unwrap();
    let bundle = sim::simulate_paths(&m, &cfg).unwrap();
    let mut worst = 0.0f64;
    for p in &bundle.paths {
        let l = skorokhod::local_time(bundle.v0, bundle.z0, &p.v, &p.z);
        for (a, b) in l.iter().zip(&p.l) {
            worst = worst.max((a - b).abs());
        }
    }
    verdict(13, worst <= 1e-12, format!("max pointwise |L - running max| {worst:.2e} on 100 paths"));
}

#[test]
fn c14_cra_monotone() {
    let base = model("fig8");
    let cra = |edit: &dyn Fn(&mut ModelParams)| base.with_params(|p| edit(p)).unwrap().derived.cra;
    let by_mu: Vec<f64> = grid(0.5, 4.5, 50).into_iter().map(|v| cra(&|p| p.benchmark.mu_z = v)).collect();
    let by_sigma: Vec<f64> = grid(0.0, 2.0, 50).into_iter().map(|v| cra(&|p| p.benchmark.sigma_z = v)).collect();
    let down = by_mu.windows(2).filter(|w| !(w[1] < w[0])).count();
    let up = by_sigma.windows(2).filter(|w| !(w[1] >= w[0])).count();
    verdict(
        14,
        down == 0 && up == 0,
        format!(
            "mu_Z sweep {down} violations ({:.4} -> {:.4}); sigma_Z sweep {up} violations ({:.4} -> {:.4})",
            by_mu[0], by_mu[49], by_sigma[0], by_sigma[49]
        ),
    );
}
