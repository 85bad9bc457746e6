//! Data behind each published figure. Every panel is written as one CSV in
//! long format, with the swept parameter as the leading column.

use std::path::{Path, PathBuf};

use benchtrack::primal::{Primal, Regime};
use benchtrack::sim::{self, Reflection, SimConfig};
use benchtrack::{presets, Model, ModelParams};

use crate::output::{write_text, Csv};
use crate::{parse_grid, CliResult};

/// Sample sizes for the Monte Carlo panels.
pub struct McOptions {
    pub seed: u64,
    pub paths: usize,
    pub dt: f64,
}

/// Writes the CSV files for `id` into `out` and returns their paths.
pub fn run_figure(id: &str, out: &Path, mc: &McOptions) -> CliResult<Vec<PathBuf>> {
    let mut files = Vec::new();
    let mut put = |name: &str, csv: Csv| -> CliResult<()> {
        let path = out.join(format!("{name}.csv"));
        write_text(&path, &csv.finish())?;
        files.push(path);
        Ok(())
    };
    match id {
        "fig1" => put("fig1", sample_path(mc)?)?,
        "fig2a" | "fig2b" | "fig3a" | "fig3b" => put(id, p_curves(id)?)?,
        "fig2" | "fig3" => {
            for panel in ["a", "b"] {
                let name = format!("{id}{panel}");
                put(&name, p_curves(&name)?)?;
            }
        }
        "fig4" => {
            let (inj, pol) = sweep_panels("fig4", "mu_Z", &[1.5, 2.0, 3.0], mc, |p, v| p.benchmark.mu_z = v)?;
            put("fig4_injection", inj)?;
            put("fig4_policy", pol)?;
        }
        "fig5" => {
            let (inj, pol) = sweep_panels("fig5", "beta", &[1.0, 2.0, 4.0], mc, |p, v| p.preferences.beta = v)?;
            put("fig5_injection", inj)?;
            put("fig5_policy", pol)?;
        }
        "fig6" => put("fig6", decomposition(mc)?)?,
        "fig7" | "fig7a" | "fig7b" => {
            if id != "fig7b" {
                put("fig7a", p_sweep("fig7a", Control::Theta)?)?;
            }
            if id != "fig7a" {
                put("fig7b", p_sweep("fig7b", Control::C)?)?;
            }
        }
        "fig8" | "fig8a" | "fig8b" => {
            if id != "fig8b" {
                put("fig8a", cra_sweep("mu_Z", "0.5:4.5:50", |p, v| p.benchmark.mu_z = v)?)?;
            }
            if id != "fig8a" {
                put("fig8b", cra_sweep("sigma_Z", "0:2:50", |p, v| p.benchmark.sigma_z = v)?)?;
            }
        }
        "fig9" => put("fig9", ratio_sweep("fig9", &[2.0], "1.05:4:60")?)?,
        "fig10" => put("fig10", ratio_sweep("fig10", &[0.3, 0.4, 0.8], "1:25:97")?)?,
        _ => return Err(benchtrack::Error::UnknownPreset(id.to_string()).into()),
    }
    Ok(files)
}

#[derive(Clone, Copy)]
enum Control {
    Theta,
    C,
}

fn model_with(id: &str, edit: impl FnOnce(&mut ModelParams)) -> CliResult<Model> {
    let mut params = presets::preset(id)?;
    edit(&mut params);
    Ok(Model::new(params)?)
}

fn pick(pr: &Primal, x: f64, z: f64, hint: Option<f64>, which: Control) -> CliResult<(f64, f64)> {
    let pt = pr.policy_hint(x, z, hint)?;
    Ok((pt.f, match which {
        Control::Theta => pt.theta[0],
        Control::C => pt.c,
    }))
}

/// One seeded path of wealth, benchmark and cumulative injection.
fn sample_path(mc: &McOptions) -> CliResult<Csv> {
    let model = Model::new(presets::preset("fig1")?)?;
    let cfg = SimConfig::new(1.0, 1e-4, 1, mc.seed)?;
    let bundle = sim::simulate_paths(&model, &cfg)?;
    let path = &bundle.paths[0];
    let mut csv = Csv::new(&["t", "V", "Z", "A"]);
    for (k, t) in bundle.times.iter().enumerate() {
        csv.row(&[*t, path.v[k], path.z[k], path.a[k]]);
    }
    Ok(csv)
}

/// Control curves in x at z = 1 for three CRRA exponents. fig2a, fig3b sit
/// between the critical exponents; fig2b lies above p2 and fig3a below p1.
fn p_curves(id: &str) -> CliResult<Csv> {
    let (ps, which): (&[f64], _) = match id {
        "fig2a" => (&[-2.0, 0.0, 0.5], Control::Theta),
        "fig2b" => (&[0.25, 0.5, 0.75], Control::Theta),
        "fig3a" => (&[-3.0, -2.0, -1.0], Control::C),
        _ => (&[-1.0, 0.0, 0.5], Control::C),
    };
    let name = match which {
        Control::Theta => "theta",
        Control::C => "c",
    };
    let mut csv = Csv::new(&["p", "x", name]);
    for &p in ps {
        let model = model_with(id, |m| m.preferences.p = p)?;
        let pr = Primal::new(&model);
        let mut hint = None;
        for x in parse_grid("0:5:101")? {
            let (f, v) = pick(&pr, x, 1.0, hint, which)?;
            hint = Some(f);
            csv.row(&[p, x, v]);
        }
    }
    Ok(csv)
}

/// Expected discounted injection (Monte Carlo) and policy curves at z = 1
/// for each value of one swept parameter.
fn sweep_panels(
    id: &str,
    label: &str,
    values: &[f64],
    mc: &McOptions,
    set: impl Fn(&mut ModelParams, f64),
) -> CliResult<(Csv, Csv)> {
    let mut inj = Csv::new(&[label, "x", "injection", "se"]);
    let mut pol = Csv::new(&[label, "x", "theta", "c"]);
    for &value in values {
        let model = model_with(id, |m| set(m, value))?;
        let pr = Primal::new(&model);
        for x in parse_grid("0:3:7")? {
            let m = model.with_params(|p| {
                p.preferences.z0 = 1.0;
                p.preferences.v0 = 1.0 + x;
            })?;
            let cfg = SimConfig::new(sim::default_horizon(&m), mc.dt, mc.paths, mc.seed)?
                .with_reflection(Reflection::BridgeMinimum);
            let est = sim::estimate_injection(&m, &cfg)?;
            inj.row(&[value, x, est.mean, est.std_error]);
        }
        let mut hint = None;
        for x in parse_grid("0:5:101")? {
            let pt = pr.policy_hint(x, 1.0, hint)?;
            hint = Some(pt.f);
            pol.row(&[value, x, pt.theta[0], pt.c]);
        }
    }
    Ok((inj, pol))
}

/// Closed-form value next to the Monte Carlo utility and injection-cost parts.
fn decomposition(mc: &McOptions) -> CliResult<Csv> {
    let model = Model::new(presets::preset("fig6")?)?;
    let pr = Primal::new(&model);
    let z = 1.0;
    let mut csv = Csv::new(&["x", "w", "w_mer", "w_mer_se", "w_cost", "w_cost_se"]);
    for x in parse_grid("0:3:7")? {
        let m = model.with_params(|p| {
            p.preferences.z0 = z;
            p.preferences.v0 = z + x;
        })?;
        let cfg = SimConfig::new(sim::default_horizon(&m), mc.dt, mc.paths, mc.seed)?
            .with_reflection(Reflection::BridgeMinimum);
        let parts = sim::decompose_value(&m, &cfg)?;
        let beta = m.beta();
        csv.row(&[
            x,
            pr.value(x, z)?,
            parts.utility_part.mean,
            parts.utility_part.std_error,
            beta * parts.cost_part.mean,
            beta * parts.cost_part.std_error,
        ]);
    }
    Ok(csv)
}

/// One control as a function of p at a few wealth levels; the critical
/// exponent is added to the grid.
fn p_sweep(id: &str, which: Control) -> CliResult<Csv> {
    let base = Model::new(presets::preset(id)?)?;
    let z = base.params.preferences.z0;
    let mut ps = parse_grid("-3:0.8:96")?;
    ps.push(base.derived.p1);
    ps.sort_by(f64::total_cmp);
    let name = match which {
        Control::Theta => "theta",
        Control::C => "c",
    };
    let mut csv = Csv::new(&["p", "x", "z", name]);
    for &x in &[0.5, 1.0, 2.0] {
        for &p in &ps {
            let model = base.with_params(|m| m.preferences.p = p)?;
            let (_, v) = pick(&Primal::new(&model), x, z, None, which)?;
            csv.row(&[p, x, z, v]);
        }
    }
    Ok(csv)
}

fn cra_sweep(label: &str, grid: &str, set: impl Fn(&mut ModelParams, f64)) -> CliResult<Csv> {
    let base = Model::new(presets::preset("fig8")?)?;
    let mut csv = Csv::new(&[label, "kappa", "cra"]);
    for v in parse_grid(grid)? {
        let m = base.with_params(|p| set(p, v))?;
        csv.row(&[v, m.derived.kappa, m.derived.cra]);
    }
    Ok(csv)
}

/// Limits of theta*/x and c*/x against the risk aversion 1 - p, with the
/// ratios at the preset's wealth level for comparison. `regime` is 1 above
/// p1, 0 at p1 and -1 below.
fn ratio_sweep(id: &str, mu_zs: &[f64], grid: &str) -> CliResult<Csv> {
    let base = Model::new(presets::preset(id)?)?;
    let (x, z) = (base.params.x0(), base.params.preferences.z0);
    let mut csv = Csv::new(&[
        "mu_Z",
        "one_minus_p",
        "regime",
        "theta_limit",
        "c_limit",
        "theta_over_x",
        "c_over_x",
    ]);
    for &mu_z in mu_zs {
        let at = base.with_params(|p| p.benchmark.mu_z = mu_z)?;
        let mut risk = parse_grid(grid)?;
        risk.push(at.derived.cra);
        risk.sort_by(f64::total_cmp);
        for q in risk {
            let p = if (q - at.derived.cra).abs() < 1e-12 { at.derived.p1 } else { 1.0 - q };
            let model = at.with_params(|m| m.preferences.p = p)?;
            let pr = Primal::new(&model);
            let lim = pr.asymptotic_ratios(z)?;
            let pt = pr.policy(x, z)?;
            let regime = match lim.regime {
                Regime::AboveP1 => 1.0,
                Regime::AtP1 => 0.0,
                Regime::BelowP1 => -1.0,
            };
            csv.row(&[mu_z, q, regime, lim.theta_ratio, lim.c_ratio, pt.theta[0] / x, pt.c / x]);
        }
    }
    Ok(csv)
}
