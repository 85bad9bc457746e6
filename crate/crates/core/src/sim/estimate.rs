use serde::Serialize;

use super::{controller, par_map, run_path_level, Controller, Dynamics, SimConfig};
use crate::dual::utility;
use crate::error::{Error, Result};
use crate::model::Model;
use crate::primal::Primal;
use crate::stats::{mean, McEstimate};

/// Discounted totals accumulated along one path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathTotals {
    /// Discounted utility of consumption.
    pub utility: f64,
    /// Discounted local time, excluding the initial lump.
    pub injection: f64,
    pub x_t: f64,
    pub z_t: f64,
}

/// Per-path totals. With `cfg.extrapolate` the discounted sums are the
/// combination 2 J(dt) - J(2 dt) over a pair of coupled paths, and the
/// terminal state is that of the fine path.
pub fn path_totals(model: &Model, cfg: &SimConfig) -> Result<Vec<PathTotals>> {
    let dy = Dynamics::from_model(model)?;
    let ctl = controller(model, &cfg.policy);
    par_map(cfg.n_paths, |i| {
        let fine = level_totals(&dy, ctl.as_ref(), cfg, i, 0)?;
        if !cfg.extrapolate {
            return Ok(fine);
        }
        let coarse = level_totals(&dy, ctl.as_ref(), cfg, i, 1)?;
        Ok(PathTotals {
            utility: 2.0 * fine.utility - coarse.utility,
            injection: 2.0 * fine.injection - coarse.injection,
            ..fine
        })
    })
    .into_iter()
    .collect()
}

/// Controls are constant over a step, so the utility term is integrated
/// against the exact discount over the step; local time is discounted at the
/// step midpoint.
fn level_totals(dy: &Dynamics, ctl: &dyn Controller, cfg: &SimConfig, path: u64, level: u32) -> Result<PathTotals> {
    let h = cfg.dt * (1u64 << level) as f64;
    let decay = (-dy.rho * h).exp();
    let weight = (1.0 - decay) / dy.rho;
    let mid = (-0.5 * dy.rho * h).exp();
    let (mut disc, mut u, mut inj) = (1.0, 0.0, 0.0);
    let term = run_path_level(dy, ctl, cfg, path, level, |s| {
        u += disc * utility(s.c, dy.p) * weight;
        if s.dl > 0.0 {
            inj += disc * mid * s.dl;
        }
        disc *= decay;
    })?;
    Ok(PathTotals { utility: u, injection: inj, x_t: term.x, z_t: term.z })
}

/// Objective estimates at steps dt, 2 dt, ..., 2^max_level dt on coupled
/// paths: the coarser paths are driven by sums of the finest increments, so
/// differences between levels are resolved far below the sampling error.
pub fn objective_by_level(model: &Model, cfg: &SimConfig, max_level: u32) -> Result<Vec<McEstimate>> {
    let group = 1usize << max_level;
    if !cfg.n_steps().is_multiple_of(group) {
        return Err(Error::InvalidParameter { name: "dt", reason: format!("step count must be a multiple of {group}") });
    }
    let dy = Dynamics::from_model(model)?;
    let ctl = controller(model, &cfg.policy);
    let rows = par_map(cfg.n_paths, |i| {
        (0..=max_level).map(|lv| level_totals(&dy, ctl.as_ref(), cfg, i, lv)).collect::<Result<Vec<_>>>()
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let beta = model.beta();
    (0..=max_level as usize)
        .map(|lv| {
            let totals: Vec<PathTotals> = rows.iter().map(|r| r[lv]).collect();
            let samples: Vec<f64> = totals.iter().map(|t| objective_sample(t, beta)).collect();
            Ok(McEstimate::from_samples(&samples, objective_tail(model, cfg, &totals)?))
        })
        .collect()
}

fn objective_sample(t: &PathTotals, beta: f64) -> f64 {
    if t.injection == 0.0 {
        t.utility
    } else {
        t.utility - beta * t.injection
    }
}

/// e^{-rho T} E|v(X_T, Z_T)|. Under the optimal policy the truncated part of
/// the objective is exactly e^{-rho T} E v(X_T, Z_T).
fn objective_tail(model: &Model, cfg: &SimConfig, totals: &[PathTotals]) -> Result<f64> {
    let pr = Primal::new(model);
    let vals = totals.iter().map(|t| pr.value(t.x_t, t.z_t).map(f64::abs)).collect::<Result<Vec<_>>>()?;
    Ok((-model.rho() * cfg.horizon).exp() * mean(&vals))
}

/// Injection still to come after T, estimated as the discounted cost of
/// funding the benchmark from Z_T onward.
fn injection_tail(model: &Model, cfg: &SimConfig, totals: &[PathTotals]) -> f64 {
    let (rho, mu_z) = (model.rho(), model.mu_z());
    let zs: Vec<f64> = totals.iter().map(|t| t.z_t).collect();
    (-rho * cfg.horizon).exp() * mean(&zs) * rho / (rho - mu_z)
}

/// Monte Carlo estimate of E[int e^{-rho t} U(c_t) dt - beta int e^{-rho t} dL_t].
pub fn estimate_objective(model: &Model, cfg: &SimConfig) -> Result<McEstimate> {
    let totals = path_totals(model, cfg)?;
    let beta = model.beta();
    let samples: Vec<f64> = totals.iter().map(|t| objective_sample(t, beta)).collect();
    Ok(McEstimate::from_samples(&samples, objective_tail(model, cfg, &totals)?))
}

/// Monte Carlo estimate of E[int e^{-rho t} dA_t], including A_0 = (z - v)^+.
pub fn estimate_injection(model: &Model, cfg: &SimConfig) -> Result<McEstimate> {
    let totals = path_totals(model, cfg)?;
    let a0 = model.params.a0();
    let samples: Vec<f64> = totals.iter().map(|t| a0 + t.injection).collect();
    Ok(McEstimate::from_samples(&samples, injection_tail(model, cfg, &totals)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValueDecomposition {
    /// Expected discounted utility of consumption.
    pub utility_part: McEstimate,
    /// Expected discounted injection, initial lump included.
    pub cost_part: McEstimate,
}

/// Splits the value into utility and injection cost on one set of paths, so
/// that utility_part - beta cost_part estimates w(v, z).
pub fn decompose_value(model: &Model, cfg: &SimConfig) -> Result<ValueDecomposition> {
    let totals = path_totals(model, cfg)?;
    let a0 = model.params.a0();
    let u: Vec<f64> = totals.iter().map(|t| t.utility).collect();
    let c: Vec<f64> = totals.iter().map(|t| a0 + t.injection).collect();
    Ok(ValueDecomposition {
        utility_part: McEstimate::from_samples(&u, objective_tail(model, cfg, &totals)?),
        cost_part: McEstimate::from_samples(&c, injection_tail(model, cfg, &totals)),
    })
}
