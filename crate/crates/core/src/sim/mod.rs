//! Monte Carlo simulation of the reflected auxiliary state under a feedback
//! policy, and the estimators built on it.
//!
//! Only the one-asset market with gamma = 1 is simulated. Then the asset
//! Brownian motion and the benchmark Brownian motion coincide, so one normal
//! draw per step drives both.

mod dual_check;
mod estimate;
mod par;
pub mod skorokhod;

pub use dual_check::{dual_check_tail_bound, dual_probabilistic_check};
pub use estimate::{
    decompose_value, estimate_injection, estimate_objective, objective_by_level, path_totals, PathTotals,
    ValueDecomposition,
};
pub use par::{par_map, thread_count, THREADS_ENV};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::model::Model;
use crate::primal::{Primal, WarmStart};

/// Coarsest step accepted; projection reflection is biased at larger steps.
pub const MAX_DT: f64 = 1e-2;

/// Horizon at which the discounted remainder has shrunk by 1e-5, counting
/// benchmark growth: ln(1e5) / (rho - max(mu_Z, 0)).
pub fn default_horizon(model: &Model) -> f64 {
    1e5f64.ln() / (model.rho() - model.mu_z().max(0.0))
}

/// Piecewise-linear policy in x (flat beyond the table), independent of z.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyTable {
    x: Vec<f64>,
    theta: Vec<f64>,
    c: Vec<f64>,
}

impl PolicyTable {
    pub fn new(x: Vec<f64>, theta: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        let ok = !x.is_empty() && x.len() == theta.len() && x.len() == c.len() && x.windows(2).all(|w| w[0] < w[1]);
        if !ok {
            return Err(Error::InvalidParameter {
                name: "policy_table",
                reason: "needs matching, nonempty columns with strictly increasing x".into(),
            });
        }
        Ok(Self { x, theta, c })
    }

    pub fn constant(theta: f64, c: f64) -> Self {
        Self { x: vec![0.0], theta: vec![theta], c: vec![c] }
    }

    pub fn eval(&self, x: f64) -> (f64, f64) {
        let n = self.x.len();
        if x <= self.x[0] {
            return (self.theta[0], self.c[0]);
        }
        if x >= self.x[n - 1] {
            return (self.theta[n - 1], self.c[n - 1]);
        }
        let i = self.x.partition_point(|&v| v <= x) - 1;
        let w = (x - self.x[i]) / (self.x[i + 1] - self.x[i]);
        let lerp = |a: &[f64]| a[i] + w * (a[i + 1] - a[i]);
        (lerp(&self.theta), lerp(&self.c))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PolicySource {
    OptimalFeedback,
    Merton,
    UserTable(PolicyTable),
}

/// How the reflection at X = 0 is resolved within a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reflection {
    /// Project the Euler endpoint onto [0, inf).
    #[default]
    Projection,
    /// Resolve steps near the boundary on substeps and push by the sampled
    /// minimum of the Brownian bridge on each. Removes the sqrt(dt) bias of
    /// discrete monitoring.
    BridgeMinimum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub horizon: f64,
    pub dt: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub policy: PolicySource,
    pub reflection: Reflection,
    /// Combine each path with a coupled path at step 2 dt as 2 J(dt) - J(2 dt),
    /// cancelling the first-order discretization error of the estimators.
    pub extrapolate: bool,
}

impl SimConfig {
    pub fn new(horizon: f64, dt: f64, n_paths: usize, seed: u64) -> Result<Self> {
        let bad = |name, reason: &str| Err(Error::InvalidParameter { name, reason: reason.into() });
        if !(horizon > 0.0) || !horizon.is_finite() {
            return bad("horizon", "must be positive and finite");
        }
        if !(dt > 0.0) || dt > horizon {
            return bad("dt", "must satisfy 0 < dt <= horizon");
        }
        if dt > MAX_DT {
            return bad("dt", "must not exceed 1e-2");
        }
        if n_paths == 0 {
            return bad("n_paths", "must be positive");
        }
        Ok(Self {
            horizon,
            dt,
            n_paths,
            seed,
            policy: PolicySource::OptimalFeedback,
            reflection: Reflection::Projection,
            extrapolate: false,
        })
    }

    pub fn with_policy(mut self, policy: PolicySource) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_reflection(mut self, reflection: Reflection) -> Self {
        self.reflection = reflection;
        self
    }

    /// Enables the coupled 2 dt path; needs an even number of steps.
    pub fn with_extrapolation(mut self, on: bool) -> Result<Self> {
        if on && !self.n_steps().is_multiple_of(2) {
            return Err(Error::InvalidParameter { name: "dt", reason: "extrapolation needs an even number of steps".into() });
        }
        self.extrapolate = on;
        Ok(self)
    }

    pub fn n_steps(&self) -> usize {
        ((self.horizon / self.dt).round() as usize).max(1)
    }
}

/// Market and preference scalars the simulator needs. Built from a model, or
/// directly for degenerate test dynamics a model would reject.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dynamics {
    pub mu: f64,
    pub sigma: f64,
    pub mu_z: f64,
    pub sigma_z: f64,
    pub rho: f64,
    pub p: f64,
    pub beta: f64,
    pub v0: f64,
    pub z0: f64,
}

impl Dynamics {
    pub fn from_model(model: &Model) -> Result<Self> {
        let (mu, sigma) = model
            .scalar_market()
            .ok_or_else(|| Error::Unsupported("simulation needs d = 1 and gamma = 1".into()))?;
        let pr = &model.params.preferences;
        Ok(Self {
            mu,
            sigma,
            mu_z: model.mu_z(),
            sigma_z: model.sigma_z(),
            rho: pr.rho,
            p: model.p,
            beta: pr.beta,
            v0: pr.v0,
            z0: pr.z0,
        })
    }

    pub fn x0(&self) -> f64 {
        (self.v0 - self.z0).max(0.0)
    }

    pub fn a0(&self) -> f64 {
        (self.z0 - self.v0).max(0.0)
    }
}

/// A feedback rule (x, z) -> (theta, c). `warm` carries per-path solver
/// state between steps.
pub trait Controller: Sync {
    fn controls(&self, x: f64, z: f64, warm: &mut WarmStart) -> Result<(f64, f64)>;
}

pub struct OptimalController(pub Primal);

impl Controller for OptimalController {
    #[inline]
    fn controls(&self, x: f64, z: f64, warm: &mut WarmStart) -> Result<(f64, f64)> {
        self.0
            .controls_tracked(x, z, warm)
            .map_err(|e| Error::PolicyEvaluationError { x, z, reason: e.to_string() })
    }
}

pub struct MertonController {
    theta_per_x: f64,
    c_per_x: f64,
}

impl MertonController {
    pub fn new(model: &Model) -> Self {
        Self { theta_per_x: model.m[0] / (1.0 - model.p), c_per_x: model.derived.c_star }
    }
}

impl Controller for MertonController {
    fn controls(&self, x: f64, _z: f64, _warm: &mut WarmStart) -> Result<(f64, f64)> {
        Ok((self.theta_per_x * x, self.c_per_x * x))
    }
}

impl Controller for PolicyTable {
    fn controls(&self, x: f64, _z: f64, _warm: &mut WarmStart) -> Result<(f64, f64)> {
        Ok(self.eval(x))
    }
}

pub fn controller(model: &Model, source: &PolicySource) -> Box<dyn Controller> {
    match source {
        PolicySource::OptimalFeedback => Box::new(OptimalController(Primal::new(model))),
        PolicySource::Merton => Box::new(MertonController::new(model)),
        PolicySource::UserTable(t) => Box::new(t.clone()),
    }
}

/// Per-path generator: one ChaCha stream per path index, so any path can be
/// regenerated independently of the others and of the thread schedule.
pub fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

/// Generator for the bridge draws of a path at a given level, kept apart from
/// the Brownian increments so that coupled paths share only the latter.
fn aux_rng(seed: u64, path: u64, level: u32) -> ChaCha8Rng {
    let key = 0x9e37_79b9_7f4a_7c15u64.wrapping_mul(level as u64 + 1);
    path_rng(seed ^ key, path)
}

/// State at grid time t_k together with the controls applied on
/// [t_k, t_{k+1}) and the local-time increment over that step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub k: usize,
    pub t: f64,
    pub x: f64,
    pub z: f64,
    pub v: f64,
    pub l: f64,
    pub a: f64,
    pub theta: f64,
    pub c: f64,
    pub dl: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Terminal {
    pub x: f64,
    pub z: f64,
    pub v: f64,
    pub l: f64,
    pub a: f64,
}

/// Steps whose endpoints are within this many standard deviations of the
/// boundary are resolved on substeps.
const NEAR_BOUNDARY: f64 = 5.0;
const SUBSTEPS: usize = 8;
const CROSSING_EXPONENT: f64 = 40.0;

/// One step with frozen controls, for resolving the reflection inside it.
struct BridgeStep {
    x: f64,
    z: f64,
    /// Brownian increment over the step.
    dw: f64,
    /// theta mu - c.
    lin: f64,
    /// theta sigma.
    vol: f64,
    z_drift: f64,
    sigma_z: f64,
    dt: f64,
}

impl BridgeStep {
    /// Local time over the step. W is filled in on a uniform substep grid by
    /// Brownian-bridge sampling given `dw`; the free increment of X is exact at
    /// each node (V is affine in W and Z is lognormal), and each substep is
    /// reflected at the sampled minimum of the bridge between its nodes.
    /// `pre` is the unreflected endpoint, used to close the last substep.
    fn local_time(&self, rng: &mut ChaCha8Rng, pre: f64) -> f64 {
        let h = self.dt / SUBSTEPS as f64;
        let (mut w, mut y, mut xs, mut zs, mut l) = (0.0, 0.0, self.x, self.z, 0.0);
        for j in 1..=SUBSTEPS {
            let (w_next, y_next, z_next) = if j == SUBSTEPS {
                (self.dw, pre - self.x, 0.0)
            } else {
                let left = (SUBSTEPS - j + 1) as f64;
                let xi: f64 = StandardNormal.sample(rng);
                let w_next = w + (self.dw - w) / left + (h * (left - 1.0) / left).sqrt() * xi;
                let t = j as f64 / SUBSTEPS as f64;
                let z_next = self.z * (self.z_drift * t + self.sigma_z * w_next).exp();
                (w_next, self.lin * self.dt * t + self.vol * w_next - (z_next - self.z), z_next)
            };
            let end = xs + (y_next - y);
            let s = self.vol - self.sigma_z * zs;
            // crossing probability exp(-2 xs end / (s^2 h)) is negligible
            if 2.0 * xs * end <= CROSSING_EXPONENT * s * s * h {
                let e: f64 = Exp1.sample(rng);
                let low = 0.5 * (xs + end - ((end - xs) * (end - xs) + 2.0 * s * s * h * e).sqrt());
                let dl = (-low).max(0.0);
                l += dl;
                xs = end + dl;
            } else {
                xs = end;
            }
            (w, y, zs) = (w_next, y_next, z_next);
        }
        l
    }
}

/// Simulates one path, calling `obs` once per step.
///
/// X is advanced by Euler with the controls frozen over the step and is
/// reflected at zero as set by `cfg.reflection`. Z uses the exact log-normal
/// update.
pub fn run_path(
    dy: &Dynamics,
    ctl: &dyn Controller,
    cfg: &SimConfig,
    path: u64,
    obs: impl FnMut(&Step),
) -> Result<Terminal> {
    run_path_level(dy, ctl, cfg, path, 0, obs)
}

/// As [`run_path`] with step 2^level dt, driven by the same Brownian path.
pub fn run_path_level(
    dy: &Dynamics,
    ctl: &dyn Controller,
    cfg: &SimConfig,
    path: u64,
    level: u32,
    mut obs: impl FnMut(&Step),
) -> Result<Terminal> {
    let mut rng = path_rng(cfg.seed, path);
    let mut aux = aux_rng(cfg.seed, path, level);
    let group = 1usize << level;
    let fine_sdt = cfg.dt.sqrt();
    let dt = cfg.dt * group as f64;
    let sdt = dt.sqrt();
    let z_drift = (dy.mu_z - 0.5 * dy.sigma_z * dy.sigma_z) * dt;
    let z_moves = dy.sigma_z != 0.0 || dy.mu_z != 0.0;
    let a0 = dy.a0();
    let (mut x, mut z, mut v, mut l) = (dy.x0(), dy.z0, dy.v0, 0.0);
    let mut warm = WarmStart::default();
    for k in 0..cfg.n_steps() / group {
        let (theta, c) = ctl.controls(x, z, &mut warm)?;
        let mut dw = 0.0;
        for _ in 0..group {
            let xi: f64 = StandardNormal.sample(&mut rng);
            dw += fine_sdt * xi;
        }
        let dv = theta * dy.mu * dt + theta * dy.sigma * dw - c * dt;
        let z_next = if z_moves { z * (z_drift + dy.sigma_z * dw).exp() } else { z };
        let pre = x + dv - (z_next - z);
        let dl = match cfg.reflection {
            Reflection::Projection => (-pre).max(0.0),
            Reflection::BridgeMinimum => {
                let s = theta * dy.sigma - dy.sigma_z * z;
                let curve = dy.sigma_z * dy.sigma_z * z * dt;
                let reach = NEAR_BOUNDARY * s.abs() * sdt + 0.5 * NEAR_BOUNDARY * NEAR_BOUNDARY * curve;
                if x.min(pre) > reach {
                    0.0
                } else {
                    let lin = theta * dy.mu - c;
                    let step = BridgeStep { x, z, dw, lin, vol: theta * dy.sigma, z_drift, sigma_z: dy.sigma_z, dt };
                    step.local_time(&mut aux, pre)
                }
            }
        };
        obs(&Step { k, t: k as f64 * dt, x, z, v, l, a: a0 + l, theta, c, dl });
        x = (pre + dl).max(0.0);
        z = z_next;
        v += dv;
        l += dl;
        if !(x.is_finite() && z.is_finite() && v.is_finite()) {
            return Err(Error::NonFinitePath { path, step: k + 1 });
        }
    }
    Ok(Terminal { x, z, v, l, a: a0 + l })
}

/// Recorded trajectories of one path on the grid t_0, ..., t_N.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PathData {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub v: Vec<f64>,
    pub l: Vec<f64>,
    pub a: Vec<f64>,
    pub theta: Vec<f64>,
    pub c: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathBundle {
    pub times: Vec<f64>,
    pub v0: f64,
    pub z0: f64,
    pub paths: Vec<PathData>,
}

pub fn record_path(dy: &Dynamics, ctl: &dyn Controller, cfg: &SimConfig, path: u64) -> Result<PathData> {
    let n = cfg.n_steps() + 1;
    let mut d = PathData {
        x: Vec::with_capacity(n),
        z: Vec::with_capacity(n),
        v: Vec::with_capacity(n),
        l: Vec::with_capacity(n),
        a: Vec::with_capacity(n),
        theta: Vec::with_capacity(n),
        c: Vec::with_capacity(n),
    };
    let term = run_path(dy, ctl, cfg, path, |s| {
        d.x.push(s.x);
        d.z.push(s.z);
        d.v.push(s.v);
        d.l.push(s.l);
        d.a.push(s.a);
        d.theta.push(s.theta);
        d.c.push(s.c);
    })?;
    let mut warm = WarmStart::default();
    let (theta, c) = ctl.controls(term.x, term.z, &mut warm)?;
    d.x.push(term.x);
    d.z.push(term.z);
    d.v.push(term.v);
    d.l.push(term.l);
    d.a.push(term.a);
    d.theta.push(theta);
    d.c.push(c);
    Ok(d)
}

/// Simulates and records `cfg.n_paths` paths under the model's dynamics.
pub fn simulate_paths(model: &Model, cfg: &SimConfig) -> Result<PathBundle> {
    let dy = Dynamics::from_model(model)?;
    let ctl = controller(model, &cfg.policy);
    simulate_paths_with(&dy, ctl.as_ref(), cfg)
}

pub fn simulate_paths_with(dy: &Dynamics, ctl: &dyn Controller, cfg: &SimConfig) -> Result<PathBundle> {
    let paths = par_map(cfg.n_paths, |i| record_path(dy, ctl, cfg, i)).into_iter().collect::<Result<Vec<_>>>()?;
    let times = (0..=cfg.n_steps()).map(|k| k as f64 * cfg.dt).collect();
    Ok(PathBundle { times, v0: dy.v0, z0: dy.z0, paths })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(v0: f64, z0: f64, mu_z: f64) -> Dynamics {
        Dynamics { mu: 0.0, sigma: 0.0, mu_z, sigma_z: 0.0, rho: 1.0, p: 0.5, beta: 1.0, v0, z0 }
    }

    #[test]
    fn config_rejects_coarse_steps() {
        assert!(SimConfig::new(1.0, 2e-2, 1, 0).is_err());
        assert!(SimConfig::new(1e-3, 2e-3, 1, 0).is_err());
        assert!(SimConfig::new(1.0, 1e-2, 0, 0).is_err());
        assert_eq!(SimConfig::new(1.0, 1e-3, 1, 0).unwrap().n_steps(), 1000);
    }

    #[test]
    fn deterministic_consumption_then_reflection() {
        // X falls at rate c until it hits zero, after which L grows at rate c
        let (c, x0) = (2.0, 1.0);
        let dy = flat(1.0 + x0, 1.0, 0.0);
        let cfg = SimConfig::new(1.0, 1e-3, 1, 7).unwrap();
        let ctl = PolicyTable::constant(0.0, c);
        let d = record_path(&dy, &ctl, &cfg, 0).unwrap();
        for (k, t) in (0..=1000).map(|k| (k, k as f64 * 1e-3)) {
            let xe = (x0 - c * t).max(0.0);
            let le = (c * t - x0).max(0.0);
            assert!((d.x[k] - xe).abs() < 1e-12, "k={k}");
            assert!((d.l[k] - le).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn deterministic_benchmark_injection() {
        let (mu_z, v0, z0, t) = (0.8, 1.5, 1.0, 1.0);
        let dy = flat(v0, z0, mu_z);
        let cfg = SimConfig::new(t, 1e-3, 1, 1).unwrap();
        let d = record_path(&dy, &PolicyTable::constant(0.0, 0.0), &cfg, 0).unwrap();
        let expect = (z0 * (mu_z * t).exp() - v0).max(0.0);
        assert!((d.a.last().unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn table_interpolates() {
        let t = PolicyTable::new(vec![0.0, 1.0, 3.0], vec![0.0, 1.0, 2.0], vec![1.0, 1.0, 5.0]).unwrap();
        assert_eq!(t.eval(-1.0), (0.0, 1.0));
        assert_eq!(t.eval(0.5), (0.5, 1.0));
        assert_eq!(t.eval(2.0), (1.5, 3.0));
        assert_eq!(t.eval(9.0), (2.0, 5.0));
        assert!(PolicyTable::new(vec![1.0, 1.0], vec![0.0; 2], vec![0.0; 2]).is_err());
    }
}

