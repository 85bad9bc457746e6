use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{par_map, path_rng, SimConfig};
use crate::dual::phi;
use crate::error::{Error, Result};
use crate::model::Model;
use crate::stats::McEstimate;

/// Bound on the part of both expectations beyond the horizon T.
///
/// R started at r is dominated by r plus a reflected motion started at 0,
/// whose stationary law is exponential with rate (rho - alpha)/alpha.
pub fn dual_check_tail_bound(model: &Model, r: f64, h: f64, horizon: f64) -> f64 {
    let (rho, alpha, p) = (model.rho(), model.derived.alpha, model.p);
    let beta = model.beta();
    let phi_beta = phi(beta, p).unwrap_or(f64::NAN).abs();
    let lam = if alpha > 0.0 { (rho - alpha) / alpha } else { f64::INFINITY };
    let disc = (-rho * horizon).exp() / rho;
    let first = if p == 0.0 {
        if lam > 0.0 {
            disc * ((beta.ln() + 1.0).abs() + r + 1.0 / lam)
        } else {
            f64::INFINITY
        }
    } else {
        let q = p / (1.0 - p);
        if q <= 0.0 {
            disc * phi_beta
        } else if q < lam {
            let tail_factor = if lam.is_finite() { lam / (lam - q) } else { 1.0 };
            disc * phi_beta * (q * r).exp() * tail_factor
        } else {
            f64::INFINITY
        }
    };
    let (mu_z, eta) = (model.mu_z(), model.derived.eta);
    let second = (mu_z - eta) * beta * h * (-(rho - mu_z) * horizon).exp() / (rho - mu_z);
    first + second
}

/// Monte Carlo evaluation of the probabilistic representation of the dual
/// value in reflected coordinates, to be compared with
/// [`crate::dual::DualSurface::u_log_coords`].
///
/// R is sampled exactly on the grid: the reflection over each step uses the
/// minimum of the Brownian bridge between the endpoints. H is an exact GBM
/// update. The time integrals use the trapezoidal rule.
pub fn dual_probabilistic_check(model: &Model, r: f64, h: f64, cfg: &SimConfig) -> Result<McEstimate> {
    if !(r >= 0.0) || !(h >= 0.0) {
        return Err(Error::DomainError(format!("(r, h) = ({r}, {h}) must be nonnegative")));
    }
    let beta = model.beta();
    if beta.is_infinite() {
        return Err(Error::DomainError("the reflected representation needs a finite beta".into()));
    }
    let (rho, alpha, p) = (model.rho(), model.derived.alpha, model.p);
    let (mu_z, sz, eta, varrho) = (model.mu_z(), model.sigma_z(), model.derived.eta, model.derived.varrho);
    let phi_beta = phi(beta, p)?;
    let q = p / (1.0 - p);
    let weight = (mu_z - eta) * beta;
    let dt = cfg.dt;
    let sdt = dt.sqrt();
    let s = (2.0 * alpha).sqrt();
    let drift = (alpha - rho) * dt;
    let var = s * s * dt;
    let h_drift = (mu_z - 0.5 * sz * sz) * dt;
    let ortho = (1.0 - varrho * varrho).max(0.0).sqrt();
    let decay = (-rho * dt).exp();
    let n = cfg.n_steps();
    let integrand = |rv: f64, hv: f64| {
        let ph = if p == 0.0 { phi_beta + rv } else { phi_beta * (q * rv).exp() };
        ph - weight * (-rv).exp() * hv
    };

    let samples = par_map(cfg.n_paths, |i| {
        let mut rng = path_rng(cfg.seed, i);
        let (mut rv, mut hv, mut disc) = (r, h, 1.0);
        let mut acc = 0.5 * integrand(rv, hv);
        for k in 1..=n {
            let b1: f64 = StandardNormal.sample(&mut rng);
            let b0: f64 = StandardNormal.sample(&mut rng);
            let u: f64 = 1.0 - rng.random::<f64>();
            let dy = drift + s * sdt * b1;
            let end = rv + dy;
            let low = 0.5 * (rv + end - (dy * dy - 2.0 * var * u.ln()).sqrt());
            rv = end + (-low).max(0.0);
            if hv != 0.0 {
                hv *= (h_drift + sz * sdt * (varrho * b1 + ortho * b0)).exp();
            }
            disc *= decay;
            let w = if k == n { 0.5 } else { 1.0 };
            acc += w * disc * integrand(rv, hv);
        }
        acc * dt
    });
    Ok(McEstimate::from_samples(&samples, dual_check_tail_bound(model, r, h, cfg.horizon)))
}
