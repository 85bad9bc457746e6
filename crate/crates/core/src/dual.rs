//! Closed-form dual value function v̂(y, z) and its partial derivatives.
//!
//! Everything is evaluated through ln y so that the small-y probes made by
//! the root finder never overflow intermediate powers.

use crate::error::{Error, Result};
use crate::model::{effective_p, Model};

/// Smallest y accepted before clamping.
pub const Y_FLOOR: f64 = 1e-300;

/// Relative slack on the upper end y <= beta.
const DOMAIN_TOL: f64 = 1e-12;

/// Convex conjugate of the CRRA / log utility, sup_c (U(c) - c y).
pub fn phi(y: f64, p: f64) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::NonpositiveArgument(y));
    }
    let p = effective_p(p);
    Ok(if p == 0.0 { -y.ln() - 1.0 } else { (1.0 - p) / p * y.powf(-p / (1.0 - p)) })
}

/// CRRA utility c^p / p, or ln c when p = 0.
pub fn utility(c: f64, p: f64) -> f64 {
    if p == 0.0 {
        c.ln()
    } else {
        c.powf(p) / p
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualDerivs {
    pub vy: f64,
    pub vyy: f64,
    pub vyz: f64,
    pub vzz: f64,
    pub vyyy: f64,
    pub vyyz: f64,
    pub vz: f64,
}

/// Cached scalars for evaluating v̂ of one model.
#[derive(Debug, Clone)]
pub struct DualSurface {
    pub p: f64,
    pub beta: f64,
    pub rho: f64,
    alpha: f64,
    eta: f64,
    mu_z: f64,
    sigma_z: f64,
    kappa: f64,
    log_branch: bool,
    /// 1/(1-p)
    a: f64,
    /// (1-p)^2 / K
    c1: f64,
    /// (1-p) / K
    c2: f64,
    /// (1-p)^3 / (p K), power branch only
    c0: f64,
    /// c1 * beta^{-a}; zero in Merton mode
    b_term: f64,
    ln_beta: f64,
    /// False when kappa = 1, where every z-term vanishes identically.
    z_active: bool,
}

impl DualSurface {
    pub fn new(model: &Model) -> Self {
        let p = model.p;
        let rho = model.rho();
        let beta = model.beta();
        let k = model.k();
        let a = 1.0 / (1.0 - p);
        let c1 = (1.0 - p) * (1.0 - p) / k;
        let kappa = model.kappa();
        Self {
            p,
            beta,
            rho,
            alpha: model.derived.alpha,
            eta: model.derived.eta,
            mu_z: model.mu_z(),
            sigma_z: model.sigma_z(),
            kappa,
            log_branch: p == 0.0,
            a,
            c1,
            c2: (1.0 - p) / k,
            c0: if p == 0.0 { 0.0 } else { (1.0 - p).powi(3) / (p * k) },
            b_term: if beta.is_infinite() { 0.0 } else { c1 * beta.powf(-a) },
            ln_beta: beta.ln(),
            z_active: kappa < 1.0,
        }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// 1/(1-p), the exponent linking f and consumption.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// (1-p)^2 / K
    pub fn c1(&self) -> f64 {
        self.c1
    }

    /// (1-p) / K
    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn b_term(&self) -> f64 {
        self.b_term
    }

    pub fn ln_beta(&self) -> f64 {
        self.ln_beta
    }

    pub fn z_active(&self) -> bool {
        self.z_active
    }

    fn check(&self, y: f64, z: f64) -> Result<f64> {
        if !(z >= 0.0) {
            return Err(Error::DomainError(format!("z = {z} must be nonnegative")));
        }
        if !(y > 0.0) || y > self.beta * (1.0 + DOMAIN_TOL) {
            return Err(Error::DomainError(format!("y = {y} outside (0, {}]", self.beta)));
        }
        Ok(y.clamp(Y_FLOOR, self.beta).ln())
    }

    /// (y/beta)^{kappa-1} from ln y.
    #[inline]
    pub fn ratio(&self, ls: f64) -> f64 {
        if self.z_active {
            ((self.kappa - 1.0) * (ls - self.ln_beta)).exp()
        } else {
            1.0
        }
    }

    pub fn v_hat(&self, y: f64, z: f64) -> Result<f64> {
        let ls = self.check(y, z)?;
        Ok(self.v_hat_ln(ls, z))
    }

    pub(crate) fn v_hat_ln(&self, ls: f64, z: f64) -> f64 {
        let y = ls.exp();
        let util = if self.log_branch {
            -ls / self.rho - 2.0 / self.rho + self.alpha / (self.rho * self.rho)
        } else {
            self.c0 * ((1.0 - self.a) * ls).exp()
        };
        util + self.b_term * y + z * self.vz_ln(ls)
    }

    #[inline]
    fn vz_ln(&self, ls: f64) -> f64 {
        if self.z_active {
            ls.exp() * (1.0 - self.ratio(ls) / self.kappa)
        } else {
            0.0
        }
    }

    pub fn v_hat_derivs(&self, y: f64, z: f64) -> Result<DualDerivs> {
        let ls = self.check(y, z)?;
        Ok(self.derivs_ln(ls, z))
    }

    pub(crate) fn derivs_ln(&self, ls: f64, z: f64) -> DualDerivs {
        let y = ls.exp();
        let py = (-self.a * ls).exp();
        let (vyz, vyyz, vyyyz) = if self.z_active {
            let r = self.ratio(ls);
            let k = self.kappa;
            (1.0 - r, (1.0 - k) * r / y, (1.0 - k) * (k - 2.0) * r / (y * y))
        } else {
            (0.0, 0.0, 0.0)
        };
        DualDerivs {
            vy: -self.c1 * py + self.b_term + z * vyz,
            vyy: self.c2 * py / y + z * vyyz,
            vyz,
            vzz: 0.0,
            vyyy: -self.c2 * (self.a + 1.0) * py / (y * y) + z * vyyyz,
            vyyz,
            vz: self.vz_ln(ls),
        }
    }

    /// Returns (-v̂_y, d(-v̂_y)/d ln y) at y = e^s. Decreasing and convex in s.
    #[inline]
    pub fn neg_vy_ln(&self, s: f64, z: f64) -> (f64, f64) {
        let py = (-self.a * s).exp();
        if self.z_active && z != 0.0 {
            let r = self.ratio(s);
            (self.c1 * py - self.b_term + z * (r - 1.0), -(self.c2 * py + z * (1.0 - self.kappa) * r))
        } else {
            (self.c1 * py - self.b_term, -self.c2 * py)
        }
    }

    pub fn phi(&self, y: f64) -> Result<f64> {
        phi(y, self.p)
    }

    pub fn dual_pde_residual(&self, y: f64, z: f64) -> Result<f64> {
        let ls = self.check(y, z)?;
        let y = ls.exp();
        let v = self.v_hat_ln(ls, z);
        let d = self.derivs_ln(ls, z);
        let s2 = self.sigma_z * self.sigma_z;
        Ok(-self.rho * v + self.rho * y * d.vy + self.alpha * y * y * d.vyy + self.mu_z * z * d.vz + 0.5 * s2 * z * z * d.vzz
            - self.eta * z * y * d.vyz
            - (self.mu_z - self.eta) * z * y
            + phi(y, self.p)?)
    }

    /// The dual value in reflected coordinates, u(r, h) = v̂(beta e^{-r}, h),
    /// written out directly in r rather than through v̂.
    pub fn u_log_coords(&self, r: f64, h: f64) -> Result<f64> {
        if !(r >= 0.0) || !(h >= 0.0) {
            return Err(Error::DomainError(format!("(r, h) = ({r}, {h}) must be nonnegative")));
        }
        if self.beta.is_infinite() {
            return Err(Error::DomainError("reflected coordinates need a finite beta".into()));
        }
        let (p, beta, rho, k) = (self.p, self.beta, self.rho, self.kappa);
        let kk = self.rho * (1.0 - p) - self.alpha * p;
        let h_term = if self.z_active { (beta * (-r).exp() - beta / k * (-k * r).exp()) * h } else { 0.0 };
        let base = if self.log_branch {
            r / rho - (beta.ln() + 2.0) / rho + self.alpha / (rho * rho) + (-r).exp() / rho
        } else {
            let bq = beta.powf(-p / (1.0 - p));
            (1.0 - p).powi(3) / (p * kk) * bq * (p * r / (1.0 - p)).exp() + (1.0 - p).powi(2) / kk * bq * (-r).exp()
        };
        Ok(base + h_term)
    }
}
