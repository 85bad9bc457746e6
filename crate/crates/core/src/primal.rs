//! Primal value and feedback controls obtained by inverting the dual.

use serde::Serialize;

use crate::dual::{utility, DualSurface};
use crate::error::{Error, Result};
use crate::model::Model;

/// Tie tolerance for classifying p against p1 and p2.
pub const REGIME_TOL: f64 = 1e-10;

const MAX_HALVINGS: usize = 1024;
const MAX_ITER: usize = 200;
/// Stop once the Newton step in ln y is this small, i.e. |dy| < 1e-14 beta.
const STEP_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyPoint {
    pub x: f64,
    pub z: f64,
    pub f: f64,
    pub value: f64,
    pub theta: Vec<f64>,
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    AboveP1,
    AtP1,
    BelowP1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticRatios {
    pub theta_ratio: f64,
    pub c_ratio: f64,
    pub regime: Regime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Convexity {
    StrictlyConvex,
    StrictlyConcave,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeDiagnostics {
    pub c_convexity: Convexity,
    pub theta_convexity: Convexity,
    pub p1: f64,
    pub p2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Envelopes {
    pub theta_bound: f64,
    pub c_bound: f64,
    #[serde(serialize_with = "crate::floatfmt::ser")]
    pub lipschitz_x: f64,
    pub lipschitz_z: Option<f64>,
}

/// Solver state carried along a simulated path: the last root and the
/// partial derivatives of -v̂_y there, used to predict the next root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarmStart {
    s: f64,
    x: f64,
    z: f64,
    gs: f64,
    gz: f64,
}

impl Default for WarmStart {
    fn default() -> Self {
        Self { s: f64::NAN, x: f64::NAN, z: f64::NAN, gs: f64::NAN, gz: f64::NAN }
    }
}

/// Primal solver for one model. Cheap to clone and safe to share.
#[derive(Debug, Clone)]
pub struct Primal {
    pub model: Model,
    pub dual: DualSurface,
}

impl Primal {
    pub fn new(model: &Model) -> Self {
        Self { model: model.clone(), dual: DualSurface::new(model) }
    }

    fn check_state(x: f64, z: f64) -> Result<()> {
        if !(x >= 0.0) || !x.is_finite() || !(z >= 0.0) || !z.is_finite() {
            return Err(Error::DomainError(format!("(x, z) = ({x}, {z}) must be finite and nonnegative")));
        }
        Ok(())
    }

    /// The dual optimizer f(x, z) = v_x(x, z), the root of -v̂_y(f, z) = x.
    pub fn solve_f(&self, x: f64, z: f64) -> Result<f64> {
        self.solve_f_hint(x, z, None)
    }

    /// As [`Primal::solve_f`], starting Newton from `hint` when given.
    pub fn solve_f_hint(&self, x: f64, z: f64, hint: Option<f64>) -> Result<f64> {
        Self::check_state(x, z)?;
        let beta = self.dual.beta;
        if x == 0.0 {
            return Ok(beta);
        }
        let d = &self.dual;
        // z-free part inverted exactly; exact answer when the z-term is absent
        let s_pow = -(x / d.c1() + d.b_term() / d.c1()).ln() / d.a();
        if z == 0.0 || !d.z_active() {
            return Ok(s_pow.exp());
        }
        Ok(self.newton(x, z, s_pow, hint.map(f64::ln))?.exp())
    }

    /// Safeguarded Newton on g(s) = -v̂_y(e^s, z) - x, which is decreasing and
    /// convex, so every step from the left of the root stays on the left.
    fn newton(&self, x: f64, z: f64, s_pow: f64, hint: Option<f64>) -> Result<f64> {
        let d = &self.dual;
        let k = d.kappa();
        let mut hi = d.ln_beta();
        // each part alone already exceeds x at its own inverse, so both are left brackets
        let s_z = d.ln_beta() + (1.0 + x / z).ln() / (k - 1.0);
        let mut lo = s_pow.max(s_z).min(hi);
        if !(d.neg_vy_ln(lo, z).0 >= x) {
            lo = d.ln_beta();
            let mut found = false;
            for _ in 0..MAX_HALVINGS {
                lo -= std::f64::consts::LN_2;
                if d.neg_vy_ln(lo, z).0 >= x {
                    found = true;
                    break;
                }
            }
            if !found {
                return Err(Error::BracketFailure { x, z });
            }
        }
        let mut s = match hint {
            Some(h) if h.is_finite() && h > lo && h < hi => h,
            _ => lo,
        };
        for _ in 0..MAX_ITER {
            let (g, dg) = d.neg_vy_ln(s, z);
            let r = g - x;
            if r == 0.0 {
                return Ok(s);
            }
            if r > 0.0 {
                lo = s;
            } else {
                hi = s;
            }
            let mut next = s - r / dg;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - s).abs() < STEP_TOL || hi - lo < STEP_TOL {
                return Ok(next);
            }
            s = next;
        }
        Err(Error::BracketFailure { x, z })
    }

    /// Scalar controls (theta*, c*) along a path. Newton starts from the
    /// first-order prediction of the root out of `warm`; the final step is
    /// below 1e-7 in ln f, so the error left after it is at rounding level
    /// and the controls are corrected to the stepped point to first order.
    pub fn controls_tracked(&self, x: f64, z: f64, warm: &mut WarmStart) -> Result<(f64, f64)> {
        Self::check_state(x, z)?;
        let d = &self.dual;
        let ln_beta = d.ln_beta();
        let mut s = if x == 0.0 {
            ln_beta
        } else if warm.s.is_finite() {
            (warm.s + (x - warm.x - warm.gz * (z - warm.z)) / warm.gs).min(ln_beta)
        } else {
            self.solve_f(x, z)?.ln()
        };
        let k = d.kappa();
        for _ in 0..MAX_ITER {
            let py = (-d.a() * s).exp();
            let r = d.ratio(s);
            let zr = if d.z_active() { z * r } else { 0.0 };
            let g = d.c1() * py - d.b_term() + zr - if d.z_active() { z } else { 0.0 };
            let gs = -(d.c2() * py + (1.0 - k) * zr);
            let step = if x == 0.0 { 0.0 } else { (g - x) / gs };
            if !step.is_finite() {
                break;
            }
            if step.abs() < 1e-7 {
                let next = (s - step).min(ln_beta);
                let ds = next - s;
                let c = py * (1.0 - d.a() * ds);
                let zr = z * r * (1.0 + (k - 1.0) * ds);
                *warm = WarmStart { s: next, x, z, gs, gz: if d.z_active() { r - 1.0 } else { 0.0 } };
                let lead = d.c2() * c + (1.0 - k) * zr;
                return Ok((self.model.m[0] * lead + self.model.n[0] * zr, c));
            }
            s = (s - step).min(ln_beta);
        }
        // prediction was unusable; restart from the bracketed solver
        let f = self.solve_f(x, z)?;
        *warm = WarmStart::default();
        Ok(self.controls_scalar(z, f))
    }

    /// v(x, z) = v̂(f, z) + x f.
    pub fn value(&self, x: f64, z: f64) -> Result<f64> {
        let f = self.solve_f(x, z)?;
        Ok(self.value_at(x, z, f))
    }

    fn value_at(&self, x: f64, z: f64, f: f64) -> f64 {
        if f.is_infinite() {
            // Merton mode at zero wealth: consumption is forced to zero
            return utility(0.0, self.dual.p) / self.dual.rho;
        }
        self.dual.v_hat_ln(f.ln(), z) + x * f
    }

    /// Value in original wealth coordinates, w(v, z) = v((v-z)^+, z) - beta (z-v)^+.
    pub fn w_value(&self, v0: f64, z: f64) -> Result<f64> {
        let short = (z - v0).max(0.0);
        let cost = if short == 0.0 { 0.0 } else { self.dual.beta * short };
        Ok(self.value((v0 - z).max(0.0), z)? - cost)
    }

    pub fn policy(&self, x: f64, z: f64) -> Result<PolicyPoint> {
        self.policy_hint(x, z, None)
    }

    pub fn policy_hint(&self, x: f64, z: f64, hint: Option<f64>) -> Result<PolicyPoint> {
        let f = self.solve_f_hint(x, z, hint)?;
        let (theta, c) = self.controls_at(z, f);
        Ok(PolicyPoint { x, z, f, value: self.value_at(x, z, f), theta, c })
    }

    /// (theta*, c*) at dual point f, for any dimension.
    pub fn controls_at(&self, z: f64, f: f64) -> (Vec<f64>, f64) {
        let (lead, hedge, c) = self.control_parts(z, f);
        let theta = self.model.m.iter().zip(&self.model.n).map(|(m, n)| m * lead + n * hedge).collect();
        (theta, c)
    }

    /// Scalar controls for d = 1 without allocating.
    #[inline]
    pub fn controls_scalar(&self, z: f64, f: f64) -> (f64, f64) {
        let (lead, hedge, c) = self.control_parts(z, f);
        (self.model.m[0] * lead + self.model.n[0] * hedge, c)
    }

    /// Returns (f v̂_yy, z (f/beta)^{kappa-1}, c).
    #[inline]
    fn control_parts(&self, z: f64, f: f64) -> (f64, f64, f64) {
        let d = &self.dual;
        if f.is_infinite() {
            return (0.0, 0.0, 0.0);
        }
        let ls = f.ln();
        let c = (-d.a() * ls).exp();
        let zr = z * d.ratio(ls);
        (d.c2() * c + (1.0 - d.kappa()) * zr, zr, c)
    }

    /// Classical Merton pair (mu x/(sigma^2 (1-p)), C* x), generalized to d assets.
    pub fn merton_policy(&self, x: f64) -> (Vec<f64>, f64) {
        let p = self.model.p;
        let theta = self.model.m.iter().map(|m| m * x / (1.0 - p)).collect();
        (theta, self.model.derived.c_star * x)
    }

    /// At p = p1 the inversion is explicit: c* = f^{kappa-1} is a rational
    /// function of (x, z) and theta* is linear in it.
    pub fn critical_policy(&self, x: f64, z: f64) -> Result<(Vec<f64>, f64)> {
        Self::check_state(x, z)?;
        let dc = &self.model.derived;
        if !((self.model.p - dc.p1).abs() < REGIME_TOL) {
            return Err(Error::DomainError(format!("explicit formulas need p = p1 = {}", dc.p1)));
        }
        let p = self.model.p;
        let k = self.model.k();
        let beta = self.model.beta();
        let q = (1.0 - p) * (1.0 - p);
        let ba = beta.powf(1.0 / (1.0 - p));
        let u = (k * (x + z) + q / ba) / (q + k * ba * z);
        let lead = (1.0 - p) / k + (1.0 - dc.kappa) * ba * z;
        let theta = self.model.m.iter().zip(&self.model.n).map(|(m, n)| (m * lead + n * z * ba) * u).collect();
        Ok((theta, u))
    }

    fn scalar_regime_data(&self) -> Result<(f64, f64)> {
        let (mu, sigma) = self
            .model
            .scalar_market()
            .ok_or_else(|| Error::RegimeUndefined("requires d = 1 and gamma = 1".into()))?;
        if !(mu > 0.0) {
            return Err(Error::RegimeUndefined("requires mu > 0".into()));
        }
        if self.model.kappa() >= 1.0 {
            return Err(Error::RegimeUndefined("kappa = 1, so p1 is undefined".into()));
        }
        Ok((mu, sigma))
    }

    pub fn asymptotic_ratios(&self, z: f64) -> Result<AsymptoticRatios> {
        let (mu, sigma) = self.scalar_regime_data()?;
        if !(z > 0.0) {
            return Err(Error::DomainError(format!("z = {z} must be positive")));
        }
        let dc = &self.model.derived;
        let p = self.model.p;
        let c_star = dc.c_star;
        let s2 = sigma * sigma;
        let sz = self.model.sigma_z();
        let regime = classify(p, dc.p1);
        let (theta_ratio, c_ratio) = match regime {
            Regime::AboveP1 => (mu / (s2 * (1.0 - p)), c_star),
            Regime::AtP1 => {
                let cb = c_star * self.model.beta().powf(1.0 / (1.0 - dc.p1)) * z;
                (mu / (s2 * (1.0 - dc.p1)) + sz / sigma * cb / (1.0 + cb), c_star / (1.0 + cb))
            }
            Regime::BelowP1 => (mu / (s2 * (1.0 - dc.p1)) + sz / sigma, 0.0),
        };
        Ok(AsymptoticRatios { theta_ratio, c_ratio, regime })
    }

    pub fn regime_diagnostics(&self, z: f64) -> Result<RegimeDiagnostics> {
        let (mu, sigma) = self.scalar_regime_data()?;
        if !(z >= 0.0) {
            return Err(Error::DomainError(format!("z = {z} must be nonnegative")));
        }
        let dc = &self.model.derived;
        let p = self.model.p;
        let p2 = dc.p2.ok_or_else(|| Error::RegimeUndefined("p2 undefined".into()))?;
        debug_assert!(sigma != 0.0 && mu != 0.0);
        let c_convexity = match classify(p, dc.p1) {
            Regime::AboveP1 => Convexity::StrictlyConvex,
            Regime::AtP1 => Convexity::Linear,
            Regime::BelowP1 => Convexity::StrictlyConcave,
        };
        let theta_convexity = if (p - dc.p1).abs() < REGIME_TOL || (p - p2).abs() < REGIME_TOL {
            Convexity::Linear
        } else if p < dc.p1 || p > p2 {
            Convexity::StrictlyConvex
        } else {
            Convexity::StrictlyConcave
        };
        Ok(RegimeDiagnostics { c_convexity, theta_convexity, p1: dc.p1, p2 })
    }

    /// Closed-form floor on the expected discounted injection under the
    /// optimal strategy, starting from wealth v0 and benchmark z.
    pub fn injection_lower_bound(&self, v0: f64, z: f64) -> Result<f64> {
        if !(z > 0.0) {
            return Err(Error::DomainError(format!("z = {z} must be positive")));
        }
        if !(v0 >= 0.0) {
            return Err(Error::DomainError(format!("v0 = {v0} must be nonnegative")));
        }
        let k = self.model.kappa();
        if k >= 1.0 {
            return Err(Error::DomainError("needs mu_Z > eta".into()));
        }
        let x = (v0 - z).max(0.0);
        Ok(z * (1.0 - k) / k * (1.0 + x / z).powf(k / (k - 1.0)))
    }

    pub fn growth_envelopes(&self, x: f64, z: f64) -> Envelopes {
        let dc = &self.model.derived;
        let beta = self.model.beta();
        let (rho, mu_z, sz) = (self.model.rho(), self.model.mu_z(), self.model.sigma_z());
        let gap = rho - 2.0 * mu_z - sz * sz;
        let lipschitz_z = (gap > 0.0 && beta.is_finite()).then(|| beta * (sz * sz + mu_z.abs() / (rho - mu_z) + 3.0 / gap));
        Envelopes {
            theta_bound: dc.m_theta * (1.0 + x + z),
            c_bound: dc.m_c * (1.0 + x + z),
            lipschitz_x: beta,
            lipschitz_z,
        }
    }

    /// HJB residual of the primal problem with both suprema evaluated at
    /// (theta*, c*). Derivatives of v come from the dual through the
    /// Legendre relations.
    pub fn primal_hjb_residual(&self, x: f64, z: f64) -> Result<f64> {
        let f = self.solve_f(x, z)?;
        let dv = self.dual.derivs_ln(f.ln(), z);
        let v = self.value_at(x, z, f);
        let vx = f;
        let vxx = -1.0 / dv.vyy;
        let vxz = -dv.vyz / dv.vyy;
        let vz = dv.vz;
        let vzz = dv.vzz - dv.vyz * dv.vyz / dv.vyy;
        let (theta, c) = self.controls_at(z, f);
        let mk = &self.model.params.market;
        let gamma = &self.model.params.benchmark.gamma;
        let d = mk.d();
        let (sz, mu_z, rho) = (self.model.sigma_z(), self.model.mu_z(), self.model.rho());
        // sigma^T theta and (sigma gamma)
        let st: Vec<f64> = (0..d).map(|j| (0..d).map(|i| mk.sigma[i][j] * theta[i]).sum()).collect();
        let sg: Vec<f64> = (0..d).map(|i| (0..d).map(|j| mk.sigma[i][j] * gamma[j]).sum()).collect();
        let t_mu: f64 = theta.iter().zip(&mk.mu).map(|(t, m)| t * m).sum();
        let quad: f64 = st.iter().map(|s| s * s).sum();
        let t_sg: f64 = theta.iter().zip(&sg).map(|(t, s)| t * s).sum();
        Ok(t_mu * vx + 0.5 * quad * vxx + t_sg * sz * z * (vxz - vxx) + utility(c, self.model.p) - c * vx
            - sz * sz * z * z * vxz
            + 0.5 * sz * sz * z * z * (vxx + vzz)
            + mu_z * z * (vz - vx)
            - rho * v)
    }
}

fn classify(p: f64, p1: f64) -> Regime {
    if (p - p1).abs() < REGIME_TOL {
        Regime::AtP1
    } else if p > p1 {
        Regime::AboveP1
    } else {
        Regime::BelowP1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BenchmarkParams, MarketParams, ModelParams, Preferences};

    fn model(p: f64, mu_z: f64, sigma_z: f64, beta: f64) -> Model {
        Model::new(ModelParams {
            market: MarketParams::scalar(1.5, 2.0),
            benchmark: BenchmarkParams::scalar(mu_z, sigma_z),
            preferences: Preferences { rho: 4.0, p, beta, v0: 2.0, z0: 0.8 },
        })
        .unwrap()
    }

    /// Plain bisection on y directly, used as an independent oracle.
    fn bisect_f(pr: &Primal, x: f64, z: f64) -> f64 {
        let beta = pr.model.beta();
        let g = |y: f64| -pr.dual.v_hat_derivs(y, z).unwrap().vy - x;
        let mut lo = beta / 2.0;
        while g(lo) < 0.0 {
            lo /= 2.0;
        }
        let mut hi = beta;
        while hi - lo > 1e-14 * beta {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn zero_wealth_returns_beta() {
        let pr = Primal::new(&model(-1.0, 1.7, 1.0, 2.0));
        for z in [0.0, 0.5, 3.0] {
            assert_eq!(pr.solve_f(0.0, z).unwrap(), 2.0);
        }
    }

    #[test]
    fn closed_form_at_zero_benchmark() {
        for p in [-2.0, 0.0, 0.5] {
            let m = model(p, 1.7, 1.0, 2.0);
            let pr = Primal::new(&m);
            let k = m.k();
            for x in [0.01, 1.0, 30.0] {
                let expect = (x * k / (1.0 - p).powi(2) + 2f64.powf(-1.0 / (1.0 - p))).powf(-(1.0 - p));
                let f = pr.solve_f(x, 0.0).unwrap();
                assert!((f - expect).abs() < 1e-13 * expect, "p={p} x={x}");
            }
        }
    }

    #[test]
    fn newton_matches_bisection() {
        for p in [-2.6, -0.5, 0.0, 0.6] {
            let pr = Primal::new(&model(p, 1.7, 1.0, 2.0));
            for &(x, z) in &[(1.0, 1.0), (1e-6, 4.0), (50.0, 0.3), (0.3, 50.0), (1e5, 1.0)] {
                let f = pr.solve_f(x, z).unwrap();
                let o = bisect_f(&pr, x, z);
                assert!((f - o).abs() < 1e-12 * 2.0, "p={p} x={x} z={z} f={f} oracle={o}");
                let back = -pr.dual.v_hat_derivs(f, z).unwrap().vy;
                assert!((back - x).abs() < 1e-10 * (1.0 + x));
            }
        }
    }

    #[test]
    fn hints_do_not_change_the_root() {
        let pr = Primal::new(&model(-1.0, 1.7, 1.0, 2.0));
        let f = pr.solve_f(2.0, 1.0).unwrap();
        for h in [1e-9, 0.1, f * 1.01, f * 0.99, 1.99, 2.0, f64::NAN] {
            let g = pr.solve_f_hint(2.0, 1.0, Some(h)).unwrap();
            assert!((f - g).abs() < 1e-13, "hint {h}");
        }
    }

    #[test]
    fn value_derivative_is_f() {
        let pr = Primal::new(&model(-1.0, 1.7, 1.0, 2.0));
        for &(x, z) in &[(0.5, 0.5), (2.0, 1.0), (7.0, 3.0)] {
            let h = 1e-5;
            let fd = (pr.value(x + h, z).unwrap() - pr.value(x - h, z).unwrap()) / (2.0 * h);
            let f = pr.solve_f(x, z).unwrap();
            assert!((fd - f).abs() < 1e-6 * f);
        }
        let h = 1e-7;
        let fd = (pr.value(h, 1.0).unwrap() - pr.value(0.0, 1.0).unwrap()) / h;
        assert!((fd - 2.0).abs() < 1e-6 * 2.0);
    }

    #[test]
    fn w_value_corrections() {
        let pr = Primal::new(&model(-1.0, 1.7, 1.0, 2.0));
        assert_eq!(pr.w_value(1.0, 1.0).unwrap(), pr.value(0.0, 1.0).unwrap());
        assert_eq!(pr.w_value(0.0, 1.0).unwrap(), pr.value(0.0, 1.0).unwrap() - 2.0);
        assert_eq!(pr.w_value(2.0, 0.8).unwrap(), pr.value(1.2, 0.8).unwrap());
    }

    #[test]
    fn policy_at_zero_wealth() {
        let m = model(-1.0, 1.7, 1.0, 2.0);
        let pr = Primal::new(&m);
        let (p, k, kap) = (-1.0f64, m.k(), m.kappa());
        let (mu, sigma, sz) = (1.5, 2.0, 1.0);
        for z in [0.0, 0.8, 2.0] {
            let pt = pr.policy(0.0, z).unwrap();
            let c = 2f64.powf(1.0 / (p - 1.0));
            let th = mu / (sigma * sigma) * ((1.0 - p) / k * c + (1.0 - kap) * z) + sz / sigma * z;
            assert!((pt.c - c).abs() < 1e-15);
            assert!((pt.theta[0] - th).abs() < 1e-14);
        }
    }

    #[test]
    fn hjb_residual_small() {
        for p in [-2.0, 0.0, 0.5] {
            let pr = Primal::new(&model(p, 1.7, 1.0, 2.0));
            for &(x, z) in &[(0.1, 0.1), (1.0, 1.0), (5.0, 0.8), (20.0, 4.0)] {
                let r = pr.primal_hjb_residual(x, z).unwrap();
                let v = pr.value(x, z).unwrap();
                assert!(r.abs() < 1e-8 * (1.0 + (4.0 * v).abs()), "p={p} x={x} z={z} r={r}");
            }
        }
    }

    #[test]
    fn merton_limit() {
        let m = model(0.5, 0.0, 0.0, f64::INFINITY);
        let pr = Primal::new(&m);
        for x in [0.1, 1.0, 10.0] {
            let pt = pr.policy(x, 1.0).unwrap();
            let (th, c) = pr.merton_policy(x);
            assert!((pt.c - c).abs() <= 1e-12 * c);
            assert!((pt.theta[0] - th[0]).abs() <= 1e-12 * th[0]);
        }
        let pt = pr.policy(0.0, 1.0).unwrap();
        assert_eq!((pt.c, pt.theta[0], pt.value), (0.0, 0.0, 0.0));
    }

    #[test]
    fn injection_bound_shape() {
        let pr = Primal::new(&model(-1.0, 1.7, 1.0, 2.0));
        let k = pr.model.kappa();
        assert!((pr.injection_lower_bound(0.5, 0.8).unwrap() - 0.8 * (1.0 - k) / k).abs() < 1e-15);
        let b = pr.injection_lower_bound(2.0, 0.8).unwrap();
        let expect = 0.8 * (1.0 - k) / k * 2.5f64.powf(k / (k - 1.0));
        assert!((b - expect).abs() < 1e-15);
        assert!(pr.injection_lower_bound(3.0, 0.8).unwrap() < b);
        assert!(matches!(pr.injection_lower_bound(1.0, 0.0), Err(Error::DomainError(_))));
    }
}
