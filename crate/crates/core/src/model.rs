//! Problem data, parameter documents and the derived scalars the closed-form
//! solution is built from.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floatfmt;

/// Below this magnitude the CRRA exponent is treated as log utility.
pub const LOG_UTILITY_TOL: f64 = 1e-12;

/// Relative tolerance on the reciprocal condition number of sigma.
const SINGULAR_RCOND: f64 = 1e-10;

/// Relative slack used when comparing mu_Z against eta, so that presets with
/// mu_Z = eta in exact arithmetic land on kappa = 1.
const NEUTRAL_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketParams {
    pub mu: Vec<f64>,
    /// Row-major d x d volatility matrix.
    pub sigma: Vec<Vec<f64>>,
}

impl MarketParams {
    pub fn scalar(mu: f64, sigma: f64) -> Self {
        Self { mu: vec![mu], sigma: vec![vec![sigma]] }
    }

    pub fn d(&self) -> usize {
        self.mu.len()
    }

    fn sigma_matrix(&self) -> DMatrix<f64> {
        let d = self.d();
        DMatrix::from_fn(d, d, |i, j| self.sigma[i][j])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkParams {
    #[serde(rename = "mu_Z")]
    pub mu_z: f64,
    #[serde(rename = "sigma_Z")]
    pub sigma_z: f64,
    pub gamma: Vec<f64>,
}

impl BenchmarkParams {
    pub fn scalar(mu_z: f64, sigma_z: f64) -> Self {
        Self { mu_z, sigma_z, gamma: vec![1.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Preferences {
    pub rho: f64,
    pub p: f64,
    /// Cost of injected capital. `f64::INFINITY` switches to Merton mode.
    #[serde(with = "floatfmt::beta")]
    pub beta: f64,
    pub v0: f64,
    pub z0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub market: MarketParams,
    pub benchmark: BenchmarkParams,
    pub preferences: Preferences,
}

impl ModelParams {
    /// Parses a JSON parameter document. Errors carry the path of the
    /// offending key.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            if path == "." {
                Error::Parse(inner.to_string())
            } else {
                Error::Parse(format!("{path}: {inner}"))
            }
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("parameter document serializes")
    }

    /// Auxiliary initial state (v - z)^+.
    pub fn x0(&self) -> f64 {
        (self.preferences.v0 - self.preferences.z0).max(0.0)
    }

    /// Initial lump injection (z - v)^+.
    pub fn a0(&self) -> f64 {
        (self.preferences.z0 - self.preferences.v0).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivedCoefficients {
    pub alpha: f64,
    pub eta: f64,
    pub kappa: f64,
    #[serde(serialize_with = "floatfmt::ser")]
    pub kappa_hat: f64,
    #[serde(serialize_with = "floatfmt::ser")]
    pub p1: f64,
    pub p2: Option<f64>,
    #[serde(serialize_with = "floatfmt::ser")]
    pub cra: f64,
    /// Merton consumption-wealth constant (rho(1-p) - alpha p)/(1-p)^2.
    pub c_star: f64,
    pub rho0: f64,
    /// Alternative threshold from the appendix bound; reported only.
    pub rho0_appendix: f64,
    pub m_theta: f64,
    pub m_c: f64,
    pub x0: f64,
    /// Correlation between the hedging Brownian motion and the benchmark.
    pub varrho: f64,
}

/// Roots (kappa, kappa_hat) of alpha k^2 + (rho - eta - alpha) k + (mu_Z - rho) = 0.
///
/// Uses the cancellation-free form of the quadratic formula. With alpha = 0
/// the equation is linear and kappa_hat is -inf.
pub fn kappa_roots(alpha: f64, eta: f64, rho: f64, mu_z: f64) -> Result<(f64, f64)> {
    let b = rho - eta - alpha;
    let c = mu_z - rho;
    let disc = b * b - 4.0 * alpha * c;
    if disc < 0.0 {
        return Err(Error::NegativeDiscriminant(disc));
    }
    if (mu_z - eta).abs() <= NEUTRAL_TOL * mu_z.abs().max(1.0) {
        let kh = if alpha > 0.0 { c / alpha } else { f64::NEG_INFINITY };
        return Ok((1.0, kh));
    }
    if alpha == 0.0 {
        if b == 0.0 {
            return Err(Error::IllPosed("rho = eta with alpha = 0".into()));
        }
        return Ok((-c / b, f64::NEG_INFINITY));
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q / alpha, c / q) };
    Ok((r1.max(r2), r1.min(r2)))
}

struct LinearParts {
    alpha: f64,
    eta: f64,
    /// (sigma sigma^T)^{-1} mu
    m: DVector<f64>,
    /// (sigma sigma^T)^{-1} sigma_Z sigma gamma
    n: DVector<f64>,
    varrho: f64,
    mu_norm: f64,
    sst_norm: f64,
    szsg_norm: f64,
    szgsi_norm: f64,
}

fn check_inputs(market: &MarketParams, bench: &BenchmarkParams, prefs: &Preferences) -> Result<()> {
    let d = market.d();
    let bad = |name, reason: &str| Err(Error::InvalidParameter { name, reason: reason.to_string() });
    if d == 0 {
        return bad("market.mu", "need at least one asset");
    }
    if market.sigma.len() != d || market.sigma.iter().any(|r| r.len() != d) {
        return bad("market.sigma", "must be a d x d matrix matching market.mu");
    }
    if bench.gamma.len() != d {
        return bad("benchmark.gamma", "length must match market.mu");
    }
    let all_finite = market.mu.iter().chain(market.sigma.iter().flatten()).chain(bench.gamma.iter()).all(|v| v.is_finite());
    if !all_finite || !bench.mu_z.is_finite() || !bench.sigma_z.is_finite() {
        return bad("market", "entries must be finite");
    }
    let gnorm = bench.gamma.iter().map(|g| g * g).sum::<f64>().sqrt();
    if (gnorm - 1.0).abs() > 1e-12 {
        return bad("benchmark.gamma", "must have unit Euclidean norm");
    }
    if bench.sigma_z < 0.0 {
        return bad("benchmark.sigma_Z", "must be nonnegative");
    }
    if !(prefs.rho > 0.0) || !prefs.rho.is_finite() {
        return bad("preferences.rho", "must be positive and finite");
    }
    if !(prefs.p < 1.0) || !prefs.p.is_finite() {
        return bad("preferences.p", "must be finite and below 1");
    }
    if !(prefs.beta > 0.0) {
        return bad("preferences.beta", "must be positive (or \"inf\")");
    }
    if !(prefs.v0 >= 0.0) || !prefs.v0.is_finite() {
        return bad("preferences.v0", "must be nonnegative");
    }
    if !(prefs.z0 >= 0.0) || !prefs.z0.is_finite() {
        return bad("preferences.z0", "must be nonnegative");
    }
    Ok(())
}

fn linear_parts(market: &MarketParams, bench: &BenchmarkParams) -> Result<LinearParts> {
    let sigma = market.sigma_matrix();
    let sv = sigma.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let rcond = if smax > 0.0 { smin / smax } else { 0.0 };
    if !(rcond > SINGULAR_RCOND) {
        return Err(Error::SingularVolatility { rcond });
    }
    let sigma_inv = sigma.clone().try_inverse().ok_or(Error::SingularVolatility { rcond })?;
    let mu = DVector::from_column_slice(&market.mu);
    let gamma = DVector::from_column_slice(&bench.gamma);
    let lambda = &sigma_inv * &mu;
    let sigma_inv_t = sigma_inv.transpose();
    let alpha = 0.5 * lambda.norm_squared();
    let eta = bench.sigma_z * gamma.dot(&lambda);
    let m = &sigma_inv_t * &lambda;
    let sit_gamma = &sigma_inv_t * &gamma;
    let n = &sit_gamma * bench.sigma_z;
    let lnorm = lambda.norm();
    let varrho = if lnorm > 0.0 { gamma.dot(&lambda) / lnorm } else { 0.0 };
    let sst = &sigma * sigma.transpose();
    Ok(LinearParts {
        alpha,
        eta,
        m,
        n,
        varrho,
        mu_norm: mu.norm(),
        sst_norm: sst.norm(),
        szsg_norm: bench.sigma_z * (&sigma * &gamma).norm(),
        szgsi_norm: bench.sigma_z * sit_gamma.norm(),
    })
}

/// Effective CRRA exponent after the log-utility snap.
pub fn effective_p(p: f64) -> f64 {
    if p.abs() < LOG_UTILITY_TOL {
        0.0
    } else {
        p
    }
}

pub fn derive(market: &MarketParams, bench: &BenchmarkParams, prefs: &Preferences) -> Result<DerivedCoefficients> {
    check_inputs(market, bench, prefs)?;
    let lin = linear_parts(market, bench)?;
    derive_from(&lin, market, bench, prefs)
}

fn derive_from(lin: &LinearParts, market: &MarketParams, bench: &BenchmarkParams, prefs: &Preferences) -> Result<DerivedCoefficients> {
    let (alpha, eta) = (lin.alpha, lin.eta);
    let rho = prefs.rho;
    let p = effective_p(prefs.p);
    let beta = prefs.beta;
    let mu_z = bench.mu_z;
    let sigma_z = bench.sigma_z;

    let (kappa, kappa_hat) = kappa_roots(alpha, eta, rho, mu_z)?;

    if rho <= mu_z {
        return Err(Error::IllPosed(format!("rho > mu_Z violated ({rho} <= {mu_z})")));
    }
    let k = rho * (1.0 - p) - alpha * p;
    if k <= 0.0 {
        return Err(Error::IllPosed(format!("rho(1-p) > alpha p violated (rho(1-p) - alpha p = {k})")));
    }
    if mu_z < eta && kappa != 1.0 {
        return Err(Error::IllPosed(format!("mu_Z >= eta violated ({mu_z} < {eta})")));
    }

    let (p1, cra) = if kappa < 1.0 {
        (-kappa / (1.0 - kappa), 1.0 / (1.0 - kappa))
    } else {
        (f64::NEG_INFINITY, f64::INFINITY)
    };

    let p2 = if market.d() == 1 && bench.gamma[0] == 1.0 {
        let (mu, sigma) = (market.mu[0], market.sigma[0][0]);
        let den = mu * (1.0 - kappa) + sigma * sigma_z;
        (den != 0.0).then(|| (sigma * sigma_z - mu * kappa) / den)
    } else {
        None
    };

    let a = 1.0 / (1.0 - p);
    let c_star = k / ((1.0 - p) * (1.0 - p));
    let beta_half_term = if beta.is_infinite() { 0.0 } else { (beta / 2.0).powf(-a) };
    let kappa_frac = if kappa < 1.0 {
        (1.0 - kappa) / (1.0 - 2f64.powf(kappa - 1.0))
    } else {
        1.0 / std::f64::consts::LN_2
    };
    let m_theta = lin.m.norm()
        * (beta_half_term
            + (1.0 - kappa) * 2f64.powf(1.0 - kappa)
            + 1.0 / ((1.0 - p) * (1.0 - 2f64.powf(-a)))
            + kappa_frac)
        + 2.0 * lin.szgsi_norm;
    let m_c = beta_half_term + c_star / (1.0 - 2f64.powf(-a));

    let lead = (alpha * p.abs() + 1.0) / (1.0 - p);
    let rho0 = lead
        + 3.0 * mu_z.abs()
        + 4.0 * sigma_z * sigma_z
        + 4.0 * m_theta * lin.mu_norm
        + 2.0 * m_theta * m_theta * lin.sst_norm
        + 4.0 * m_theta * lin.szsg_norm
        + 1.0;
    let k_app = 4.0 * m_theta * lin.mu_norm
        + 2.0 * m_theta * m_theta * lin.sst_norm
        + mu_z.abs()
        + sigma_z * sigma_z
        + 4.0 * m_theta * lin.szsg_norm;
    let rho0_appendix = lead + 2.0 * mu_z.abs() + 3.0 * sigma_z * sigma_z + k_app + 1.0;

    Ok(DerivedCoefficients {
        alpha,
        eta,
        kappa,
        kappa_hat,
        p1,
        p2,
        cra,
        c_star,
        rho0,
        rho0_appendix,
        m_theta,
        m_c,
        x0: (prefs.v0 - prefs.z0).max(0.0),
        varrho: lin.varrho,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition {
    pub name: &'static str,
    pub passed: bool,
    pub severity: Severity,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidityReport {
    pub conditions: Vec<Condition>,
    /// mu_Z = eta, so kappa = 1 and p1 is undefined.
    pub kappa_boundary: bool,
    /// beta = inf: injection is never optimal to pay for.
    pub merton_mode: bool,
}

impl ValidityReport {
    pub fn has_errors(&self) -> bool {
        self.conditions.iter().any(|c| !c.passed && c.severity == Severity::Error)
    }

    pub fn has_warnings(&self) -> bool {
        self.conditions.iter().any(|c| !c.passed && c.severity == Severity::Warning)
    }
}

pub fn validate(bench: &BenchmarkParams, prefs: &Preferences, derived: &DerivedCoefficients) -> ValidityReport {
    let rho = prefs.rho;
    let p = effective_p(prefs.p);
    let mu_z = bench.mu_z;
    let k = rho * (1.0 - p) - derived.alpha * p;
    let cond = |name, passed, severity, detail: String| Condition { name, passed, severity, detail };
    let conditions = vec![
        cond("rho > mu_Z", rho > mu_z, Severity::Error, format!("rho = {rho}, mu_Z = {mu_z}")),
        cond("rho(1-p) > alpha p", k > 0.0, Severity::Error, format!("rho(1-p) - alpha p = {k}")),
        cond(
            "mu_Z >= eta",
            mu_z >= derived.eta || derived.kappa == 1.0,
            Severity::Error,
            format!("mu_Z = {mu_z}, eta = {}", derived.eta),
        ),
        cond("rho > rho0", rho > derived.rho0, Severity::Warning, format!("rho = {rho}, rho0 = {}", derived.rho0)),
    ];
    ValidityReport { conditions, kappa_boundary: derived.kappa == 1.0, merton_mode: prefs.beta.is_infinite() }
}

/// Validated model: parameters plus every cached coefficient. Immutable.
#[derive(Debug, Clone)]
pub struct Model {
    pub params: ModelParams,
    pub derived: DerivedCoefficients,
    /// Effective CRRA exponent (0 for log utility).
    pub p: f64,
    /// (sigma sigma^T)^{-1} mu
    pub m: Vec<f64>,
    /// (sigma sigma^T)^{-1} sigma_Z sigma gamma
    pub n: Vec<f64>,
}

impl Model {
    pub fn new(params: ModelParams) -> Result<Self> {
        check_inputs(&params.market, &params.benchmark, &params.preferences)?;
        let lin = linear_parts(&params.market, &params.benchmark)?;
        let derived = derive_from(&lin, &params.market, &params.benchmark, &params.preferences)?;
        if params.preferences.beta.is_infinite() && derived.kappa < 1.0 {
            return Err(Error::IllPosed("beta = inf requires kappa = 1 (mu_Z = eta)".into()));
        }
        let p = effective_p(params.preferences.p);
        Ok(Self { m: lin.m.as_slice().to_vec(), n: lin.n.as_slice().to_vec(), params, derived, p })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::new(ModelParams::from_json(text)?)
    }

    pub fn validity(&self) -> ValidityReport {
        validate(&self.params.benchmark, &self.params.preferences, &self.derived)
    }

    pub fn d(&self) -> usize {
        self.params.market.d()
    }

    pub fn rho(&self) -> f64 {
        self.params.preferences.rho
    }

    pub fn beta(&self) -> f64 {
        self.params.preferences.beta
    }

    pub fn kappa(&self) -> f64 {
        self.derived.kappa
    }

    pub fn mu_z(&self) -> f64 {
        self.params.benchmark.mu_z
    }

    pub fn sigma_z(&self) -> f64 {
        self.params.benchmark.sigma_z
    }

    /// K = rho(1-p) - alpha p.
    pub fn k(&self) -> f64 {
        self.rho() * (1.0 - self.p) - self.derived.alpha * self.p
    }

    pub fn is_log(&self) -> bool {
        self.p == 0.0
    }

    /// Scalar (mu, sigma) when the model is one-dimensional with gamma = 1.
    pub fn scalar_market(&self) -> Option<(f64, f64)> {
        let mk = &self.params.market;
        (mk.d() == 1 && self.params.benchmark.gamma[0] == 1.0).then(|| (mk.mu[0], mk.sigma[0][0]))
    }

    /// Returns a copy with one preference or benchmark field replaced.
    pub fn with_params(&self, edit: impl FnOnce(&mut ModelParams)) -> Result<Self> {
        let mut params = self.params.clone();
        edit(&mut params);
        Self::new(params)
    }
}
