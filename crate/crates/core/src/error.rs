use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("volatility matrix is numerically singular (reciprocal condition number {rcond:.3e})")]
    SingularVolatility { rcond: f64 },

    #[error("kappa quadratic has negative discriminant {0:.6e}")]
    NegativeDiscriminant(f64),

    #[error("ill-posed problem: {0}")]
    IllPosed(String),

    #[error("argument must be positive, got {0}")]
    NonpositiveArgument(f64),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("could not bracket f for x = {x}, z = {z}")]
    BracketFailure { x: f64, z: f64 },

    #[error("regime undefined: {0}")]
    RegimeUndefined(String),

    #[error("policy evaluation failed at x = {x}, z = {z}: {reason}")]
    PolicyEvaluationError { x: f64, z: f64, reason: String },

    #[error("path {path} became non-finite at step {step}")]
    NonFinitePath { path: u64, step: usize },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("parameter document: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
