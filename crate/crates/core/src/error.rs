use thiserror::Error;

/// Errors raised by the covariance engine, simulator and estimators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GwmError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("gamma function pole at x = {0}")]
    GammaPole(f64),

    #[error("infinite variance: alpha*gamma = {alpha_gamma} <= n/2 = {half_dim}")]
    InfiniteVariance { alpha_gamma: f64, half_dim: f64 },

    #[error("variance boundary: gamma = n/(2 alpha) exactly (alpha*gamma = {0})")]
    VarianceBoundary(f64),

    #[error("quadrature did not converge: estimate {value:e}, error estimate {abs_err:e} after {subdivisions} subdivisions")]
    Quadrature {
        value: f64,
        abs_err: f64,
        subdivisions: usize,
    },

    #[error("circulant embedding failed: clipped spectral mass fraction {0:e} exceeds 1e-3")]
    Embedding(f64),

    #[error("matrix not positive definite at step {0}")]
    NotPositiveDefinite(usize),

    #[error("correlation matrix singular at working precision: smallest prediction variance {min_innovation:e} below {resolution:e}")]
    IllConditioned { min_innovation: f64, resolution: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("optimization failed: {0}")]
    Optimization(String),

    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for GwmError {
    fn from(e: std::io::Error) -> Self {
        GwmError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, GwmError>;
