//! The four-parameter time-series family `Ĉ(t) = K² C_{α,γ}(ℓ t)` with
//! `λ = 1`, `n = 1`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{covariance_with, variance, CovarianceTable, ModelParams};
use crate::error::{GwmError, Result};
use crate::quad::QuadConfig;

/// Shape parameters `θ' = (α, γ, ℓ)`; the correlation depends on nothing else.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeParams {
    pub alpha: f64,
    pub gamma: f64,
    pub ell: f64,
}

impl ShapeParams {
    pub fn new(alpha: f64, gamma: f64, ell: f64) -> Result<Self> {
        let s = ShapeParams { alpha, gamma, ell };
        s.validate()?;
        Ok(s)
    }

    pub fn model(&self) -> Result<ModelParams> {
        ModelParams::new(self.alpha, self.gamma, 1.0, 1)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ell > 0.0) || !self.ell.is_finite() {
            return Err(GwmError::InvalidParameter(format!("ell must be > 0, got {}", self.ell)));
        }
        self.model()?.require_finite_variance()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtendedParams {
    pub alpha: f64,
    pub gamma: f64,
    /// Amplitude.
    pub k: f64,
    /// Time rescaling.
    pub ell: f64,
    /// Variance `Ĉ(0)`, tied to `K` by
    /// `s² = K²/(2πα) Γ(1/(2α)) Γ(γ - 1/(2α)) / Γ(γ)`.
    pub s2: f64,
}

impl ExtendedParams {
    /// From `(α, γ, K, ℓ)`, filling in `s²`.
    pub fn new(alpha: f64, gamma: f64, k: f64, ell: f64) -> Result<Self> {
        let shape = ShapeParams::new(alpha, gamma, ell)?;
        if !(k > 0.0) || !k.is_finite() {
            return Err(GwmError::InvalidParameter(format!("K must be > 0, got {k}")));
        }
        let s2 = k * k * variance(&shape.model()?)?;
        Ok(ExtendedParams { alpha, gamma, k, ell, s2 })
    }

    /// From `(α, γ, ℓ, s²)`, solving the variance identity for `K`.
    pub fn from_profile(alpha: f64, gamma: f64, ell: f64, s2: f64) -> Result<Self> {
        let shape = ShapeParams::new(alpha, gamma, ell)?;
        if !(s2 >= 0.0) || !s2.is_finite() {
            return Err(GwmError::InvalidParameter(format!("s2 must be >= 0, got {s2}")));
        }
        let k = (s2 / variance(&shape.model()?)?).sqrt();
        Ok(ExtendedParams { alpha, gamma, k, ell, s2 })
    }

    pub fn shape(&self) -> ShapeParams {
        ShapeParams {
            alpha: self.alpha,
            gamma: self.gamma,
            ell: self.ell,
        }
    }
}

/// `K² C_{α,γ}(ℓ · lag)` with `λ = 1`, `n = 1`.
pub fn extended_cov(theta: &ExtendedParams, lag: u64) -> Result<f64> {
    let p = theta.shape().model()?;
    Ok(theta.k * theta.k * covariance_with(&p, theta.ell * lag as f64, &QuadConfig::default())?)
}

/// Correlations `ρ(h) = C(ℓh)/C(0)` for `h = 0..len`.
pub fn correlation_table(shape: &ShapeParams, len: usize) -> Result<CovarianceTable> {
    correlation_table_with(shape, len, &QuadConfig::default())
}

pub fn correlation_table_with(shape: &ShapeParams, len: usize, cfg: &QuadConfig) -> Result<CovarianceTable> {
    shape.validate()?;
    let p = shape.model()?;
    let c0 = variance(&p)?;
    let lags: Vec<f64> = (0..len).map(|h| h as f64).collect();
    let mut values = lags
        .par_iter()
        .map(|&h| if h == 0.0 { Ok(c0) } else { covariance_with(&p, shape.ell * h, cfg) })
        .collect::<Result<Vec<_>>>()?;
    for v in values.iter_mut() {
        *v /= c0;
    }
    Ok(CovarianceTable { lags, values })
}
