use serde::{Deserialize, Serialize};

use crate::error::{GwmError, Result};

/// Parameters `(α, γ, λ, n)` of a generalized Whittle–Matérn field with
/// spectral density `(2π)^{-n} (|ω|^{2α} + λ²)^{-γ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub gamma: f64,
    /// Inverse-length scale.
    pub lambda: f64,
    /// Spatial dimension, 1 to 3.
    pub n: u32,
}

impl ModelParams {
    pub fn new(alpha: f64, gamma: f64, lambda: f64, n: u32) -> Result<Self> {
        let p = ModelParams { alpha, gamma, lambda, n };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(GwmError::InvalidParameter(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(GwmError::InvalidParameter(format!("gamma must be > 0, got {}", self.gamma)));
        }
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(GwmError::InvalidParameter(format!("lambda must be > 0, got {}", self.lambda)));
        }
        if !(1..=3).contains(&self.n) {
            return Err(GwmError::InvalidParameter(format!("dimension must be 1, 2 or 3, got {}", self.n)));
        }
        Ok(())
    }

    /// The product `αγ`, which alone controls the local behaviour.
    pub fn alpha_gamma(&self) -> f64 {
        self.alpha * self.gamma
    }

    pub fn half_dim(&self) -> f64 {
        0.5 * self.n as f64
    }

    /// `αγ - n/2`; positive exactly when the variance is finite.
    pub fn excess(&self) -> f64 {
        self.alpha_gamma() - self.half_dim()
    }

    pub fn is_whittle_matern(&self) -> bool {
        self.alpha == 1.0
    }

    /// Errors unless `αγ > n/2`.
    pub fn require_finite_variance(&self) -> Result<()> {
        self.validate()?;
        let ag = self.alpha_gamma();
        let h = self.half_dim();
        if ag > h {
            Ok(())
        } else if ag == h || (ag - h).abs() <= 4.0 * f64::EPSILON * h {
            Err(GwmError::VarianceBoundary(ag))
        } else {
            Err(GwmError::InfiniteVariance {
                alpha_gamma: ag,
                half_dim: h,
            })
        }
    }

    /// Same field with `λ = 1` evaluated at rescaled lags:
    /// `C(r; λ) = λ^{n/α - 2γ} C(λ^{1/α} r; 1)`.
    pub fn unit_scale_factors(&self) -> (f64, f64) {
        let lag_scale = self.lambda.powf(1.0 / self.alpha);
        let amp = self.lambda.powf(self.n as f64 / self.alpha - 2.0 * self.gamma);
        (lag_scale, amp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range() {
        assert!(ModelParams::new(0.0, 1.0, 1.0, 1).is_err());
        assert!(ModelParams::new(1.2, 1.0, 1.0, 1).is_err());
        assert!(ModelParams::new(0.5, -1.0, 1.0, 1).is_err());
        assert!(ModelParams::new(0.5, 1.0, 0.0, 1).is_err());
        assert!(ModelParams::new(0.5, 1.0, 1.0, 4).is_err());
        assert!(ModelParams::new(1.0, 1.0, 1.0, 3).is_ok());
    }

    #[test]
    fn finite_variance_boundary() {
        let p = ModelParams::new(0.5, 1.0, 1.0, 1).unwrap();
        assert!(matches!(p.require_finite_variance(), Err(GwmError::VarianceBoundary(_))));
        let p = ModelParams::new(0.4, 1.0, 1.0, 1).unwrap();
        assert!(matches!(p.require_finite_variance(), Err(GwmError::InfiniteVariance { .. })));
        let p = ModelParams::new(0.6, 1.0, 1.0, 1).unwrap();
        assert!(p.require_finite_variance().is_ok());
    }
}
