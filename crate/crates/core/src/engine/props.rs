//! Sample-path properties that depend on the parameters only through `αγ`
//! (and `α` for the memory exponent).

use serde::{Deserialize, Serialize};

use super::asymptotics::{SmallLagCase, rough_coefficient};
use super::params::ModelParams;
use crate::error::{GwmError, Result};

/// How the covariance decays at large lags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Memory {
    /// `C(r) ~ r^{-exponent}`.
    PowerLaw { exponent: f64 },
    /// `C(r)` decays like `e^{-λr}` up to a power.
    Exponential,
}

impl Memory {
    pub fn exponent(&self) -> Option<f64> {
        match *self {
            Memory::PowerLaw { exponent } => Some(exponent),
            Memory::Exponential => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalProps {
    /// Index `H = min(αγ - n/2, 1)`.
    pub holder_exponent: f64,
    /// Graph dimension `n + 1 - H`.
    pub fractal_dim: f64,
    /// Order of local asymptotic self-similarity, when `αγ < (n+2)/2`.
    pub lass_order: Option<f64>,
    /// Amplitude `A` in `C(0) - C(r) ≈ A r^{2αγ-n}`, same range as `lass_order`.
    pub lass_amplitude: Option<f64>,
    pub memory: Memory,
    pub differentiable: bool,
}

/// Local amplitude `A = -Γ(n/2 - αγ) / (2^{2αγ} π^{n/2} Γ(αγ))`, half the
/// small-lag variogram coefficient.
pub fn lass_amplitude(p: &ModelParams) -> Result<f64> {
    require_lass(p)?;
    Ok(0.5 * rough_coefficient(p.alpha_gamma(), p.n)?)
}

fn require_lass(p: &ModelParams) -> Result<()> {
    match SmallLagCase::of(p)? {
        SmallLagCase::Rough => Ok(()),
        _ => Err(GwmError::Domain(format!(
            "local self-similarity needs alpha*gamma < {}, got {}",
            p.half_dim() + 1.0,
            p.alpha_gamma()
        ))),
    }
}

pub fn local_props(p: &ModelParams) -> Result<LocalProps> {
    let case = SmallLagCase::of(p)?;
    let h = p.excess().min(1.0);
    let rough = case == SmallLagCase::Rough;
    let memory = if p.alpha < 1.0 {
        Memory::PowerLaw {
            exponent: 2.0 * p.alpha + p.n as f64,
        }
    } else {
        Memory::Exponential
    };
    Ok(LocalProps {
        holder_exponent: h,
        fractal_dim: p.n as f64 + 1.0 - h,
        lass_order: rough.then_some(p.excess()),
        lass_amplitude: if rough { Some(lass_amplitude(p)?) } else { None },
        memory,
        differentiable: case == SmallLagCase::Smooth,
    })
}

/// Covariance of the tangent field at increments of norm `u` and `v` whose
/// difference has norm `uv_dist`: `A (u^{2H} + v^{2H} - uv_dist^{2H})`.
pub fn tangent_field_cov(p: &ModelParams, u: f64, v: f64, uv_dist: f64) -> Result<f64> {
    for x in [u, v, uv_dist] {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(GwmError::Domain(format!("norms must be finite and >= 0, got {x}")));
        }
    }
    let a = lass_amplitude(p)?;
    let e = 2.0 * p.excess();
    Ok(a * (u.powf(e) + v.powf(e) - uv_dist.powf(e)))
}
