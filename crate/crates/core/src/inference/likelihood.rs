//! Gaussian likelihood of a zero-mean series with Toeplitz correlation, with
//! the variance profiled out.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::extended::{correlation_table_with, ShapeParams};
use super::seasonal::VelocitySeries;
use crate::engine::variance;
use crate::error::{GwmError, Result};
use crate::quad::QuadConfig;

/// `yᵀ ρ⁻¹ y` and `log det ρ` for a symmetric Toeplitz `ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToeplitzStats {
    pub quad_form: f64,
    pub log_det: f64,
    /// Smallest one-step prediction variance `min_t v_t`.
    pub min_innovation: f64,
}

/// Durbin–Levinson recursion: one-step prediction errors `e_t` and their
/// variances `v_t` give `yᵀρ⁻¹y = Σ e_t²/v_t` and `log det ρ = Σ log v_t`.
/// `rho[h]` is the correlation at lag `h`; needs `rho.len() >= y.len()`.
pub fn toeplitz_stats(rho: &[f64], y: &[f64]) -> Result<ToeplitzStats> {
    let n = y.len();
    if n == 0 || rho.len() < n {
        return Err(GwmError::InsufficientData(format!(
            "need a correlation table of length >= {n}, got {}",
            rho.len()
        )));
    }
    let mut v = rho[0];
    if !(v > 0.0) {
        return Err(GwmError::NotPositiveDefinite(0));
    }
    let mut quad = y[0] * y[0] / v;
    let mut log_det = v.ln();
    let mut min_innovation = v;
    let mut phi: Vec<f64> = Vec::with_capacity(n);
    for t in 1..n {
        let mut acc = rho[t];
        for (j, f) in phi.iter().enumerate() {
            acc -= f * rho[t - 1 - j];
        }
        let kappa = acc / v;
        let m = phi.len();
        for j in 0..m / 2 {
            let (a, b) = (phi[j], phi[m - 1 - j]);
            phi[j] = a - kappa * b;
            phi[m - 1 - j] = b - kappa * a;
        }
        if m % 2 == 1 {
            phi[m / 2] *= 1.0 - kappa;
        }
        phi.push(kappa);
        v *= 1.0 - kappa * kappa;
        if !(v > 0.0) || !v.is_finite() {
            return Err(GwmError::NotPositiveDefinite(t));
        }
        let mut e = y[t];
        for (j, f) in phi.iter().enumerate() {
            e -= f * y[t - 1 - j];
        }
        quad += e * e / v;
        log_det += v.ln();
        min_innovation = min_innovation.min(v);
    }
    Ok(ToeplitzStats {
        quad_form: quad,
        log_det,
        min_innovation,
    })
}

/// `s² = N^{-1} yᵀ ρ⁻¹ y`.
pub fn profile_s2_from(rho: &[f64], y: &[f64]) -> Result<f64> {
    Ok(toeplitz_stats(rho, y)?.quad_form / y.len() as f64)
}

/// `(N/2) log(yᵀρ⁻¹y) + ½ log det ρ + (N/2)(1 + log 2π - log N)`.
pub fn reduced_nll_from(rho: &[f64], y: &[f64]) -> Result<f64> {
    let st = toeplitz_stats(rho, y)?;
    Ok(reduced_nll_value(&st, y.len()))
}

pub fn reduced_nll_value(st: &ToeplitzStats, n: usize) -> f64 {
    let nf = n as f64;
    0.5 * nf * st.quad_form.ln() + 0.5 * st.log_det + 0.5 * nf * (1.0 + (2.0 * PI).ln() - nf.ln())
}

/// Negative log-likelihood at an explicit variance:
/// `yᵀρ⁻¹y/(2s²) + (N/2) log s² + ½ log det ρ + (N/2) log 2π`.
pub fn nll_at(st: &ToeplitzStats, n: usize, s2: f64) -> f64 {
    let nf = n as f64;
    st.quad_form / (2.0 * s2) + 0.5 * nf * s2.ln() + 0.5 * st.log_det + 0.5 * nf * (2.0 * PI).ln()
}

/// Shape-parameter likelihood evaluation for one series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub s2: f64,
    pub nll_reduced: f64,
    pub stats: ToeplitzStats,
}

/// Rejects shapes whose correlation matrix is singular at the accuracy of
/// the table: each entry carries an error up to `ε = rel_tol + abs_tol/C(0)`,
/// which moves the eigenvalues by up to `2Nε`, so prediction variances
/// below that are noise and the log-determinant is meaningless.
pub fn profile(shape: &ShapeParams, y: &VelocitySeries, cfg: &QuadConfig) -> Result<Profile> {
    let table = correlation_table_with(shape, y.len(), cfg)?;
    let stats = toeplitz_stats(&table.values, &y.values)?;
    let eps = cfg.rel_tol + cfg.abs_tol / variance(&shape.model()?)?;
    let resolution = 2.0 * y.len() as f64 * eps;
    if stats.min_innovation < resolution {
        return Err(GwmError::IllConditioned {
            min_innovation: stats.min_innovation,
            resolution,
        });
    }
    Ok(Profile {
        s2: stats.quad_form / y.len() as f64,
        nll_reduced: reduced_nll_value(&stats, y.len()),
        stats,
    })
}

pub fn profile_s2(shape: &ShapeParams, y: &VelocitySeries) -> Result<f64> {
    Ok(profile(shape, y, &QuadConfig::default())?.s2)
}

pub fn reduced_nll(shape: &ShapeParams, y: &VelocitySeries) -> Result<f64> {
    Ok(profile(shape, y, &QuadConfig::default())?.nll_reduced)
}
