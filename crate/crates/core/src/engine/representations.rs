//! Spectral density and the exact covariance: closed form at `α = 1`,
//! the Bochner (Hankel transform) integral and the Macdonald-kernel integral.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::params::ModelParams;
use crate::error::{GwmError, Result};
use crate::quad::{self, integrate_breaks, log_breaks, QuadConfig};
use crate::specfun::{bessel_j, bessel_k, bessel_k_scaled, ln_gamma};

/// `(2π)^{-n} (ω^{2α} + λ²)^{-γ}` at frequency norm `ω >= 0`.
pub fn spectral_density(p: &ModelParams, omega_norm: f64) -> Result<f64> {
    p.validate()?;
    if !(omega_norm >= 0.0) {
        return Err(GwmError::Domain(format!("frequency norm must be >= 0, got {omega_norm}")));
    }
    let base = omega_norm.powf(2.0 * p.alpha) + p.lambda * p.lambda;
    Ok((2.0 * PI).powi(-(p.n as i32)) * base.powf(-p.gamma))
}

fn check_lag(r: f64) -> Result<()> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(GwmError::Domain(format!("lag must be a finite norm >= 0, got {r}")));
    }
    Ok(())
}

/// Whittle–Matérn closed form (`α = 1`):
/// `2^{1-n/2-γ} π^{-n/2} Γ(γ)^{-1} (r/λ)^{γ-n/2} K_{γ-n/2}(λr)`.
pub fn cov_closed_form_alpha1(p: &ModelParams, r: f64) -> Result<f64> {
    if p.alpha != 1.0 {
        return Err(GwmError::InvalidParameter("closed form requires alpha = 1".into()));
    }
    p.require_finite_variance()?;
    check_lag(r)?;
    if r == 0.0 {
        return variance(p);
    }
    let nu = p.gamma - p.half_dim();
    let z = p.lambda * r;
    let log_pref = (1.0 - p.half_dim() - p.gamma) * 2f64.ln() - p.half_dim() * PI.ln() - ln_gamma(p.gamma)?;
    let log_pow = nu * (r / p.lambda).ln();
    let ks = bessel_k_scaled(nu, z)?;
    Ok((log_pref + log_pow - z).exp() * ks)
}

/// Positive zeros of the Bochner kernel `J_{(n-2)/2}(v) v^{n/2}`.
fn kernel_zero(n: u32, k: usize) -> f64 {
    let kf = k as f64;
    match n {
        1 => (kf + 0.5) * PI,
        3 => (kf + 1.0) * PI,
        _ => bessel_j0_zero(k),
    }
}

/// The `k`-th (0-based) positive zero of `J_0`.
pub fn bessel_j0_zero(k: usize) -> f64 {
    let beta = (k as f64 + 0.75) * PI;
    let b8 = 8.0 * beta;
    let mut x = beta + 1.0 / b8 - 124.0 / (3.0 * b8.powi(3)) + 120_928.0 / (15.0 * b8.powi(5));
    for _ in 0..3 {
        let j0 = bessel_j(0.0, x).unwrap_or(0.0);
        let j1 = bessel_j(1.0, x).unwrap_or(1.0);
        if j1 == 0.0 {
            break;
        }
        x += j0 / j1;
    }
    x
}

/// `J_{(n-2)/2}(v) v^{n/2}`.
fn bochner_kernel(n: u32, v: f64) -> f64 {
    match n {
        1 => (2.0 / PI).sqrt() * v.cos(),
        3 => (2.0 / PI).sqrt() * v * v.sin(),
        _ => bessel_j(0.0, v).unwrap_or(0.0) * v,
    }
}

/// `∫_lower^∞ J_{(n-2)/2}(v) v^{n/2} amp(v) dv` for a smooth, eventually
/// monotone amplitude, integrating between kernel zeros and accelerating the
/// alternating panel sums. `direct_until` sets where acceleration may begin.
pub fn hankel_integral<F>(n: u32, amp: F, lower: f64, direct_until: f64, cfg: &QuadConfig) -> Result<quad::QuadOutput>
where
    F: Fn(f64) -> f64,
{
    let g = |v: f64| bochner_kernel(n, v) * amp(v);
    let first = (0..).find(|&k| kernel_zero(n, k) > lower).unwrap_or(0);
    let mut start = first;
    while kernel_zero(n, start) < direct_until.max(lower) || start < first + 10 {
        start += 1;
    }
    let mut breaks = vec![lower];
    breaks.extend((first..start).map(|k| kernel_zero(n, k)));
    let head = integrate_breaks(g, &breaks, cfg)?;
    let mut partials = vec![head.value];
    let mut sum = head.value;
    let mut err = head.abs_err;
    let mut subdivisions = head.subdivisions;
    let mut left = *breaks.last().unwrap();
    let panel_cfg = QuadConfig {
        abs_tol: cfg.abs_tol * 1e-3,
        ..*cfg
    };
    for k in start..start + 40 {
        let right = kernel_zero(n, k);
        let piece = quad::integrate(g, left, right, &panel_cfg)?;
        sum += piece.value;
        err += piece.abs_err;
        subdivisions += piece.subdivisions;
        partials.push(sum);
        left = right;
    }
    let m = partials.len();
    let accel = quad::iterated_average(&partials);
    let accel_prev = quad::iterated_average(&partials[1..m]);
    Ok(quad::QuadOutput {
        value: accel,
        abs_err: err + (accel - accel_prev).abs(),
        subdivisions,
    })
}

/// Covariance from the isotropic spectral (Bochner) representation,
/// `C(r) = (2π)^{-n/2} r^{-n} ∫_0^∞ J_{(n-2)/2}(v) v^{n/2} ((v/r)^{2α} + λ²)^{-γ} dv`.
///
/// Used as an independent oracle for the production path.
pub fn cov_bochner(p: &ModelParams, r: f64, cfg: &QuadConfig) -> Result<f64> {
    p.require_finite_variance()?;
    check_lag(r)?;
    if r == 0.0 {
        return Err(GwmError::Domain("Bochner representation requires r > 0".into()));
    }
    let lam2 = p.lambda * p.lambda;
    let amp = |v: f64| ((v / r).powf(2.0 * p.alpha) + lam2).powf(-p.gamma);
    let transition = r * p.lambda.powf(1.0 / p.alpha);
    let out = hankel_integral(p.n, amp, 0.0, (8.0 * transition).max(30.0), cfg)?;
    let pref = (2.0 * PI).powf(-p.half_dim()) * r.powi(-(p.n as i32));
    Ok(pref * out.value)
}

/// `K_{(n-2)/2}(s) s^{n/2}`.
fn macdonald_kernel(n: u32, s: f64) -> f64 {
    match n {
        1 => (PI / 2.0).sqrt() * (-s).exp(),
        3 => (PI / 2.0).sqrt() * s * (-s).exp(),
        _ => bessel_k(0.0, s).unwrap_or(0.0) * s,
    }
}

/// `-Im (λ² + e^{iπα} x)^{-γ}` for `x >= 0`, on the principal branch, with
/// `(sin πα, cos πα)` precomputed.
fn neg_im_power(rot: (f64, f64), gamma: f64, lam2: f64, x: f64) -> f64 {
    let re = lam2 + x * rot.1;
    let im = x * rot.0;
    let phase = im.atan2(re);
    (-0.5 * gamma * (re * re + im * im).ln()).exp() * (gamma * phase).sin()
}

/// Covariance for `α < 1` from the Macdonald-kernel representation in the
/// fixed-argument variable `s = u r`:
/// `C(r) = r^{-n} / (2^{(n-2)/2} π^{(n+2)/2}) ∫_0^∞ K_{(n-2)/2}(s) s^{n/2} (-Im (e^{iπα}(s/r)^{2α} + λ²)^{-γ}) ds`.
///
/// Valid for every `γ > 0` at `r > 0`. The integral is truncated at
/// `cfg.upper_cutoff`.
pub fn cov_macdonald(p: &ModelParams, r: f64, cfg: &QuadConfig) -> Result<f64> {
    p.validate()?;
    if p.alpha >= 1.0 {
        return Err(GwmError::InvalidParameter("Macdonald representation requires alpha < 1".into()));
    }
    check_lag(r)?;
    if r == 0.0 {
        return Err(GwmError::Domain("Macdonald representation is undefined at r = 0".into()));
    }
    let lam2 = p.lambda * p.lambda;
    let two_alpha = 2.0 * p.alpha;
    let n = p.n;
    let rot = (PI * p.alpha).sin_cos();
    let log_r = r.ln();
    let integrand = |s: f64| {
        let x = (two_alpha * (s.ln() - log_r)).exp();
        macdonald_kernel(n, s) * neg_im_power(rot, p.gamma, lam2, x)
    };
    let pivot = r * p.lambda.powf(1.0 / p.alpha);
    let breaks = log_breaks(0.0, cfg.upper_cutoff, &[pivot, 1.0]);
    let out = integrate_breaks(integrand, &breaks, cfg)?;
    let pref = r.powi(-(n as i32)) / (2f64.powf(0.5 * n as f64 - 1.0) * PI.powf(0.5 * n as f64 + 1.0));
    Ok(pref * out.value)
}

/// Variance `C(0) = λ^{n/α-2γ} Γ(γ - n/(2α)) Γ(n/(2α)) / (2^n π^{n/2} α Γ(n/2) Γ(γ))`.
pub fn variance(p: &ModelParams) -> Result<f64> {
    p.require_finite_variance()?;
    let nf = p.n as f64;
    let a = nf / (2.0 * p.alpha);
    let log_num = ln_gamma(p.gamma - a)? + ln_gamma(a)? + (nf / p.alpha - 2.0 * p.gamma) * p.lambda.ln();
    let log_den = nf * 2f64.ln() + 0.5 * nf * PI.ln() + p.alpha.ln() + ln_gamma(0.5 * nf)? + ln_gamma(p.gamma)?;
    Ok((log_num - log_den).exp())
}

/// Covariance at lag norm `r` with default quadrature settings.
pub fn covariance(p: &ModelParams, r: f64) -> Result<f64> {
    covariance_with(p, r, &QuadConfig::default())
}

/// Dispatcher: `α = 1` uses the closed form, `α < 1` the Macdonald
/// representation, and `r = 0` the variance formula.
pub fn covariance_with(p: &ModelParams, r: f64, cfg: &QuadConfig) -> Result<f64> {
    p.validate()?;
    check_lag(r)?;
    if r == 0.0 {
        return variance(p);
    }
    if p.alpha == 1.0 {
        cov_closed_form_alpha1(p, r)
    } else {
        cov_macdonald(p, r, cfg)
    }
}

/// Settings used for variogram evaluation: `C(0) - C(r)` cancels at small
/// lags, so the covariance is resolved to near machine precision.
pub fn variogram_config() -> QuadConfig {
    QuadConfig {
        rel_tol: 1e-13,
        abs_tol: 1e-300,
        max_subdivisions: 2000,
        upper_cutoff: 705.0,
        accept_roundoff: true,
    }
}

/// Variogram `2 (C(0) - C(r))`.
pub fn variogram(p: &ModelParams, r: f64) -> Result<f64> {
    variogram_with(p, r, &variogram_config())
}

pub fn variogram_with(p: &ModelParams, r: f64, cfg: &QuadConfig) -> Result<f64> {
    p.require_finite_variance()?;
    check_lag(r)?;
    if r == 0.0 {
        return Ok(0.0);
    }
    let c0 = variance(p)?;
    let cr = covariance_with(p, r, cfg)?;
    Ok((2.0 * (c0 - cr)).max(0.0))
}

/// Covariance values on a lag grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceTable {
    pub lags: Vec<f64>,
    pub values: Vec<f64>,
}

impl CovarianceTable {
    /// Evaluates every lag independently (in parallel); the result does not
    /// depend on the thread count.
    pub fn fill(p: &ModelParams, lags: &[f64], cfg: &QuadConfig) -> Result<Self> {
        let values = lags
            .par_iter()
            .map(|&r| covariance_with(p, r, cfg))
            .collect::<Result<Vec<_>>>()?;
        Ok(CovarianceTable {
            lags: lags.to_vec(),
            values,
        })
    }

    /// Lags `0, h, 2h, ..., (len-1)h`.
    pub fn regular(p: &ModelParams, spacing: f64, len: usize, cfg: &QuadConfig) -> Result<Self> {
        let lags: Vec<f64> = (0..len).map(|k| k as f64 * spacing).collect();
        Self::fill(p, &lags, cfg)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}
