//! Large-lag and small-lag asymptotics of the covariance and variogram.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::params::ModelParams;
use super::representations::hankel_integral;
use crate::error::{GwmError, Result};
use crate::quad::{self, QuadConfig};
use crate::specfun::{gamma_fn, ln_gamma, rgamma, sin_pi};

/// Partial sum of a large-lag asymptotic series together with the individual
/// terms, so callers can see when the (divergent) series stops improving.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailSeries {
    pub value: f64,
    pub terms: Vec<f64>,
}

impl TailSeries {
    /// Index of the smallest-magnitude term; summing beyond it does not help.
    pub fn smallest_term(&self) -> usize {
        self.terms
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }
}

/// Large-lag expansion of the covariance with `terms >= 1` terms.
///
/// For `α < 1` the power-law series
/// `π^{-(n+2)/2} Σ_{j>=1} (-1)^{j-1} Γ(γ+j)/(Γ(γ) j!) Γ(αj+1) Γ(αj+n/2) 2^{2αj} λ^{-2γ-2j} sin(παj) r^{-2αj-n}`.
/// The λ power follows from expanding `(λ² + w)^{-γ}` in `w/λ²`, and agrees
/// with the scaling identity `C(r; λ) = λ^{n/α-2γ} C(λ^{1/α} r; 1)`.
///
/// For `α = 1` the exponentially decaying expansion of the closed form.
pub fn cov_tail_asymptotic(p: &ModelParams, r: f64, terms: usize) -> Result<TailSeries> {
    p.validate()?;
    if !(r > 0.0) || !r.is_finite() {
        return Err(GwmError::Domain(format!("tail expansion requires r > 0, got {r}")));
    }
    let terms = terms.max(1);
    let nf = p.n as f64;
    let mut out = Vec::with_capacity(terms);
    if p.alpha < 1.0 {
        let pref = PI.powf(-(nf + 2.0) / 2.0);
        let lg = ln_gamma(p.gamma)?;
        for j in 1..=terms {
            let jf = j as f64;
            let aj = p.alpha * jf;
            let log_mag = ln_gamma(p.gamma + jf)? - lg - ln_gamma(jf + 1.0)?
                + ln_gamma(aj + 1.0)?
                + ln_gamma(aj + nf / 2.0)?
                + 2.0 * aj * 2f64.ln()
                - (2.0 * p.gamma + 2.0 * jf) * p.lambda.ln()
                - (2.0 * aj + nf) * r.ln();
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            out.push(pref * sign * sin_pi(aj) * log_mag.exp());
        }
    } else {
        p.require_finite_variance()?;
        let a = p.gamma - (nf - 1.0) / 2.0;
        let log_pref = ((1.0 - nf) / 2.0 - p.gamma) * 2f64.ln() - (nf - 1.0) / 2.0 * PI.ln() - ln_gamma(p.gamma)?;
        for j in 0..terms {
            let jf = j as f64;
            let ratio = gamma_fn(a + jf)? * rgamma(a - jf);
            let log_rest = log_pref - p.lambda * r - jf * 2f64.ln() - ln_gamma(jf + 1.0)?
                + (-jf - p.gamma + (nf - 1.0) / 2.0) * p.lambda.ln()
                + (-jf + p.gamma - (nf + 1.0) / 2.0) * r.ln();
            out.push(ratio * log_rest.exp());
        }
    }
    Ok(TailSeries {
        value: out.iter().sum(),
        terms: out,
    })
}

/// Leading large-lag term (`terms = 1`).
pub fn cov_tail_leading(p: &ModelParams, r: f64) -> Result<f64> {
    Ok(cov_tail_asymptotic(p, r, 1)?.value)
}

/// Which small-lag regime the parameters fall in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmallLagCase {
    /// `αγ ∈ (n/2, (n+2)/2)`: variogram `∝ r^{2αγ-n}`.
    Rough,
    /// `αγ = (n+2)/2`: variogram `∝ r² log(1/r)`.
    Borderline,
    /// `αγ > (n+2)/2`: variogram `∝ r²`.
    Smooth,
}

impl SmallLagCase {
    pub fn of(p: &ModelParams) -> Result<Self> {
        p.require_finite_variance()?;
        let edge = p.half_dim() + 1.0;
        let ag = p.alpha_gamma();
        Ok(if (ag - edge).abs() <= 1e-12 * edge {
            SmallLagCase::Borderline
        } else if ag < edge {
            SmallLagCase::Rough
        } else {
            SmallLagCase::Smooth
        })
    }
}

/// Coefficient `B` with variogram `≈ B r^{2αγ-n}` in the rough case:
/// `-2^{1-2αγ} π^{-n/2} Γ(n/2 - αγ) / Γ(αγ)`.
pub fn rough_coefficient(alpha_gamma: f64, n: u32) -> Result<f64> {
    let h = 0.5 * n as f64;
    Ok(-2f64.powf(1.0 - 2.0 * alpha_gamma) * PI.powf(-h) * gamma_fn(h - alpha_gamma)? / gamma_fn(alpha_gamma)?)
}

/// Coefficient of `r²` in the smooth case:
/// `λ^{(n+2)/α-2γ} Γ(γ-(n+2)/(2α)) Γ((n+2)/(2α)) / (2^{n+1} π^{n/2} α Γ((n+2)/2) Γ(γ))`.
pub fn smooth_coefficient(p: &ModelParams) -> Result<f64> {
    let nf = p.n as f64;
    let m = (nf + 2.0) / (2.0 * p.alpha);
    let log_num = ln_gamma(p.gamma - m)? + ln_gamma(m)? + ((nf + 2.0) / p.alpha - 2.0 * p.gamma) * p.lambda.ln();
    let log_den = (nf + 1.0) * 2f64.ln() + 0.5 * nf * PI.ln() + p.alpha.ln() + ln_gamma((nf + 2.0) / 2.0)? + ln_gamma(p.gamma)?;
    Ok((log_num - log_den).exp())
}

/// Coefficient of `r² log(1/r)` in the borderline case:
/// `2^{-n} π^{-n/2} / Γ((n+2)/2)`.
pub fn borderline_coefficient(n: u32) -> Result<f64> {
    let nf = n as f64;
    Ok(2f64.powf(-nf) * PI.powf(-0.5 * nf) / gamma_fn((nf + 2.0) / 2.0)?)
}

/// Leading small-lag term of the variogram in whichever regime applies.
pub fn variogram_small_lag(p: &ModelParams, r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(GwmError::Domain(format!("small-lag expansion requires r > 0, got {r}")));
    }
    Ok(match SmallLagCase::of(p)? {
        SmallLagCase::Rough => rough_coefficient(p.alpha_gamma(), p.n)? * r.powf(2.0 * p.excess()),
        SmallLagCase::Smooth => smooth_coefficient(p)? * r * r,
        SmallLagCase::Borderline => borderline_coefficient(p.n)? * r * r * (1.0 / r).ln(),
    })
}

fn require_rough(alpha_gamma: f64, n: u32) -> Result<()> {
    let h = 0.5 * n as f64;
    if !(1..=3).contains(&n) {
        return Err(GwmError::InvalidParameter(format!("dimension must be 1, 2 or 3, got {n}")));
    }
    if !(alpha_gamma > h && alpha_gamma < h + 1.0) {
        return Err(GwmError::Domain(format!(
            "alpha*gamma = {alpha_gamma} outside the open interval ({h}, {})",
            h + 1.0
        )));
    }
    Ok(())
}

/// Closed form of the limiting integral
/// `I = ∫_0^∞ (J_{(n-2)/2}(k) k^{-(n-2)/2} - 1/(2^{(n-2)/2} Γ(n/2))) k^{n-2αγ-1} dk
///   = Γ(n/2 - αγ) / (2^{2αγ-n/2} Γ(αγ))`.
pub fn appendix_constant_i(alpha_gamma: f64, n: u32) -> Result<f64> {
    require_rough(alpha_gamma, n)?;
    let h = 0.5 * n as f64;
    Ok(gamma_fn(h - alpha_gamma)? / (2f64.powf(2.0 * alpha_gamma - h) * gamma_fn(alpha_gamma)?))
}

/// `1 / (2^{(n-2)/2} Γ(n/2))`, the value of `J_ν(k) k^{-ν}` at `k = 0`.
fn kernel_origin(n: u32) -> Result<f64> {
    let nf = n as f64;
    Ok(1.0 / (2f64.powf((nf - 2.0) / 2.0) * gamma_fn(nf / 2.0)?))
}

/// `1 / (2^{(n+2)/2} Γ((n+2)/2))`, minus the `k²` coefficient of `J_ν(k) k^{-ν}`.
fn kernel_curvature(n: u32) -> Result<f64> {
    let nf = n as f64;
    Ok(1.0 / (2f64.powf((nf + 2.0) / 2.0) * gamma_fn((nf + 2.0) / 2.0)?))
}

/// `J_ν(k) k^{-ν} - c_0` with `ν = (n-2)/2`, series near the origin.
fn centered_kernel(n: u32, k: f64, c0: f64) -> f64 {
    let nu = 0.5 * (n as f64) - 1.0;
    if k < 0.5 {
        // Σ_{j>=1} (-1)^j (k/2)^{2j} / (j! Γ(ν+j+1)) / 2^ν
        let q = 0.25 * k * k;
        let mut term = 1.0;
        let mut sum = 0.0;
        for j in 1..30 {
            term *= -q / j as f64;
            sum += term * rgamma(nu + j as f64 + 1.0);
            if term.abs() < 1e-18 {
                break;
            }
        }
        sum / 2f64.powf(nu)
    } else {
        let j = match n {
            1 => (2.0 / (PI * k)).sqrt() * k.cos(),
            3 => (2.0 / (PI * k)).sqrt() * k.sin(),
            _ => crate::specfun::bessel_j(0.0, k).unwrap_or(0.0),
        };
        j * k.powf(-nu) - c0
    }
}

/// Regularized integral at `a > 0`:
/// `∫_0^∞ (J_ν(k) k^{-ν} - c_0) k^{n-1} (k² + a²)^{-αγ} dk`, evaluated by
/// quadrature. Its limit as `a → 0` is [`appendix_constant_i`].
pub fn regularized_i(alpha_gamma: f64, n: u32, a: f64, cfg: &QuadConfig) -> Result<f64> {
    require_rough(alpha_gamma, n)?;
    if !(a > 0.0) {
        return Err(GwmError::Domain("regularization scale must be > 0".into()));
    }
    let c0 = kernel_origin(n)?;
    let nf = n as f64;
    let weight = |k: f64| k.powf(nf - 1.0) * (k * k + a * a).powf(-alpha_gamma);
    // Head: the centered kernel on [0, 1] across the scale a.
    let breaks = quad::log_breaks(0.0, 1.0, &[a]);
    let head = quad::integrate_breaks(|k| centered_kernel(n, k, c0) * weight(k), &breaks, cfg)?.value;
    // Non-oscillating tail: -c0 ∫_1^∞ weight, mapped onto (0, 1] by k = 1/t.
    let flat = quad::integrate(|t: f64| weight(1.0 / t) / (t * t), 0.0, 1.0, cfg)?.value;
    // Oscillating tail: ∫_1^∞ J_ν(k) k^{n/2} (k² + a²)^{-αγ} dk.
    let osc = hankel_integral(n, |k| (k * k + a * a).powf(-alpha_gamma), 1.0, 60.0, cfg)?.value;
    Ok(head - c0 * flat + osc)
}

/// Richardson extrapolation of [`regularized_i`] from two scales, eliminating
/// the leading `a^{2-2(αγ-n/2)}` correction.
pub fn regularized_i_extrapolated(alpha_gamma: f64, n: u32, a1: f64, a2: f64, cfg: &QuadConfig) -> Result<f64> {
    let i1 = regularized_i(alpha_gamma, n, a1, cfg)?;
    let i2 = regularized_i(alpha_gamma, n, a2, cfg)?;
    let order = 2.0 - 2.0 * (alpha_gamma - 0.5 * n as f64);
    let ratio = (a2 / a1).powf(order);
    Ok((i2 - ratio * i1) / (1.0 - ratio))
}

/// Constant `A` in `I(r) = -c log(1/r) + A + o(1)` at `αγ = (n+2)/2`, so that
/// the variogram is `B r² log(1/r) - 2A/(2π)^{n/2} r² + o(r²)`.
///
/// Computed as `I_1(0) + I_3(0) + log λ / (α 2^{(n+2)/2} Γ((n+2)/2))` where
/// `I_3(0)` vanishes identically and `I_1(0)` is evaluated by quadrature.
pub fn borderline_constant_a(p: &ModelParams, cfg: &QuadConfig) -> Result<f64> {
    if SmallLagCase::of(p)? != SmallLagCase::Borderline {
        return Err(GwmError::Domain("borderline constant requires alpha*gamma = (n+2)/2".into()));
    }
    let n = p.n;
    let c0 = kernel_origin(n)?;
    let c2 = kernel_curvature(n)?;
    // ∫_0^1 (J_ν k^{-ν} - c0 + c2 k²) k^{-3} dk
    let near = quad::integrate(|k| (centered_kernel(n, k, c0) + c2 * k * k) * k.powi(-3), 0.0, 1.0, cfg)?.value;
    // ∫_1^∞ (J_ν k^{-ν} - c0) k^{-3} dk = ∫_1^∞ J_ν k^{n/2} k^{-n-2} dk - c0/2
    let nf = n as f64;
    let far = hankel_integral(n, |k| k.powf(-nf - 2.0), 1.0, 30.0, cfg)?.value - 0.5 * c0;
    Ok(near + far + p.lambda.ln() * c2 / p.alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::representations::{cov_closed_form_alpha1, variogram};

    fn mp(alpha: f64, gamma: f64, lambda: f64, n: u32) -> ModelParams {
        ModelParams::new(alpha, gamma, lambda, n).unwrap()
    }

    #[test]
    fn tail_alpha1_terminates_for_ou() {
        let p = mp(1.0, 1.0, 1.0, 1);
        for &r in &[0.5, 3.0, 20.0] {
            let t = cov_tail_asymptotic(&p, r, 4).unwrap();
            assert!(((t.value - 0.5 * (-r as f64).exp()) / t.value).abs() < 1e-14);
            assert!(t.terms[1..].iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn tail_alpha1_matches_closed_form() {
        let p = mp(1.0, 2.3, 0.8, 2);
        let r = 60.0;
        let exact = cov_closed_form_alpha1(&p, r).unwrap();
        let t = cov_tail_asymptotic(&p, r, 6).unwrap();
        assert!(((t.value - exact) / exact).abs() < 1e-8);
    }

    #[test]
    fn leading_power_law_branch_vanishes_only_at_alpha_one() {
        // sin(πα) factor: α = 1 must use the exponential branch.
        let p = mp(1.0, 1.0, 1.0, 1);
        assert!(cov_tail_leading(&p, 10.0).unwrap() > 0.0);
        let q = mp(0.5, 3.0, 1.0, 1);
        let lead = cov_tail_leading(&q, 20.0).unwrap();
        // Leading term: 2^{2α} λ^{-2γ-2} γ Γ(α+1) Γ(α+n/2) sin(πα) π^{-(n+2)/2} r^{-2α-n}.
        let want = 2.0 * 3.0 * gamma_fn(1.5).unwrap() * gamma_fn(1.0).unwrap() * PI.powf(-1.5) * 20f64.powf(-2.0);
        assert!(((lead - want) / want).abs() < 1e-13);
    }

    #[test]
    fn small_lag_case_selection() {
        assert_eq!(SmallLagCase::of(&mp(1.0, 1.0, 1.0, 1)).unwrap(), SmallLagCase::Rough);
        assert_eq!(SmallLagCase::of(&mp(1.0, 1.5, 1.0, 1)).unwrap(), SmallLagCase::Borderline);
        assert_eq!(SmallLagCase::of(&mp(0.75, 2.0, 1.0, 1)).unwrap(), SmallLagCase::Borderline);
        assert_eq!(SmallLagCase::of(&mp(1.0, 2.5, 1.0, 1)).unwrap(), SmallLagCase::Smooth);
        let r = 1e-3;
        let b = variogram_small_lag(&mp(1.0, 1.5, 1.0, 1), r).unwrap();
        assert!((b - r * r * (1.0 / r).ln() / PI).abs() < 1e-15);
    }

    #[test]
    fn rough_coefficient_at_unit_product() {
        // -2^{-1} π^{-1/2} Γ(-1/2) / Γ(1) = 1
        assert!((rough_coefficient(1.0, 1).unwrap() - 1.0).abs() < 1e-14);
        // OU: variogram 1 - e^{-r} ≈ r
        let p = mp(1.0, 1.0, 1.0, 1);
        let r = 1e-6;
        assert!((variogram(&p, r).unwrap() / variogram_small_lag(&p, r).unwrap() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn smooth_coefficient_matches_curvature() {
        // Second difference of the closed form at the origin.
        let p = mp(1.0, 2.5, 1.0, 1);
        let h = 1e-3;
        let c0 = cov_closed_form_alpha1(&p, 0.0).unwrap();
        let ch = cov_closed_form_alpha1(&p, h).unwrap();
        let curvature = 2.0 * (ch - c0) / (h * h);
        let coef = smooth_coefficient(&p).unwrap();
        assert!((-curvature - coef).abs() / coef < 1e-4, "{curvature} vs {coef}");
    }

    #[test]
    fn appendix_constant_values() {
        // αγ = n/2 + 1/2, n = 1: Γ(-1/2)/(2^{3/2} Γ(1)) = -2√π/2^{3/2}
        let i = appendix_constant_i(1.0, 1).unwrap();
        assert!((i + 2.0 * PI.sqrt() / 2f64.powf(1.5)).abs() < 1e-13);
        for &(ag, n) in &[(0.6, 1), (1.4, 1), (1.1, 2), (1.9, 2), (1.7, 3)] {
            assert!(appendix_constant_i(ag, n).unwrap() < 0.0);
        }
        assert!(appendix_constant_i(1.5, 1).is_err());
        assert!(appendix_constant_i(0.5, 1).is_err());
    }

    #[test]
    fn regularized_limit_matches_closed_form() {
        let cfg = QuadConfig::default().with_rel_tol(1e-12);
        let got = regularized_i_extrapolated(1.0, 1, 1e-3, 1e-4, &cfg).unwrap();
        let want = appendix_constant_i(1.0, 1).unwrap();
        assert!(((got - want) / want).abs() < 1e-6, "{got} vs {want}");
    }
}
