//! Power spectral density estimates and the empirical variogram.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::extended::ExtendedParams;
use crate::error::{GwmError, Result};

/// PSD values at angular frequencies in radians per sample, `0..=π`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Psd {
    pub freqs: Vec<f64>,
    pub values: Vec<f64>,
}

impl Psd {
    /// `∫_{-π}^{π} PSD` by the rectangle rule on the full Fourier grid of
    /// size `n` from which the half-range values came.
    pub fn integral(&self, n: usize) -> f64 {
        let dw = 2.0 * PI / n as f64;
        let mut total = self.values[0];
        for (k, v) in self.values.iter().enumerate().skip(1) {
            total += if 2 * k == n { *v } else { 2.0 * v };
        }
        total * dw
    }
}

fn half_spectrum(x: &[f64], window: Option<&[f64]>) -> Vec<f64> {
    let n = x.len();
    let mut buf: Vec<Complex64> = match window {
        Some(w) => x.iter().zip(w).map(|(a, b)| Complex64::new(a * b, 0.0)).collect(),
        None => x.iter().map(|&a| Complex64::new(a, 0.0)).collect(),
    };
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf[..=n / 2].iter().map(|z| z.norm_sqr()).collect()
}

/// `(2πN)^{-1} |Σ_j x_j e^{-iωj}|²` at `ω_k = 2πk/N`, `k = 0..=N/2`.
pub fn periodogram(x: &[f64]) -> Result<Psd> {
    let n = x.len();
    if n < 2 {
        return Err(GwmError::InsufficientData("periodogram needs at least 2 points".into()));
    }
    let scale = 1.0 / (2.0 * PI * n as f64);
    let values = half_spectrum(x, None).into_iter().map(|p| p * scale).collect();
    Ok(Psd {
        freqs: (0..=n / 2).map(|k| 2.0 * PI * k as f64 / n as f64).collect(),
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchConfig {
    pub block_len: usize,
    /// Fraction of a block shared with the next, in `[0, 1)`.
    pub overlap: f64,
}

impl Default for WelchConfig {
    fn default() -> Self {
        WelchConfig {
            block_len: 73,
            overlap: 0.5,
        }
    }
}

impl WelchConfig {
    pub fn step(&self) -> usize {
        ((self.block_len as f64) * (1.0 - self.overlap)).floor().max(1.0) as usize
    }

    /// Full blocks that fit in `n` samples; a trailing partial block is dropped.
    pub fn blocks(&self, n: usize) -> usize {
        if n < self.block_len {
            0
        } else {
            (n - self.block_len) / self.step() + 1
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WelchPsd {
    pub psd: Psd,
    pub step: usize,
    pub blocks: usize,
}

/// Periodic Hamming window `0.54 - 0.46 cos(2πj/L)`.
pub fn hamming(len: usize) -> Vec<f64> {
    (0..len)
        .map(|j| 0.54 - 0.46 * (2.0 * PI * j as f64 / len as f64).cos())
        .collect()
}

/// Average of Hamming-windowed block periodograms, each divided by the
/// window's mean square so white noise of variance `σ²` has expected level
/// `σ²/(2π)`.
pub fn welch_psd(x: &[f64], cfg: &WelchConfig) -> Result<WelchPsd> {
    let l = cfg.block_len;
    if l < 2 || !(0.0..1.0).contains(&cfg.overlap) {
        return Err(GwmError::InvalidParameter(format!("invalid Welch settings {cfg:?}")));
    }
    if x.len() < l {
        return Err(GwmError::InsufficientData(format!(
            "block length {l} exceeds series length {}",
            x.len()
        )));
    }
    let w = hamming(l);
    let ms = w.iter().map(|v| v * v).sum::<f64>() / l as f64;
    let step = cfg.step();
    let blocks = cfg.blocks(x.len());
    let mut acc = vec![0.0; l / 2 + 1];
    for b in 0..blocks {
        let seg = &x[b * step..b * step + l];
        for (a, p) in acc.iter_mut().zip(half_spectrum(seg, Some(&w))) {
            *a += p;
        }
    }
    let scale = 1.0 / (2.0 * PI * l as f64 * ms * blocks as f64);
    Ok(WelchPsd {
        psd: Psd {
            freqs: (0..=l / 2).map(|k| 2.0 * PI * k as f64 / l as f64).collect(),
            values: acc.into_iter().map(|a| a * scale).collect(),
        },
        step,
        blocks,
    })
}

/// `σ̃²(h) = (N-h)^{-1} Σ_{i} (y_{i+h} - y_i)²` for `h = 1..=h_max`.
pub fn empirical_variogram(y: &[f64], h_max: usize) -> Result<Vec<f64>> {
    if h_max == 0 || h_max >= y.len() {
        return Err(GwmError::InsufficientData(format!(
            "h_max must lie in 1..{}, got {h_max}",
            y.len()
        )));
    }
    Ok((1..=h_max)
        .map(|h| {
            let s: f64 = y.windows(h + 1).map(|w| (w[h] - w[0]).powi(2)).sum();
            s / (y.len() - h) as f64
        })
        .collect())
}

/// Model PSD of the sampled extended process: the spectral density
/// `K² ℓ^{-1} S(ω/ℓ)` (with `λ = 1`, `n = 1`) folded onto `(-π, π]`.
///
/// Images up to `|j| = 4000` are summed directly and the rest replaced by the
/// integral of the `|ω|^{-2αγ}` envelope.
pub fn model_psd(theta: &ExtendedParams, omega: f64) -> f64 {
    let a = theta.alpha;
    let g = theta.gamma;
    let l = theta.ell;
    let s = |w: f64| theta.k * theta.k / (2.0 * PI * l) * ((w / l).abs().powf(2.0 * a) + 1.0).powf(-g);
    const J: i64 = 4000;
    let mut total = s(omega);
    for j in 1..=J {
        let jw = 2.0 * PI * j as f64;
        total += s(omega - jw) + s(omega + jw);
    }
    let e = 2.0 * a * g;
    let c = theta.k * theta.k / (2.0 * PI * l) * l.powf(e);
    total + 2.0 * c * (2.0 * PI).powf(-e) * (J as f64 + 0.5).powf(1.0 - e) / (e - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn periodogram_parseval() {
        for n in [64usize, 65] {
            let x: Vec<f64> = (0..n).map(|i| ((i * 37 % 11) as f64 - 5.0) * 0.3).collect();
            let p = periodogram(&x).unwrap();
            let m2 = x.iter().map(|v| v * v).sum::<f64>() / n as f64;
            assert!((p.integral(n) / m2 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn periodogram_cosine_spike() {
        let n = 128;
        let x: Vec<f64> = (0..n).map(|j| (2.0 * PI * 9.0 * j as f64 / n as f64).cos()).collect();
        let p = periodogram(&x).unwrap();
        for (k, v) in p.values.iter().enumerate() {
            if k == 9 {
                assert!((v - n as f64 / (8.0 * PI)).abs() < 1e-10);
            } else {
                assert!(v.abs() < 1e-20);
            }
        }
        assert!(periodogram(&vec![0.0; 16]).unwrap().values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn welch_block_count() {
        let c = WelchConfig::default();
        assert_eq!(c.step(), 36);
        assert_eq!(c.blocks(2190), 59);
        assert!(welch_psd(&[0.0; 50], &c).is_err());
    }

    #[test]
    fn welch_constant_input() {
        let w = welch_psd(&vec![2.0; 500], &WelchConfig::default()).unwrap();
        let v = &w.psd.values;
        // The periodic Hamming window leaks only into the first bin.
        assert!(v[0] > 0.0 && v[0] > 5.0 * v[1]);
        assert!(v[2..].iter().all(|x| x.abs() < 1e-20 * v[0].max(1.0) + 1e-24));
    }

    #[test]
    fn welch_white_noise_level() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x: Vec<f64> = (0..20000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let w = welch_psd(&x, &WelchConfig::default()).unwrap();
        let mean = w.psd.values.iter().sum::<f64>() / w.psd.values.len() as f64;
        assert!((mean * 2.0 * PI - 1.0).abs() < 0.05);
    }

    #[test]
    fn variogram_examples() {
        assert!(empirical_variogram(&[3.0; 10], 5).unwrap().iter().all(|&v| v == 0.0));
        let alt: Vec<f64> = (0..20).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let g = empirical_variogram(&alt, 2).unwrap();
        assert_eq!(g, vec![4.0, 0.0]);
        assert!(empirical_variogram(&alt, 20).is_err());
    }

    #[test]
    fn model_psd_integrates_to_variance() {
        let theta = ExtendedParams::from_profile(0.8, 1.5, 0.9, 0.3).unwrap();
        let n = 4096;
        let dw = 2.0 * PI / n as f64;
        let total: f64 = (0..n).map(|k| model_psd(&theta, -PI + (k as f64 + 0.5) * dw) * dw).sum();
        assert!((total / 0.3 - 1.0).abs() < 1e-3, "{total}");
    }
}
