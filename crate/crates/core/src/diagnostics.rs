//! Empirical checks of sample-path properties: graph dimension from the
//! variogram slope, the covariance tail exponent, and convergence of rescaled
//! increments to the tangent field.

use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{covariance, local_props, tangent_field_cov, variogram, ModelParams, SmallLagCase};
use crate::error::{GwmError, Result};
use crate::fieldsim::{FieldSample, Grid, Simulator};

/// Least-squares line through `(x, y)`: `(slope, intercept, slope std. error)`.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let se = if x.len() > 2 { (rss / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    (slope, intercept, se)
}

pub const MIN_DIMENSION_POINTS: usize = 1024;

/// Mean squared increment at `lag` grid steps along `axis`.
fn axis_variogram(s: &FieldSample, axis: usize, lag: usize) -> f64 {
    let g = &s.grid;
    match g.sizes[..] {
        [n] => {
            let v = &s.values;
            (0..n - lag).map(|i| (v[i + lag] - v[i]).powi(2)).sum::<f64>() / (n - lag) as f64
        }
        [n1, n2] => {
            let at = |i: usize, j: usize| s.values[i * n2 + j];
            let (mut sum, mut count) = (0.0, 0usize);
            if axis == 0 {
                for i in 0..n1 - lag {
                    for j in 0..n2 {
                        sum += (at(i + lag, j) - at(i, j)).powi(2);
                    }
                }
                count += (n1 - lag) * n2;
            } else {
                for i in 0..n1 {
                    for j in 0..n2 - lag {
                        sum += (at(i, j + lag) - at(i, j)).powi(2);
                    }
                }
                count += n1 * (n2 - lag);
            }
            sum / count as f64
        }
        _ => unreachable!(),
    }
}

/// Slope `β̂` of log variogram against log distance over `lags` (grid steps,
/// along every axis).
pub fn variogram_slope(sample: &FieldSample, lags: &RangeInclusive<usize>) -> Result<f64> {
    let g = &sample.grid;
    g.validate()?;
    if sample.values.len() < MIN_DIMENSION_POINTS {
        return Err(GwmError::InsufficientData(format!(
            "dimension estimate needs >= {MIN_DIMENSION_POINTS} points, got {}",
            sample.values.len()
        )));
    }
    let (lo, hi) = (*lags.start(), *lags.end());
    if lo == 0 || hi <= lo || g.sizes.iter().any(|&s| hi >= s) {
        return Err(GwmError::InvalidParameter(format!("lag range {lo}..={hi} invalid for grid {:?}", g.sizes)));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for axis in 0..g.dims() {
        for h in lo..=hi {
            let v = axis_variogram(sample, axis, h);
            if !(v > 0.0) {
                return Err(GwmError::Degenerate("sample has zero increments".into()));
            }
            xs.push((h as f64 * g.spacing[axis]).ln());
            ys.push(v.ln());
        }
    }
    Ok(fit_line(&xs, &ys).0)
}

/// Graph dimension `n + 1 - β̂/2`, clamped to `[n, n + 1]`.
pub fn estimate_fractal_dim(sample: &FieldSample, lags: RangeInclusive<usize>) -> Result<f64> {
    let beta = variogram_slope(sample, &lags)?;
    let n = sample.grid.dims() as f64;
    Ok((n + 1.0 - 0.5 * beta).clamp(n, n + 1.0))
}

/// Log-spaced lags `r0 .. r1` (inclusive), `points >= 2`.
pub fn log_range(r0: f64, r1: f64, points: usize) -> Vec<f64> {
    let (a, b) = (r0.ln(), r1.ln());
    (0..points).map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp()).collect()
}

/// Least-squares slope of `log C(r)` against `log r` over `r0 ..= r1`; the
/// power-law tail predicts `-(2α + n)`.
pub fn estimate_memory_exponent(p: &ModelParams, r0: f64, r1: f64, points: usize) -> Result<f64> {
    Ok(memory_slope(p, r0, r1, points)?.0)
}

fn memory_slope(p: &ModelParams, r0: f64, r1: f64, points: usize) -> Result<(f64, f64)> {
    if p.alpha >= 1.0 {
        return Err(GwmError::Domain("alpha = 1 has an exponential tail, no power-law exponent".into()));
    }
    if !(r0 > 0.0 && r1 > r0) || points < 2 {
        return Err(GwmError::InvalidParameter(format!("bad lag range {r0}..{r1} with {points} points")));
    }
    let rs = log_range(r0, r1, points);
    let cs = rs.par_iter().map(|&r| covariance(p, r)).collect::<Result<Vec<_>>>()?;
    if let Some(i) = cs.iter().position(|&c| !(c > 0.0)) {
        return Err(GwmError::Degenerate(format!("covariance underflows at r = {}", rs[i])));
    }
    let xs: Vec<f64> = rs.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = cs.iter().map(|c| c.ln()).collect();
    let (slope, _, se) = fit_line(&xs, &ys);
    Ok((slope, se))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LassRow {
    pub rho: f64,
    /// `½(σ²(ρu) + σ²(ρv) - σ²(ρ d)) / ρ^{2H}`.
    pub rescaled: f64,
    pub target: f64,
    pub gap: f64,
}

/// Rescaled increment covariances against the tangent-field limit.
pub fn check_lass(p: &ModelParams, rhos: &[f64], u: f64, v: f64, uv_dist: f64) -> Result<Vec<LassRow>> {
    if SmallLagCase::of(p)? != SmallLagCase::Rough {
        return Err(GwmError::Domain(format!(
            "local self-similarity requires alpha*gamma in ({}, {})",
            p.half_dim(),
            p.half_dim() + 1.0
        )));
    }
    let target = tangent_field_cov(p, u, v, uv_dist)?;
    let e = 2.0 * p.excess();
    let sv = |r: f64| if r == 0.0 { Ok(0.0) } else { variogram(p, r) };
    rhos.iter()
        .map(|&rho| {
            let inc = 0.5 * (sv(rho * u)? + sv(rho * v)? - sv(rho * uv_dist)?);
            let rescaled = inc / rho.powf(e);
            Ok(LassRow {
                rho,
                rescaled,
                target,
                gap: (rescaled - target).abs(),
            })
        })
        .collect()
}

/// Half the log-log slope of `σ²(ρu)` against `ρ`.
pub fn estimate_lass_order(p: &ModelParams, u: f64, rhos: &[f64]) -> Result<f64> {
    let xs: Vec<f64> = rhos.iter().map(|r| r.ln()).collect();
    let ys = rhos.iter().map(|&r| Ok(variogram(p, r * u)?.ln())).collect::<Result<Vec<_>>>()?;
    Ok(0.5 * fit_line(&xs, &ys).0)
}

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub schema_version: u32,
    pub params: ModelParams,
    pub replicates: usize,
    pub lag_range: (usize, usize),
    /// Replicate mean of the dimension estimate.
    pub estimated_fractal_dim: f64,
    pub fractal_dim_half_width: f64,
    /// Replicate mean of `β̂/2` clamped to `[0, 1]`.
    pub estimated_h: f64,
    pub h_half_width: f64,
    /// `-slope` of the covariance tail; absent for `α = 1`.
    pub estimated_memory_exponent: Option<f64>,
    pub memory_half_width: Option<f64>,
    /// Values predicted by the parameters.
    pub theory_fractal_dim: f64,
    pub theory_memory_exponent: Option<f64>,
}

fn mean_half_width(xs: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, 1.96 * (var / m).sqrt())
}

/// Replicate study: simulate `seeds`, estimate the dimension on each, and
/// read the tail slope off the covariance over `tail = (r0, r1)`.
/// Half-widths are 95% normal intervals.
pub fn diagnose(
    p: &ModelParams,
    grid: &Grid,
    seeds: &[u64],
    lags: RangeInclusive<usize>,
    tail: (f64, f64),
) -> Result<DiagnosticsReport> {
    if seeds.is_empty() {
        return Err(GwmError::InvalidParameter("no seeds".into()));
    }
    let sim = Simulator::new(p, grid)?;
    let slopes = seeds
        .par_iter()
        .map(|&s| variogram_slope(&sim.sample(s), &lags))
        .collect::<Result<Vec<_>>>()?;
    let n = grid.dims() as f64;
    let dims: Vec<f64> = slopes.iter().map(|b| (n + 1.0 - 0.5 * b).clamp(n, n + 1.0)).collect();
    let hs: Vec<f64> = slopes.iter().map(|b| (0.5 * b).clamp(0.0, 1.0)).collect();
    let (fd, fd_hw) = mean_half_width(&dims);
    let (h, h_hw) = mean_half_width(&hs);
    let (mem, mem_hw) = if p.alpha < 1.0 {
        let (slope, se) = memory_slope(p, tail.0, tail.1, 25)?;
        (Some(-slope), Some(1.96 * se))
    } else {
        (None, None)
    };
    let props = local_props(p)?;
    Ok(DiagnosticsReport {
        schema_version: REPORT_SCHEMA_VERSION,
        params: *p,
        replicates: seeds.len(),
        lag_range: (*lags.start(), *lags.end()),
        estimated_fractal_dim: fd,
        fractal_dim_half_width: fd_hw,
        estimated_h: h,
        h_half_width: h_hw,
        estimated_memory_exponent: mem,
        memory_half_width: mem_hw,
        theory_fractal_dim: props.fractal_dim,
        theory_memory_exponent: props.memory.exponent(),
    })
}
