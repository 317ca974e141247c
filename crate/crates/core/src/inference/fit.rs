//! Maximum-likelihood fit of the extended family to a velocity series.
//!
//! The search runs over unconstrained coordinates: `α = 1/(1 + e^{-a})`,
//! `αγ = 1/2 + e^{b}` (finite variance for every point) and `ℓ = e^{c}`.
//! The WM family fixes `α = 1` and drops `a`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::extended::{ExtendedParams, ShapeParams};
use super::likelihood::profile;
use super::optim::{nelder_mead, NelderMeadConfig};
use super::seasonal::VelocitySeries;
use crate::error::{GwmError, Result};
use crate::quad::QuadConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// `α = 1`.
    Wm,
    Gwm,
}

impl std::str::FromStr for Family {
    type Err = GwmError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wm" => Ok(Family::Wm),
            "gwm" => Ok(Family::Gwm),
            _ => Err(GwmError::InvalidParameter(format!("family must be wm or gwm, got {s}"))),
        }
    }
}

impl Family {
    pub fn to_coords(self, s: &ShapeParams) -> Vec<f64> {
        let b = (s.alpha * s.gamma - 0.5).ln();
        let c = s.ell.ln();
        match self {
            Family::Wm => vec![b, c],
            Family::Gwm => vec![(s.alpha / (1.0 - s.alpha)).ln(), b, c],
        }
    }

    pub fn from_coords(self, x: &[f64]) -> ShapeParams {
        let (alpha, b, c) = match self {
            Family::Wm => (1.0, x[0], x[1]),
            Family::Gwm => (1.0 / (1.0 + (-x[0]).exp()), x[1], x[2]),
        };
        let ag = 0.5 + b.exp();
        ShapeParams {
            alpha,
            gamma: ag / alpha,
            ell: c.exp(),
        }
    }
}

/// Products `αγ` and scales `ℓ` crossed for the default starts.
pub const START_PRODUCTS: [f64; 3] = [0.75, 1.5, 2.5];
pub const START_SCALES: [f64; 2] = [0.5, 3.0];
/// `α` used for GWM starts on the grid.
pub const START_ALPHA: f64 = 0.5;
/// `α` of the extra GWM start seeded from the WM optimum.
pub const BOUNDARY_START_ALPHA: f64 = 0.99;

pub fn default_starts(family: Family) -> Vec<ShapeParams> {
    let alpha = match family {
        Family::Wm => 1.0,
        Family::Gwm => START_ALPHA,
    };
    START_PRODUCTS
        .iter()
        .flat_map(|&ag| START_SCALES.iter().map(move |&ell| ShapeParams { alpha, gamma: ag / alpha, ell }))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub simplex: NelderMeadConfig,
    pub quad: QuadConfig,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            simplex: NelderMeadConfig {
                initial_step: Some(0.3),
                ..NelderMeadConfig::default()
            },
            quad: QuadConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartOutcome {
    pub start: ShapeParams,
    pub end: Option<ShapeParams>,
    pub nll_reduced: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub family: Family,
    pub params: ExtendedParams,
    pub nll_reduced: f64,
    /// Simplex iterations of the winning start.
    pub iterations: usize,
    pub converged: bool,
    /// Index into `starts` of the winner; `None` when the WM optimum won a
    /// GWM fit at the `α = 1` boundary.
    pub best_start: Option<usize>,
    pub starts: Vec<StartOutcome>,
}

fn objective<'a>(family: Family, y: &'a VelocitySeries, quad: &QuadConfig) -> impl Fn(&[f64]) -> f64 + 'a {
    let quad = *quad;
    move |x: &[f64]| {
        let s = family.from_coords(x);
        match profile(&s, y, &quad) {
            Ok(p) if p.nll_reduced.is_finite() => p.nll_reduced,
            _ => f64::INFINITY,
        }
    }
}

fn run_start(family: Family, y: &VelocitySeries, start: &ShapeParams, cfg: &FitConfig) -> StartOutcome {
    let f = objective(family, y, &cfg.quad);
    match nelder_mead(&f, &family.to_coords(start), &cfg.simplex) {
        Ok(m) => StartOutcome {
            start: *start,
            end: Some(family.from_coords(&m.x)),
            nll_reduced: Some(m.f),
            iterations: m.iterations,
            converged: m.converged,
            error: None,
        },
        Err(e) => StartOutcome {
            start: *start,
            end: None,
            nll_reduced: None,
            iterations: 0,
            converged: false,
            error: Some(e.to_string()),
        },
    }
}

fn best_of(outcomes: &[StartOutcome]) -> Option<usize> {
    outcomes
        .iter()
        .enumerate()
        .filter_map(|(i, o)| o.nll_reduced.filter(|v| v.is_finite()).map(|v| (i, v)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
}

fn finish(family: Family, y: &VelocitySeries, cfg: &FitConfig, starts: Vec<StartOutcome>, best: usize) -> Result<FitResult> {
    let o = &starts[best];
    let shape = o.end.expect("winning start has an end point");
    let prof = profile(&shape, y, &cfg.quad)?;
    Ok(FitResult {
        family,
        params: ExtendedParams::from_profile(shape.alpha, shape.gamma, shape.ell, prof.s2)?,
        nll_reduced: prof.nll_reduced,
        iterations: o.iterations,
        converged: o.converged,
        best_start: Some(best),
        starts,
    })
}

/// Minimizes the reduced NLL from each start and keeps the best.
///
/// A GWM fit additionally runs the WM fit, starts once more from
/// `α = 0.99` at the WM optimum, and returns the WM optimum (with `α = 1`) if
/// nothing beats it, so the GWM value never exceeds the WM value.
pub fn fit(y: &VelocitySeries, family: Family, starts: &[ShapeParams], cfg: &FitConfig) -> Result<FitResult> {
    if y.len() < 100 {
        return Err(GwmError::InsufficientData(format!("fit needs N >= 100, got {}", y.len())));
    }
    if starts.is_empty() {
        return Err(GwmError::InvalidParameter("no starting points".into()));
    }
    let mut outcomes: Vec<StartOutcome> = starts.par_iter().map(|s| run_start(family, y, s, cfg)).collect();
    if family == Family::Wm {
        let best = best_of(&outcomes).ok_or_else(|| all_failed(&outcomes))?;
        return finish(family, y, cfg, outcomes, best);
    }
    let wm_starts: Vec<ShapeParams> = starts
        .iter()
        .map(|s| ShapeParams {
            alpha: 1.0,
            gamma: s.alpha * s.gamma,
            ell: s.ell,
        })
        .collect();
    let wm = fit(y, Family::Wm, &wm_starts, cfg)?;
    let boundary = ShapeParams {
        alpha: BOUNDARY_START_ALPHA,
        gamma: wm.params.gamma / BOUNDARY_START_ALPHA,
        ell: wm.params.ell,
    };
    outcomes.push(run_start(family, y, &boundary, cfg));
    match best_of(&outcomes) {
        Some(b) if outcomes[b].nll_reduced.unwrap() <= wm.nll_reduced => finish(family, y, cfg, outcomes, b),
        _ => Ok(FitResult {
            family,
            best_start: None,
            starts: outcomes,
            ..wm
        }),
    }
}

fn all_failed(outcomes: &[StartOutcome]) -> GwmError {
    let msgs: Vec<String> = outcomes.iter().filter_map(|o| o.error.clone()).collect();
    GwmError::Optimization(format!("every start failed: {}", msgs.join("; ")))
}
