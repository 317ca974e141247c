//! Derivative-free Nelder–Mead simplex minimization.

use serde::{Deserialize, Serialize};

use crate::error::{GwmError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadConfig {
    /// Stop when every vertex lies within this max-norm distance of the best.
    pub x_tol: f64,
    /// ... and every vertex value lies within this of the best.
    pub f_tol: f64,
    pub max_iter: usize,
    /// Absolute initial edge length; `None` uses 5% of each coordinate
    /// (0.00025 for zero coordinates).
    pub initial_step: Option<f64>,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        NelderMeadConfig {
            x_tol: 1e-4,
            f_tol: 1e-6,
            max_iter: 2000,
            initial_step: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimizes `f` from `x0`. Non-finite values at trial points are treated as
/// `+∞`; a non-finite value at `x0` is an error.
pub fn nelder_mead<F>(f: F, x0: &[f64], cfg: &NelderMeadConfig) -> Result<Minimum>
where
    F: Fn(&[f64]) -> f64,
{
    let d = x0.len();
    if d == 0 {
        return Err(GwmError::InvalidParameter("empty starting point".into()));
    }
    let mut evaluations = 0;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let f0 = eval(x0);
    if !f0.is_finite() {
        return Err(GwmError::Optimization(format!("objective is not finite at the start {x0:?}")));
    }
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(x0.to_vec(), f0)];
    for i in 0..d {
        let mut x = x0.to_vec();
        x[i] += match cfg.initial_step {
            Some(h) => h,
            None if x[i] != 0.0 => 0.05 * x[i],
            None => 0.00025,
        };
        let v = eval(&x);
        simplex.push((x, v));
    }
    let (rho, chi, psi, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut iterations = 0;
    let mut converged = false;
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let spread = simplex.iter().map(|v| (v.1 - best).abs()).fold(0.0, f64::max);
        let diameter = simplex
            .iter()
            .skip(1)
            .flat_map(|v| v.0.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if (diameter <= cfg.x_tol && spread <= cfg.f_tol) || spread == 0.0 {
            converged = true;
            break;
        }
        if iterations >= cfg.max_iter {
            break;
        }
        iterations += 1;
        let mut centroid = vec![0.0; d];
        for v in &simplex[..d] {
            for (c, x) in centroid.iter_mut().zip(&v.0) {
                *c += x / d as f64;
            }
        }
        let worst = simplex[d].clone();
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (c - w)).collect()
        };
        let xr = along(rho);
        let fr = eval(&xr);
        if fr < simplex[0].1 {
            let xe = along(rho * chi);
            let fe = eval(&xe);
            simplex[d] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[d - 1].1 {
            simplex[d] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst.1 {
            let xc = along(rho * psi);
            let fc = eval(&xc);
            (xc, fc)
        } else {
            let xc = along(-psi);
            let fc = eval(&xc);
            (xc, fc)
        };
        if fc < fr.min(worst.1) {
            simplex[d] = (xc, fc);
            continue;
        }
        let x_best = simplex[0].0.clone();
        for v in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = x_best.iter().zip(&v.0).map(|(b, x)| b + sigma * (x - b)).collect();
            let fx = eval(&x);
            *v = (x, fx);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let spread_zero = simplex.iter().all(|v| v.1 == simplex[0].1);
    let (x, fx) = if spread_zero && converged {
        // Flat simplex: no vertex is preferred, report the centroid.
        let mut c = vec![0.0; d];
        for v in &simplex {
            for (ci, xi) in c.iter_mut().zip(&v.0) {
                *ci += xi / (d + 1) as f64;
            }
        }
        let fc = f(&c);
        (c, fc)
    } else {
        (simplex[0].0.clone(), simplex[0].1)
    };
    Ok(Minimum {
        x,
        f: fx,
        iterations,
        evaluations,
        converged,
    })
}
