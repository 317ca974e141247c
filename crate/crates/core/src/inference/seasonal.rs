//! Seasonal adjustment of square-root daily means.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::wind::DailySeries;
use crate::error::{GwmError, Result};

pub const SEASONAL_DEGREE: usize = 8;

/// Degree-8 polynomial in the scaled abscissa `x = (day - 183) / 182`, which
/// maps days 1..=365 onto [-1, 1]. `coefficients[k]` multiplies `x^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonalModel {
    pub coefficients: Vec<f64>,
    /// Mean of the square-root series for each day 1..=365.
    pub day_means: Vec<f64>,
}

pub fn day_abscissa(day: u32) -> f64 {
    (day as f64 - 183.0) / 182.0
}

impl SeasonalModel {
    pub fn eval(&self, day: u32) -> f64 {
        let x = day_abscissa(day);
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }
}

/// Zero-mean residual series (the "velocity").
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocitySeries {
    pub values: Vec<f64>,
}

impl VelocitySeries {
    /// Wraps values after subtracting their mean.
    pub fn centered(mut values: Vec<f64>) -> Self {
        center(&mut values);
        VelocitySeries { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len().max(1) as f64
    }

    /// `N^{-1} Σ y²` (the mean is zero by construction).
    pub fn variance(&self) -> f64 {
        self.values.iter().map(|y| y * y).sum::<f64>() / self.values.len().max(1) as f64
    }
}

fn center(v: &mut [f64]) {
    if v.is_empty() {
        return;
    }
    // Two passes so the residual mean is at rounding level.
    for _ in 0..2 {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter_mut().for_each(|x| *x -= m);
    }
}

/// Square roots of the daily means, averaged per day of year, fitted by a
/// degree-8 least-squares polynomial; the velocity is the square-root series
/// minus the fitted value for its day, then mean-centered.
pub fn deseasonalize(d: &DailySeries) -> Result<(VelocitySeries, SeasonalModel)> {
    d.validate()?;
    if d.values.iter().any(|&v| !(v >= 0.0)) {
        return Err(GwmError::InsufficientData("daily means must be >= 0".into()));
    }
    let roots: Vec<f64> = d.values.iter().map(|v| v.sqrt()).collect();
    let mut sums = vec![0.0; 365];
    let mut counts = vec![0usize; 365];
    for (c, r) in d.calendar.iter().zip(&roots) {
        sums[(c.day - 1) as usize] += r;
        counts[(c.day - 1) as usize] += 1;
    }
    if let Some(min) = counts.iter().min().filter(|&&m| m < 2) {
        return Err(GwmError::InsufficientData(format!(
            "need at least 2 years of every day of year, found a day with {min}"
        )));
    }
    let day_means: Vec<f64> = sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();
    let design = DMatrix::from_fn(365, SEASONAL_DEGREE + 1, |i, k| day_abscissa(i as u32 + 1).powi(k as i32));
    let rhs = DVector::from_column_slice(&day_means);
    let svd = design.svd(true, true);
    // 365 distinct abscissae give full column rank.
    assert!(svd.singular_values.min() > 1e-8 * svd.singular_values.max());
    let coef = svd.solve(&rhs, 1e-14).map_err(|e| GwmError::Degenerate(e.to_string()))?;
    let model = SeasonalModel {
        coefficients: coef.iter().copied().collect(),
        day_means,
    };
    let values = d.calendar.iter().zip(&roots).map(|(c, r)| r - model.eval(c.day)).collect();
    Ok((VelocitySeries::centered(values), model))
}
