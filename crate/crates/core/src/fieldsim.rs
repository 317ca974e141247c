//! Gaussian sample paths and fields by circulant embedding.
//!
//! A 1D grid of `N` points is embedded in a circulant of size `2N`; a 2D grid
//! `N1 x N2` in a block-circulant on the `2N1 x 2N2` torus. Gaussian variates
//! are drawn per fixed-size chunk from a ChaCha8 stream keyed by
//! `(seed, chunk)`, so the output does not depend on the thread count.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::engine::{covariance_with, CovarianceTable, ModelParams};
use crate::error::{GwmError, Result};
use crate::quad::QuadConfig;

/// Largest number of grid points accepted (the embedding holds 4x as many
/// complex values in 2D).
pub const MAX_GRID_POINTS: usize = 1 << 22;

/// Largest fraction of spectral mass that may be clipped from a negative
/// embedding spectrum before simulation is refused.
pub const MAX_CLIPPED_FRACTION: f64 = 1e-3;

const CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    /// Points per axis (one or two axes).
    pub sizes: Vec<usize>,
    /// Spacing per axis.
    pub spacing: Vec<f64>,
}

impl Grid {
    pub fn line(size: usize, spacing: f64) -> Result<Self> {
        let g = Grid {
            sizes: vec![size],
            spacing: vec![spacing],
        };
        g.validate()?;
        Ok(g)
    }

    pub fn plane(sizes: [usize; 2], spacing: [f64; 2]) -> Result<Self> {
        let g = Grid {
            sizes: sizes.to_vec(),
            spacing: spacing.to_vec(),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn dims(&self) -> usize {
        self.sizes.len()
    }

    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.sizes.len()) || self.sizes.len() != self.spacing.len() {
            return Err(GwmError::InvalidParameter("grid must have 1 or 2 axes with one spacing each".into()));
        }
        if self.sizes.iter().any(|&s| s < 8) {
            return Err(GwmError::InvalidParameter(format!("grid sizes must be >= 8, got {:?}", self.sizes)));
        }
        if self.spacing.iter().any(|&h| !(h > 0.0) || !h.is_finite()) {
            return Err(GwmError::InvalidParameter(format!("grid spacing must be > 0, got {:?}", self.spacing)));
        }
        if self.sizes.iter().try_fold(1usize, |acc, &s| acc.checked_mul(s)).map_or(true, |n| n > MAX_GRID_POINTS) {
            return Err(GwmError::InvalidParameter(format!(
                "grid has more than {MAX_GRID_POINTS} points"
            )));
        }
        Ok(())
    }
}

/// Spectrum of a (block-)circulant embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    /// Torus size per axis.
    pub sizes: Vec<usize>,
    /// Eigenvalues, row-major over the torus, before clipping.
    pub eigenvalues: Vec<f64>,
    pub min_eigenvalue: f64,
    /// Negative mass over total absolute mass.
    pub clipped_fraction: f64,
}

impl Embedding {
    fn from_first_row(sizes: Vec<usize>, row: Vec<f64>) -> Self {
        let mut buf: Vec<Complex64> = row.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        fft_nd(&mut buf, &sizes);
        let eigenvalues: Vec<f64> = buf.iter().map(|z| z.re).collect();
        let min_eigenvalue = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        let neg: f64 = eigenvalues.iter().filter(|&&x| x < 0.0).map(|x| -x).sum();
        let total: f64 = eigenvalues.iter().map(|x| x.abs()).sum();
        let clipped_fraction = if total > 0.0 { neg / total } else { 0.0 };
        Embedding {
            sizes,
            eigenvalues,
            min_eigenvalue,
            clipped_fraction,
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.clipped_fraction > MAX_CLIPPED_FRACTION {
            Err(GwmError::Embedding(self.clipped_fraction))
        } else {
            Ok(())
        }
    }

    fn len(&self) -> usize {
        self.eigenvalues.len()
    }
}

/// Embeds covariances at lags `0, h, ..., N h` (table length `N+1`) in a
/// circulant of size `2N` with first row `c0, ..., cN, c(N-1), ..., c1`.
pub fn circulant_embedding(table: &CovarianceTable) -> Result<Embedding> {
    let c = &table.values;
    if c.len() < 2 {
        return Err(GwmError::InvalidParameter("embedding needs at least two lags".into()));
    }
    let n = c.len() - 1;
    let m = 2 * n;
    let row: Vec<f64> = (0..m).map(|k| c[k.min(m - k)]).collect();
    Ok(Embedding::from_first_row(vec![m], row))
}

/// Block-circulant embedding of an isotropic covariance on the doubled torus.
pub fn circulant_embedding_2d(p: &ModelParams, grid: &Grid, cfg: &QuadConfig) -> Result<Embedding> {
    grid.validate()?;
    if grid.dims() != 2 {
        return Err(GwmError::InvalidParameter("2D embedding needs a 2-axis grid".into()));
    }
    let (n1, n2) = (grid.sizes[0], grid.sizes[1]);
    let (h1, h2) = (grid.spacing[0], grid.spacing[1]);
    let quarter: Vec<f64> = (0..=n1)
        .into_par_iter()
        .flat_map_iter(|i| (0..=n2).map(move |j| (i, j)))
        .map(|(i, j)| covariance_with(p, ((i as f64 * h1).powi(2) + (j as f64 * h2).powi(2)).sqrt(), cfg))
        .collect::<Result<_>>()?;
    let (m1, m2) = (2 * n1, 2 * n2);
    let mut row = vec![0.0; m1 * m2];
    for i in 0..m1 {
        let ii = i.min(m1 - i);
        for j in 0..m2 {
            row[i * m2 + j] = quarter[ii * (n2 + 1) + j.min(m2 - j)];
        }
    }
    Ok(Embedding::from_first_row(vec![m1, m2], row))
}

/// In-place forward FFT over a row-major array with the given axis sizes.
fn fft_nd(buf: &mut [Complex64], sizes: &[usize]) {
    let mut planner = FftPlanner::new();
    match *sizes {
        [m] => {
            planner.plan_fft_forward(m).process(buf);
        }
        [m1, m2] => {
            let rows = planner.plan_fft_forward(m2);
            buf.par_chunks_mut(m2).for_each(|r| rows.process(r));
            let cols = planner.plan_fft_forward(m1);
            let mut t = transpose(buf, m1, m2);
            t.par_chunks_mut(m1).for_each(|c| cols.process(c));
            buf.copy_from_slice(&transpose(&t, m2, m1));
        }
        _ => unreachable!("grid validation limits dims to 1 or 2"),
    }
}

fn transpose(a: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len()];
    for i in 0..rows {
        for j in 0..cols {
            out[j * rows + i] = a[i * cols + j];
        }
    }
    out
}

/// `len` complex standard Gaussians (unit variance in each part) drawn in
/// chunks, chunk `k` from ChaCha8 seeded with `seed` on stream `k`.
fn complex_normals(seed: u64, len: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    out.par_chunks_mut(CHUNK).enumerate().for_each(|(k, chunk)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        for z in chunk.iter_mut() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *z = Complex64::new(re, im);
        }
    });
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub grid: Grid,
    /// Row-major values; the last axis varies fastest.
    pub values: Vec<f64>,
    pub seed: u64,
    pub params: ModelParams,
}

/// Cached embedding for repeated sampling of one `(p, grid)` pair.
pub struct Simulator {
    params: ModelParams,
    grid: Grid,
    embedding: Embedding,
    /// `sqrt(max(λ, 0) / M)` per torus node.
    scale: Vec<f64>,
    plan: Vec<Arc<dyn Fft<f64>>>,
}

impl Simulator {
    pub fn new(p: &ModelParams, grid: &Grid) -> Result<Self> {
        Self::with_config(p, grid, &QuadConfig::default())
    }

    pub fn with_config(p: &ModelParams, grid: &Grid, cfg: &QuadConfig) -> Result<Self> {
        p.require_finite_variance()?;
        grid.validate()?;
        let embedding = match grid.dims() {
            1 => {
                let table = CovarianceTable::regular(p, grid.spacing[0], grid.sizes[0] + 1, cfg)?;
                circulant_embedding(&table)?
            }
            _ => circulant_embedding_2d(p, grid, cfg)?,
        };
        embedding.check()?;
        let m = embedding.len() as f64;
        let scale = embedding.eigenvalues.iter().map(|&l| (l.max(0.0) / m).sqrt()).collect();
        let mut planner = FftPlanner::new();
        let plan = embedding.sizes.iter().map(|&s| planner.plan_fft_forward(s)).collect();
        Ok(Simulator {
            params: *p,
            grid: grid.clone(),
            embedding,
            scale,
            plan,
        })
    }

    pub fn embedding(&self) -> &Embedding {
        &self.embedding
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// One realization. The real and imaginary parts of the transformed
    /// noise are independent fields; the real part is returned.
    pub fn sample(&self, seed: u64) -> FieldSample {
        let mut buf = complex_normals(seed, self.embedding.len());
        for (z, &s) in buf.iter_mut().zip(&self.scale) {
            *z *= s;
        }
        let values = match self.embedding.sizes[..] {
            [_] => {
                self.plan[0].process(&mut buf);
                buf[..self.grid.sizes[0]].iter().map(|z| z.re).collect()
            }
            [m1, m2] => {
                buf.par_chunks_mut(m2).for_each(|r| self.plan[1].process(r));
                let mut t = transpose(&buf, m1, m2);
                t.par_chunks_mut(m1).for_each(|c| self.plan[0].process(c));
                let (n1, n2) = (self.grid.sizes[0], self.grid.sizes[1]);
                let mut v = Vec::with_capacity(n1 * n2);
                for i in 0..n1 {
                    for j in 0..n2 {
                        v.push(t[j * m1 + i].re);
                    }
                }
                v
            }
            _ => unreachable!(),
        };
        FieldSample {
            grid: self.grid.clone(),
            values,
            seed,
            params: self.params,
        }
    }
}

/// One-shot simulation; prefer [`Simulator`] for many seeds.
pub fn simulate(p: &ModelParams, grid: &Grid, seed: u64) -> Result<FieldSample> {
    Ok(Simulator::new(p, grid)?.sample(seed))
}

pub const SIDECAR_SCHEMA_VERSION: u32 = 1;

/// Metadata written next to a raw dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawSidecar {
    pub schema_version: u32,
    /// Always `"f64-le"`.
    pub dtype: String,
    /// Always `"row-major"`: the last axis varies fastest.
    pub layout: String,
    pub count: usize,
    pub grid: Grid,
    pub seed: u64,
    pub params: ModelParams,
}

impl FieldSample {
    /// CSV with header `x,value` or `x,y,value`; coordinates are
    /// `index * spacing`, rows in storage order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        match self.grid.sizes[..] {
            [n] => {
                writeln!(w, "x,value")?;
                for i in 0..n {
                    writeln!(w, "{},{}", i as f64 * self.grid.spacing[0], self.values[i])?;
                }
            }
            [n1, n2] => {
                writeln!(w, "x,y,value")?;
                for i in 0..n1 {
                    for j in 0..n2 {
                        let x = i as f64 * self.grid.spacing[0];
                        let y = j as f64 * self.grid.spacing[1];
                        writeln!(w, "{x},{y},{}", self.values[i * n2 + j])?;
                    }
                }
            }
            _ => unreachable!(),
        }
        Ok(())
    }

    /// Values as consecutive little-endian IEEE-754 doubles.
    pub fn raw_bytes(&self) -> Vec<u8> {
        self.values.iter().flat_map(|v| v.to_le_bytes()).collect()
    }

    pub fn sidecar(&self) -> RawSidecar {
        RawSidecar {
            schema_version: SIDECAR_SCHEMA_VERSION,
            dtype: "f64-le".into(),
            layout: "row-major".into(),
            count: self.values.len(),
            grid: self.grid.clone(),
            seed: self.seed,
            params: self.params,
        }
    }

    /// Writes `path` (raw doubles) and `path` + `.json` (sidecar).
    pub fn write_raw(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.raw_bytes())?;
        let mut side = path.as_os_str().to_owned();
        side.push(".json");
        let json = serde_json::to_string_pretty(&self.sidecar()).map_err(|e| GwmError::Io(e.to_string()))?;
        std::fs::write(side, json + "\n")?;
        Ok(())
    }

    /// Reads back a dump written by [`FieldSample::write_raw`].
    pub fn read_raw(path: &Path) -> Result<Self> {
        let mut side = path.as_os_str().to_owned();
        side.push(".json");
        let meta: RawSidecar = serde_json::from_str(&std::fs::read_to_string(side)?)
            .map_err(|e| GwmError::Parse { line: e.line(), msg: e.to_string() })?;
        let bytes = std::fs::read(path)?;
        if bytes.len() != 8 * meta.count || meta.count != meta.grid.len() {
            return Err(GwmError::Io(format!(
                "raw dump has {} bytes, sidecar expects {} values",
                bytes.len(),
                meta.count
            )));
        }
        let values = bytes
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("chunk of 8")))
            .collect();
        Ok(FieldSample {
            grid: meta.grid,
            values,
            seed: meta.seed,
            params: meta.params,
        })
    }
}
