//! Adaptive Gauss–Kronrod quadrature on finite panels and an oscillatory
//! integrator for Hankel-type integrals over `[0, ∞)`.
//!
//! The Kronrod rule is open: endpoints are never evaluated, so integrable
//! endpoint singularities (`log u`, `u^{-1/2}`) are handled by bisection.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{GwmError, Result};

/// Tolerances and limits for the adaptive integrators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Truncation point for semi-infinite integrals in the fixed-argument
    /// Macdonald variable (the kernel underflows near 705).
    pub upper_cutoff: f64,
    /// Accept a result whose error estimate has reached the round-off floor
    /// `50 ε ∫|f|` instead of failing when `rel_tol` is out of reach.
    #[serde(default)]
    pub accept_roundoff: bool,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_subdivisions: 200,
            upper_cutoff: 705.0,
            accept_roundoff: false,
        }
    }
}

impl QuadConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(GwmError::InvalidParameter("quadrature tolerances must be positive".into()));
        }
        if self.max_subdivisions == 0 {
            return Err(GwmError::InvalidParameter("max_subdivisions must be >= 1".into()));
        }
        if !(self.upper_cutoff >= 50.0) {
            return Err(GwmError::InvalidParameter("upper_cutoff must be >= 50".into()));
        }
        Ok(())
    }

    /// Same limits with a tighter relative tolerance.
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOutput {
    pub value: f64,
    pub abs_err: f64,
    pub subdivisions: usize,
}

// Gauss–Kronrod 10/21 nodes (positive half) and weights.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// One 21-point Kronrod panel: (integral, error estimate, round-off floor).
fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let result = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (1.0f64).min((200.0 * err / res_asc).powf(1.5));
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(floor);
    }
    (result, err, floor)
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    floor: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Adaptive integration of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadOutput> {
    integrate_breaks(f, &[a, b], cfg)
}

/// Adaptive integration over consecutive panels `breaks[i]..breaks[i+1]`.
///
/// Subdivision always splits the panel with the largest error estimate, and
/// the subdivision budget counts bisections beyond the initial panels.
pub fn integrate_breaks<F: Fn(f64) -> f64>(f: F, breaks: &[f64], cfg: &QuadConfig) -> Result<QuadOutput> {
    if breaks.len() < 2 {
        return Err(GwmError::InvalidParameter("need at least two break points".into()));
    }
    let mut heap = BinaryHeap::with_capacity(breaks.len() + 2 * cfg.max_subdivisions);
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut total_floor = 0.0;
    for w in breaks.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        let (value, err, floor) = gk21(&f, w[0], w[1]);
        total += value;
        total_err += err;
        total_floor += floor;
        heap.push(Panel { a: w[0], b: w[1], value, err, floor });
    }
    let mut subdivisions = 0;
    loop {
        if !total.is_finite() {
            return Err(GwmError::Quadrature {
                value: total,
                abs_err: total_err,
                subdivisions,
            });
        }
        let mut target = cfg.abs_tol.max(cfg.rel_tol * total.abs());
        if cfg.accept_roundoff {
            // Within a factor two of the floor, bisection cannot help.
            target = target.max(2.0 * total_floor);
        }
        if total_err <= target {
            break;
        }
        if subdivisions >= cfg.max_subdivisions {
            return Err(GwmError::Quadrature {
                value: total,
                abs_err: total_err,
                subdivisions,
            });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel collapsed to machine resolution; accept what we have.
            heap.push(Panel { err: 0.0, floor: 0.0, ..worst });
            total_err -= worst.err;
            total_floor -= worst.floor;
            continue;
        }
        let (v1, e1, f1) = gk21(&f, worst.a, mid);
        let (v2, e2, f2) = gk21(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        total_floor += f1 + f2 - worst.floor;
        heap.push(Panel { a: worst.a, b: mid, value: v1, err: e1, floor: f1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, err: e2, floor: f2 });
        subdivisions += 1;
    }
    // Re-sum to drop accumulated update error.
    let mut value = 0.0;
    let mut abs_err = 0.0;
    for p in heap.iter() {
        value += p.value;
        abs_err += p.err;
    }
    Ok(QuadOutput { value, abs_err, subdivisions })
}

/// Geometric break points `c·10^k` inside `(lo, hi)` plus the ends, sorted.
pub fn log_breaks(lo: f64, hi: f64, centers: &[f64]) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    for &c in centers {
        if !(c > 0.0) || !c.is_finite() {
            continue;
        }
        for k in -8..=4 {
            let p = c * 10f64.powi(k);
            if p > lo && p < hi {
                pts.push(p);
            }
        }
        for &m in &[0.5, 2.0] {
            let p = c * m;
            if p > lo && p < hi {
                pts.push(p);
            }
        }
    }
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1e-300));
    pts
}

/// Iterated averaging of partial sums of an alternating series.
///
/// Each pass replaces the sequence by the means of consecutive entries; for
/// sums whose terms alternate with a smoothly varying amplitude this removes
/// the leading oscillating error at every pass.
pub fn iterated_average(partials: &[f64]) -> f64 {
    let mut seq = partials.to_vec();
    while seq.len() > 1 {
        seq = seq.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    }
    seq.first().copied().unwrap_or(0.0)
}

/// `∫_0^∞ g(v) dv` where `g` oscillates with sign changes at the given
/// increasing `zeros` sequence (a closure producing the k-th zero).
///
/// Integrates directly up to the `start`-th zero, then accumulates `extra`
/// further half-period panels and accelerates their partial sums.
pub fn oscillatory_tail<F, Z>(g: F, zero: Z, start: usize, extra: usize, cfg: &QuadConfig) -> Result<QuadOutput>
where
    F: Fn(f64) -> f64,
    Z: Fn(usize) -> f64,
{
    let mut breaks = Vec::with_capacity(start + 2);
    breaks.push(0.0);
    for k in 0..start {
        breaks.push(zero(k));
    }
    let head = integrate_breaks(&g, &breaks, cfg)?;
    let mut partials = Vec::with_capacity(extra + 1);
    let mut sum = head.value;
    let mut err = head.abs_err;
    let mut subdivisions = head.subdivisions;
    partials.push(sum);
    let mut left = *breaks.last().unwrap();
    let panel_cfg = QuadConfig {
        abs_tol: cfg.abs_tol * 1e-3,
        ..*cfg
    };
    for k in start..start + extra {
        let right = zero(k);
        let piece = integrate(&g, left, right, &panel_cfg)?;
        sum += piece.value;
        err += piece.abs_err;
        subdivisions += piece.subdivisions;
        partials.push(sum);
        left = right;
    }
    let n = partials.len();
    let accel = iterated_average(&partials);
    let accel_prev = iterated_average(&partials[..n - 1]);
    Ok(QuadOutput {
        value: accel,
        abs_err: err + (accel - accel_prev).abs(),
        subdivisions,
    })
}
