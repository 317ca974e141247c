//! Special functions used by the covariance engine: Gamma, Bessel `J` and `Y`
//! of real order, and the Macdonald function `K` of real order.
//!
//! `K_ν` and `J_ν` follow the Temme/Steed scheme: the order is split into an
//! integer part and a fractional part `μ ∈ [-1/2, 1/2]`, the fractional order
//! is evaluated by Temme's series for small arguments and by Steed's continued
//! fraction otherwise, and the integer part is restored by recurrence.
//! For large arguments `J_ν` and `Y_ν` use Hankel's asymptotic expansion.
//!
//! `K_ν(x)` underflows to exactly `0.0` once `x` exceeds roughly 705; use
//! [`bessel_k_scaled`] when the exponential factor must be kept separate.

use std::f64::consts::PI;

use crate::error::{GwmError, Result};

/// A Bessel or Macdonald order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Order(pub f64);

impl From<f64> for Order {
    fn from(nu: f64) -> Self {
        Order(nu)
    }
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const MAX_ITER: usize = 100_000;
const TINY: f64 = 1e-300;

// Lanczos approximation, g = 607/128, 15 terms.
const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS_COEF: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_9e-4,
    0.465_236_289_270_485_8e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_5e-3,
    -0.210_264_441_724_103_2e-3,
    0.217_439_618_115_212_6e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_1e-4,
    0.368_991_826_595_316_2e-5,
];

// Taylor coefficients of 1/Γ(z) = Σ c_k z^k, k = 1..26.
const RGAMMA_TAYLOR: [f64; 26] = [
    1.0,
    0.577_215_664_901_532_9,
    -0.655_878_071_520_253_8,
    -0.042_002_635_034_095_2,
    0.166_538_611_382_291_5,
    -0.042_197_734_555_544_3,
    -0.009_621_971_527_877_0,
    0.007_218_943_246_663_0,
    -0.001_165_167_591_859_1,
    -0.000_215_241_674_114_9,
    0.000_128_050_282_388_2,
    -0.000_020_134_854_780_7,
    -0.000_001_250_493_482_1,
    0.000_001_133_027_232_0,
    -0.000_000_205_633_841_7,
    0.000_000_006_116_095_0,
    0.000_000_005_002_007_5,
    -0.000_000_001_181_274_6,
    0.000_000_000_104_342_7,
    0.000_000_000_007_782_3,
    -0.000_000_000_003_696_8,
    0.000_000_000_000_510_0,
    -0.000_000_000_000_020_6,
    -0.000_000_000_000_005_4,
    0.000_000_000_000_001_4,
    0.000_000_000_000_000_1,
];

/// `sin(πx)` with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    if r == 0.0 || r == 1.0 {
        return 0.0;
    }
    if r == 0.5 {
        return 1.0;
    }
    if r == 1.5 {
        return -1.0;
    }
    (PI * r).sin()
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

fn lanczos_sum(x: f64) -> f64 {
    let mut a = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    a
}

/// Γ(x) for real `x` away from the poles at the non-positive integers.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(GwmError::Domain(format!("gamma of non-finite {x}")));
    }
    if is_nonpositive_integer(x) {
        return Err(GwmError::GammaPole(x));
    }
    Ok(gamma_unchecked(x))
}

fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        return PI / (sin_pi(x) * gamma_unchecked(1.0 - x));
    }
    // Exact on small positive integers.
    if x == x.round() && x <= 23.0 {
        let mut f = 1.0;
        let mut k = 2.0;
        while k < x {
            f *= k;
            k += 1.0;
        }
        return f;
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    let a = lanczos_sum(z);
    let half = t.powf(0.5 * (z + 0.5));
    (2.0 * PI).sqrt() * half * (-t).exp() * half * a
}

/// ln Γ(x) for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(GwmError::Domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    if x < 0.5 {
        return Ok((PI / sin_pi(x)).ln() - ln_gamma(1.0 - x)?);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln())
}

/// 1/Γ(x), returning 0 at the poles of Γ.
pub fn rgamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return 0.0;
    }
    if x.abs() < 0.5 {
        return RGAMMA_TAYLOR
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c)
            * x;
    }
    if x > 171.0 {
        return 0.0;
    }
    1.0 / gamma_unchecked(x)
}

/// Temme's auxiliary values for `|mu| <= 1/2`:
/// `gam1 = (1/Γ(1-μ) - 1/Γ(1+μ)) / (2μ)`, `gam2 = (1/Γ(1-μ) + 1/Γ(1+μ)) / 2`,
/// and the reciprocals `1/Γ(1+μ)`, `1/Γ(1-μ)`.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    let mu2 = mu * mu;
    // 1/Γ(1+μ) = Σ c_k μ^{k-1}; split by parity of k.
    let mut gam1 = 0.0;
    let mut gam2 = 0.0;
    let mut pow = 1.0;
    for pair in RGAMMA_TAYLOR.chunks(2) {
        gam2 += pair[0] * pow;
        if pair.len() > 1 {
            gam1 -= pair[1] * pow;
        }
        pow *= mu2;
    }
    let gampl = gam2 - mu * gam1;
    let gammi = gam2 + mu * gam1;
    (gam1, gam2, gampl, gammi)
}

/// `e^x K_mu(x)` and `e^x K_{mu+1}(x)` for `|mu| <= 1/2`, `x > 0`.
fn bessel_k_frac_scaled(mu: f64, x: f64) -> (f64, f64) {
    let mu2 = mu * mu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    if x < 2.0 {
        let x2 = 0.5 * x;
        let pimu = PI * mu;
        let fact = if pimu.abs() < f64::EPSILON {
            1.0
        } else {
            pimu / pimu.sin()
        };
        let d = -x2.ln();
        let e = mu * d;
        let fact2 = if e.abs() < f64::EPSILON {
            1.0
        } else {
            e.sinh() / e
        };
        let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / gampl;
        let mut q = 0.5 / (ee * gammi);
        let mut c = 1.0;
        let dd = x2 * x2;
        let mut sum1 = p;
        for i in 1..MAX_ITER {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - mu2);
            c *= dd / fi;
            p /= fi - mu;
            q /= fi + mu;
            let del = c * ff;
            sum += del;
            let del1 = c * (p - fi * ff);
            sum1 += del1;
            if del.abs() < sum.abs() * f64::EPSILON {
                break;
            }
        }
        let scale = x.exp();
        (sum * scale, sum1 * xi2 * scale)
    } else {
        // Steed's algorithm for CF2 with Temme's normalization.
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut h = d;
        let mut delh = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - mu2;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        for i in 2..MAX_ITER {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh = (b * d - 1.0) * delh;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < f64::EPSILON {
                break;
            }
        }
        h *= a1;
        let kmu = (PI / (2.0 * x)).sqrt() / s;
        let k1 = kmu * (mu + x + 0.5 - h) * xi;
        (kmu, k1)
    }
}

/// Exponentially scaled Macdonald function `e^x K_ν(x)`, `x > 0`.
pub fn bessel_k_scaled(nu: impl Into<Order>, x: f64) -> Result<f64> {
    let nu = nu.into().0.abs();
    if !(x > 0.0) || !x.is_finite() {
        return Err(GwmError::Domain(format!("bessel_k requires x > 0, got {x}")));
    }
    if !nu.is_finite() {
        return Err(GwmError::Domain(format!("non-finite order {nu}")));
    }
    // Half-integer orders have terminating closed forms.
    if nu == 0.5 {
        return Ok((PI / (2.0 * x)).sqrt());
    }
    let nl = (nu + 0.5).floor();
    let mu = nu - nl;
    let (mut kmu, mut k1) = bessel_k_frac_scaled(mu, x);
    let xi2 = 2.0 / x;
    for i in 1..=(nl as usize) {
        let next = (mu + i as f64) * xi2 * k1 + kmu;
        kmu = k1;
        k1 = next;
    }
    Ok(kmu)
}

/// Macdonald function `K_ν(x)`, `x > 0`. Underflows to 0 beyond `x ≈ 705`.
pub fn bessel_k(nu: impl Into<Order>, x: f64) -> Result<f64> {
    let scaled = bessel_k_scaled(nu, x)?;
    if x > 745.0 {
        return Ok(0.0);
    }
    Ok(scaled * (-x).exp())
}

/// Hankel asymptotic expansion of `(J_ν(x), Y_ν(x))` for large `x`.
fn bessel_jy_asymptotic(nu: f64, x: f64) -> (f64, f64) {
    let mu4 = 4.0 * nu * nu;
    let mut p = 0.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut prev = f64::INFINITY;
    for k in 0..60 {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            term *= (mu4 - odd * odd) / (k as f64 * 8.0 * x);
        }
        if term.abs() > prev && k > 2 {
            break;
        }
        prev = term.abs();
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if term.abs() < 1e-17 * (p.abs() + q.abs()) {
            break;
        }
    }
    let chi = x - (0.5 * nu + 0.25) * PI;
    let amp = (2.0 / (PI * x)).sqrt();
    let (s, c) = chi.sin_cos();
    (amp * (p * c - q * s), amp * (p * s + q * c))
}

/// `(J_ν(x), Y_ν(x))` for `ν >= 0`, `x > 0` by Temme's method with Steed's CF2.
fn bessel_jy_temme(nu: f64, x: f64) -> (f64, f64) {
    const XMIN: f64 = 2.0;
    let eps = f64::EPSILON;
    let nl = if x < XMIN {
        (nu + 0.5).floor() as i64
    } else {
        ((nu - x + 1.5).floor() as i64).max(0)
    };
    let mu = nu - nl as f64;
    let mu2 = mu * mu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let w = xi2 / PI;

    // CF1: J'_ν / J_ν.
    let mut isign = 1.0;
    let mut h = (nu * xi).max(TINY);
    let mut b = xi2 * nu;
    let mut d = 0.0;
    let mut c = h;
    for _ in 0..MAX_ITER {
        b += xi2;
        d = b - d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b - 1.0 / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = c * d;
        h *= del;
        if d < 0.0 {
            isign = -isign;
        }
        if (del - 1.0).abs() < eps {
            break;
        }
    }
    let mut rjl = isign * TINY;
    let mut rjpl = h * rjl;
    let rjl1 = rjl;
    let mut fact = nu * xi;
    for _ in (0..nl).rev() {
        let rjtemp = fact * rjl + rjpl;
        fact -= xi;
        rjpl = fact * rjtemp - rjl;
        rjl = rjtemp;
    }
    if rjl == 0.0 {
        rjl = eps;
    }
    let f = rjpl / rjl;

    let (rjmu, mut rymu, mut ry1);
    if x < XMIN {
        let x2 = 0.5 * x;
        let pimu = PI * mu;
        let fact = if pimu.abs() < eps { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = mu * d;
        let fact2 = if e.abs() < eps { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
        let mut ff = 2.0 / PI * fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let ee = e.exp();
        let mut p = ee / (gampl * PI);
        let mut q = 1.0 / (ee * PI * gammi);
        let pimu2 = 0.5 * pimu;
        let fact3 = if pimu2.abs() < eps {
            1.0
        } else {
            pimu2.sin() / pimu2
        };
        let r = PI * pimu2 * fact3 * fact3;
        let mut c = 1.0;
        let dd = -x2 * x2;
        let mut sum = ff + r * q;
        let mut sum1 = p;
        for i in 1..MAX_ITER {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - mu2);
            c *= dd / fi;
            p /= fi - mu;
            q /= fi + mu;
            let del = c * (ff + r * q);
            sum += del;
            let del1 = c * p - fi * del;
            sum1 += del1;
            if del.abs() < (1.0 + sum.abs()) * eps {
                break;
            }
        }
        rymu = -sum;
        ry1 = -sum1 * xi2;
        let rymup = mu * xi * rymu - ry1;
        rjmu = w / (rymup - f * rymu);
    } else {
        let mut a = 0.25 - mu2;
        let mut p = -0.5 * xi;
        let mut q = 1.0;
        let br = 2.0 * x;
        let mut bi = 2.0;
        let mut fact = a * xi / (p * p + q * q);
        let mut cr = br + q * fact;
        let mut ci = bi + p * fact;
        let mut den = br * br + bi * bi;
        let mut dr = br / den;
        let mut di = -bi / den;
        let mut dlr = cr * dr - ci * di;
        let mut dli = cr * di + ci * dr;
        let mut temp = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = temp;
        for i in 2..MAX_ITER {
            a += 2.0 * (i as f64 - 1.0);
            bi += 2.0;
            dr = a * dr + br;
            di = a * di + bi;
            if dr.abs() + di.abs() < TINY {
                dr = TINY;
            }
            fact = a / (cr * cr + ci * ci);
            cr = br + cr * fact;
            ci = bi - ci * fact;
            if cr.abs() + ci.abs() < TINY {
                cr = TINY;
            }
            den = dr * dr + di * di;
            dr /= den;
            di /= -den;
            dlr = cr * dr - ci * di;
            dli = cr * di + ci * dr;
            temp = p * dlr - q * dli;
            q = p * dli + q * dlr;
            p = temp;
            if (dlr - 1.0).abs() + dli.abs() < eps {
                break;
            }
        }
        let gam = (p - f) / q;
        let mag = (w / ((p - f) * gam + q)).sqrt();
        rjmu = mag.copysign(rjl);
        rymu = rjmu * gam;
        let rymup = rymu * (p + q / gam);
        ry1 = mu * xi * rymu - rymup;
    }
    let scale = rjmu / rjl;
    let rj = rjl1 * scale;
    for i in 1..=nl {
        let next = (mu + i as f64) * xi2 * ry1 - rymu;
        rymu = ry1;
        ry1 = next;
    }
    (rj, rymu)
}

/// `(J_ν(x), Y_ν(x))` for `ν >= 0`, `x > 0`.
fn bessel_jy_nonneg(nu: f64, x: f64) -> (f64, f64) {
    if x >= 25.0 + nu * nu {
        bessel_jy_asymptotic(nu, x)
    } else {
        bessel_jy_temme(nu, x)
    }
}

/// Bessel function of the first kind `J_ν(x)` for real order and `x >= 0`.
///
/// Negative orders use `J_{-ν} = cos(νπ) J_ν - sin(νπ) Y_ν`. At `x = 0` a
/// negative non-integer order is singular and returns an infinity.
pub fn bessel_j(nu: impl Into<Order>, x: f64) -> Result<f64> {
    let nu = nu.into().0;
    if !(x >= 0.0) || !x.is_finite() {
        return Err(GwmError::Domain(format!("bessel_j requires finite x >= 0, got {x}")));
    }
    if !nu.is_finite() {
        return Err(GwmError::Domain(format!("non-finite order {nu}")));
    }
    if x == 0.0 {
        return Ok(if nu == 0.0 {
            1.0
        } else if nu > 0.0 || nu == nu.round() {
            0.0
        } else {
            f64::INFINITY * sin_pi(0.5 - nu).signum()
        });
    }
    // Half-integer orders ±1/2 in closed form.
    if nu == 0.5 {
        return Ok((2.0 / (PI * x)).sqrt() * x.sin());
    }
    if nu == -0.5 {
        return Ok((2.0 / (PI * x)).sqrt() * x.cos());
    }
    if nu >= 0.0 {
        return Ok(bessel_jy_nonneg(nu, x).0);
    }
    let a = -nu;
    let (j, y) = bessel_jy_nonneg(a, x);
    if a == a.round() {
        let sign = if (a as i64) % 2 == 0 { 1.0 } else { -1.0 };
        return Ok(sign * j);
    }
    Ok(sin_pi(a + 0.5) * j - sin_pi(a) * y)
}

/// Bessel function of the second kind `Y_ν(x)`, `ν >= 0`, `x > 0`.
pub fn bessel_y(nu: impl Into<Order>, x: f64) -> Result<f64> {
    let nu = nu.into().0;
    if !(x > 0.0) || !x.is_finite() {
        return Err(GwmError::Domain(format!("bessel_y requires x > 0, got {x}")));
    }
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(GwmError::Domain(format!("bessel_y requires order >= 0, got {nu}")));
    }
    Ok(bessel_jy_nonneg(nu, x).1)
}

/// Euler–Mascheroni constant, exposed for tests of the `K_0` series.
pub const fn euler_gamma() -> f64 {
    EULER_GAMMA
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gamma_known_values() {
        assert_eq!(gamma_fn(1.0).unwrap(), 1.0);
        assert!(rel(gamma_fn(0.5).unwrap(), PI.sqrt()) < 1e-14);
        // Γ(4.5) by the recurrence from Γ(1/2).
        let oracle = 3.5 * 2.5 * 1.5 * 0.5 * PI.sqrt();
        assert!(rel(gamma_fn(4.5).unwrap(), oracle) < 1e-13);
        assert!(rel(gamma_fn(-0.5).unwrap(), -2.0 * PI.sqrt()) < 1e-14);
    }

    #[test]
    fn gamma_poles_rejected() {
        assert!(matches!(gamma_fn(0.0), Err(GwmError::GammaPole(_))));
        assert!(matches!(gamma_fn(-3.0), Err(GwmError::GammaPole(_))));
        assert_eq!(rgamma(-2.0), 0.0);
    }

    #[test]
    fn gamma_recurrence_over_range() {
        // Γ(x+1) = xΓ(x) chained from Γ(0.5) and Γ(1/3) reference.
        let mut x = 0.05;
        while x < 49.0 {
            let lhs = gamma_fn(x + 1.0).unwrap();
            let rhs = x * gamma_fn(x).unwrap();
            assert!(rel(lhs, rhs) < 1e-13, "x={x}");
            x += 0.37;
        }
    }

    #[test]
    fn ln_gamma_matches_gamma() {
        for &x in &[0.1, 0.7, 3.2, 17.5, 44.0] {
            let g = gamma_fn(x).unwrap();
            assert!((ln_gamma(x).unwrap() - g.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn rgamma_series_agrees_with_direct() {
        for &x in &[-0.49, -0.3, -0.01, 0.01, 0.2, 0.49] {
            let direct = 1.0 / gamma_unchecked(x);
            assert!(rel(rgamma(x), direct) < 1e-13, "x={x}");
        }
    }

    #[test]
    fn temme_gammas_consistent() {
        for &mu in &[-0.5, -0.2, 0.0, 0.1, 0.5] {
            let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
            assert!(rel(gampl, rgamma(1.0 + mu)) < 1e-14);
            assert!(rel(gammi, rgamma(1.0 - mu)) < 1e-14);
            assert!(rel(gam2, 0.5 * (rgamma(1.0 - mu) + rgamma(1.0 + mu))) < 1e-14);
            if mu.abs() > 0.05 {
                let direct = (rgamma(1.0 - mu) - rgamma(1.0 + mu)) / (2.0 * mu);
                assert!(rel(gam1, direct) < 1e-12);
            } else if mu == 0.0 {
                assert!(rel(gam1, -EULER_GAMMA) < 1e-15);
            }
        }
    }

    #[test]
    fn bessel_k_half_integer() {
        for &x in &[0.01, 0.3, 1.0, 1.99, 2.0, 5.0, 40.0, 300.0] {
            let exact = (PI / (2.0 * x)).sqrt() * (-x).exp();
            assert!(rel(bessel_k(0.5, x).unwrap(), exact) < 1e-13);
            assert!(rel(bessel_k(-0.5, x).unwrap(), exact) < 1e-13);
            let k32 = exact * (1.0 + 1.0 / x);
            assert!(rel(bessel_k(1.5, x).unwrap(), k32) < 1e-12, "x={x}");
            let k52 = exact * (1.0 + 3.0 / x + 3.0 / (x * x));
            assert!(rel(bessel_k(2.5, x).unwrap(), k52) < 1e-12, "x={x}");
        }
    }

    /// Series oracle for non-integer order: K_ν = π/(2 sin πν) (I_{-ν} - I_ν).
    fn k_series(nu: f64, x: f64) -> f64 {
        let half = 0.5 * x;
        let mut s_minus = 0.0;
        let mut s_plus = 0.0;
        for j in 0..80 {
            let jf = j as f64;
            let log_fact = ln_gamma(jf + 1.0).unwrap();
            s_minus += ((2.0 * jf - nu) * half.ln() - log_fact).exp() * rgamma(jf + 1.0 - nu);
            s_plus += ((2.0 * jf + nu) * half.ln() - log_fact).exp() * rgamma(jf + 1.0 + nu);
        }
        PI / (2.0 * sin_pi(nu)) * (s_minus - s_plus)
    }

    #[test]
    fn bessel_k_series_oracle() {
        for &(nu, x) in &[(0.3, 1.7), (0.3, 0.2), (0.7, 3.0), (1.3, 2.5), (2.2, 0.9), (4.6, 1.2)] {
            let oracle = k_series(nu, x);
            let got = bessel_k(nu, x).unwrap();
            assert!(rel(got, oracle) < 1e-11, "nu={nu} x={x}: {got} vs {oracle}");
        }
    }

    #[test]
    fn bessel_k_zero_small_argument() {
        // K_0(x) = -(ln(x/2) + γ) I_0(x) + x²/4 + ...
        let x: f64 = 1e-6;
        let approx = -((0.5 * x).ln() + EULER_GAMMA);
        assert!(rel(bessel_k(0.0, x).unwrap(), approx) < 1e-10);
        // Known reference K_0(1) = 0.42102443824070834.
        assert!(rel(bessel_k(0.0, 1.0).unwrap(), 0.421_024_438_240_708_34) < 1e-13);
        assert!(rel(bessel_k(1.0, 1.0).unwrap(), 0.601_907_230_197_234_6) < 1e-13);
    }

    #[test]
    fn bessel_k_even_and_underflow() {
        for &nu in &[0.0, 0.25, 1.3, 3.7] {
            for &x in &[0.5, 2.0, 9.0] {
                assert_eq!(bessel_k(nu, x).unwrap(), bessel_k(-nu, x).unwrap());
            }
        }
        assert_eq!(bessel_k(1.0, 800.0).unwrap(), 0.0);
        assert!(bessel_k(1.0, 0.0).is_err());
        assert!(bessel_k(1.0, -1.0).is_err());
    }

    #[test]
    fn bessel_k_recurrence() {
        for &nu in &[0.1, 0.45, 1.2, 2.9] {
            for &x in &[0.05, 0.8, 2.0, 7.5, 30.0] {
                let lhs = bessel_k(nu + 1.0, x).unwrap() - bessel_k(nu - 1.0, x).unwrap();
                let rhs = 2.0 * nu / x * bessel_k(nu, x).unwrap();
                assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(rhs.abs()), "nu={nu} x={x}");
            }
        }
    }

    #[test]
    fn bessel_j_closed_forms() {
        assert_eq!(bessel_j(0.0, 0.0).unwrap(), 1.0);
        for &x in &[0.1, 1.0, 2.5, 10.0, 30.0, 100.0, 1234.5] {
            let s = (2.0 / (PI * x)).sqrt();
            assert!((bessel_j(0.5, x).unwrap() - s * x.sin()).abs() < 1e-13);
            assert!((bessel_j(-0.5, x).unwrap() - s * x.cos()).abs() < 1e-13);
            let j32 = s * (x.sin() / x - x.cos());
            assert!((bessel_j(1.5, x).unwrap() - j32).abs() < 1e-12, "x={x}");
            let jm32 = s * (-x.cos() / x - x.sin());
            assert!((bessel_j(-1.5, x).unwrap() - jm32).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn bessel_j_reference_values() {
        // Integer-order references.
        let cases = [
            (0.0, 1.0, 0.765_197_686_557_966_6),
            (1.0, 1.0, 0.440_050_585_744_933_5),
            (0.0, 10.0, -0.245_935_764_451_348_3),
            (2.0, 5.0, 0.046_565_116_277_752_2),
            (0.0, 50.0, 0.055_812_327_669_251_6),
        ];
        for (nu, x, want) in cases {
            assert!((bessel_j(nu, x).unwrap() - want).abs() < 1e-13, "nu={nu} x={x}");
        }
    }

    #[test]
    fn bessel_j_first_zero_of_j0() {
        // Bisection on the Bessel series as an independent oracle.
        let series = |x: f64| {
            let mut s = 0.0;
            let mut t = 1.0;
            for k in 0..60 {
                s += t;
                let kf = (k + 1) as f64;
                t *= -(x * x) / (4.0 * kf * kf);
            }
            s
        };
        let (mut lo, mut hi) = (2.0, 3.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if series(lo) * series(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let zero = 0.5 * (lo + hi);
        assert!((zero - 2.404_825_557_695_773).abs() < 1e-12);
        assert!(bessel_j(0.0, 2.404_825_557_695_773).unwrap().abs() < 1e-10);
    }

    #[test]
    fn bessel_j_recurrence_across_regimes() {
        for &nu in &[0.3, 1.0, 2.7, 4.0] {
            for &x in &[0.2, 1.5, 3.0, 12.0, 26.0, 45.0, 80.0] {
                let lhs = bessel_j(nu - 1.0, x).unwrap() + bessel_j(nu + 1.0, x).unwrap();
                let rhs = 2.0 * nu / x * bessel_j(nu, x).unwrap();
                assert!((lhs - rhs).abs() < 1e-9 * (1.0 + lhs.abs()), "nu={nu} x={x}");
            }
        }
    }

    #[test]
    fn bessel_j_continuous_at_asymptotic_switch() {
        for &nu in &[0.0, 1.0, 2.5] {
            let x = 25.0 + nu * nu;
            let a = bessel_jy_temme(nu, x);
            let b = bessel_jy_asymptotic(nu, x);
            assert!((a.0 - b.0).abs() < 1e-13);
            assert!((a.1 - b.1).abs() < 1e-13);
        }
    }

    #[test]
    fn bessel_y_reference() {
        assert!((bessel_y(0.0, 1.0).unwrap() - 0.088_256_964_215_676_96).abs() < 1e-13);
        assert!((bessel_y(1.0, 2.0).unwrap() + 0.107_032_431_540_937_55).abs() < 1e-13);
    }
}
