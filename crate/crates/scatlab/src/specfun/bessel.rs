//! Evaluation engine for J_n, Y_n, H_n^(1) at real arguments.
//!
//! Regions:
//! - x <= 8: ascending power series (J any order, Y_0/Y_1 log series).
//! - x > 8: backward Miller recurrence for the whole J array, normalized
//!   by the Neumann sum J_0 + 2*sum J_{2m} = 1; Y_0/Y_1 recovered from the
//!   J values through the continued fraction for (J_0' + iY_0')/(J_0 + iY_0).
//! - Y_n for n >= 2 by the stable upward recurrence.

use super::{BesselOrder, CylinderValue, SpecFunError};
use num_complex::Complex64;
use std::f64::consts::{FRAC_2_PI, PI};

/// Euler-Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Crossover between the ascending series and Miller/CF evaluation.
const SERIES_CUTOFF: f64 = 8.0;

/// J_n(x) for x >= 0.
pub fn bessel_j(n: BesselOrder, x: f64) -> Result<f64, SpecFunError> {
    if !x.is_finite() {
        return Err(SpecFunError::NonFinite(x));
    }
    if x < 0.0 {
        return Err(SpecFunError::NegativeArgument(x));
    }
    let (na, sign) = n.reflect();
    Ok(sign * j_array(na, x)[na])
}

/// Y_n(x) for x > 0.
pub fn bessel_y(n: BesselOrder, x: f64) -> Result<f64, SpecFunError> {
    if !x.is_finite() {
        return Err(SpecFunError::NonFinite(x));
    }
    if x <= 0.0 {
        return Err(SpecFunError::NonPositiveArgument(x));
    }
    let (na, sign) = n.reflect();
    let y = y_array(na, x)?;
    Ok(sign * y[na])
}

/// H_n^(1)(x) = J_n(x) + i Y_n(x), built from the two real evaluations.
pub fn hankel1(n: BesselOrder, x: f64) -> Result<Complex64, SpecFunError> {
    Ok(Complex64::new(bessel_j(n, x)?, bessel_y(n, x)?))
}

/// J_0..J_nmax at one argument, sharing a single recurrence pass.
pub fn bessel_j_array(nmax: usize, x: f64) -> Result<Vec<f64>, SpecFunError> {
    if !x.is_finite() {
        return Err(SpecFunError::NonFinite(x));
    }
    if x < 0.0 {
        return Err(SpecFunError::NegativeArgument(x));
    }
    Ok(j_array(nmax, x))
}

/// Y_0..Y_nmax at one argument.
pub fn bessel_y_array(nmax: usize, x: f64) -> Result<Vec<f64>, SpecFunError> {
    if !x.is_finite() {
        return Err(SpecFunError::NonFinite(x));
    }
    if x <= 0.0 {
        return Err(SpecFunError::NonPositiveArgument(x));
    }
    y_array(nmax, x)
}

/// (H_0^(1)(x), H_1^(1)(x)): the hot pair for fundamental-solution kernels.
pub fn hankel01(x: f64) -> Result<(Complex64, Complex64), SpecFunError> {
    if !x.is_finite() {
        return Err(SpecFunError::NonFinite(x));
    }
    if x <= 0.0 {
        return Err(SpecFunError::NonPositiveArgument(x));
    }
    let (j0, j1, y0, y1) = jy01(x);
    Ok((Complex64::new(j0, y0), Complex64::new(j1, y1)))
}

/// J, Y, H1 and their derivatives at one (n, x).
pub fn cylinder(n: BesselOrder, x: f64) -> Result<CylinderValue, SpecFunError> {
    if !x.is_finite() {
        return Err(SpecFunError::NonFinite(x));
    }
    if x <= 0.0 {
        return Err(SpecFunError::NonPositiveArgument(x));
    }
    let (na, sign) = n.reflect();
    let j = j_array(na + 1, x);
    let y = y_array(na + 1, x)?;
    let (jn, yn) = (j[na], y[na]);
    let (dj, dy) = if na == 0 {
        (-j[1], -y[1])
    } else {
        let r = na as f64 / x;
        (j[na - 1] - r * jn, y[na - 1] - r * yn)
    };
    Ok(CylinderValue {
        j: sign * jn,
        y: sign * yn,
        h1: Complex64::new(sign * jn, sign * yn),
        dj: sign * dj,
        dh1: Complex64::new(sign * dj, sign * dy),
    })
}

/// (J_0, J_1, Y_0, Y_1) at x > 0.
pub(super) fn jy01(x: f64) -> (f64, f64, f64, f64) {
    if x <= SERIES_CUTOFF {
        let j0 = series_j(0, x);
        let j1 = series_j(1, x);
        let (y0, y1) = y01_series(x, j0, j1);
        (j0, j1, y0, y1)
    } else {
        let j = miller_j(1, x);
        let (p, q) = cf2(x);
        let y0 = (p * j[0] + j[1]) / q;
        let y0p = q * j[0] + p * y0;
        (j[0], j[1], y0, -y0p)
    }
}

fn j_array(nmax: usize, x: f64) -> Vec<f64> {
    if x == 0.0 {
        let mut out = vec![0.0; nmax + 1];
        out[0] = 1.0;
        return out;
    }
    if x <= SERIES_CUTOFF {
        (0..=nmax).map(|n| series_j(n, x)).collect()
    } else {
        miller_j(nmax, x)
    }
}

fn y_array(nmax: usize, x: f64) -> Result<Vec<f64>, SpecFunError> {
    let (_, _, y0, y1) = jy01(x);
    let mut out = Vec::with_capacity(nmax + 1);
    out.push(y0);
    if nmax >= 1 {
        out.push(y1);
    }
    for k in 1..nmax {
        let next = (2.0 * k as f64 / x) * out[k] - out[k - 1];
        if !next.is_finite() {
            return Err(SpecFunError::Overflow { n: (k + 1) as i32, x });
        }
        out.push(next);
    }
    Ok(out)
}

/// Ascending series sum_m (-1)^m (x/2)^{n+2m} / (m! (n+m)!).
///
/// Used for x <= 8 where the alternating-sum cancellation costs at most
/// a few digits. Underflow of the leading factor for large n and tiny x
/// flushes to zero, which is below the double range anyway.
fn series_j(n: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut t = 1.0f64;
    for i in 1..=n {
        t *= half / i as f64;
    }
    if t == 0.0 {
        return 0.0;
    }
    let q = half * half;
    let mut sum = t;
    let mut max_t = t.abs();
    for m in 1..400 {
        t *= -q / (m as f64 * (n + m) as f64);
        sum += t;
        let a = t.abs();
        if a > max_t {
            max_t = a;
        }
        if a < 1e-20 * max_t {
            break;
        }
    }
    sum
}

/// Backward Miller recurrence for J_0..J_nmax, normalized by the Neumann
/// sum J_0 + 2 sum_{m>=1} J_{2m} = 1. Valid for any x > 0; used for x > 8.
fn miller_j(nmax: usize, x: f64) -> Vec<f64> {
    let base = (nmax as f64).max(x).max(1.0);
    let mut start = (base + 10.0 + (40.0 * base).sqrt()).ceil() as usize;
    if start % 2 == 1 {
        start += 1;
    }
    let mut out = vec![0.0f64; nmax + 1];
    let mut jp = 0.0f64; // J_{k+1}, unnormalized
    let mut j = 1e-30f64; // J_k
    let mut sum = 0.0f64;
    let mut k = start;
    loop {
        if k % 2 == 0 {
            sum += if k == 0 { j } else { 2.0 * j };
        }
        if k <= nmax {
            out[k] = j;
        }
        if k == 0 {
            break;
        }
        let jm = (2.0 * k as f64 / x) * j - jp;
        jp = j;
        j = jm;
        k -= 1;
        if j.abs() > 1e250 {
            let s = 1e-250;
            j *= s;
            jp *= s;
            sum *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    for v in out.iter_mut() {
        *v /= sum;
    }
    out
}

/// Log series for Y_0, Y_1 at x <= 8 given J_0, J_1.
fn y01_series(x: f64, j0: f64, j1: f64) -> (f64, f64) {
    let q = 0.25 * x * x;
    let lg = (0.5 * x).ln() + EULER_GAMMA;

    // Y_0: (2/pi)[ lg*J_0 + sum_{m>=1} (-1)^{m+1} H_m q^m / (m!)^2 ]
    let mut term = 1.0f64; // q^m/(m!)^2 at m=0
    let mut h = 0.0f64; // harmonic number H_m
    let mut s0 = 0.0f64;
    let mut sign = 1.0f64;
    for m in 1..400 {
        let mf = m as f64;
        term *= q / (mf * mf);
        h += 1.0 / mf;
        let contrib = sign * h * term;
        s0 += contrib;
        sign = -sign;
        if contrib.abs() < 1e-20 * (s0.abs() + 1e-300) && m > 3 {
            break;
        }
    }
    let y0 = FRAC_2_PI * (lg * j0 + s0);

    // Y_1: (2/pi)[ lg*J_1 - 1/x - (x/4) sum_{m>=0} (-1)^m (H_m + H_{m+1}) q^m / (m!(m+1)!) ]
    let mut term = 1.0f64; // q^m/(m!(m+1)!) at m=0
    let mut hm = 0.0f64;
    let mut hm1 = 1.0f64;
    let mut s1 = term * (hm + hm1);
    let mut sign = -1.0f64;
    for m in 1..400 {
        let mf = m as f64;
        term *= q / (mf * (mf + 1.0));
        hm += 1.0 / mf;
        hm1 += 1.0 / (mf + 1.0);
        let contrib = sign * (hm + hm1) * term;
        s1 += contrib;
        sign = -sign;
        if contrib.abs() < 1e-20 * (s1.abs() + 1e-300) && m > 3 {
            break;
        }
    }
    let y1 = FRAC_2_PI * (lg * j1 - 1.0 / x) - (x / (2.0 * PI)) * s1;
    (y0, y1)
}

/// Continued fraction for (J_0' + iY_0')/(J_0 + iY_0) = p + iq, x > 2.
///
/// Modified Lentz on  -1/(2x) + i + (i/x) * K  with partial numerators
/// a_j = (j - 1/2)^2 and denominators b_j = 2(x + ij).
fn cf2(x: f64) -> (f64, f64) {
    let tiny = 1e-30;
    let mut f = Complex64::new(tiny, 0.0);
    let mut c = f;
    let mut d = Complex64::new(0.0, 0.0);
    for j in 1..10_000 {
        let a = {
            let t = j as f64 - 0.5;
            Complex64::new(t * t, 0.0)
        };
        let b = Complex64::new(2.0 * x, 2.0 * j as f64);
        d = b + a * d;
        if d.norm() < tiny {
            d = Complex64::new(tiny, 0.0);
        }
        c = b + a / c;
        if c.norm() < tiny {
            c = Complex64::new(tiny, 0.0);
        }
        d = d.inv();
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            break;
        }
    }
    let z = Complex64::new(-0.5 / x, 1.0) + Complex64::new(0.0, 1.0 / x) * f;
    (z.re, z.im)
}
