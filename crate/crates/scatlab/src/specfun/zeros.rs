//! Zeros of J_n and J_n' by scan-and-bisect.
//!
//! Consecutive zeros of a cylinder function are separated by more than
//! pi for the orders in range, so a 0.25 step scan cannot skip one.
//! Bisection runs the bracket down to 1e-13; zeros are simple, so the
//! residual |J_n| at the result is far below the 1e-11 certificate.

use super::bessel::{bessel_j, bessel_j_array};
use super::{BesselOrder, SpecFunError, ZERO_SEARCH_WINDOW};

const SCAN_STEP: f64 = 0.25;

/// m-th positive zero of J_n (m >= 1, n >= 0), within x <= 100.
pub fn bessel_j_zero(n: BesselOrder, m: u32) -> Result<f64, SpecFunError> {
    zero_of(n, m, |na, x| bessel_j(BesselOrder::new(na as i32).unwrap(), x))
}

/// m-th positive zero of J_n' (m >= 1, n >= 0), within x <= 100.
///
/// For n = 0 this is the first positive root onward of J_0' = -J_1;
/// the conventional zero of J_0' at the origin is not counted.
pub fn bessel_dj_zero(n: BesselOrder, m: u32) -> Result<f64, SpecFunError> {
    zero_of(n, m, |na, x| {
        if na == 0 {
            Ok(-bessel_j(BesselOrder::new(1).unwrap(), x)?)
        } else {
            let j = bessel_j_array(na, x)?;
            Ok(j[na - 1] - (na as f64 / x) * j[na])
        }
    })
}

fn zero_of<F>(n: BesselOrder, m: u32, f: F) -> Result<f64, SpecFunError>
where
    F: Fn(usize, f64) -> Result<f64, SpecFunError>,
{
    if n.get() < 0 {
        return Err(SpecFunError::OrderOutOfRange(n.get()));
    }
    let na = n.get() as usize;
    if m == 0 {
        return Err(SpecFunError::ZeroBeyondWindow { n: n.get(), m, window: ZERO_SEARCH_WINDOW });
    }
    // J_n (and J_n' for n >= 1) keeps one sign on (0, n]; start there.
    let mut a = (na as f64).max(1e-3);
    let mut fa = f(na, a)?;
    let mut found = 0u32;
    let mut b = a;
    loop {
        b += SCAN_STEP;
        if b > ZERO_SEARCH_WINDOW {
            return Err(SpecFunError::ZeroBeyondWindow { n: n.get(), m, window: ZERO_SEARCH_WINDOW });
        }
        let fb = f(na, b)?;
        if fa == 0.0 {
            found += 1; // landed exactly on a zero
            if found == m {
                return Ok(a);
            }
        } else if fa.signum() != fb.signum() && fb != 0.0 {
            found += 1;
            if found == m {
                return bisect(&f, na, a, b, fa);
            }
        }
        a = b;
        fa = fb;
    }
}

fn bisect<F>(f: &F, na: usize, mut a: f64, mut b: f64, mut fa: f64) -> Result<f64, SpecFunError>
where
    F: Fn(usize, f64) -> Result<f64, SpecFunError>,
{
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if b - a <= 1e-13 {
            return Ok(mid);
        }
        let fm = f(na, mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}
