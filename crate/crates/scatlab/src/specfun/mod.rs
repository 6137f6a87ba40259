//! Real-argument cylinder functions: Bessel J_n, Y_n, Hankel H_n^(1),
//! their derivatives, and zeros of J_n and J_n'.
//!
//! Evaluation is self-contained: ascending power series for small
//! arguments, a normalized backward (Miller) recurrence for J at larger
//! arguments, and a continued fraction for the Y_0/Y_1 seed values that
//! start the stable upward recurrence. Zeros are bracketed by scanning
//! and refined by bisection.
//!
//! All functions are pure; concurrent use needs no coordination.

mod bessel;
mod zeros;

pub use bessel::{bessel_j, bessel_j_array, bessel_y, bessel_y_array, cylinder, hankel1, hankel01};
pub use zeros::{bessel_dj_zero, bessel_j_zero};

use num_complex::Complex64;
use std::fmt;

/// Largest supported |order|.
pub const MAX_ORDER: i32 = 120;

/// Largest argument searched for zeros.
pub const ZERO_SEARCH_WINDOW: f64 = 100.0;

/// Integer cylinder-function order, bounded to |n| <= 120.
///
/// Negative orders are resolved through the reflection
/// C_{-n} = (-1)^n C_n before evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BesselOrder(i32);

impl BesselOrder {
    pub fn new(n: i32) -> Result<Self, SpecFunError> {
        if n.abs() > MAX_ORDER {
            return Err(SpecFunError::OrderOutOfRange(n));
        }
        Ok(BesselOrder(n))
    }

    pub fn get(self) -> i32 {
        self.0
    }

    /// Absolute order together with the reflection sign (-1)^n for n < 0.
    pub(crate) fn reflect(self) -> (usize, f64) {
        let n = self.0;
        if n >= 0 {
            (n as usize, 1.0)
        } else {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            ((-n) as usize, sign)
        }
    }
}

impl TryFrom<i32> for BesselOrder {
    type Error = SpecFunError;

    fn try_from(n: i32) -> Result<Self, Self::Error> {
        BesselOrder::new(n)
    }
}

/// Bundled values of the cylinder functions at one (n, x).
///
/// `h1 = j + i*y` holds exactly (built from the same two real
/// evaluations); derivatives follow C_n' = C_{n-1} - (n/x) C_n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderValue {
    pub j: f64,
    pub y: f64,
    pub h1: Complex64,
    pub dj: f64,
    pub dh1: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpecFunError {
    /// |n| exceeds MAX_ORDER.
    OrderOutOfRange(i32),
    /// Argument is NaN or infinite.
    NonFinite(f64),
    /// x < 0 where x >= 0 is required.
    NegativeArgument(f64),
    /// x <= 0 where x > 0 is required (Y has a logarithmic singularity).
    NonPositiveArgument(f64),
    /// Y_n(x) exceeded the f64 range during upward recurrence.
    Overflow { n: i32, x: f64 },
    /// Requested zero lies beyond the search window.
    ZeroBeyondWindow { n: i32, m: u32, window: f64 },
}

impl fmt::Display for SpecFunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecFunError::OrderOutOfRange(n) => {
                write!(f, "order {} outside supported range |n| <= {}", n, MAX_ORDER)
            }
            SpecFunError::NonFinite(x) => write!(f, "argument {} is not finite", x),
            SpecFunError::NegativeArgument(x) => write!(f, "argument {} must be >= 0", x),
            SpecFunError::NonPositiveArgument(x) => write!(f, "argument {} must be > 0", x),
            SpecFunError::Overflow { n, x } => {
                write!(f, "Y_{}({}) overflows the double range", n, x)
            }
            SpecFunError::ZeroBeyondWindow { n, m, window } => {
                write!(f, "zero m={} of order {} lies beyond x = {}", m, n, window)
            }
        }
    }
}

impl std::error::Error for SpecFunError {}
