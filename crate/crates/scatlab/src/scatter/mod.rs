//! Forward exterior scattering: types shared by the solver and oracle.
//!
//! The scattered field is represented as a combination of outgoing
//! fundamental solutions placed inside the obstacle, so the radiation
//! condition holds identically; only the boundary condition is fitted,
//! and its residual is the a-posteriori accuracy certificate.

mod disk;
mod mfs;

pub use disk::disk_far_field_series;
pub use mfs::{boundary_residual, boundary_residual_with, far_field, near_field, solve, total_field};

use crate::farfield::FieldError;
use crate::geometry::{GeometryError, Obstacle, Point};
use crate::specfun::SpecFunError;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Desk-scale cap on k * diameter for the dense least-squares solver.
pub const K_DIAM_CAP: f64 = 40.0;

/// Boundary condition B(u) = 0 on the obstacle:
/// u (sound-soft), du/dnu (sound-hard), or du/dnu + lambda u.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
    Impedance {
        #[serde(with = "complex_pair")]
        lambda: Complex64,
    },
}

impl BoundaryCondition {
    pub fn validate(&self) -> Result<(), String> {
        match self {
            BoundaryCondition::Impedance { lambda } => {
                if !(lambda.im > 0.0) || !lambda.re.is_finite() || !lambda.im.is_finite() {
                    Err(format!("impedance lambda = {} requires Im(lambda) > 0", lambda))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Apply B to a field value and its normal derivative.
    #[inline]
    pub fn apply(&self, u: Complex64, du_dnu: Complex64) -> Complex64 {
        match self {
            BoundaryCondition::Dirichlet => u,
            BoundaryCondition::Neumann => du_dnu,
            BoundaryCondition::Impedance { lambda } => du_dnu + lambda * u,
        }
    }
}

/// Serialize Complex64 as a [re, im] pair.
mod complex_pair {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [v.re, v.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

/// Incident plane wave exp(ik x.d) with |d| = 1, stored by angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncidentPlaneWave {
    pub k: f64,
    pub d_angle: f64,
}

impl IncidentPlaneWave {
    pub fn new(k: f64, d_angle: f64) -> Result<Self, SolveError> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(SolveError::InvalidConfig(format!("wavenumber {} must be positive", k)));
        }
        Ok(IncidentPlaneWave { k, d_angle })
    }

    pub fn direction(&self) -> Point {
        Point::from_angle(self.d_angle)
    }

    /// exp(ik x.d); unit modulus everywhere.
    pub fn eval(&self, x: Point) -> Complex64 {
        Complex64::from_polar(1.0, self.k * x.dot(self.direction()))
    }

    /// Normal derivative ik (d.nu) exp(ik x.d).
    pub fn normal_derivative(&self, x: Point, normal: Point) -> Complex64 {
        Complex64::new(0.0, self.k * self.direction().dot(normal)) * self.eval(x)
    }
}

/// Method-of-fundamental-solutions discretization parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MfsConfig {
    /// Number of interior source points.
    pub n_sources: usize,
    /// Collocation points per source (>= 1).
    pub oversample: f64,
    /// Sources sit on the boundary curve scaled by this factor toward
    /// its centroid, in (0, 1).
    pub source_offset: f64,
    /// A solve whose boundary residual exceeds this cap is an error.
    pub truncation_residual_cap: f64,
}

impl Default for MfsConfig {
    fn default() -> Self {
        MfsConfig {
            n_sources: 96,
            oversample: 2.0,
            source_offset: 0.7,
            truncation_residual_cap: 1e-6,
        }
    }
}

impl MfsConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        if self.n_sources < 4 {
            return Err(SolveError::InvalidConfig("n_sources must be at least 4".into()));
        }
        if !(self.oversample >= 1.0) {
            return Err(SolveError::InvalidConfig("oversample must be >= 1".into()));
        }
        if !(self.source_offset > 0.0 && self.source_offset < 1.0) {
            return Err(SolveError::InvalidConfig("source_offset must lie in (0, 1)".into()));
        }
        if !(self.truncation_residual_cap > 0.0) {
            return Err(SolveError::InvalidConfig("residual cap must be positive".into()));
        }
        Ok(())
    }

    pub fn collocation_count(&self) -> usize {
        (self.oversample * self.n_sources as f64).ceil() as usize
    }
}

/// A certified forward solution: sources, coefficients and the residual
/// of the boundary condition at independent check points.
///
/// The representation sum_q c_q (i/4) H_0^(1)(k |x - y_q|) is an exact
/// outgoing Helmholtz solution outside the obstacle for any coefficients;
/// `residual` records the boundary-condition defect only.
#[derive(Debug, Clone)]
pub struct ScatterSolution {
    pub wave: IncidentPlaneWave,
    pub obstacle: Obstacle,
    pub sources: Vec<Point>,
    pub coefficients: Vec<Complex64>,
    /// max |B(u^i + u^s)| over check points, normalized by max |u^i| = 1.
    pub residual: f64,
    /// max/min moduli of the R diagonal from the least-squares QR.
    pub r_diag_ratio: f64,
}

impl ScatterSolution {
    /// MFS systems are intentionally ill-conditioned; this is a
    /// diagnostic, not a failure, when the residual certificate holds.
    pub fn ill_conditioned(&self) -> bool {
        self.r_diag_ratio > 1e12
    }
}

#[derive(Debug)]
pub enum SolveError {
    InvalidConfig(String),
    Geometry(GeometryError),
    SpecFun(SpecFunError),
    /// k * diameter exceeds the desk-scale cap.
    CapExceeded { k_diam: f64 },
    /// A source point landed outside (or on) the obstacle.
    SourceOutside { index: usize },
    /// The boundary residual certificate failed.
    ResidualTooLarge { residual: f64, cap: f64 },
    /// Disk series truncation did not reach the tail target.
    TruncationInsufficient { order: usize },
    /// Near-field evaluation requested inside the obstacle.
    PointInsideObstacle(Point),
    Field(FieldError),
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::InvalidConfig(m) => write!(f, "invalid configuration: {}", m),
            SolveError::Geometry(e) => write!(f, "geometry: {}", e),
            SolveError::SpecFun(e) => write!(f, "special function: {}", e),
            SolveError::CapExceeded { k_diam } => {
                write!(f, "k*diameter = {:.3} exceeds the cap {}", k_diam, K_DIAM_CAP)
            }
            SolveError::SourceOutside { index } => {
                write!(f, "source point {} not strictly inside the obstacle", index)
            }
            SolveError::ResidualTooLarge { residual, cap } => {
                write!(f, "boundary residual {:.3e} exceeds cap {:.3e}", residual, cap)
            }
            SolveError::TruncationInsufficient { order } => {
                write!(f, "series truncation at order {} insufficient", order)
            }
            SolveError::PointInsideObstacle(p) => {
                write!(f, "evaluation point ({}, {}) lies inside the obstacle", p.x, p.y)
            }
            SolveError::Field(e) => write!(f, "far field: {}", e),
        }
    }
}

impl std::error::Error for SolveError {}

impl From<GeometryError> for SolveError {
    fn from(e: GeometryError) -> Self {
        SolveError::Geometry(e)
    }
}

impl From<SpecFunError> for SolveError {
    fn from(e: SpecFunError) -> Self {
        SolveError::SpecFun(e)
    }
}

impl From<FieldError> for SolveError {
    fn from(e: FieldError) -> Self {
        SolveError::Field(e)
    }
}
