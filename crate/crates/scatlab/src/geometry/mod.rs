//! Parametric boundary curves, rigid motions, and the obstacle type.
//!
//! Curves are smooth closed trigonometric maps t in [0, 2pi) -> R^2,
//! counterclockwise oriented, validated to be simple. Rigid motions
//! compose rotation about the origin with translation: x -> U(theta) x + z.

mod distance;

pub use distance::{contains, diameter, hausdorff_distance, CurveCloud};

use crate::scatter::BoundaryCondition;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::fmt;

/// Number of polyline segments used by validation and containment tests.
pub(crate) const VALIDATE_SEGMENTS: usize = 256;

/// Default boundary cloud size for set-distance quantities.
pub const DEFAULT_CLOUD: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    pub fn scale(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }

    pub fn normalized(self) -> Point {
        let n = self.norm();
        Point::new(self.x / n, self.y / n)
    }

    /// Unit vector at the given polar angle.
    pub fn from_angle(theta: f64) -> Point {
        Point::new(theta.cos(), theta.sin())
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Point::new(v[0], v[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// A smooth closed simple counterclockwise boundary curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ParametricCurve {
    Circle {
        a: f64,
    },
    Ellipse {
        a: f64,
        b: f64,
    },
    /// x(t) = sum_j x_cos[j] cos(jt) + x_sin[j] sin(jt), likewise y(t).
    Trig {
        #[serde(default)]
        x_cos: Vec<f64>,
        #[serde(default)]
        x_sin: Vec<f64>,
        #[serde(default)]
        y_cos: Vec<f64>,
        #[serde(default)]
        y_sin: Vec<f64>,
    },
}

/// Point, velocity and outward unit normal at one parameter value.
#[derive(Debug, Clone, Copy)]
pub struct CurveSample {
    pub point: Point,
    pub tangent: Point,
    pub normal: Point,
}

impl ParametricCurve {
    /// Evaluate position and derivative at parameter t (wrapped mod 2pi).
    fn eval_raw(&self, t: f64) -> (Point, Point) {
        match self {
            ParametricCurve::Circle { a } => (
                Point::new(a * t.cos(), a * t.sin()),
                Point::new(-a * t.sin(), a * t.cos()),
            ),
            ParametricCurve::Ellipse { a, b } => (
                Point::new(a * t.cos(), b * t.sin()),
                Point::new(-a * t.sin(), b * t.cos()),
            ),
            ParametricCurve::Trig { x_cos, x_sin, y_cos, y_sin } => {
                let series = |cos_c: &[f64], sin_c: &[f64]| {
                    let mut v = 0.0;
                    let mut dv = 0.0;
                    for (j, c) in cos_c.iter().enumerate() {
                        let jf = j as f64;
                        v += c * (jf * t).cos();
                        dv -= c * jf * (jf * t).sin();
                    }
                    for (j, s) in sin_c.iter().enumerate() {
                        let jf = j as f64;
                        v += s * (jf * t).sin();
                        dv += s * jf * (jf * t).cos();
                    }
                    (v, dv)
                };
                let (x, dx) = series(x_cos, x_sin);
                let (y, dy) = series(y_cos, y_sin);
                (Point::new(x, y), Point::new(dx, dy))
            }
        }
    }

    /// Position, tangent and outward unit normal at t.
    pub fn eval(&self, t: f64) -> CurveSample {
        let t = t.rem_euclid(TAU);
        let (point, tangent) = self.eval_raw(t);
        // Counterclockwise orientation puts the outward normal at (ty, -tx).
        let normal = Point::new(tangent.y, -tangent.x).normalized();
        CurveSample { point, tangent, normal }
    }

    /// Mean of uniformly sampled boundary points.
    pub fn centroid(&self, n: usize) -> Point {
        let mut c = Point::new(0.0, 0.0);
        for i in 0..n {
            let p = self.eval(TAU * i as f64 / n as f64).point;
            c = c + p;
        }
        c.scale(1.0 / n as f64)
    }

    /// Check smoothness, simplicity and counterclockwise orientation.
    pub fn validate(&self) -> Result<(), GeometryError> {
        let finite_pos = |v: f64| v.is_finite() && v > 0.0;
        match self {
            ParametricCurve::Circle { a } => {
                if !finite_pos(*a) {
                    return Err(GeometryError::InvalidShape("circle radius must be positive".into()));
                }
                return Ok(());
            }
            ParametricCurve::Ellipse { a, b } => {
                if !finite_pos(*a) || !finite_pos(*b) {
                    return Err(GeometryError::InvalidShape("ellipse semi-axes must be positive".into()));
                }
                return Ok(());
            }
            ParametricCurve::Trig { x_cos, x_sin, y_cos, y_sin } => {
                let all = x_cos.iter().chain(x_sin).chain(y_cos).chain(y_sin);
                let mut any = false;
                for v in all {
                    if !v.is_finite() {
                        return Err(GeometryError::InvalidShape("non-finite trig coefficient".into()));
                    }
                    if *v != 0.0 {
                        any = true;
                    }
                }
                if !any {
                    return Err(GeometryError::InvalidShape("all trig coefficients are zero".into()));
                }
            }
        }

        let n = VALIDATE_SEGMENTS;
        let pts: Vec<Point> = (0..n).map(|i| self.eval(TAU * i as f64 / n as f64).point).collect();

        // Non-degenerate velocity.
        let scale = pts.iter().map(|p| p.norm()).fold(0.0f64, f64::max);
        for i in 0..n {
            let d = self.eval(TAU * i as f64 / n as f64).tangent;
            if d.norm() <= 1e-9 * scale.max(1.0) {
                return Err(GeometryError::InvalidShape("degenerate tangent (curve not smooth)".into()));
            }
        }

        // Counterclockwise: signed area > 0.
        let mut area2 = 0.0;
        for i in 0..n {
            let p = pts[i];
            let q = pts[(i + 1) % n];
            area2 += p.cross(q);
        }
        if area2 <= 0.0 {
            return Err(GeometryError::NotCounterclockwise);
        }

        // Simple: no intersections between non-adjacent polyline segments.
        for i in 0..n {
            let (a1, a2) = (pts[i], pts[(i + 1) % n]);
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue; // adjacent around the seam
                }
                let (b1, b2) = (pts[j], pts[(j + 1) % n]);
                if segments_intersect(a1, a2, b1, b2) {
                    return Err(GeometryError::SelfIntersecting);
                }
            }
        }
        Ok(())
    }

    /// Positioned copy under a rigid motion.
    pub fn at(&self, motion: RigidMotion) -> PositionedCurve {
        PositionedCurve { base: self.clone(), motion }
    }

    /// Positioned copy under the identity motion.
    pub fn fixed(&self) -> PositionedCurve {
        self.at(RigidMotion::identity())
    }
}

fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = (q2 - q1).cross(p1 - q1);
    let d2 = (q2 - q1).cross(p2 - q1);
    let d3 = (p2 - p1).cross(q1 - p1);
    let d4 = (p2 - p1).cross(q2 - p1);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// Rotation by theta about the origin followed by translation z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidMotion {
    pub theta: f64,
    pub z: Point,
}

impl RigidMotion {
    pub fn new(theta: f64, z: Point) -> Self {
        RigidMotion { theta: theta.rem_euclid(TAU), z }
    }

    pub fn identity() -> Self {
        RigidMotion { theta: 0.0, z: Point::new(0.0, 0.0) }
    }

    pub fn apply(&self, p: Point) -> Point {
        self.rotate(p) + self.z
    }

    pub fn rotate(&self, v: Point) -> Point {
        let (s, c) = self.theta.sin_cos();
        Point::new(c * v.x - s * v.y, s * v.x + c * v.y)
    }

    /// Inverse map: U^T (p - z).
    pub fn pull_back(&self, p: Point) -> Point {
        let (s, c) = self.theta.sin_cos();
        let q = p - self.z;
        Point::new(c * q.x + s * q.y, -s * q.x + c * q.y)
    }
}

impl Default for RigidMotion {
    fn default() -> Self {
        RigidMotion::identity()
    }
}

/// Apply a rigid motion to a base curve.
pub fn apply_motion(c: &ParametricCurve, m: RigidMotion) -> PositionedCurve {
    c.at(m)
}

/// A base curve under a rigid motion; the boundary actually scattering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionedCurve {
    pub base: ParametricCurve,
    pub motion: RigidMotion,
}

impl PositionedCurve {
    pub fn eval(&self, t: f64) -> CurveSample {
        let s = self.base.eval(t);
        CurveSample {
            point: self.motion.apply(s.point),
            tangent: self.motion.rotate(s.tangent),
            normal: self.motion.rotate(s.normal),
        }
    }

    /// n uniformly-in-parameter boundary points.
    pub fn sample_points(&self, n: usize) -> Vec<Point> {
        (0..n).map(|i| self.eval(TAU * i as f64 / n as f64).point).collect()
    }

    pub fn centroid(&self, n: usize) -> Point {
        self.motion.apply(self.base.centroid(n))
    }
}

/// The unknown of the inverse problem: a positioned shape with its
/// physical boundary condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub base: ParametricCurve,
    #[serde(default)]
    pub motion: RigidMotion,
    pub bc: BoundaryCondition,
}

impl Obstacle {
    pub fn new(
        base: ParametricCurve,
        motion: RigidMotion,
        bc: BoundaryCondition,
    ) -> Result<Self, GeometryError> {
        base.validate()?;
        bc.validate().map_err(GeometryError::InvalidShape)?;
        Ok(Obstacle { base, motion, bc })
    }

    pub fn curve(&self) -> PositionedCurve {
        self.base.at(self.motion)
    }

    pub fn diameter(&self) -> f64 {
        diameter(&self.curve(), DEFAULT_CLOUD)
    }
}

/// Shape specification document: curve family, pose and boundary
/// condition, as exchanged through JSON files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    #[serde(flatten)]
    pub curve: ParametricCurve,
    #[serde(default)]
    pub motion: RigidMotion,
    pub bc: BoundaryCondition,
}

impl ShapeSpec {
    pub fn into_obstacle(self) -> Result<Obstacle, GeometryError> {
        Obstacle::new(self.curve, self.motion, self.bc)
    }
}

impl From<Obstacle> for ShapeSpec {
    fn from(o: Obstacle) -> Self {
        ShapeSpec { curve: o.base, motion: o.motion, bc: o.bc }
    }
}

/// Built-in shape catalog used by experiments and tests.
pub mod catalog {
    use super::ParametricCurve;

    pub fn circle(a: f64) -> ParametricCurve {
        ParametricCurve::Circle { a }
    }

    pub fn ellipse(a: f64, b: f64) -> ParametricCurve {
        ParametricCurve::Ellipse { a, b }
    }

    /// The standard non-symmetric test shape:
    /// x(t) = cos t + 0.65 cos 2t - 0.65, y(t) = 1.5 sin t.
    pub fn kite() -> ParametricCurve {
        ParametricCurve::Trig {
            x_cos: vec![-0.65, 1.0, 0.65],
            x_sin: vec![],
            y_cos: vec![],
            y_sin: vec![0.0, 1.5],
        }
    }

    /// Rounded triangle r(t) = 1 + 0.2 cos 3t, expanded into
    /// Cartesian trigonometric coefficients.
    pub fn rounded_triangle() -> ParametricCurve {
        ParametricCurve::Trig {
            x_cos: vec![0.0, 1.0, 0.1, 0.0, 0.1],
            x_sin: vec![],
            y_cos: vec![],
            y_sin: vec![0.0, 1.0, -0.1, 0.0, 0.1],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeometryError {
    InvalidShape(String),
    SelfIntersecting,
    NotCounterclockwise,
    /// Containment query within 1e-9 of the boundary.
    NearBoundary { point: Point, distance: f64 },
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::InvalidShape(m) => write!(f, "invalid shape: {}", m),
            GeometryError::SelfIntersecting => write!(f, "curve is self-intersecting"),
            GeometryError::NotCounterclockwise => write!(f, "curve is not counterclockwise"),
            GeometryError::NearBoundary { point, distance } => write!(
                f,
                "containment query ({}, {}) within {:.3e} of the boundary",
                point.x, point.y, distance
            ),
        }
    }
}

impl std::error::Error for GeometryError {}
