//! Set-distance quantities on sampled boundaries: diameter, Hausdorff
//! distance between closed regions, and point containment.
//!
//! Hausdorff distances are computed from boundary point clouds with a
//! containment correction: a boundary point of one shape lying inside the
//! other closed region contributes zero to the directed term. This is an
//! approximation adequate for the shipped catalog; its resolution is set
//! by the cloud size.

use super::{GeometryError, Point, PositionedCurve};
use std::f64::consts::TAU;

/// Containment queries closer to the boundary than this are rejected.
const NEAR_BOUNDARY: f64 = 1e-9;

/// Distance band inside which the nearest-point normal test decides
/// containment instead of the polyline winding number.
const NORMAL_TEST_BAND: f64 = 1e-3;

/// A sampled boundary with cached points for repeated queries.
#[derive(Debug, Clone)]
pub struct CurveCloud {
    curve: PositionedCurve,
    points: Vec<Point>,
}

impl CurveCloud {
    pub fn new(curve: &PositionedCurve, n: usize) -> Self {
        let n = n.max(super::VALIDATE_SEGMENTS);
        CurveCloud { curve: curve.clone(), points: curve.sample_points(n) }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Distance from p to the curve, refined from the nearest sample by
    /// golden-section search on the smooth distance function.
    pub fn distance_to_boundary(&self, p: Point) -> f64 {
        let n = self.points.len();
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (i, q) in self.points.iter().enumerate() {
            let d = q.dist(p);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        let h = TAU / n as f64;
        let t0 = best as f64 * h;
        let (t, d) = golden_min(|t| self.curve.eval(t).point.dist(p), t0 - h, t0 + h);
        let _ = t;
        d.min(best_d)
    }

    /// True if p lies in the open region bounded by the curve.
    ///
    /// Queries within 1e-9 of the boundary are rejected as ambiguous.
    pub fn contains(&self, p: Point) -> Result<bool, GeometryError> {
        let n = self.points.len();
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (i, q) in self.points.iter().enumerate() {
            let d = q.dist(p);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        let h = TAU / n as f64;
        let t0 = best as f64 * h;
        let (t_near, d) = golden_min(|t| self.curve.eval(t).point.dist(p), t0 - h, t0 + h);
        let d = d.min(best_d);
        if d < NEAR_BOUNDARY {
            return Err(GeometryError::NearBoundary { point: p, distance: d });
        }
        if d < NORMAL_TEST_BAND {
            // Close to a smooth boundary the signed normal offset is exact,
            // while the polyline winding number is not.
            let s = self.curve.eval(t_near);
            return Ok((p - s.point).dot(s.normal) < 0.0);
        }
        Ok(self.winding(p) == 1)
    }

    /// True if p lies in the closed region (boundary points count as in).
    pub(crate) fn contains_closed(&self, p: Point) -> bool {
        match self.contains(p) {
            Ok(v) => v,
            Err(GeometryError::NearBoundary { .. }) => true,
            Err(_) => false,
        }
    }

    /// Winding number of the sampled boundary polygon around p.
    fn winding(&self, p: Point) -> i32 {
        let n = self.points.len();
        let mut total = 0.0f64;
        for i in 0..n {
            let a = self.points[i] - p;
            let b = self.points[(i + 1) % n] - p;
            total += a.cross(b).atan2(a.dot(b));
        }
        (total / TAU).round() as i32
    }
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    (mid, f(mid))
}

/// Max pairwise distance over n boundary samples (lower bound of the true
/// diameter, converging as n grows).
pub fn diameter(curve: &PositionedCurve, n: usize) -> f64 {
    let n = n.max(512);
    let pts = curve.sample_points(n);
    let mut best = 0.0f64;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = pts[i].dist(pts[j]);
            if d > best {
                best = d;
            }
        }
    }
    best
}

/// Hausdorff distance between the closed regions bounded by two curves,
/// via n-point boundary clouds plus containment correction.
pub fn hausdorff_distance(a: &PositionedCurve, b: &PositionedCurve, n: usize) -> f64 {
    let n = n.max(512);
    let ca = CurveCloud::new(a, n);
    let cb = CurveCloud::new(b, n);
    directed(&ca, &cb).max(directed(&cb, &ca))
}

fn directed(from: &CurveCloud, to: &CurveCloud) -> f64 {
    let mut worst = 0.0f64;
    for &p in from.points() {
        if to.contains_closed(p) {
            continue; // inside the other closed region: distance 0
        }
        let mut nearest = f64::INFINITY;
        for &q in to.points() {
            let d = p.dist(q);
            if d < nearest {
                nearest = d;
            }
        }
        if nearest > worst {
            worst = nearest;
        }
    }
    worst
}

/// Containment of p in the open region bounded by the curve.
pub fn contains(curve: &PositionedCurve, p: Point) -> Result<bool, GeometryError> {
    CurveCloud::new(curve, super::DEFAULT_CLOUD).contains(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{catalog, RigidMotion};

    #[test]
    fn diameter_of_circle() {
        let c = catalog::circle(1.5).fixed();
        assert!((diameter(&c, 1024) - 3.0).abs() < 1e-6);
    }

    #[test]
    fn diameter_invariant_under_motion() {
        let kite = catalog::kite();
        let base = diameter(&kite.fixed(), 1024);
        for (theta, z) in [(0.9, Point::new(2.0, -1.0)), (4.0, Point::new(-3.0, 0.5))] {
            let moved = diameter(&kite.at(RigidMotion::new(theta, z)), 1024);
            assert!((base - moved).abs() < 1e-12, "{} vs {}", base, moved);
        }
    }

    #[test]
    fn hausdorff_identical_is_zero() {
        let c = catalog::ellipse(1.0, 0.5).fixed();
        assert_eq!(hausdorff_distance(&c, &c, 1024), 0.0);
    }

    #[test]
    fn hausdorff_is_symmetric() {
        let a = catalog::circle(1.0).fixed();
        let b = catalog::ellipse(1.4, 0.6).at(RigidMotion::new(0.3, Point::new(0.5, 0.2)));
        let ab = hausdorff_distance(&a, &b, 1024);
        let ba = hausdorff_distance(&b, &a, 1024);
        assert_eq!(ab, ba);
    }

    /// Brute-force oracle: directed Hausdorff over dense point grids of
    /// both filled disks.
    fn filled_disk_grid(center: Point, r: f64, step: f64) -> Vec<Point> {
        let mut pts = Vec::new();
        let mut x = center.x - r;
        while x <= center.x + r {
            let mut y = center.y - r;
            while y <= center.y + r {
                let p = Point::new(x, y);
                if p.dist(center) <= r {
                    pts.push(p);
                }
                y += step;
            }
            x += step;
        }
        pts
    }

    fn brute_hausdorff(a: &[Point], b: &[Point]) -> f64 {
        let dir = |from: &[Point], to: &[Point]| {
            from.iter()
                .map(|p| to.iter().map(|q| p.dist(*q)).fold(f64::INFINITY, f64::min))
                .fold(0.0f64, f64::max)
        };
        dir(a, b).max(dir(b, a))
    }

    #[test]
    fn hausdorff_of_disjoint_unit_disks_matches_brute_force() {
        let a = catalog::circle(1.0).fixed();
        let b = catalog::circle(1.0).at(RigidMotion::new(0.0, Point::new(3.0, 0.0)));
        let got = hausdorff_distance(&a, &b, 1024);
        let ga = filled_disk_grid(Point::new(0.0, 0.0), 1.0, 0.05);
        let gb = filled_disk_grid(Point::new(3.0, 0.0), 1.0, 0.05);
        let want = brute_hausdorff(&ga, &gb);
        assert!((got - 3.0).abs() < 1e-3, "cloud value {}", got);
        assert!((want - 3.0).abs() < 0.05, "brute force value {}", want);
        assert!((got - want).abs() < 0.05);
    }

    #[test]
    fn hausdorff_triangle_inequality_on_samples() {
        let a = catalog::circle(1.0).fixed();
        let b = catalog::ellipse(1.0, 0.7).fixed();
        let c = catalog::kite().at(RigidMotion::new(0.4, Point::new(0.3, 0.0)));
        let ab = hausdorff_distance(&a, &b, 512);
        let bc = hausdorff_distance(&b, &c, 512);
        let ac = hausdorff_distance(&a, &c, 512);
        let tol = 2.0 * TAU / 512.0; // sampling slack
        assert!(ac <= ab + bc + tol);
    }

    #[test]
    fn theorem_two_bound_holds_for_overlapping_pairs() {
        // Any pair with intersecting closures satisfies
        // d_H <= diam + diam' on the sampled approximations.
        let pairs = [
            (catalog::circle(1.0).fixed(), catalog::ellipse(1.0, 0.9).fixed()),
            (
                catalog::kite().fixed(),
                catalog::circle(1.0).at(RigidMotion::new(0.0, Point::new(0.5, 0.0))),
            ),
            (
                catalog::rounded_triangle().fixed(),
                catalog::rounded_triangle().at(RigidMotion::new(1.0, Point::new(0.2, 0.1))),
            ),
        ];
        for (a, b) in pairs {
            let dh = hausdorff_distance(&a, &b, 1024);
            let bound = diameter(&a, 1024) + diameter(&b, 1024);
            assert!(dh <= bound, "{} > {}", dh, bound);
        }
    }

    #[test]
    fn contains_basic_circle_queries() {
        let c = catalog::circle(1.0).fixed();
        assert!(contains(&c, Point::new(0.0, 0.0)).unwrap());
        assert!(!contains(&c, Point::new(2.0, 0.0)).unwrap());
    }

    #[test]
    fn contains_matches_implicit_ellipse_oracle() {
        let c = catalog::ellipse(2.0, 1.0).fixed();
        assert_eq!(
            contains(&c, Point::new(1.5, 0.8)).unwrap(),
            (1.5f64 / 2.0).powi(2) + 0.8f64.powi(2) <= 1.0
        );
        let cloud = CurveCloud::new(&c, 1024);
        let mut state = 0x1234_5678u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..200 {
            let p = Point::new(next() * 5.0 - 2.5, next() * 3.0 - 1.5);
            let implicit = (p.x / 2.0).powi(2) + p.y.powi(2);
            if (implicit - 1.0).abs() < 1e-3 {
                continue; // stay away from the boundary band
            }
            assert_eq!(cloud.contains(p).unwrap(), implicit < 1.0, "at ({}, {})", p.x, p.y);
        }
    }

    #[test]
    fn near_boundary_query_flagged() {
        let c = catalog::circle(1.0).fixed();
        let r = contains(&c, Point::new(1.0 + 1e-12, 0.0));
        assert!(matches!(r, Err(GeometryError::NearBoundary { .. })));
    }

    #[test]
    fn contains_correct_just_off_the_boundary() {
        let c = catalog::circle(1.0).fixed();
        assert!(contains(&c, Point::new(1.0 - 1e-6, 0.0)).unwrap());
        assert!(!contains(&c, Point::new(1.0 + 1e-6, 0.0)).unwrap());
    }

    #[test]
    fn contains_respects_motion() {
        let c = catalog::circle(1.0).at(RigidMotion::new(0.0, Point::new(3.0, 0.0)));
        assert!(contains(&c, Point::new(3.0, 0.0)).unwrap());
        assert!(!contains(&c, Point::new(0.0, 0.0)).unwrap());
    }
}
