//! Method-of-fundamentals-solutions forward solver.
//!
//! Sources sit on the boundary curve scaled toward its centroid; the
//! boundary condition is collocated on an oversampled boundary grid and
//! fitted by complex least squares. Accuracy is certified a posteriori
//! by the boundary residual at check points interleaved between the
//! collocation points.

use super::{IncidentPlaneWave, MfsConfig, ScatterSolution, SolveError, K_DIAM_CAP};
use crate::farfield::{DirectionGrid, FarFieldPattern};
use crate::geometry::{diameter, CurveCloud, Obstacle, ParametricCurve, Point, PositionedCurve, DEFAULT_CLOUD};
use crate::linalg::{lstsq, CMatrix};
use crate::specfun::hankel01;
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

/// Fundamental solution Phi(x, y) = (i/4) H_0^(1)(k |x - y|) and its
/// normal derivative at x.
fn kernel(k: f64, x: Point, normal: Point, y: Point) -> Result<(Complex64, Complex64), SolveError> {
    let diff = x - y;
    let r = diff.norm();
    let (h0, h1) = hankel01(k * r)?;
    let quarter_i = Complex64::new(0.0, 0.25);
    let phi = quarter_i * h0;
    // d/dnu_x Phi = -(i/4) k H_1(kr) (nu . (x-y))/r
    let dphi = -quarter_i * k * h1 * (normal.dot(diff) / r);
    Ok((phi, dphi))
}

/// Source point from the complexified boundary map: Z(t + i eps) with
/// Z(t) = x(t) + i y(t). For a circle of radius a this is the circle of
/// radius a e^{-eps}, i.e. the boundary scaled toward its center; for
/// other shapes the family hugs the boundary where the parametrization
/// compresses, which is what the fitted field needs.
fn shifted_source(base: &ParametricCurve, t: f64, eps: f64) -> Point {
    let eval = |cos_c: &[f64], sin_c: &[f64]| -> Complex64 {
        let mut v = Complex64::new(0.0, 0.0);
        for (j, c) in cos_c.iter().enumerate() {
            let jf = j as f64;
            // cos(j(t + i eps)) = cos(jt) cosh(j eps) - i sin(jt) sinh(j eps)
            v += c * Complex64::new((jf * t).cos() * (jf * eps).cosh(), -(jf * t).sin() * (jf * eps).sinh());
        }
        for (j, s) in sin_c.iter().enumerate() {
            let jf = j as f64;
            v += s * Complex64::new((jf * t).sin() * (jf * eps).cosh(), (jf * t).cos() * (jf * eps).sinh());
        }
        v
    };
    let (zx, zy) = match base {
        ParametricCurve::Circle { a } => (eval(&[0.0, *a], &[]), eval(&[], &[0.0, *a])),
        ParametricCurve::Ellipse { a, b } => (eval(&[0.0, *a], &[]), eval(&[], &[0.0, *b])),
        ParametricCurve::Trig { x_cos, x_sin, y_cos, y_sin } => {
            (eval(x_cos, x_sin), eval(y_cos, y_sin))
        }
    };
    let z = zx + Complex64::new(0.0, 1.0) * zy;
    Point::new(z.re, z.im)
}

/// Place q sources strictly inside the obstacle.
///
/// The imaginary shift starts at -ln(source_offset). If that curve
/// leaves the obstacle (the shifted map of a reentrant shape bulges
/// before a disk's would), the feasibility limit is located by backoff
/// and half of it is used: the limit itself sits on the continuation
/// singularities of the field and the fit stops converging there.
fn place_sources(
    curve: &PositionedCurve,
    cloud: &CurveCloud,
    q: usize,
    offset: f64,
) -> Result<Vec<Point>, SolveError> {
    let make = |eps: f64| -> Vec<Point> {
        (0..q)
            .map(|i| {
                let p = shifted_source(&curve.base, TAU * i as f64 / q as f64, eps);
                curve.motion.apply(p)
            })
            .collect()
    };
    let inside = |pts: &[Point]| pts.iter().all(|s| cloud.contains(*s).unwrap_or(false));

    let eps0 = -offset.ln();
    let first = make(eps0);
    if inside(&first) {
        return Ok(first);
    }
    let mut eps = eps0;
    for _ in 0..32 {
        eps *= 0.85;
        let at_limit = make(eps);
        if inside(&at_limit) {
            let backed_off = make(0.5 * eps);
            return if inside(&backed_off) { Ok(backed_off) } else { Ok(at_limit) };
        }
    }
    Err(SolveError::SourceOutside { index: 0 })
}

/// Solve the exterior scattering problem for one incident wave.
pub fn solve(obstacle: &Obstacle, wave: &IncidentPlaneWave, cfg: &MfsConfig) -> Result<ScatterSolution, SolveError> {
    cfg.validate()?;
    obstacle.base.validate()?;
    obstacle.bc.validate().map_err(SolveError::InvalidConfig)?;
    if !(wave.k > 0.0) || !wave.k.is_finite() {
        return Err(SolveError::InvalidConfig(format!("wavenumber {} must be positive", wave.k)));
    }
    let curve = obstacle.curve();
    let k_diam = wave.k * diameter(&curve, 512);
    if k_diam > K_DIAM_CAP {
        return Err(SolveError::CapExceeded { k_diam });
    }

    // Sources on the complexified boundary curve, strictly inside.
    let q = cfg.n_sources;
    let cloud = CurveCloud::new(&curve, DEFAULT_CLOUD);
    let sources = place_sources(&curve, &cloud, q, cfg.source_offset)?;

    // Collocation system B(u^s)(x_p) = -B(u^i)(x_p).
    let p_count = cfg.collocation_count();
    let mut a = CMatrix::zeros(p_count, q);
    let mut b = vec![Complex64::new(0.0, 0.0); p_count];
    for p in 0..p_count {
        let s = curve.eval(TAU * p as f64 / p_count as f64);
        let ui = wave.eval(s.point);
        let dui = wave.normal_derivative(s.point, s.normal);
        b[p] = -obstacle.bc.apply(ui, dui);
        for (qi, y) in sources.iter().enumerate() {
            let (phi, dphi) = kernel(wave.k, s.point, s.normal, *y)?;
            a.set(p, qi, obstacle.bc.apply(phi, dphi));
        }
    }

    let out = lstsq(&a, &b);
    let mut solution = ScatterSolution {
        wave: *wave,
        obstacle: obstacle.clone(),
        sources,
        coefficients: out.solution,
        residual: f64::INFINITY,
        r_diag_ratio: out.r_diag_ratio,
    };
    let residual = boundary_residual(&solution)?;
    solution.residual = residual;
    if residual > cfg.truncation_residual_cap {
        return Err(SolveError::ResidualTooLarge { residual, cap: cfg.truncation_residual_cap });
    }
    Ok(solution)
}

/// Boundary-condition defect max |B(u^i + u^s)| over check points
/// interleaved between (and distinct from) the collocation points,
/// normalized by max |u^i| = 1.
pub fn boundary_residual(sol: &ScatterSolution) -> Result<f64, SolveError> {
    boundary_residual_with(sol, 4 * sol.coefficients.len())
}

/// Same certificate on a caller-chosen number of check points.
pub fn boundary_residual_with(sol: &ScatterSolution, n_check: usize) -> Result<f64, SolveError> {
    let curve = sol.obstacle.curve();
    let k = sol.wave.k;
    let mut worst = 0.0f64;
    for p in 0..n_check {
        // offset half a step so check points avoid collocation points
        let t = TAU * (p as f64 + 0.5) / n_check as f64;
        let s = curve.eval(t);
        let mut u = sol.wave.eval(s.point);
        let mut du = sol.wave.normal_derivative(s.point, s.normal);
        for (c, y) in sol.coefficients.iter().zip(&sol.sources) {
            let (phi, dphi) = kernel(k, s.point, s.normal, *y)?;
            u += c * phi;
            du += c * dphi;
        }
        let defect = sol.obstacle.bc.apply(u, du).norm();
        if defect > worst {
            worst = defect;
        }
    }
    Ok(worst)
}

/// Scattered field u^s at a point strictly outside the obstacle.
pub fn near_field(sol: &ScatterSolution, x: Point) -> Result<Complex64, SolveError> {
    let curve = sol.obstacle.curve();
    let cloud = CurveCloud::new(&curve, DEFAULT_CLOUD);
    match cloud.contains(x) {
        Ok(false) => {}
        Ok(true) => return Err(SolveError::PointInsideObstacle(x)),
        Err(e) => return Err(SolveError::Geometry(e)),
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (c, y) in sol.coefficients.iter().zip(&sol.sources) {
        let r = x.dist(*y);
        let (h0, _) = hankel01(sol.wave.k * r)?;
        acc += c * Complex64::new(0.0, 0.25) * h0;
    }
    Ok(acc)
}

/// Total field u = u^i + u^s outside the obstacle.
pub fn total_field(sol: &ScatterSolution, x: Point) -> Result<Complex64, SolveError> {
    Ok(sol.wave.eval(x) + near_field(sol, x)?)
}

/// Far-field pattern of the solution on a direction grid:
/// u_inf(x_hat) = gamma2 sum_q c_q exp(-ik x_hat . y_q) with
/// gamma2 = exp(i pi/4) / sqrt(8 pi k).
pub fn far_field(sol: &ScatterSolution, grid: DirectionGrid) -> FarFieldPattern {
    let k = sol.wave.k;
    let gamma2 = Complex64::from_polar(1.0 / (8.0 * PI * k).sqrt(), PI / 4.0);
    let samples = grid
        .angles()
        .map(|t| {
            let xhat = Point::from_angle(t);
            let mut acc = Complex64::new(0.0, 0.0);
            for (c, y) in sol.coefficients.iter().zip(&sol.sources) {
                acc += c * Complex64::from_polar(1.0, -k * xhat.dot(*y));
            }
            gamma2 * acc
        })
        .collect();
    FarFieldPattern { k, d_angle: sol.wave.d_angle, grid, samples }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::farfield::l2_distance;
    use crate::geometry::{catalog, RigidMotion};
    use crate::scatter::BoundaryCondition;

    fn unit_disk(bc: BoundaryCondition) -> Obstacle {
        Obstacle::new(catalog::circle(1.0), RigidMotion::identity(), bc).unwrap()
    }

    #[test]
    fn dirichlet_disk_certificate_holds() {
        let obs = unit_disk(BoundaryCondition::Dirichlet);
        let wave = IncidentPlaneWave::new(1.0, 0.0).unwrap();
        let sol = solve(&obs, &wave, &MfsConfig::default()).unwrap();
        assert!(sol.residual <= 1e-6, "residual {}", sol.residual);
        // total field vanishes on the boundary
        let u = total_field(&sol, Point::new((1.0f64 + 1e-6).cos(), 0.0)).unwrap_err();
        let _ = u; // point is inside-adjacent; covered below with a real exterior point
        let s = obs.curve().eval(0.37);
        let just_outside = s.point + s.normal.scale(1e-7);
        let tot = total_field(&sol, just_outside).unwrap();
        assert!(tot.norm() <= 1e-5, "|u| on boundary = {}", tot.norm());
    }

    #[test]
    fn zero_coefficients_give_unit_residual_on_dirichlet() {
        let obs = unit_disk(BoundaryCondition::Dirichlet);
        let wave = IncidentPlaneWave::new(1.0, 0.0).unwrap();
        let mut sol = solve(&obs, &wave, &MfsConfig::default()).unwrap();
        for c in sol.coefficients.iter_mut() {
            *c = Complex64::new(0.0, 0.0);
        }
        let r = boundary_residual(&sol).unwrap();
        assert!((r - 1.0).abs() < 1e-12, "pure incident trace residual {}", r);
    }

    fn kite_cfg() -> MfsConfig {
        // the kite's reentrant part needs a denser source set
        MfsConfig { n_sources: 192, ..MfsConfig::default() }
    }

    #[test]
    fn residual_stable_under_check_refinement() {
        let obs = Obstacle::new(catalog::kite(), RigidMotion::identity(), BoundaryCondition::Dirichlet).unwrap();
        let wave = IncidentPlaneWave::new(2.0, 0.4).unwrap();
        let sol = solve(&obs, &wave, &kite_cfg()).unwrap();
        let r1 = boundary_residual(&sol).unwrap();
        let r2 = boundary_residual_with(&sol, 8 * sol.coefficients.len()).unwrap();
        assert!(r2 < 10.0 * r1.max(1e-15), "r1={} r2={}", r1, r2);
    }

    #[test]
    fn coefficients_scale_linearly() {
        let obs = unit_disk(BoundaryCondition::Dirichlet);
        let wave = IncidentPlaneWave::new(1.5, 0.7).unwrap();
        let sol = solve(&obs, &wave, &MfsConfig::default()).unwrap();
        let x = Point::new(3.0, 1.0);
        let base = near_field(&sol, x).unwrap();
        let mut doubled = sol.clone();
        for c in doubled.coefficients.iter_mut() {
            *c *= 2.0;
        }
        let twice = near_field(&doubled, x).unwrap();
        assert!((twice - base * 2.0).norm() <= 1e-14 * base.norm());
    }

    #[test]
    fn near_field_inside_rejected() {
        let obs = unit_disk(BoundaryCondition::Dirichlet);
        let wave = IncidentPlaneWave::new(1.0, 0.0).unwrap();
        let sol = solve(&obs, &wave, &MfsConfig::default()).unwrap();
        assert!(matches!(
            near_field(&sol, Point::new(0.2, 0.0)),
            Err(SolveError::PointInsideObstacle(_))
        ));
    }

    #[test]
    fn cap_on_k_diameter_enforced() {
        let obs = unit_disk(BoundaryCondition::Dirichlet);
        let wave = IncidentPlaneWave::new(25.0, 0.0).unwrap();
        assert!(matches!(
            solve(&obs, &wave, &MfsConfig::default()),
            Err(SolveError::CapExceeded { .. })
        ));
    }

    #[test]
    fn disk_far_field_depends_only_on_relative_angle() {
        let obs = unit_disk(BoundaryCondition::Dirichlet);
        let grid = DirectionGrid::new(128).unwrap();
        let base = {
            let wave = IncidentPlaneWave::new(2.0, 0.0).unwrap();
            far_field(&solve(&obs, &wave, &MfsConfig::default()).unwrap(), grid)
        };
        for shift in [3usize, 17, 40] {
            let angle = grid.angle(shift);
            let wave = IncidentPlaneWave::new(2.0, angle).unwrap();
            let rotated = far_field(&solve(&obs, &wave, &MfsConfig::default()).unwrap(), grid);
            // |u_inf| must be a pure shift of the base modulus
            for m in 0..grid.len() {
                let a = rotated.samples[(m + shift) % grid.len()].norm();
                let b = base.samples[m].norm();
                assert!((a - b).abs() <= 1e-8 * b.max(1e-8), "shift {} angle {}", shift, m);
            }
        }
    }

    #[test]
    fn translated_solve_matches_pattern_translation() {
        use crate::farfield::translate_pattern;
        let kite = catalog::kite();
        let z = Point::new(0.3, -0.2);
        let wave = IncidentPlaneWave::new(2.0, 0.9).unwrap();
        let grid = DirectionGrid::new(128).unwrap();
        let base = Obstacle::new(kite.clone(), RigidMotion::identity(), BoundaryCondition::Dirichlet).unwrap();
        let moved = Obstacle::new(kite, RigidMotion::new(0.0, z), BoundaryCondition::Dirichlet).unwrap();
        let pat_base = far_field(&solve(&base, &wave, &kite_cfg()).unwrap(), grid);
        let pat_moved = far_field(&solve(&moved, &wave, &kite_cfg()).unwrap(), grid);
        let predicted = translate_pattern(&pat_base, z);
        let err = l2_distance(&pat_moved, &predicted).unwrap() / pat_moved.norm_l2();
        assert!(err < 1e-6, "translation identity relative error {}", err);
    }
}
