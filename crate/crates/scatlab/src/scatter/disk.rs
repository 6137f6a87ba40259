//! Analytic far-field series for a circular obstacle.
//!
//! Separation of variables on the disk of radius a: the incident plane
//! wave expands in Bessel modes (Jacobi-Anger), each mode scatters with
//! the reflection ratio r_n fixed by the boundary condition, and the
//! far field collapses to a cosine series in the angle relative to the
//! incident direction. Off-center disks pick up the exact translation
//! factor. This is the independent oracle the collocation solver is
//! certified against.

use super::{BoundaryCondition, IncidentPlaneWave, SolveError, K_DIAM_CAP};
use crate::farfield::{translate_pattern, DirectionGrid, FarFieldPattern};
use crate::geometry::Point;
use crate::specfun::{bessel_j_array, bessel_y_array};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Far-field pattern of a disk of radius `a` centered at `center`.
pub fn disk_far_field_series(
    a: f64,
    bc: BoundaryCondition,
    wave: &IncidentPlaneWave,
    grid: DirectionGrid,
    center: Point,
) -> Result<FarFieldPattern, SolveError> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(SolveError::InvalidConfig(format!("disk radius {} must be positive", a)));
    }
    bc.validate().map_err(SolveError::InvalidConfig)?;
    let k = wave.k;
    if !(k > 0.0) || !k.is_finite() {
        return Err(SolveError::InvalidConfig(format!("wavenumber {} must be positive", k)));
    }
    let ka = k * a;
    if 2.0 * ka > K_DIAM_CAP {
        return Err(SolveError::CapExceeded { k_diam: 2.0 * ka });
    }

    // Truncation order: tail coefficients decay super-geometrically.
    let order = ka.ceil() as usize + 20;
    let j = bessel_j_array(order + 1, ka)?;
    let y = bessel_y_array(order + 1, ka)?;

    let h = |n: usize| Complex64::new(j[n], y[n]);
    let dj = |n: usize| if n == 0 { -j[1] } else { j[n - 1] - (n as f64 / ka) * j[n] };
    let dh = |n: usize| {
        if n == 0 {
            -h(1)
        } else {
            h(n - 1) - (n as f64 / ka) * h(n)
        }
    };

    // Reflection ratio r_n per boundary condition; scattered mode
    // coefficient is -i^n r_n under the Jacobi-Anger expansion.
    let ratio = |n: usize| -> Complex64 {
        match bc {
            BoundaryCondition::Dirichlet => Complex64::new(j[n], 0.0) / h(n),
            BoundaryCondition::Neumann => Complex64::new(dj(n), 0.0) / dh(n),
            BoundaryCondition::Impedance { lambda } => {
                (k * dj(n) + lambda * j[n]) / (k * dh(n) + lambda * h(n))
            }
        }
    };

    let r: Vec<Complex64> = (0..=order).map(ratio).collect();
    let max_r = r.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    if max_r > 0.0 && r[order].norm() >= 1e-15 * max_r {
        return Err(SolveError::TruncationInsufficient { order });
    }

    // u_inf(theta) = sqrt(2/(pi k)) e^{-i pi/4} [b_0 + 2 sum b_n cos(n(theta - d))]
    // with b_n = -r_n; the i^n mode factors cancel against the Hankel
    // asymptotic phase e^{-i n pi/2}.
    let front = Complex64::from_polar((2.0 / (PI * k)).sqrt(), -PI / 4.0);
    let samples = grid
        .angles()
        .map(|t| {
            let phi = t - wave.d_angle;
            let mut acc = -r[0];
            for (n, rn) in r.iter().enumerate().skip(1) {
                acc -= 2.0 * rn * (n as f64 * phi).cos();
            }
            front * acc
        })
        .collect();
    let centered = FarFieldPattern { k, d_angle: wave.d_angle, grid, samples };
    if center.x == 0.0 && center.y == 0.0 {
        Ok(centered)
    } else {
        Ok(translate_pattern(&centered, center))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::farfield::l2_distance;

    fn grid128() -> DirectionGrid {
        DirectionGrid::new(128).unwrap()
    }

    #[test]
    fn huge_impedance_approaches_dirichlet() {
        let wave = IncidentPlaneWave::new(1.0, 0.0).unwrap();
        let dir = disk_far_field_series(1.0, BoundaryCondition::Dirichlet, &wave, grid128(), Point::new(0.0, 0.0)).unwrap();
        let imp = disk_far_field_series(
            1.0,
            BoundaryCondition::Impedance { lambda: Complex64::new(0.0, 1e8) },
            &wave,
            grid128(),
            Point::new(0.0, 0.0),
        )
        .unwrap();
        let rel = l2_distance(&dir, &imp).unwrap() / dir.norm_l2();
        assert!(rel < 1e-6, "relative gap {}", rel);
    }

    #[test]
    fn neumann_and_dirichlet_disks_differ() {
        let wave = IncidentPlaneWave::new(1.0, 0.0).unwrap();
        let d = disk_far_field_series(1.0, BoundaryCondition::Dirichlet, &wave, grid128(), Point::new(0.0, 0.0)).unwrap();
        let n = disk_far_field_series(1.0, BoundaryCondition::Neumann, &wave, grid128(), Point::new(0.0, 0.0)).unwrap();
        let gap = l2_distance(&d, &n).unwrap();
        assert!(gap > 0.1, "L2 gap {}", gap);
    }

    #[test]
    fn off_center_disk_carries_exact_translation_factor() {
        let wave = IncidentPlaneWave::new(2.0, 0.3).unwrap();
        let z = Point::new(0.8, -0.45);
        let centered = disk_far_field_series(1.0, BoundaryCondition::Dirichlet, &wave, grid128(), Point::new(0.0, 0.0)).unwrap();
        let moved = disk_far_field_series(1.0, BoundaryCondition::Dirichlet, &wave, grid128(), z).unwrap();
        let predicted = translate_pattern(&centered, z);
        for (a, b) in moved.samples.iter().zip(&predicted.samples) {
            assert!((a - b).norm() <= 1e-15);
        }
    }

    #[test]
    fn different_radii_give_distinct_patterns() {
        let wave = IncidentPlaneWave::new(1.0, 0.0).unwrap();
        let a = disk_far_field_series(1.0, BoundaryCondition::Dirichlet, &wave, grid128(), Point::new(0.0, 0.0)).unwrap();
        let b = disk_far_field_series(1.2, BoundaryCondition::Dirichlet, &wave, grid128(), Point::new(0.0, 0.0)).unwrap();
        assert!(l2_distance(&a, &b).unwrap() > 0.01);
    }

    #[test]
    fn ka_cap_enforced() {
        let wave = IncidentPlaneWave::new(50.0, 0.0).unwrap();
        assert!(matches!(
            disk_far_field_series(1.0, BoundaryCondition::Dirichlet, &wave, grid128(), Point::new(0.0, 0.0)),
            Err(SolveError::CapExceeded { .. })
        ));
    }
}
