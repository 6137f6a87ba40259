//! Trigonometric interpolation on uniform angular grids and the
//! rotation transform for full-aperture far-field matrices.
//!
//! Far-field patterns of smooth obstacles are analytic in angle, so
//! their uniform samples determine them to spectral accuracy. With an
//! even sample count M the Nyquist mode is carried as cos(M*theta/2),
//! which is the minimal-degree interpolant reproducing the nodes.

use super::{DirectionGrid, FarFieldMatrix, FarFieldPattern, FieldError};
use num_complex::Complex64;
use std::f64::consts::TAU;

/// Fraction of total spectral energy allowed in the top decile of modes.
const TAIL_ENERGY_CAP: f64 = 1e-10;

/// Interpolant through samples on the uniform grid theta_x = 2 pi x / M.
#[derive(Debug, Clone)]
pub struct TrigInterpolant {
    m: usize,
    /// DFT coefficients in natural order j = 0..M-1.
    coeffs: Vec<Complex64>,
}

impl TrigInterpolant {
    pub fn new(samples: &[Complex64]) -> Result<Self, FieldError> {
        let m = samples.len();
        if m < 2 || m % 2 != 0 {
            return Err(FieldError::GridInvalid(format!("{} samples (even count required)", m)));
        }
        Ok(TrigInterpolant { m, coeffs: dft(samples) })
    }

    pub fn eval(&self, theta: f64) -> Complex64 {
        let half = self.m / 2;
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, c) in self.coeffs.iter().enumerate() {
            acc += c * basis(j, half, self.m, theta);
        }
        acc
    }

    /// Fraction of spectral energy carried by the top decile of |frequency|.
    pub fn tail_energy_fraction(&self) -> f64 {
        tail_fraction(&self.coeffs)
    }
}

/// Value at `angle` of the minimal-degree trigonometric polynomial
/// through uniform samples (even count).
pub fn trig_interpolate(samples: &[Complex64], angle: f64) -> Complex64 {
    TrigInterpolant::new(samples).expect("even sample count required").eval(angle)
}

fn dft(samples: &[Complex64]) -> Vec<Complex64> {
    let m = samples.len();
    let inv = 1.0 / m as f64;
    (0..m)
        .map(|j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (x, s) in samples.iter().enumerate() {
                let phase = -TAU * (j * x) as f64 / m as f64;
                acc += s * Complex64::from_polar(1.0, phase);
            }
            acc * inv
        })
        .collect()
}

#[inline]
fn basis(j: usize, half: usize, m: usize, theta: f64) -> Complex64 {
    if j == half {
        Complex64::new((half as f64 * theta).cos(), 0.0)
    } else {
        let f = if j < half { j as f64 } else { j as f64 - m as f64 };
        Complex64::from_polar(1.0, f * theta)
    }
}

fn tail_fraction(coeffs: &[Complex64]) -> f64 {
    let m = coeffs.len();
    let half = m / 2;
    let cutoff = ((half as f64) * 0.9).floor() as usize; // |f| >= cutoff is the top decile
    let mut total = 0.0;
    let mut tail = 0.0;
    for (j, c) in coeffs.iter().enumerate() {
        let f = if j <= half { j } else { m - j };
        let e = c.norm_sqr();
        total += e;
        if f >= cutoff {
            tail += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        tail / total
    }
}

/// Tensor-product interpolant over (observation, incident) angles of a
/// far-field matrix, with the tail-energy certificate checked once.
#[derive(Debug, Clone)]
pub struct MatrixInterpolant {
    k: f64,
    obs: DirectionGrid,
    inc: DirectionGrid,
    /// 2D DFT coefficients, row-major with observation frequency outer.
    coeffs: Vec<Complex64>,
}

impl MatrixInterpolant {
    pub fn new(mat: &FarFieldMatrix) -> Result<Self, FieldError> {
        let m = mat.obs.len();
        let l = mat.inc.len();
        // DFT along incident dimension, then along observation dimension.
        let mut stage = vec![Complex64::new(0.0, 0.0); m * l];
        for mo in 0..m {
            let row: Vec<Complex64> = (0..l).map(|li| mat.at(mo, li)).collect();
            let c = dft(&row);
            stage[mo * l..(mo + 1) * l].copy_from_slice(&c);
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); m * l];
        for ji in 0..l {
            let col: Vec<Complex64> = (0..m).map(|mo| stage[mo * l + ji]).collect();
            let c = dft(&col);
            for (jo, v) in c.into_iter().enumerate() {
                coeffs[jo * l + ji] = v;
            }
        }

        let out = MatrixInterpolant { k: mat.k, obs: mat.obs, inc: mat.inc, coeffs };
        let frac = out.tail_energy_fraction();
        if frac >= TAIL_ENERGY_CAP {
            return Err(FieldError::TailEnergy { fraction: frac });
        }
        Ok(out)
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn obs(&self) -> DirectionGrid {
        self.obs
    }

    pub fn inc(&self) -> DirectionGrid {
        self.inc
    }

    /// Worst marginal tail-energy fraction of the two dimensions.
    pub fn tail_energy_fraction(&self) -> f64 {
        let m = self.obs.len();
        let l = self.inc.len();
        // marginal over observation frequencies
        let mut obs_marginal = vec![Complex64::new(0.0, 0.0); m];
        let mut inc_marginal = vec![Complex64::new(0.0, 0.0); l];
        for jo in 0..m {
            let mut e = 0.0;
            for ji in 0..l {
                e += self.coeffs[jo * l + ji].norm_sqr();
            }
            obs_marginal[jo] = Complex64::new(e.sqrt(), 0.0);
        }
        for ji in 0..l {
            let mut e = 0.0;
            for jo in 0..m {
                e += self.coeffs[jo * l + ji].norm_sqr();
            }
            inc_marginal[ji] = Complex64::new(e.sqrt(), 0.0);
        }
        tail_fraction(&obs_marginal).max(tail_fraction(&inc_marginal))
    }

    /// Value of the underlying smooth u_inf(obs_angle, inc_angle).
    pub fn eval(&self, obs_angle: f64, inc_angle: f64) -> Complex64 {
        let m = self.obs.len();
        let l = self.inc.len();
        let (hm, hl) = (m / 2, l / 2);
        // Contract the incident dimension first.
        let wi: Vec<Complex64> = (0..l).map(|ji| basis(ji, hl, l, inc_angle)).collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for jo in 0..m {
            let mut row = Complex64::new(0.0, 0.0);
            for (ji, w) in wi.iter().enumerate() {
                row += self.coeffs[jo * l + ji] * w;
            }
            acc += row * basis(jo, hm, m, obs_angle);
        }
        acc
    }

    /// Pattern of the base obstacle rotated by theta, for incident
    /// direction angle d_angle, sampled on the observation grid:
    /// u_inf(x_hat, rotated, d) = u_inf(obs - theta, base, d - theta).
    pub fn predict_rotated(&self, theta: f64, d_angle: f64) -> FarFieldPattern {
        let m = self.obs.len();
        let l = self.inc.len();
        let (hm, hl) = (m / 2, l / 2);
        let inc_angle = d_angle - theta;
        let wi: Vec<Complex64> = (0..l).map(|ji| basis(ji, hl, l, inc_angle)).collect();
        // v[jo] = sum_ji C[jo, ji] * basis_ji(inc_angle)
        let mut v = vec![Complex64::new(0.0, 0.0); m];
        for (jo, slot) in v.iter_mut().enumerate() {
            let mut row = Complex64::new(0.0, 0.0);
            for (ji, w) in wi.iter().enumerate() {
                row += self.coeffs[jo * l + ji] * w;
            }
            *slot = row;
        }
        let samples = (0..m)
            .map(|x| {
                let a = self.obs.angle(x) - theta;
                let mut acc = Complex64::new(0.0, 0.0);
                for (jo, val) in v.iter().enumerate() {
                    acc += val * basis(jo, hm, m, a);
                }
                acc
            })
            .collect();
        FarFieldPattern { k: self.k, d_angle, grid: self.obs, samples }
    }
}

/// One-shot rotation prediction; builds the interpolant (with its
/// tail-energy certificate) and evaluates it.
pub fn rotate_predict(mat: &FarFieldMatrix, theta: f64, d_angle: f64) -> Result<FarFieldPattern, FieldError> {
    Ok(MatrixInterpolant::new(mat)?.predict_rotated(theta, d_angle))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_samples_interpolate_to_constant() {
        let c = Complex64::new(2.5, -1.0);
        let samples = vec![c; 16];
        for &t in &[0.0, 0.3, 1.7, 5.9] {
            assert!((trig_interpolate(&samples, t) - c).norm() < 1e-14);
        }
    }

    #[test]
    fn low_degree_exponential_is_exact() {
        let samples: Vec<Complex64> =
            (0..16).map(|x| Complex64::from_polar(1.0, TAU * x as f64 / 16.0)).collect();
        let got = trig_interpolate(&samples, 0.3);
        let want = Complex64::from_polar(1.0, 0.3);
        assert!((got - want).norm() < 1e-13);
    }

    #[test]
    fn node_values_are_reproduced() {
        let samples: Vec<Complex64> = (0..32)
            .map(|x| {
                let t = TAU * x as f64 / 32.0;
                Complex64::new((3.0 * t).cos() + 0.2 * (7.0 * t).sin(), (5.0 * t).sin())
            })
            .collect();
        let interp = TrigInterpolant::new(&samples).unwrap();
        for (x, s) in samples.iter().enumerate() {
            let t = TAU * x as f64 / 32.0;
            assert!((interp.eval(t) - s).norm() < 1e-13);
        }
    }

    #[test]
    fn odd_sample_count_rejected() {
        assert!(TrigInterpolant::new(&vec![Complex64::new(1.0, 0.0); 15]).is_err());
    }

    #[test]
    fn matrix_interpolation_reproduces_smooth_function() {
        let obs = DirectionGrid::new(32).unwrap();
        let inc = DirectionGrid::new(32).unwrap();
        let f = |a: f64, b: f64| {
            Complex64::from_polar((2.0 + (a - b).cos()).ln(), (3.0 * a).sin() * 0.2 + b)
        };
        let mut samples = Vec::new();
        for a in obs.angles() {
            for b in inc.angles() {
                samples.push(f(a, b));
            }
        }
        let mat = FarFieldMatrix { k: 1.0, obs, inc, samples };
        let interp = MatrixInterpolant::new(&mat).unwrap();
        for &(a, b) in &[(0.0, 0.0), (0.37, 1.2), (2.5, 5.1), (6.0, 0.01)] {
            let got = interp.eval(a, b);
            let want = f(a, b);
            // truncation of this test function's spectrum at 32 modes
            // leaves ~1e-8 to the interpolant
            assert!((got - want).norm() < 5e-8, "at ({}, {}): {} vs {}", a, b, got, want);
        }
    }

    #[test]
    fn theta_zero_on_grid_recovers_matrix_column() {
        let obs = DirectionGrid::new(16).unwrap();
        let inc = DirectionGrid::new(16).unwrap();
        let mut samples = Vec::new();
        for a in obs.angles() {
            for b in inc.angles() {
                samples.push(Complex64::from_polar(1.0, (a - b).cos()));
            }
        }
        let mat = FarFieldMatrix { k: 1.0, obs, inc, samples };
        let col3 = mat.column(3);
        let pred = rotate_predict(&mat, 0.0, inc.angle(3)).unwrap();
        for (a, b) in pred.samples.iter().zip(&col3.samples) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn rotation_roundtrip_within_interpolation_tolerance() {
        let obs = DirectionGrid::new(128).unwrap();
        let inc = DirectionGrid::new(128).unwrap();
        let f = |a: f64, b: f64| Complex64::from_polar((2.0 + (a - b).cos()).sqrt(), (a + 2.0 * b).sin());
        let mut samples = Vec::new();
        for a in obs.angles() {
            for b in inc.angles() {
                samples.push(f(a, b));
            }
        }
        let mat = FarFieldMatrix { k: 2.0, obs, inc, samples };
        let interp = MatrixInterpolant::new(&mat).unwrap();
        let theta = 0.773;
        let d = 1.1;
        // rotate by theta, then ask the rotated interpolant the base value
        let rotated = interp.predict_rotated(theta, d);
        let direct: Vec<Complex64> = obs.angles().map(|a| f(a - theta, d - theta)).collect();
        for (got, want) in rotated.samples.iter().zip(&direct) {
            assert!((got - want).norm() < 1e-9);
        }
    }

    #[test]
    fn white_noise_trips_tail_energy_check() {
        let obs = DirectionGrid::new(32).unwrap();
        let inc = DirectionGrid::new(32).unwrap();
        let mut state = 1u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let samples: Vec<Complex64> =
            (0..32 * 32).map(|_| Complex64::new(next(), next())).collect();
        let mat = FarFieldMatrix { k: 1.0, obs, inc, samples };
        assert!(matches!(MatrixInterpolant::new(&mat), Err(FieldError::TailEnergy { .. })));
    }
}
