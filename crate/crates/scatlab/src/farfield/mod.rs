//! Far-field pattern containers, the L2(S1) metric, and the exact
//! translation factor relating the patterns of translated obstacles.
//!
//! A pattern samples u_inf on a uniform angular grid; a matrix stacks the
//! patterns of a full sweep of incident directions. The uniform-grid
//! trapezoid rule evaluates L2(S1) quantities, which is spectrally exact
//! for the trigonometric polynomials carried here.

mod interp;
mod io;

pub use interp::{rotate_predict, trig_interpolate, MatrixInterpolant, TrigInterpolant};
pub use io::{read_matrix, read_pattern, write_matrix, write_pattern};

use crate::geometry::Point;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::fmt;

/// Uniform observation grid of M angles 2*pi*m/M, M >= 16 and even.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct DirectionGrid {
    m: usize,
}

impl DirectionGrid {
    pub fn new(m: usize) -> Result<Self, FieldError> {
        if m < 16 || m % 2 != 0 {
            return Err(FieldError::GridInvalid(format!("grid size {} must be even and >= 16", m)));
        }
        Ok(DirectionGrid { m })
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn angle(&self, i: usize) -> f64 {
        TAU * i as f64 / self.m as f64
    }

    pub fn angles(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.m).map(move |i| self.angle(i))
    }
}

impl Default for DirectionGrid {
    fn default() -> Self {
        DirectionGrid { m: 128 }
    }
}

impl TryFrom<usize> for DirectionGrid {
    type Error = FieldError;
    fn try_from(m: usize) -> Result<Self, Self::Error> {
        DirectionGrid::new(m)
    }
}

impl From<DirectionGrid> for usize {
    fn from(g: DirectionGrid) -> usize {
        g.m
    }
}

/// Sampled far-field pattern for one incident plane wave.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldPattern {
    pub k: f64,
    pub d_angle: f64,
    pub grid: DirectionGrid,
    pub samples: Vec<Complex64>,
}

impl FarFieldPattern {
    pub fn new(k: f64, d_angle: f64, grid: DirectionGrid, samples: Vec<Complex64>) -> Result<Self, FieldError> {
        if samples.len() != grid.len() {
            return Err(FieldError::GridInvalid(format!(
                "{} samples on a {}-point grid",
                samples.len(),
                grid.len()
            )));
        }
        if !(k > 0.0) || !k.is_finite() {
            return Err(FieldError::GridInvalid(format!("wavenumber {} must be positive", k)));
        }
        Ok(FarFieldPattern { k, d_angle, grid, samples })
    }

    /// L2(S1) norm under the uniform trapezoid rule.
    pub fn norm_l2(&self) -> f64 {
        let w = TAU / self.grid.len() as f64;
        (w * self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// Plain Euclidean norm of the sample vector.
    pub fn norm_euclid(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    fn same_metadata(&self, other: &FarFieldPattern) -> bool {
        self.k == other.k && self.d_angle == other.d_angle && self.grid == other.grid
    }
}

/// L2(S1) distance between two patterns sharing (k, d, grid).
pub fn l2_distance(p: &FarFieldPattern, q: &FarFieldPattern) -> Result<f64, FieldError> {
    if !p.same_metadata(q) {
        return Err(FieldError::MetadataMismatch(format!(
            "(k={}, d={}, M={}) vs (k={}, d={}, M={})",
            p.k,
            p.d_angle,
            p.grid.len(),
            q.k,
            q.d_angle,
            q.grid.len()
        )));
    }
    let w = TAU / p.grid.len() as f64;
    let s: f64 = p.samples.iter().zip(&q.samples).map(|(a, b)| (a - b).norm_sqr()).sum();
    Ok((w * s).sqrt())
}

/// Pattern of the obstacle translated by z, from the base pattern:
/// each sample is multiplied by exp(-ik (x_hat - d) . z).
pub fn translate_pattern(p: &FarFieldPattern, z: Point) -> FarFieldPattern {
    let d = Point::from_angle(p.d_angle);
    let mut samples = Vec::with_capacity(p.samples.len());
    for (i, s) in p.samples.iter().enumerate() {
        let xhat = Point::from_angle(p.grid.angle(i));
        let phase = -p.k * (xhat - d).dot(z);
        samples.push(s * Complex64::from_polar(1.0, phase));
    }
    FarFieldPattern { k: p.k, d_angle: p.d_angle, grid: p.grid, samples }
}

/// Perturb a pattern with circularly symmetric complex Gaussian noise.
///
/// Per-sample standard deviation is level * |p|_2 / sqrt(M), so the
/// expected noise norm is level times the pattern norm in either the
/// Euclidean or the L2(S1) sense. Deterministic for a given seed.
pub fn add_noise(p: &FarFieldPattern, level: f64, seed: u64) -> FarFieldPattern {
    assert!(level >= 0.0, "noise level must be nonnegative");
    if level == 0.0 {
        return p.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = level * p.norm_euclid() / (p.samples.len() as f64).sqrt();
    let comp = sigma / 2.0f64.sqrt();
    let samples = p
        .samples
        .iter()
        .map(|s| {
            let g1: f64 = rng.sample(rand_distr::StandardNormal);
            let g2: f64 = rng.sample(rand_distr::StandardNormal);
            s + Complex64::new(comp * g1, comp * g2)
        })
        .collect();
    FarFieldPattern { k: p.k, d_angle: p.d_angle, grid: p.grid, samples }
}

/// Full-aperture far-field data: one pattern per incident grid angle.
///
/// Samples are stored row-major with the observation index outer:
/// `samples[mo * inc.len() + li]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldMatrix {
    pub k: f64,
    pub obs: DirectionGrid,
    pub inc: DirectionGrid,
    pub samples: Vec<Complex64>,
}

impl FarFieldMatrix {
    /// Assemble from per-incident-angle columns (column l = pattern for
    /// incident angle 2*pi*l/L).
    pub fn from_columns(k: f64, obs: DirectionGrid, inc: DirectionGrid, columns: &[FarFieldPattern]) -> Result<Self, FieldError> {
        if columns.len() != inc.len() {
            return Err(FieldError::GridInvalid(format!(
                "{} columns for an incident grid of {}",
                columns.len(),
                inc.len()
            )));
        }
        let m = obs.len();
        let l = inc.len();
        let mut samples = vec![Complex64::new(0.0, 0.0); m * l];
        for (li, col) in columns.iter().enumerate() {
            if col.grid != obs || col.k != k {
                return Err(FieldError::MetadataMismatch("column grid or wavenumber".into()));
            }
            let want = TAU * li as f64 / l as f64;
            if (col.d_angle - want).abs() > 1e-12 {
                return Err(FieldError::MetadataMismatch(format!(
                    "column {} has incident angle {} (expected {})",
                    li, col.d_angle, want
                )));
            }
            for mo in 0..m {
                samples[mo * l + li] = col.samples[mo];
            }
        }
        Ok(FarFieldMatrix { k, obs, inc, samples })
    }

    pub fn at(&self, mo: usize, li: usize) -> Complex64 {
        self.samples[mo * self.inc.len() + li]
    }

    /// Column li as a standalone pattern.
    pub fn column(&self, li: usize) -> FarFieldPattern {
        let m = self.obs.len();
        let samples = (0..m).map(|mo| self.at(mo, li)).collect();
        FarFieldPattern {
            k: self.k,
            d_angle: self.inc.angle(li),
            grid: self.obs,
            samples,
        }
    }
}

#[derive(Debug)]
pub enum FieldError {
    MetadataMismatch(String),
    GridInvalid(String),
    /// The top decile of Fourier modes carries too much energy for
    /// trigonometric interpolation to be trustworthy.
    TailEnergy { fraction: f64 },
    Parse { line: usize, message: String },
    Io(std::io::Error),
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldError::MetadataMismatch(m) => write!(f, "pattern metadata mismatch: {}", m),
            FieldError::GridInvalid(m) => write!(f, "invalid grid: {}", m),
            FieldError::TailEnergy { fraction } => write!(
                f,
                "interpolation degeneracy: top decile of modes carries {:.3e} of the energy",
                fraction
            ),
            FieldError::Parse { line, message } => write!(f, "parse error at line {}: {}", line, message),
            FieldError::Io(e) => write!(f, "io error: {}", e),
        }
    }
}

impl std::error::Error for FieldError {}

impl From<std::io::Error> for FieldError {
    fn from(e: std::io::Error) -> Self {
        FieldError::Io(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pattern_of<F: Fn(f64) -> Complex64>(k: f64, d: f64, m: usize, f: F) -> FarFieldPattern {
        let grid = DirectionGrid::new(m).unwrap();
        let samples = grid.angles().map(f).collect();
        FarFieldPattern::new(k, d, grid, samples).unwrap()
    }

    #[test]
    fn grid_must_be_even_and_large_enough() {
        assert!(DirectionGrid::new(15).is_err());
        assert!(DirectionGrid::new(17).is_err());
        assert!(DirectionGrid::new(16).is_ok());
    }

    #[test]
    fn distance_to_self_is_zero() {
        let p = pattern_of(1.0, 0.3, 32, |t| Complex64::from_polar(1.0, 3.0 * t));
        assert_eq!(l2_distance(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn metadata_mismatch_rejected() {
        let p = pattern_of(1.0, 0.3, 32, |t| Complex64::from_polar(1.0, t));
        let q = pattern_of(2.0, 0.3, 32, |t| Complex64::from_polar(1.0, t));
        assert!(matches!(l2_distance(&p, &q), Err(FieldError::MetadataMismatch(_))));
    }

    #[test]
    fn global_phase_gives_exact_distance() {
        // distance(p, e^{ia} p) = |e^{ia} - 1| * ||p||
        let p = pattern_of(1.0, 0.0, 64, |t| Complex64::new(t.cos() + 0.5, t.sin()));
        let alpha = 0.9f64;
        let rot = Complex64::from_polar(1.0, alpha);
        let q = FarFieldPattern {
            samples: p.samples.iter().map(|s| s * rot).collect(),
            ..p.clone()
        };
        let want = (rot - 1.0).norm() * p.norm_l2();
        let got = l2_distance(&p, &q).unwrap();
        assert!((got - want).abs() < 1e-13 * want);
    }

    #[test]
    fn translate_by_zero_is_identity() {
        let p = pattern_of(2.0, 1.0, 32, |t| Complex64::from_polar(0.7, -2.0 * t));
        let q = translate_pattern(&p, Point::new(0.0, 0.0));
        assert_eq!(p, q);
    }

    #[test]
    fn translate_roundtrip_returns_original() {
        let p = pattern_of(2.0, 1.0, 64, |t| Complex64::from_polar(0.7, -2.0 * t));
        let z = Point::new(0.4, -1.2);
        let back = translate_pattern(&translate_pattern(&p, z), -z);
        for (a, b) in back.samples.iter().zip(&p.samples) {
            assert!((a - b).norm() <= 1e-15 * b.norm().max(1.0));
        }
    }

    #[test]
    fn translation_preserves_l2_norm() {
        let p = pattern_of(3.0, 0.2, 64, |t| Complex64::new((2.0 * t).cos(), 0.3));
        let q = translate_pattern(&p, Point::new(1.5, -0.7));
        assert!((p.norm_l2() - q.norm_l2()).abs() <= 1e-14 * p.norm_l2());
    }

    #[test]
    fn translation_is_a_group_action() {
        let p = pattern_of(1.5, 2.0, 32, |t| Complex64::from_polar(1.0, t * 4.0));
        let z1 = Point::new(0.3, 0.8);
        let z2 = Point::new(-1.0, 0.25);
        let a = translate_pattern(&translate_pattern(&p, z1), z2);
        let b = translate_pattern(&p, z1 + z2);
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert!((x - y).norm() <= 1e-14);
        }
    }

    #[test]
    fn zero_noise_is_identity_and_seeding_is_deterministic() {
        let p = pattern_of(1.0, 0.0, 32, |t| Complex64::from_polar(1.0, t));
        assert_eq!(add_noise(&p, 0.0, 7), p);
        let a = add_noise(&p, 0.05, 1234);
        let b = add_noise(&p, 0.05, 1234);
        assert_eq!(a, b);
        let c = add_noise(&p, 0.05, 1235);
        assert_ne!(a, c);
    }

    #[test]
    fn noise_norm_scales_with_level() {
        // Monte Carlo moment check: E ||noise|| ~ level * ||p||.
        let p = pattern_of(1.0, 0.0, 128, |t| Complex64::from_polar(1.0, 2.0 * t));
        let level = 0.02;
        let mut acc = 0.0;
        let draws = 200;
        for seed in 0..draws {
            let q = add_noise(&p, level, seed);
            let diff = FarFieldPattern {
                samples: q.samples.iter().zip(&p.samples).map(|(a, b)| a - b).collect(),
                ..p.clone()
            };
            acc += diff.norm_l2();
        }
        let mean = acc / draws as f64;
        let want = level * p.norm_l2();
        assert!(
            (mean - want).abs() < 0.1 * want,
            "mean noise norm {} vs expected {}",
            mean,
            want
        );
    }

    #[test]
    fn matrix_columns_roundtrip() {
        let obs = DirectionGrid::new(16).unwrap();
        let inc = DirectionGrid::new(16).unwrap();
        let cols: Vec<FarFieldPattern> = inc
            .angles()
            .map(|phi| {
                let samples = obs.angles().map(|t| Complex64::from_polar(1.0, t - phi)).collect();
                FarFieldPattern::new(2.0, phi, obs, samples).unwrap()
            })
            .collect();
        let mat = FarFieldMatrix::from_columns(2.0, obs, inc, &cols).unwrap();
        for (li, col) in cols.iter().enumerate() {
            assert_eq!(&mat.column(li), col);
        }
    }
}
