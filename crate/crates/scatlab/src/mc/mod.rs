//! Seeded Monte Carlo experiments: distinguishability of obstacle pairs
//! under random incident waves, wavenumber scans with eigen-wavenumber
//! annotations, stability profiles, and identification success rates.
//!
//! Every trial draws from its own RNG stream derived from (seed, trial
//! index), so results are bit-identical across runs and worker counts.

mod report;

pub use report::{write_kscan_csv, write_trials_csv};

use crate::farfield::{add_noise, l2_distance, DirectionGrid, FieldError};
use crate::geometry::{diameter, hausdorff_distance, Obstacle, ParametricCurve, DEFAULT_CLOUD};
use crate::identify::{identify, IdentifyConfig, IdentifyError, LocationMode, Pose, ShapeDictionary};
use crate::scatter::{far_field, solve, BoundaryCondition, IncidentPlaneWave, MfsConfig, SolveError};
use crate::specfun::{bessel_dj_zero, bessel_j_zero, BesselOrder, SpecFunError};
use crate::geometry::Point;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::fmt;

/// Per-trial RNG stream: scheduling cannot perturb the draws.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut z = seed ^ index.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(0xD1B54A32D192ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    ChaCha8Rng::seed_from_u64(z ^ (z >> 31))
}

/// Draw an incident wave with k uniform on (k_min, k_max) and direction
/// angle uniform on [0, 2 pi).
pub fn sample_incident(k_min: f64, k_max: f64, rng: &mut impl Rng) -> Result<IncidentPlaneWave, McError> {
    if !(k_min > 0.0 && k_max > k_min) {
        return Err(McError::Config(format!("need 0 < k_min < k_max, got ({}, {})", k_min, k_max)));
    }
    let k = k_min + (k_max - k_min) * rng.random::<f64>();
    let d_angle = TAU * rng.random::<f64>();
    IncidentPlaneWave::new(k, d_angle).map_err(McError::Solve)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub k_min: f64,
    pub k_max: f64,
    pub trials: usize,
    pub seed: u64,
    /// Distance thresholds for the empirical CDF, positive ascending.
    pub epsilons: Vec<f64>,
    pub grid_m: usize,
    pub mfs: MfsConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            k_min: 0.5,
            k_max: 3.0,
            trials: 100,
            seed: 0,
            epsilons: vec![1e-4, 1e-3, 1e-2, 1e-1],
            grid_m: 128,
            mfs: MfsConfig::default(),
        }
    }
}

impl ExperimentConfig {
    fn validate(&self) -> Result<DirectionGrid, McError> {
        if !(self.k_min > 0.0 && self.k_max > self.k_min) {
            return Err(McError::Config(format!(
                "need 0 < k_min < k_max, got ({}, {})",
                self.k_min, self.k_max
            )));
        }
        if self.trials == 0 {
            return Err(McError::Config("need at least one trial".into()));
        }
        let mut prev = 0.0;
        for &e in &self.epsilons {
            if !(e > prev) {
                return Err(McError::Config("epsilons must be positive ascending".into()));
            }
            prev = e;
        }
        DirectionGrid::new(self.grid_m).map_err(McError::Field)
    }
}

/// One distinguishability trial: the wave drawn and the relative far
/// field L2 gap it produced. Wall time stays out of the serialized
/// record and out of equality, so reports compare reproducibly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: usize,
    pub k: f64,
    pub d_angle: f64,
    /// Relative L2 distance, normalized by the larger pattern norm.
    pub delta: f64,
    pub excluded: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip)]
    pub seconds: f64,
}

impl PartialEq for TrialRecord {
    fn eq(&self, other: &Self) -> bool {
        let delta_eq = self.delta == other.delta || (self.delta.is_nan() && other.delta.is_nan());
        self.index == other.index
            && self.k == other.k
            && self.d_angle == other.d_angle
            && delta_eq
            && self.excluded == other.excluded
            && self.note == other.note
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryBlock {
    pub hausdorff: f64,
    pub diam_a: f64,
    pub diam_b: f64,
    /// d_H <= diam(A) + diam(B) on the sampled approximations.
    pub bound_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenAnnotation {
    /// Which obstacle of the pair is the disk ("A" or "B").
    pub obstacle: String,
    /// "dirichlet" or "neumann" eigen-wavenumber family.
    pub kind: String,
    pub order: u32,
    pub index: u32,
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub records: Vec<TrialRecord>,
    /// Empirical P(delta < eps) over included trials, per epsilon.
    pub cdf: Vec<(f64, f64)>,
    pub min_delta: f64,
    pub min_delta_k: f64,
    pub min_delta_d_angle: f64,
    pub excluded: usize,
    pub geometry: GeometryBlock,
    pub annotations: Vec<EigenAnnotation>,
}

fn geometry_block(a: &Obstacle, b: &Obstacle) -> GeometryBlock {
    let (ca, cb) = (a.curve(), b.curve());
    let hausdorff = hausdorff_distance(&ca, &cb, DEFAULT_CLOUD);
    let diam_a = diameter(&ca, DEFAULT_CLOUD);
    let diam_b = diameter(&cb, DEFAULT_CLOUD);
    GeometryBlock { hausdorff, diam_a, diam_b, bound_holds: hausdorff <= diam_a + diam_b }
}

/// Disk eigen-wavenumbers j_{n,m}/a (sound-soft) or j'_{n,m}/a
/// (sound-hard) inside (k_min, k_max), for any disk obstacle of a pair.
fn disk_annotations(
    obstacles: &[(&str, &Obstacle)],
    k_min: f64,
    k_max: f64,
) -> Result<Vec<EigenAnnotation>, SpecFunError> {
    let mut out = Vec::new();
    for (label, obs) in obstacles {
        let radius = match obs.base {
            ParametricCurve::Circle { a } => a,
            _ => continue,
        };
        let (kind, zero_fn): (&str, fn(BesselOrder, u32) -> Result<f64, SpecFunError>) =
            match obs.bc {
                BoundaryCondition::Dirichlet => ("dirichlet", bessel_j_zero),
                BoundaryCondition::Neumann => ("neumann", bessel_dj_zero),
                BoundaryCondition::Impedance { .. } => continue,
            };
        let mut order = 0i32;
        loop {
            let n = BesselOrder::new(order)?;
            let mut index = 1u32;
            let mut any = false;
            loop {
                match zero_fn(n, index) {
                    Ok(zero) => {
                        let k = zero / radius;
                        if k > k_max {
                            break;
                        }
                        any = any || k > k_min;
                        if k > k_min {
                            out.push(EigenAnnotation {
                                obstacle: label.to_string(),
                                kind: kind.into(),
                                order: order as u32,
                                index,
                                k,
                            });
                        } else {
                            any = true;
                        }
                        index += 1;
                    }
                    Err(SpecFunError::ZeroBeyondWindow { .. }) => break,
                    Err(e) => return Err(e),
                }
            }
            // first zero of this order already above the range: done
            if !any && order > 0 {
                break;
            }
            if zero_fn(BesselOrder::new(order)?, 1)
                .map(|z| z / radius > k_max)
                .unwrap_or(true)
                && order > 0
            {
                break;
            }
            order += 1;
            if order > crate::specfun::MAX_ORDER {
                break;
            }
        }
    }
    out.sort_by(|a, b| a.k.total_cmp(&b.k));
    Ok(out)
}

fn run_trial(
    obs_a: &Obstacle,
    obs_b: &Obstacle,
    wave: &IncidentPlaneWave,
    grid: DirectionGrid,
    mfs: &MfsConfig,
) -> Result<f64, SolveError> {
    let pa = far_field(&solve(obs_a, wave, mfs)?, grid);
    let pb = far_field(&solve(obs_b, wave, mfs)?, grid);
    let dist = l2_distance(&pa, &pb).map_err(SolveError::Field)?;
    let scale = pa.norm_l2().max(pb.norm_l2());
    Ok(if scale > 0.0 { dist / scale } else { 0.0 })
}

/// Distinguishability experiment: N random (k, d) draws, two forward
/// solves each, relative far-field gap per trial. Solver failures are
/// recorded and excluded, never dropped.
pub fn distinguish_experiment(
    obs_a: &Obstacle,
    obs_b: &Obstacle,
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport, McError> {
    let grid = cfg.validate()?;
    let records: Vec<TrialRecord> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let started = std::time::Instant::now();
            let mut rng = trial_rng(cfg.seed, i as u64);
            let wave = match sample_incident(cfg.k_min, cfg.k_max, &mut rng) {
                Ok(w) => w,
                Err(e) => {
                    return TrialRecord {
                        index: i,
                        k: f64::NAN,
                        d_angle: f64::NAN,
                        delta: f64::NAN,
                        excluded: true,
                        note: Some(format!("sampling: {}", e)),
                        seconds: started.elapsed().as_secs_f64(),
                    }
                }
            };
            match run_trial(obs_a, obs_b, &wave, grid, &cfg.mfs) {
                Ok(delta) => TrialRecord {
                    index: i,
                    k: wave.k,
                    d_angle: wave.d_angle,
                    delta,
                    excluded: false,
                    note: None,
                    seconds: started.elapsed().as_secs_f64(),
                },
                Err(e) => TrialRecord {
                    index: i,
                    k: wave.k,
                    d_angle: wave.d_angle,
                    delta: f64::NAN,
                    excluded: true,
                    note: Some(e.to_string()),
                    seconds: started.elapsed().as_secs_f64(),
                },
            }
        })
        .collect();

    let included: Vec<&TrialRecord> = records.iter().filter(|r| !r.excluded).collect();
    let excluded = records.len() - included.len();
    let cdf = cfg
        .epsilons
        .iter()
        .map(|&eps| {
            let count = included.iter().filter(|r| r.delta < eps).count();
            (eps, if included.is_empty() { 0.0 } else { count as f64 / included.len() as f64 })
        })
        .collect();
    let (mut min_delta, mut min_k, mut min_d) = (f64::INFINITY, f64::NAN, f64::NAN);
    for r in &included {
        if r.delta < min_delta {
            min_delta = r.delta;
            min_k = r.k;
            min_d = r.d_angle;
        }
    }
    let annotations = disk_annotations(&[("A", obs_a), ("B", obs_b)], cfg.k_min, cfg.k_max)
        .map_err(McError::SpecFun)?;
    Ok(ExperimentReport {
        config: cfg.clone(),
        records,
        cdf,
        min_delta,
        min_delta_k: min_k,
        min_delta_d_angle: min_d,
        excluded,
        geometry: geometry_block(obs_a, obs_b),
        annotations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KScanPoint {
    pub k: f64,
    pub delta: f64,
    pub excluded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KScanReport {
    pub d_angle: f64,
    pub points: Vec<KScanPoint>,
    pub min_delta: f64,
    pub excluded: usize,
    pub geometry: GeometryBlock,
    pub annotations: Vec<EigenAnnotation>,
}

/// Sweep delta(k) on a uniform grid at fixed incident direction. The
/// bad-wavenumber set flagged by theory is discrete; annotations mark
/// disk eigen-wavenumbers falling inside the scanned range.
pub fn k_scan(
    obs_a: &Obstacle,
    obs_b: &Obstacle,
    d_angle: f64,
    k_min: f64,
    k_max: f64,
    points: usize,
    grid_m: usize,
    mfs: &MfsConfig,
) -> Result<KScanReport, McError> {
    if !(k_min > 0.0 && k_max > k_min) {
        return Err(McError::Config(format!("need 0 < k_min < k_max, got ({}, {})", k_min, k_max)));
    }
    if points < 2 {
        return Err(McError::Config("k scan needs at least 2 points".into()));
    }
    let grid = DirectionGrid::new(grid_m).map_err(McError::Field)?;
    let scan: Vec<KScanPoint> = (0..points)
        .into_par_iter()
        .map(|i| {
            let k = k_min + (k_max - k_min) * i as f64 / (points - 1) as f64;
            match IncidentPlaneWave::new(k, d_angle)
                .and_then(|wave| run_trial(obs_a, obs_b, &wave, grid, mfs))
            {
                Ok(delta) => KScanPoint { k, delta, excluded: false },
                Err(_) => KScanPoint { k, delta: f64::NAN, excluded: true },
            }
        })
        .collect();
    let excluded = scan.iter().filter(|p| p.excluded).count();
    let min_delta =
        scan.iter().filter(|p| !p.excluded).map(|p| p.delta).fold(f64::INFINITY, f64::min);
    let annotations =
        disk_annotations(&[("A", obs_a), ("B", obs_b)], k_min, k_max).map_err(McError::SpecFun)?;
    Ok(KScanReport {
        d_angle,
        points: scan,
        min_delta,
        excluded,
        geometry: geometry_block(obs_a, obs_b),
        annotations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityProfile {
    /// (epsilon, empirical P(delta < epsilon)) rows, ascending in epsilon.
    pub rows: Vec<(f64, f64)>,
    /// Smallest listed epsilon with empirical probability zero.
    pub smallest_zero_epsilon: Option<f64>,
}

/// Stability profile from existing trial records.
pub fn stability_profile(report: &ExperimentReport, epsilons: &[f64]) -> StabilityProfile {
    let included: Vec<f64> =
        report.records.iter().filter(|r| !r.excluded).map(|r| r.delta).collect();
    let rows: Vec<(f64, f64)> = epsilons
        .iter()
        .map(|&eps| {
            let c = included.iter().filter(|&&d| d < eps).count();
            (eps, if included.is_empty() { 0.0 } else { c as f64 / included.len() as f64 })
        })
        .collect();
    let smallest_zero_epsilon = rows.iter().find(|(_, p)| *p == 0.0).map(|(e, _)| *e);
    StabilityProfile { rows, smallest_zero_epsilon }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IdSuccessConfig {
    pub trials: usize,
    pub seed: u64,
    /// Relative noise level applied to each synthetic measurement.
    pub noise_level: f64,
    /// Draw one extra incident direction when a trial comes back
    /// ambiguous, mirroring a restart with one more measurement.
    pub retry_on_ambiguous: bool,
    /// Translation sampling box [x_min, x_max, y_min, y_max].
    pub pose_box: [f64; 4],
    /// Identification parameters (the location mode is overridden per
    /// trial with the true location).
    pub identify: IdentifyConfig,
}

impl Default for IdSuccessConfig {
    fn default() -> Self {
        IdSuccessConfig {
            trials: 100,
            seed: 0,
            noise_level: 0.0,
            retry_on_ambiguous: false,
            pose_box: [-1.0, 1.0, -1.0, 1.0],
            identify: IdentifyConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdFailure {
    pub index: usize,
    pub true_id: String,
    pub got_id: Option<String>,
    pub k: f64,
    pub d_angle: f64,
    #[serde(flatten)]
    pub pose: Pose,
    pub misfit: Option<f64>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdSuccessReport {
    pub config: IdSuccessConfig,
    pub trials: usize,
    pub successes: usize,
    pub rate: f64,
    /// Wilson 95% confidence interval for the success probability.
    pub ci95: (f64, f64),
    pub ambiguous: usize,
    pub retried: usize,
    pub not_in_dictionary: usize,
    pub solver_failures: usize,
    pub failures: Vec<IdFailure>,
}

fn wilson95(successes: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054f64;
    let nf = n as f64;
    let p = successes as f64 / nf;
    let denom = 1.0 + z * z / nf;
    let center = (p + z * z / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z * z / (4.0 * nf * nf)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Identification success under random single measurements: random
/// entry, random pose, random incident direction (k is the dictionary's),
/// optional noise. Success means the correct entry id.
pub fn identification_success_rate(
    dict: &ShapeDictionary,
    cfg: &IdSuccessConfig,
) -> Result<IdSuccessReport, McError> {
    if cfg.trials == 0 {
        return Err(McError::Config("need at least one trial".into()));
    }
    let [x0, x1, y0, y1] = cfg.pose_box;
    if !(x1 >= x0 && y1 >= y0) {
        return Err(McError::Config("pose box is empty".into()));
    }

    struct Outcome {
        success: bool,
        ambiguous: bool,
        retried: bool,
        not_in_dict: bool,
        solver_failure: bool,
        failure: Option<IdFailure>,
    }

    let one_attempt = |true_idx: usize,
                       pose: Pose,
                       d_angle: f64,
                       noise_seed: u64|
     -> Result<IdentificationResultLite, McError> {
        let obstacle = dict.obstacle(true_idx, pose).map_err(McError::Geometry)?;
        let wave = IncidentPlaneWave::new(dict.k, d_angle).map_err(McError::Solve)?;
        let sol = solve(&obstacle, &wave, &dict.solver).map_err(McError::Solve)?;
        let mut measured = far_field(&sol, dict.obs);
        if cfg.noise_level > 0.0 {
            measured = add_noise(&measured, cfg.noise_level, noise_seed);
        }
        let mut icfg = cfg.identify;
        icfg.location = LocationMode::Known { z: pose.z };
        match identify(&measured, dict, &icfg) {
            Ok(r) => Ok(IdentificationResultLite {
                best_id: r.best_id,
                misfit: r.misfit,
                ambiguous: r.flags.ambiguous,
                not_in_dict: false,
            }),
            Err(IdentifyError::NotInDictionary { result }) => Ok(IdentificationResultLite {
                best_id: result.best_id.clone(),
                misfit: result.misfit,
                ambiguous: result.flags.ambiguous,
                not_in_dict: true,
            }),
            Err(e) => Err(McError::Identify(Box::new(e))),
        }
    };

    struct IdentificationResultLite {
        best_id: String,
        misfit: f64,
        ambiguous: bool,
        not_in_dict: bool,
    }

    let outcomes: Vec<Outcome> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(cfg.seed, i as u64);
            let true_idx = (rng.random::<f64>() * dict.len() as f64) as usize % dict.len();
            let theta = TAU * rng.random::<f64>();
            let z = Point::new(
                x0 + (x1 - x0) * rng.random::<f64>(),
                y0 + (y1 - y0) * rng.random::<f64>(),
            );
            let pose = Pose::new(theta, z);
            let d_angle = TAU * rng.random::<f64>();
            let noise_seed = rng.random::<u64>();
            let true_id = dict.entry(true_idx).entry.id.clone();

            let mut attempt = match one_attempt(true_idx, pose, d_angle, noise_seed) {
                Ok(a) => a,
                Err(e) => {
                    return Outcome {
                        success: false,
                        ambiguous: false,
                        retried: false,
                        not_in_dict: false,
                        solver_failure: true,
                        failure: Some(IdFailure {
                            index: i,
                            true_id,
                            got_id: None,
                            k: dict.k,
                            d_angle,
                            pose,
                            misfit: None,
                            note: e.to_string(),
                        }),
                    }
                }
            };
            let mut retried = false;
            if (attempt.ambiguous || attempt.not_in_dict) && cfg.retry_on_ambiguous {
                retried = true;
                let d2 = TAU * rng.random::<f64>();
                let noise2 = rng.random::<u64>();
                if let Ok(second) = one_attempt(true_idx, pose, d2, noise2) {
                    attempt = second;
                }
            }
            let success = !attempt.not_in_dict && attempt.best_id == true_id;
            let failure = if success {
                None
            } else {
                Some(IdFailure {
                    index: i,
                    true_id,
                    got_id: Some(attempt.best_id.clone()),
                    k: dict.k,
                    d_angle,
                    pose,
                    misfit: Some(attempt.misfit),
                    note: if attempt.not_in_dict {
                        "not in dictionary".into()
                    } else {
                        "wrong entry".into()
                    },
                })
            };
            Outcome {
                success,
                ambiguous: attempt.ambiguous,
                retried,
                not_in_dict: attempt.not_in_dict,
                solver_failure: false,
                failure,
            }
        })
        .collect();

    let successes = outcomes.iter().filter(|o| o.success).count();
    let report = IdSuccessReport {
        config: cfg.clone(),
        trials: cfg.trials,
        successes,
        rate: successes as f64 / cfg.trials as f64,
        ci95: wilson95(successes, cfg.trials),
        ambiguous: outcomes.iter().filter(|o| o.ambiguous).count(),
        retried: outcomes.iter().filter(|o| o.retried).count(),
        not_in_dictionary: outcomes.iter().filter(|o| o.not_in_dict).count(),
        solver_failures: outcomes.iter().filter(|o| o.solver_failure).count(),
        failures: outcomes.into_iter().filter_map(|o| o.failure).collect(),
    };
    Ok(report)
}

#[derive(Debug)]
pub enum McError {
    Config(String),
    Solve(SolveError),
    Geometry(crate::geometry::GeometryError),
    SpecFun(SpecFunError),
    Field(FieldError),
    Identify(Box<IdentifyError>),
}

impl fmt::Display for McError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            McError::Config(m) => write!(f, "invalid experiment configuration: {}", m),
            McError::Solve(e) => write!(f, "forward solve: {}", e),
            McError::Geometry(e) => write!(f, "geometry: {}", e),
            McError::SpecFun(e) => write!(f, "special function: {}", e),
            McError::Field(e) => write!(f, "far field: {}", e),
            McError::Identify(e) => write!(f, "identification: {}", e),
        }
    }
}

impl std::error::Error for McError {}
