//! Dictionary-based shape identification from a single far-field
//! measurement.
//!
//! A dictionary holds base shapes with precomputed full-aperture
//! far-field matrices at a fixed wavenumber. A hypothesis (entry j,
//! rotation theta, translation z) predicts the measured pattern through
//! the rotation and translation transforms; identification minimizes the
//! relative L2 misfit over poses per entry and ranks entries.

mod store;

pub use store::{load_dictionary, save_dictionary};

use crate::farfield::{
    l2_distance, translate_pattern, DirectionGrid, FarFieldMatrix, FarFieldPattern, FieldError,
    MatrixInterpolant,
};
use crate::geometry::{GeometryError, Obstacle, ParametricCurve, Point, RigidMotion};
use crate::optim::nelder_mead;
use crate::scatter::{far_field, solve, BoundaryCondition, IncidentPlaneWave, MfsConfig, SolveError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::fmt;

/// Rigid pose (theta, z) of a dictionary shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub theta: f64,
    pub z: Point,
}

impl Pose {
    pub fn new(theta: f64, z: Point) -> Self {
        Pose { theta: theta.rem_euclid(TAU), z }
    }

    pub fn motion(&self) -> RigidMotion {
        RigidMotion::new(self.theta, self.z)
    }
}

/// A base shape with its boundary condition, before posing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DictEntry {
    pub id: String,
    #[serde(flatten)]
    pub curve: ParametricCurve,
    pub bc: BoundaryCondition,
}

impl DictEntry {
    pub fn new(id: impl Into<String>, curve: ParametricCurve, bc: BoundaryCondition) -> Self {
        DictEntry { id: id.into(), curve, bc }
    }

    fn validate(&self) -> Result<(), IdentifyError> {
        if self.id.is_empty()
            || !self.id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
        {
            return Err(IdentifyError::Config(format!(
                "entry id {:?} must be nonempty [A-Za-z0-9_.-]",
                self.id
            )));
        }
        self.curve.validate().map_err(IdentifyError::Geometry)?;
        self.bc.validate().map_err(IdentifyError::Config)?;
        Ok(())
    }
}

/// One precomputed dictionary entry: shape, matrix, interpolant, and the
/// worst boundary-residual certificate over its incident sweep.
#[derive(Debug, Clone)]
pub struct EntryData {
    pub entry: DictEntry,
    pub matrix: FarFieldMatrix,
    pub interpolant: MatrixInterpolant,
    pub max_residual: f64,
}

/// The a-priori class: base shapes with full-aperture far-field data at
/// one wavenumber, all sharing grids and solver configuration.
#[derive(Debug, Clone)]
pub struct ShapeDictionary {
    pub k: f64,
    pub obs: DirectionGrid,
    pub inc: DirectionGrid,
    pub solver: MfsConfig,
    entries: Vec<EntryData>,
}

impl ShapeDictionary {
    /// Run the forward sweeps and assemble the dictionary. Every solve
    /// must pass its boundary-residual certificate; the first failure
    /// aborts with the offending entry and incident angle.
    pub fn precompute(
        entries: Vec<DictEntry>,
        k: f64,
        obs: DirectionGrid,
        inc: DirectionGrid,
        solver: MfsConfig,
    ) -> Result<Self, IdentifyError> {
        if entries.is_empty() {
            return Err(IdentifyError::Config("dictionary needs at least one entry".into()));
        }
        for (i, e) in entries.iter().enumerate() {
            e.validate()?;
            if entries[..i].iter().any(|p| p.id == e.id) {
                return Err(IdentifyError::Config(format!("duplicate entry id {:?}", e.id)));
            }
        }

        let data: Vec<EntryData> = entries
            .into_iter()
            .map(|entry| {
                let obstacle = Obstacle::new(entry.curve.clone(), RigidMotion::identity(), entry.bc)
                    .map_err(IdentifyError::Geometry)?;
                let columns: Vec<Result<(FarFieldPattern, f64), IdentifyError>> = (0..inc.len())
                    .into_par_iter()
                    .map(|li| {
                        let wave = IncidentPlaneWave::new(k, inc.angle(li))
                            .map_err(IdentifyError::Solve)?;
                        let sol = solve(&obstacle, &wave, &solver).map_err(|e| {
                            IdentifyError::CertificateFailed {
                                id: entry.id.clone(),
                                incident_index: li,
                                source: e,
                            }
                        })?;
                        Ok((far_field(&sol, obs), sol.residual))
                    })
                    .collect();
                let mut cols = Vec::with_capacity(inc.len());
                let mut max_residual = 0.0f64;
                for c in columns {
                    let (pat, res) = c?;
                    max_residual = max_residual.max(res);
                    cols.push(pat);
                }
                let matrix = FarFieldMatrix::from_columns(k, obs, inc, &cols)
                    .map_err(IdentifyError::Field)?;
                let interpolant = MatrixInterpolant::new(&matrix).map_err(IdentifyError::Field)?;
                Ok(EntryData { entry, matrix, interpolant, max_residual })
            })
            .collect::<Result<_, IdentifyError>>()?;

        Ok(ShapeDictionary { k, obs, inc, solver, entries: data })
    }

    /// Rebuild from already-loaded matrices (persistence path).
    pub fn from_parts(
        k: f64,
        obs: DirectionGrid,
        inc: DirectionGrid,
        solver: MfsConfig,
        parts: Vec<(DictEntry, FarFieldMatrix, f64)>,
    ) -> Result<Self, IdentifyError> {
        let mut entries = Vec::with_capacity(parts.len());
        for (entry, matrix, max_residual) in parts {
            entry.validate()?;
            if matrix.k != k || matrix.obs != obs || matrix.inc != inc {
                return Err(IdentifyError::Metadata(format!(
                    "matrix of entry {:?} disagrees with dictionary grids",
                    entry.id
                )));
            }
            let interpolant = MatrixInterpolant::new(&matrix).map_err(IdentifyError::Field)?;
            entries.push(EntryData { entry, matrix, interpolant, max_residual });
        }
        if entries.is_empty() {
            return Err(IdentifyError::Config("dictionary needs at least one entry".into()));
        }
        Ok(ShapeDictionary { k, obs, inc, solver, entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[EntryData] {
        &self.entries
    }

    pub fn entry(&self, j: usize) -> &EntryData {
        &self.entries[j]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.entry.id == id)
    }

    /// Obstacle realizing entry j at a pose.
    pub fn obstacle(&self, j: usize, pose: Pose) -> Result<Obstacle, GeometryError> {
        let e = &self.entries[j];
        Obstacle::new(e.entry.curve.clone(), pose.motion(), e.entry.bc)
    }
}

/// How the identifier handles the translation degree of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum LocationMode {
    /// The location is known a priori and compensated exactly.
    Known { z: Point },
    /// Joint coarse search over a box, then refinement.
    Search {
        /// [x_min, x_max, y_min, y_max]
        #[serde(rename = "box")]
        bounds: [f64; 4],
        /// Coarse step; defaults to pi/(2k) (the phase ambiguity spacing).
        #[serde(default)]
        step: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IdentifyConfig {
    pub location: LocationMode,
    /// Coarse rotation grid size.
    pub theta_coarse: usize,
    /// Simplex refinement iteration cap.
    pub refine_iters: usize,
    /// Simplex stop tolerance on misfit change.
    pub refine_tol: f64,
    /// Top-2 misfits closer than this flag the result ambiguous.
    pub ambiguity_margin: f64,
    /// Misfit range over the theta grid below this flags theta_flat.
    pub flatness_tol: f64,
    /// Best misfit above this is a model-class violation.
    pub not_in_dict_threshold: f64,
}

impl Default for IdentifyConfig {
    fn default() -> Self {
        IdentifyConfig {
            location: LocationMode::Known { z: Point::new(0.0, 0.0) },
            theta_coarse: 64,
            refine_iters: 200,
            refine_tol: 1e-10,
            ambiguity_margin: 1e-3,
            flatness_tol: 1e-8,
            not_in_dict_threshold: 0.1,
        }
    }
}

impl IdentifyConfig {
    fn validate(&self) -> Result<(), IdentifyError> {
        if self.theta_coarse < 4 {
            return Err(IdentifyError::Config("theta_coarse must be at least 4".into()));
        }
        if !(self.refine_tol > 0.0) || !(self.ambiguity_margin > 0.0) || !(self.flatness_tol > 0.0) {
            return Err(IdentifyError::Config("tolerances must be positive".into()));
        }
        if !(self.not_in_dict_threshold > 0.0) {
            return Err(IdentifyError::Config("not_in_dict_threshold must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCandidate {
    pub id: String,
    pub misfit: f64,
    #[serde(flatten)]
    pub pose: Pose,
    pub theta_flat: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentifyFlags {
    pub theta_flat: bool,
    pub ambiguous: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentificationResult {
    pub best_id: String,
    #[serde(flatten)]
    pub pose: Pose,
    pub misfit: f64,
    pub ranking: Vec<RankedCandidate>,
    pub flags: IdentifyFlags,
}

/// Relative L2 misfit of hypothesis (entry j, pose) against a measured
/// pattern: the prediction rotates the entry's matrix and applies the
/// exact translation factor.
pub fn misfit(
    measured: &FarFieldPattern,
    dict: &ShapeDictionary,
    j: usize,
    pose: Pose,
) -> Result<f64, IdentifyError> {
    check_measurement(measured, dict)?;
    let predicted = predict(dict, j, pose, measured.d_angle);
    let dist = l2_distance(measured, &predicted).map_err(IdentifyError::Field)?;
    Ok(dist / measured.norm_l2())
}

fn check_measurement(measured: &FarFieldPattern, dict: &ShapeDictionary) -> Result<(), IdentifyError> {
    if measured.k != dict.k {
        return Err(IdentifyError::Metadata(format!(
            "measured k = {} but dictionary k = {}",
            measured.k, dict.k
        )));
    }
    if measured.grid != dict.obs {
        return Err(IdentifyError::Metadata(format!(
            "measured grid M = {} but dictionary observes M = {}",
            measured.grid.len(),
            dict.obs.len()
        )));
    }
    if measured.norm_l2() == 0.0 {
        return Err(IdentifyError::Metadata("measured pattern is identically zero".into()));
    }
    Ok(())
}

fn predict(dict: &ShapeDictionary, j: usize, pose: Pose, d_angle: f64) -> FarFieldPattern {
    let rotated = dict.entries[j].interpolant.predict_rotated(pose.theta, d_angle);
    if pose.z.x == 0.0 && pose.z.y == 0.0 {
        rotated
    } else {
        translate_pattern(&rotated, pose.z)
    }
}

/// Identify the dictionary entry and pose behind a single measurement.
pub fn identify(
    measured: &FarFieldPattern,
    dict: &ShapeDictionary,
    cfg: &IdentifyConfig,
) -> Result<IdentificationResult, IdentifyError> {
    cfg.validate()?;
    check_measurement(measured, dict)?;
    let norm = measured.norm_l2();
    let d_angle = measured.d_angle;

    // Candidate z grid: a single known point, or a coarse box sweep.
    let z_candidates: Vec<Point> = match cfg.location {
        LocationMode::Known { z } => vec![z],
        LocationMode::Search { bounds, step } => {
            let [x0, x1, y0, y1] = bounds;
            if !(x1 >= x0 && y1 >= y0) {
                return Err(IdentifyError::Config("search box is empty".into()));
            }
            let h = step.unwrap_or(TAU / (4.0 * dict.k));
            if !(h > 0.0) {
                return Err(IdentifyError::Config("search step must be positive".into()));
            }
            let nx = ((x1 - x0) / h).floor() as usize + 1;
            let ny = ((y1 - y0) / h).floor() as usize + 1;
            let mut zs = Vec::with_capacity(nx * ny);
            for iy in 0..ny {
                for ix in 0..nx {
                    zs.push(Point::new(x0 + ix as f64 * h, y0 + iy as f64 * h));
                }
            }
            zs
        }
    };
    let theta_step = TAU / cfg.theta_coarse as f64;
    let search_z = matches!(cfg.location, LocationMode::Search { .. });

    let per_entry: Vec<RankedCandidate> = (0..dict.len())
        .into_par_iter()
        .map(|j| {
            let eval = |theta: f64, z: Point| -> f64 {
                let p = predict(dict, j, Pose { theta, z }, d_angle);
                match l2_distance(measured, &p) {
                    Ok(d) => d / norm,
                    Err(_) => f64::INFINITY,
                }
            };

            // Coarse sweep.
            let mut coarse: Vec<(f64, f64, Point)> = Vec::new(); // (misfit, theta, z)
            let mut best_z = z_candidates[0];
            let mut best_at_z = f64::INFINITY;
            for &z in &z_candidates {
                let mut local_best = f64::INFINITY;
                for i in 0..cfg.theta_coarse {
                    let theta = i as f64 * theta_step;
                    let m = eval(theta, z);
                    coarse.push((m, theta, z));
                    if m < local_best {
                        local_best = m;
                    }
                }
                if local_best < best_at_z {
                    best_at_z = local_best;
                    best_z = z;
                }
            }

            // Flatness over the theta grid at the best coarse z.
            let at_best_z: Vec<f64> = coarse
                .iter()
                .filter(|(_, _, z)| z.x == best_z.x && z.y == best_z.y)
                .map(|(m, _, _)| *m)
                .collect();
            let (lo, hi) = at_best_z
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            let theta_flat = hi - lo < cfg.flatness_tol;

            // Simplex refinement from the best 3 coarse points.
            coarse.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut best = (coarse[0].0, Pose::new(coarse[0].1, coarse[0].2));
            for &(m0, theta0, z0) in coarse.iter().take(3) {
                let refined = if search_z {
                    let out = nelder_mead(
                        |x| eval(x[0], Point::new(x[1], x[2])),
                        &[theta0, z0.x, z0.y],
                        &[0.5 * theta_step, 0.25, 0.25],
                        cfg.refine_iters,
                        cfg.refine_tol,
                    );
                    (out.value, Pose::new(out.x[0], Point::new(out.x[1], out.x[2])))
                } else {
                    let out = nelder_mead(
                        |x| eval(x[0], z0),
                        &[theta0],
                        &[0.5 * theta_step],
                        cfg.refine_iters,
                        cfg.refine_tol,
                    );
                    (out.value, Pose::new(out.x[0], z0))
                };
                // refinement never worsens its start point
                let refined = if refined.0 <= m0 { refined } else { (m0, Pose::new(theta0, z0)) };
                if refined.0 < best.0 {
                    best = refined;
                }
            }

            RankedCandidate {
                id: dict.entries[j].entry.id.clone(),
                misfit: best.0,
                pose: best.1,
                theta_flat,
            }
        })
        .collect();

    // Rank ascending by misfit; ties break toward the lower entry index
    // (the sort is stable over the entry order).
    let mut ranking = per_entry;
    ranking.sort_by(|a, b| a.misfit.total_cmp(&b.misfit));

    let best = ranking[0].clone();
    let ambiguous = ranking.len() >= 2 && ranking[1].misfit - ranking[0].misfit < cfg.ambiguity_margin;
    let result = IdentificationResult {
        best_id: best.id,
        pose: best.pose,
        misfit: best.misfit,
        flags: IdentifyFlags { theta_flat: best.theta_flat, ambiguous },
        ranking,
    };
    if result.misfit > cfg.not_in_dict_threshold {
        return Err(IdentifyError::NotInDictionary { result: Box::new(result) });
    }
    Ok(result)
}

/// Boundary-condition classification: identical machinery, applied to a
/// dictionary whose entries differ only in their boundary condition.
pub fn classify_bc(
    measured: &FarFieldPattern,
    hypotheses: &ShapeDictionary,
    cfg: &IdentifyConfig,
) -> Result<IdentificationResult, IdentifyError> {
    identify(measured, hypotheses, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityReport {
    pub pass: bool,
    pub floor: f64,
    pub trials: usize,
    pub min_distance: f64,
    /// Offending (or extremal) pair and draw.
    pub min_pair: Option<[String; 2]>,
    pub min_d_angle: f64,
    pub min_theta: f64,
}

/// Empirical check of the pairwise-distinctness assumption: over random
/// (d, theta) draws, all pairs of entries must keep a relative L2
/// distance above the floor. A single-entry dictionary passes vacuously.
pub fn separability_check(
    dict: &ShapeDictionary,
    trials: usize,
    seed: u64,
    floor: f64,
) -> Result<SeparabilityReport, IdentifyError> {
    if trials == 0 {
        return Err(IdentifyError::Config("separability needs at least one trial".into()));
    }
    let n = dict.len();
    if n < 2 {
        return Ok(SeparabilityReport {
            pass: true,
            floor,
            trials,
            min_distance: f64::INFINITY,
            min_pair: None,
            min_d_angle: 0.0,
            min_theta: 0.0,
        });
    }
    let mut min_distance = f64::INFINITY;
    let mut min_pair = None;
    let mut min_d_angle = 0.0;
    let mut min_theta = 0.0;
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (t as u64).wrapping_mul(0x9E3779B97F4A7C15));
        let d_angle = rng.random::<f64>() * TAU;
        let theta = rng.random::<f64>() * TAU;
        let patterns: Vec<FarFieldPattern> = (0..n)
            .map(|j| dict.entries[j].interpolant.predict_rotated(theta, d_angle))
            .collect();
        for i in 0..n {
            for j in i + 1..n {
                let dist = l2_distance(&patterns[i], &patterns[j]).map_err(IdentifyError::Field)?;
                let scale = patterns[i].norm_l2().max(patterns[j].norm_l2());
                let rel = if scale > 0.0 { dist / scale } else { 0.0 };
                if rel < min_distance {
                    min_distance = rel;
                    min_pair = Some([
                        dict.entries[i].entry.id.clone(),
                        dict.entries[j].entry.id.clone(),
                    ]);
                    min_d_angle = d_angle;
                    min_theta = theta;
                }
            }
        }
    }
    Ok(SeparabilityReport {
        pass: min_distance > floor,
        floor,
        trials,
        min_distance,
        min_pair,
        min_d_angle,
        min_theta,
    })
}

#[derive(Debug)]
pub enum IdentifyError {
    Config(String),
    Metadata(String),
    Geometry(GeometryError),
    Solve(SolveError),
    Field(FieldError),
    /// A dictionary solve failed its residual certificate.
    CertificateFailed { id: String, incident_index: usize, source: SolveError },
    /// Best misfit exceeds the model-class threshold; the ranking is
    /// carried for diagnostics.
    NotInDictionary { result: Box<IdentificationResult> },
}

impl fmt::Display for IdentifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdentifyError::Config(m) => write!(f, "invalid configuration: {}", m),
            IdentifyError::Metadata(m) => write!(f, "metadata mismatch: {}", m),
            IdentifyError::Geometry(e) => write!(f, "geometry: {}", e),
            IdentifyError::Solve(e) => write!(f, "forward solve: {}", e),
            IdentifyError::Field(e) => write!(f, "far field: {}", e),
            IdentifyError::CertificateFailed { id, incident_index, source } => write!(
                f,
                "certificate failed for entry {:?} at incident index {}: {}",
                id, incident_index, source
            ),
            IdentifyError::NotInDictionary { result } => write!(
                f,
                "best misfit {:.3e} ({}) exceeds the dictionary threshold",
                result.misfit, result.best_id
            ),
        }
    }
}

impl std::error::Error for IdentifyError {}
