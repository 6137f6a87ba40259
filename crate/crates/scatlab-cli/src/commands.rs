//! Command implementations: config resolution, runs, file emission.

use crate::manifest::{load_config_value, RunManifest};
use crate::{
    CommonArgs, ForwardArgs, IdSuccessArgs, IdentifyArgs, KScanArgs, McDistinguishArgs,
    OracleDiskArgs, PrecomputeDictArgs, SeparabilityArgs, VerifyArgs,
};
use num_complex::Complex64;
use scatlab::farfield::{
    l2_distance, read_pattern, rotate_predict, translate_pattern, write_pattern, DirectionGrid,
    FarFieldMatrix, FarFieldPattern,
};
use scatlab::geometry::{catalog, Obstacle, Point, RigidMotion, ShapeSpec};
use scatlab::identify::{
    identify, load_dictionary, save_dictionary, separability_check, DictEntry, IdentifyConfig,
    IdentifyError, LocationMode, ShapeDictionary,
};
use scatlab::mc::{
    distinguish_experiment, identification_success_rate, k_scan, stability_profile,
    write_kscan_csv, write_trials_csv, ExperimentConfig, IdSuccessConfig,
};
use scatlab::scatter::{
    disk_far_field_series, far_field, solve, BoundaryCondition, IncidentPlaneWave, MfsConfig,
    SolveError,
};
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub struct CmdError {
    pub code: u8,
    pub message: String,
}

fn config_err(message: impl Into<String>) -> CmdError {
    CmdError { code: 2, message: message.into() }
}

fn solver_err(e: SolveError) -> CmdError {
    CmdError { code: 3, message: format!("solver failure: {}", e) }
}

fn io_err(context: &str, e: std::io::Error) -> CmdError {
    CmdError { code: 2, message: format!("{}: {}", context, e) }
}

/// Defaults, overlaid by the optional --config document.
fn load_base<T: DeserializeOwned + Default>(common: &CommonArgs) -> Result<T, CmdError> {
    match &common.config {
        None => Ok(T::default()),
        Some(path) => {
            let value = load_config_value(path).map_err(config_err)?;
            serde_json::from_value(value)
                .map_err(|e| config_err(format!("config {}: {}", path.display(), e)))
        }
    }
}

fn prepare_out(common: &CommonArgs) -> Result<PathBuf, CmdError> {
    fs::create_dir_all(&common.out)
        .map_err(|e| io_err(&format!("creating {}", common.out.display()), e))?;
    Ok(common.out.clone())
}

fn write_output(
    man: &mut RunManifest,
    dir: &Path,
    name: &str,
    bytes: &[u8],
) -> Result<(), CmdError> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| io_err(&format!("writing {}", path.display()), e))?;
    man.record_output(name, &path).map_err(|e| io_err("digesting output", e))?;
    Ok(())
}

fn finish(mut man: RunManifest, dir: &Path, started: Instant) -> Result<(), CmdError> {
    man.wall_time_s = started.elapsed().as_secs_f64();
    man.write(dir).map_err(|e| io_err("writing manifest", e))
}

fn parse_pair(text: &str, what: &str) -> Result<(f64, f64), CmdError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(config_err(format!("{} must be \"x,y\", got {:?}", what, text)));
    }
    let x = parts[0].trim().parse::<f64>().map_err(|e| config_err(format!("{}: {}", what, e)))?;
    let y = parts[1].trim().parse::<f64>().map_err(|e| config_err(format!("{}: {}", what, e)))?;
    Ok((x, y))
}

fn parse_quad(text: &str, what: &str) -> Result<[f64; 4], CmdError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 4 {
        return Err(config_err(format!("{} must be \"x0,x1,y0,y1\", got {:?}", what, text)));
    }
    let mut out = [0.0; 4];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p.trim().parse::<f64>().map_err(|e| config_err(format!("{}: {}", what, e)))?;
    }
    Ok(out)
}

fn load_shape_file(path: &Path) -> Result<ShapeSpec, CmdError> {
    let text =
        fs::read_to_string(path).map_err(|e| io_err(&format!("reading {}", path.display()), e))?;
    serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {}", path.display(), e)))
}

fn grid(m: usize) -> Result<DirectionGrid, CmdError> {
    DirectionGrid::new(m).map_err(|e| config_err(e.to_string()))
}

fn rel_l2(a: &FarFieldPattern, b: &FarFieldPattern) -> Result<f64, CmdError> {
    let d = l2_distance(a, b).map_err(|e| config_err(e.to_string()))?;
    Ok(d / a.norm_l2().max(1e-300))
}

fn record_dict_inputs(man: &mut RunManifest, dir: &Path) -> Result<(), CmdError> {
    let entries =
        fs::read_dir(dir).map_err(|e| io_err(&format!("reading {}", dir.display()), e))?;
    let mut names: Vec<PathBuf> = entries.filter_map(|e| e.ok().map(|e| e.path())).collect();
    names.sort();
    for path in names {
        if path.is_file() {
            let label = format!("dict/{}", path.file_name().unwrap().to_string_lossy());
            man.record_input(&label, &path).map_err(|e| io_err("digesting dictionary", e))?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- forward

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default)]
struct ForwardConfig {
    shape: Option<ShapeSpec>,
    k: Option<f64>,
    d_angle: Option<f64>,
    grid_m: Option<usize>,
    mfs: Option<MfsConfig>,
}

pub fn forward(args: ForwardArgs) -> Result<u8, CmdError> {
    let started = Instant::now();
    let mut cfg: ForwardConfig = load_base(&args.common)?;
    let out = prepare_out(&args.common)?;

    let mut shape_input: Option<PathBuf> = None;
    if let Some(path) = &args.shape {
        cfg.shape = Some(load_shape_file(path)?);
        shape_input = Some(path.clone());
    }
    if let Some(k) = args.k {
        cfg.k = Some(k);
    }
    if let Some(d) = args.d_angle {
        cfg.d_angle = Some(d);
    }
    if let Some(m) = args.grid_m {
        cfg.grid_m = Some(m);
    }
    if let Some(n) = args.mfs_sources {
        let mut mfs = cfg.mfs.unwrap_or_default();
        mfs.n_sources = n;
        cfg.mfs = Some(mfs);
    }

    let shape = cfg.clone().shape.ok_or_else(|| config_err("no shape given (--shape or config)"))?;
    let obstacle = shape.clone().into_obstacle().map_err(|e| config_err(e.to_string()))?;
    let k = cfg.k.unwrap_or(1.0);
    let d_angle = cfg.d_angle.unwrap_or(0.0);
    let g = grid(cfg.grid_m.unwrap_or(128))?;
    let mfs = cfg.mfs.unwrap_or_default();

    let mut man = RunManifest::new(
        "forward",
        serde_json::to_value(&cfg).map_err(|e| config_err(e.to_string()))?,
        args.common.seed,
    );
    if let Some(p) = shape_input {
        man.record_input("shape", &p).map_err(|e| io_err("digesting shape", e))?;
    }

    let wave = IncidentPlaneWave::new(k, d_angle).map_err(solver_err)?;
    let sol = solve(&obstacle, &wave, &mfs).map_err(solver_err)?;
    eprintln!(
        "forward: residual {:.3e} (ill-conditioned: {})",
        sol.residual,
        sol.ill_conditioned()
    );
    let pattern = far_field(&sol, g);
    let mut buf = Vec::new();
    write_pattern(&mut buf, &pattern).map_err(|e| config_err(e.to_string()))?;
    write_output(&mut man, &out, "pattern.csv", &buf)?;
    finish(man, &out, started)?;
    Ok(0)
}

// ------------------------------------------------------------ oracle-disk

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct OracleConfig {
    a: f64,
    bc: BoundaryCondition,
    k: f64,
    d_angle: f64,
    grid_m: usize,
    center: [f64; 2],
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            a: 1.0,
            bc: BoundaryCondition::Dirichlet,
            k: 1.0,
            d_angle: 0.0,
            grid_m: 128,
            center: [0.0, 0.0],
        }
    }
}

pub fn oracle_disk(args: OracleDiskArgs) -> Result<u8, CmdError> {
    let started = Instant::now();
    let mut cfg: OracleConfig = load_base(&args.common)?;
    let out = prepare_out(&args.common)?;
    if let Some(a) = args.a {
        cfg.a = a;
    }
    if let Some(k) = args.k {
        cfg.k = k;
    }
    if let Some(d) = args.d_angle {
        cfg.d_angle = d;
    }
    if let Some(m) = args.grid_m {
        cfg.grid_m = m;
    }
    if let Some(c) = &args.center {
        let (x, y) = parse_pair(c, "--center")?;
        cfg.center = [x, y];
    }
    if let Some(bc) = &args.bc {
        cfg.bc = match bc.as_str() {
            "dirichlet" => BoundaryCondition::Dirichlet,
            "neumann" => BoundaryCondition::Neumann,
            "impedance" => {
                let lam = args
                    .lambda
                    .as_deref()
                    .ok_or_else(|| config_err("--bc impedance requires --lambda re,im"))?;
                let (re, im) = parse_pair(lam, "--lambda")?;
                BoundaryCondition::Impedance { lambda: Complex64::new(re, im) }
            }
            other => return Err(config_err(format!("unknown boundary condition {:?}", other))),
        };
    }

    let g = grid(cfg.grid_m)?;
    let wave = IncidentPlaneWave::new(cfg.k, cfg.d_angle).map_err(solver_err)?;
    let pattern = disk_far_field_series(
        cfg.a,
        cfg.bc,
        &wave,
        g,
        Point::new(cfg.center[0], cfg.center[1]),
    )
    .map_err(solver_err)?;

    let mut man = RunManifest::new(
        "oracle-disk",
        serde_json::to_value(&cfg).map_err(|e| config_err(e.to_string()))?,
        args.common.seed,
    );
    let mut buf = Vec::new();
    write_pattern(&mut buf, &pattern).map_err(|e| config_err(e.to_string()))?;
    write_output(&mut man, &out, "oracle_pattern.csv", &buf)?;
    finish(man, &out, started)?;
    Ok(0)
}

// ------------------------------------------------------ verify-identities

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct VerifyConfig {
    shape: Option<ShapeSpec>,
    theta: f64,
    z: [f64; 2],
    k: f64,
    d_angle: f64,
    grid_m: usize,
    inc_l: usize,
    mfs: MfsConfig,
    flip_translation_sign: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            shape: None,
            theta: std::f64::consts::PI / 5.0,
            z: [0.3, -0.2],
            k: 2.0,
            d_angle: 0.0,
            grid_m: 128,
            inc_l: 128,
            mfs: MfsConfig::default(),
            flip_translation_sign: false,
        }
    }
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    translation_error: f64,
    rotation_error: f64,
    combined_error: f64,
    tolerance: f64,
    pass: bool,
    worst_check: String,
    worst_angle: f64,
}

pub fn verify_identities(args: VerifyArgs) -> Result<u8, CmdError> {
    let started = Instant::now();
    let mut cfg: VerifyConfig = load_base(&args.common)?;
    let out = prepare_out(&args.common)?;
    let mut shape_input = None;
    if let Some(path) = &args.shape {
        cfg.shape = Some(load_shape_file(path)?);
        shape_input = Some(path.clone());
    }
    if let Some(t) = args.theta {
        cfg.theta = t;
    }
    if let Some(z) = &args.z {
        let (x, y) = parse_pair(z, "--z")?;
        cfg.z = [x, y];
    }
    if let Some(k) = args.k {
        cfg.k = k;
    }
    if let Some(d) = args.d_angle {
        cfg.d_angle = d;
    }
    if let Some(m) = args.grid_m {
        cfg.grid_m = m;
    }
    if let Some(l) = args.inc_l {
        cfg.inc_l = l;
    }
    if let Some(n) = args.mfs_sources {
        cfg.mfs.n_sources = n;
    }
    if args.flip_translation_sign {
        cfg.flip_translation_sign = true;
    }

    let shape =
        cfg.clone().shape.ok_or_else(|| config_err("no shape given (--shape or config)"))?;
    let base_curve = shape.curve.clone();
    let bc = shape.bc;
    let obs_grid = grid(cfg.grid_m)?;
    let inc_grid = grid(cfg.inc_l)?;
    let z = Point::new(cfg.z[0], cfg.z[1]);
    let theta = cfg.theta;

    let mut man = RunManifest::new(
        "verify-identities",
        serde_json::to_value(&cfg).map_err(|e| config_err(e.to_string()))?,
        args.common.seed,
    );
    if let Some(p) = shape_input {
        man.record_input("shape", &p).map_err(|e| io_err("digesting shape", e))?;
    }

    let solve_at = |motion: RigidMotion, d_angle: f64| -> Result<FarFieldPattern, CmdError> {
        let obstacle = Obstacle::new(base_curve.clone(), motion, bc)
            .map_err(|e| config_err(e.to_string()))?;
        let wave = IncidentPlaneWave::new(cfg.k, d_angle).map_err(solver_err)?;
        Ok(far_field(&solve(&obstacle, &wave, &cfg.mfs).map_err(solver_err)?, obs_grid))
    };

    // base pattern and full-aperture base matrix
    let base = solve_at(RigidMotion::identity(), cfg.d_angle)?;
    let columns: Vec<FarFieldPattern> = (0..inc_grid.len())
        .map(|li| solve_at(RigidMotion::identity(), inc_grid.angle(li)))
        .collect::<Result<_, _>>()?;
    let matrix = FarFieldMatrix::from_columns(cfg.k, obs_grid, inc_grid, &columns)
        .map_err(|e| config_err(e.to_string()))?;

    let z_pred = if cfg.flip_translation_sign { -z } else { z };

    // translation identity
    let moved_t = solve_at(RigidMotion::new(0.0, z), cfg.d_angle)?;
    let pred_t = translate_pattern(&base, z_pred);
    let translation_error = rel_l2(&moved_t, &pred_t)?;

    // rotation identity
    let moved_r = solve_at(RigidMotion::new(theta, Point::new(0.0, 0.0)), cfg.d_angle)?;
    let pred_r =
        rotate_predict(&matrix, theta, cfg.d_angle).map_err(|e| config_err(e.to_string()))?;
    let rotation_error = rel_l2(&moved_r, &pred_r)?;

    // composed motion
    let moved_c = solve_at(RigidMotion::new(theta, z), cfg.d_angle)?;
    let pred_c = translate_pattern(&pred_r, z_pred);
    let combined_error = rel_l2(&moved_c, &pred_c)?;

    // locate the worst sample of the worst check
    let mut worst_check = "translation";
    let mut worst_pair = (&moved_t, &pred_t);
    let mut worst_err = translation_error;
    if rotation_error > worst_err {
        worst_check = "rotation";
        worst_pair = (&moved_r, &pred_r);
        worst_err = rotation_error;
    }
    if combined_error > worst_err {
        worst_check = "combined";
        worst_pair = (&moved_c, &pred_c);
    }
    let worst_angle = worst_pair
        .0
        .samples
        .iter()
        .zip(&worst_pair.1.samples)
        .enumerate()
        .max_by(|a, b| (a.1 .0 - a.1 .1).norm().total_cmp(&(b.1 .0 - b.1 .1).norm()))
        .map(|(i, _)| obs_grid.angle(i))
        .unwrap_or(0.0);

    let tolerance = 1e-5;
    let pass = translation_error < tolerance && rotation_error < tolerance;
    let report = VerifyReport {
        translation_error,
        rotation_error,
        combined_error,
        tolerance,
        pass,
        worst_check: worst_check.to_string(),
        worst_angle,
    };
    eprintln!(
        "translation error {:.3e} | rotation error {:.3e} | combined {:.3e} -> {}",
        translation_error,
        rotation_error,
        combined_error,
        if pass { "PASS" } else { "FAIL" }
    );
    if !pass {
        eprintln!("worst deviation in the {} check at angle {:.6}", worst_check, worst_angle);
    }
    let text = serde_json::to_string_pretty(&report).map_err(|e| config_err(e.to_string()))?;
    write_output(&mut man, &out, "identities.json", text.as_bytes())?;
    finish(man, &out, started)?;
    Ok(if pass { 0 } else { 4 })
}

// --------------------------------------------------------- precompute-dict

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct DictConfig {
    k: f64,
    obs_m: usize,
    inc_l: usize,
    mfs: MfsConfig,
    entries: Vec<DictEntry>,
}

impl Default for DictConfig {
    fn default() -> Self {
        DictConfig {
            k: 2.0,
            obs_m: 128,
            inc_l: 128,
            // the kite's reentrant boundary sets the source budget
            mfs: MfsConfig { n_sources: 160, ..MfsConfig::default() },
            entries: Vec::new(),
        }
    }
}

/// The built-in three-shape catalog (sound-soft).
pub fn catalog_entries() -> Vec<DictEntry> {
    vec![
        DictEntry::new("disk", catalog::circle(1.0), BoundaryCondition::Dirichlet),
        DictEntry::new("ellipse", catalog::ellipse(1.0, 0.5), BoundaryCondition::Dirichlet),
        DictEntry::new("kite", catalog::kite(), BoundaryCondition::Dirichlet),
    ]
}

pub fn precompute_dict(args: PrecomputeDictArgs) -> Result<u8, CmdError> {
    let started = Instant::now();
    let mut cfg: DictConfig = load_base(&args.common)?;
    let out = prepare_out(&args.common)?;
    if args.catalog {
        cfg.entries = catalog_entries();
    }
    if cfg.entries.is_empty() {
        return Err(config_err("no dictionary entries (provide a config or --catalog)"));
    }
    let obs = grid(cfg.obs_m)?;
    let inc = grid(cfg.inc_l)?;

    let mut man = RunManifest::new(
        "precompute-dict",
        serde_json::to_value(&cfg).map_err(|e| config_err(e.to_string()))?,
        args.common.seed,
    );

    let dict =
        ShapeDictionary::precompute(cfg.entries.clone(), cfg.k, obs, inc, cfg.mfs).map_err(|e| {
            match e {
                IdentifyError::CertificateFailed { .. } | IdentifyError::Solve(_) => {
                    CmdError { code: 3, message: e.to_string() }
                }
                other => config_err(other.to_string()),
            }
        })?;
    for data in dict.entries() {
        eprintln!("entry {:?}: worst boundary residual {:.3e}", data.entry.id, data.max_residual);
    }
    let dict_dir = out.join("dict");
    save_dictionary(&dict_dir, &dict).map_err(|e| config_err(e.to_string()))?;
    // record the dictionary files as outputs
    let mut names: Vec<PathBuf> = fs::read_dir(&dict_dir)
        .map_err(|e| io_err("reading dict dir", e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    names.sort();
    for path in names {
        let label = format!("dict/{}", path.file_name().unwrap().to_string_lossy());
        man.record_output(&label, &path).map_err(|e| io_err("digesting output", e))?;
    }
    finish(man, &out, started)?;
    Ok(0)
}

// ----------------------------------------------------------------- identify

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default)]
struct IdentifyCmdConfig {
    dict_dir: Option<String>,
    pattern_file: Option<String>,
    identify: IdentifyConfig,
}

pub fn identify_cmd(args: IdentifyArgs) -> Result<u8, CmdError> {
    let started = Instant::now();
    let mut cfg: IdentifyCmdConfig = load_base(&args.common)?;
    let out = prepare_out(&args.common)?;
    if let Some(d) = &args.dict {
        cfg.dict_dir = Some(d.display().to_string());
    }
    if let Some(p) = &args.pattern {
        cfg.pattern_file = Some(p.display().to_string());
    }
    if let Some(loc) = &args.location {
        let (x, y) = parse_pair(loc, "--location")?;
        cfg.identify.location = LocationMode::Known { z: Point::new(x, y) };
    }
    if let Some(bx) = &args.search_box {
        cfg.identify.location =
            LocationMode::Search { bounds: parse_quad(bx, "--search-box")?, step: None };
    }

    let dict_dir = PathBuf::from(
        cfg.dict_dir.clone().ok_or_else(|| config_err("no dictionary (--dict or config)"))?,
    );
    let pattern_file = PathBuf::from(
        cfg.pattern_file.clone().ok_or_else(|| config_err("no pattern (--pattern or config)"))?,
    );

    let mut man = RunManifest::new(
        "identify",
        serde_json::to_value(&cfg).map_err(|e| config_err(e.to_string()))?,
        args.common.seed,
    );
    record_dict_inputs(&mut man, &dict_dir)?;
    man.record_input("pattern", &pattern_file).map_err(|e| io_err("digesting pattern", e))?;

    let dict = load_dictionary(&dict_dir).map_err(|e| config_err(e.to_string()))?;
    let raw = fs::read(&pattern_file)
        .map_err(|e| io_err(&format!("reading {}", pattern_file.display()), e))?;
    let measured = read_pattern(&raw[..]).map_err(|e| config_err(e.to_string()))?;

    let (result, code) = match identify(&measured, &dict, &cfg.identify) {
        Ok(r) => {
            let code = if r.flags.ambiguous { 6 } else { 0 };
            (r, code)
        }
        Err(IdentifyError::NotInDictionary { result }) => (*result, 5),
        Err(IdentifyError::Solve(e)) => return Err(solver_err(e)),
        Err(e) => return Err(config_err(e.to_string())),
    };

    eprintln!("ranking (relative misfit):");
    for c in &result.ranking {
        eprintln!(
            "  {:<16} misfit {:.6e}  theta {:.6}  z ({:.4}, {:.4}){}",
            c.id,
            c.misfit,
            c.pose.theta,
            c.pose.z.x,
            c.pose.z.y,
            if c.theta_flat { "  [theta-flat]" } else { "" }
        );
    }
    match code {
        5 => eprintln!("NOT IN DICTIONARY (misfit {:.3e})", result.misfit),
        6 => eprintln!("AMBIGUOUS between top candidates"),
        _ => eprintln!("identified {:?}", result.best_id),
    }
    let text = serde_json::to_string_pretty(&result).map_err(|e| config_err(e.to_string()))?;
    write_output(&mut man, &out, "result.json", text.as_bytes())?;
    finish(man, &out, started)?;
    Ok(code)
}

// ------------------------------------------------------------- separability

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct SeparabilityConfig {
    dict_dir: Option<String>,
    trials: usize,
    seed: u64,
    floor: f64,
}

impl Default for SeparabilityConfig {
    fn default() -> Self {
        SeparabilityConfig { dict_dir: None, trials: 50, seed: 0, floor: 1e-3 }
    }
}

pub fn separability(args: SeparabilityArgs) -> Result<u8, CmdError> {
    let started = Instant::now();
    let mut cfg: SeparabilityConfig = load_base(&args.common)?;
    let out = prepare_out(&args.common)?;
    if let Some(d) = &args.dict {
        cfg.dict_dir = Some(d.display().to_string());
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(f) = args.floor {
        cfg.floor = f;
    }
    if let Some(s) = args.common.seed {
        cfg.seed = s;
    }
    let dict_dir = PathBuf::from(
        cfg.dict_dir.clone().ok_or_else(|| config_err("no dictionary (--dict or config)"))?,
    );

    let mut man = RunManifest::new(
        "separability",
        serde_json::to_value(&cfg).map_err(|e| config_err(e.to_string()))?,
        Some(cfg.seed),
    );
    record_dict_inputs(&mut man, &dict_dir)?;

    let dict = load_dictionary(&dict_dir).map_err(|e| config_err(e.to_string()))?;
    let report = separability_check(&dict, cfg.trials, cfg.seed, cfg.floor)
        .map_err(|e| config_err(e.to_string()))?;
    eprintln!(
        "separability: min pairwise distance {:.6e} over {} trials -> {}",
        report.min_distance,
        report.trials,
        if report.pass { "PASS" } else { "FAIL" }
    );
    if let Some(pair) = &report.min_pair {
        eprintln!(
            "  extremal pair {:?} / {:?} at d_angle {:.4}, theta {:.4}",
            pair[0], pair[1], report.min_d_angle, report.min_theta
        );
    }
    let text = serde_json::to_string_pretty(&report).map_err(|e| config_err(e.to_string()))?;
    write_output(&mut man, &out, "separability.json", text.as_bytes())?;
    finish(man, &out, started)?;
    Ok(if report.pass { 0 } else { 1 })
}

// ----------------------------------------------------------- mc-distinguish

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default)]
struct McDistinguishConfig {
    obstacle_a: Option<ShapeSpec>,
    obstacle_b: Option<ShapeSpec>,
    experiment: ExperimentConfig,
}

const STABILITY_PLOT: &str = "# gnuplot template for the stability profile\n\
set datafile separator \",\"\n\
set logscale x\n\
set xlabel \"epsilon\"\n\
set ylabel \"empirical P(delta < epsilon)\"\n\
set yrange [-0.05:1.05]\n\
plot \"stability.csv\" skip 1 using 1:2 with linespoints title \"profile\"\n";

pub fn mc_distinguish(args: McDistinguishArgs) -> Result<u8, CmdError> {
    let started = Instant::now();
    let mut cfg: McDistinguishConfig = load_base(&args.common)?;
    let out = prepare_out(&args.common)?;
    if let Some(s) = args.common.seed {
        cfg.experiment.seed = s;
    }
    let spec_a =
        cfg.clone().obstacle_a.ok_or_else(|| config_err("config needs obstacle_a"))?;
    let spec_b =
        cfg.clone().obstacle_b.ok_or_else(|| config_err("config needs obstacle_b"))?;
    let a = spec_a.into_obstacle().map_err(|e| config_err(e.to_string()))?;
    let b = spec_b.into_obstacle().map_err(|e| config_err(e.to_string()))?;

    let man_cfg = serde_json::to_value(&cfg).map_err(|e| config_err(e.to_string()))?;
    let mut man = RunManifest::new("mc-distinguish", man_cfg, Some(cfg.experiment.seed));

    let report =
        distinguish_experiment(&a, &b, &cfg.experiment).map_err(|e| config_err(e.to_string()))?;
    eprintln!(
        "mc-distinguish: {} trials ({} excluded), min delta {:.6e} at k {:.4}",
        report.records.len(),
        report.excluded,
        report.min_delta,
        report.min_delta_k
    );

    let mut trials = Vec::new();
    write_trials_csv(&mut trials, &report.records).map_err(|e| io_err("trials csv", e))?;
    write_output(&mut man, &out, "trials.csv", &trials)?;

    let profile = stability_profile(&report, &report.config.epsilons);
    let mut stability = String::from("epsilon,probability\n");
    for (e, p) in &profile.rows {
        stability.push_str(&format!("{:.16e},{:.16e}\n", e, p));
    }
    write_output(&mut man, &out, "stability.csv", stability.as_bytes())?;
    write_output(&mut man, &out, "plot.gp", STABILITY_PLOT.as_bytes())?;

    let mut summary = serde_json::to_value(&report).map_err(|e| config_err(e.to_string()))?;
    summary.as_object_mut().unwrap().remove("records");
    summary.as_object_mut().unwrap().insert(
        "stability".into(),
        serde_json::to_value(&profile).map_err(|e| config_err(e.to_string()))?,
    );
    let text = serde_json::to_string_pretty(&summary).map_err(|e| config_err(e.to_string()))?;
    write_output(&mut man, &out, "summary.json", text.as_bytes())?;
    finish(man, &out, started)?;

    if let Some(floor) = args.assert_min_delta {
        if !(report.min_delta > floor) {
            eprintln!("assertion failed: min delta {:.6e} <= {:.6e}", report.min_delta, floor);
            return Ok(1);
        }
    }
    Ok(0)
}

// ------------------------------------------------------------------- k-scan

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct KScanConfig {
    obstacle_a: Option<ShapeSpec>,
    obstacle_b: Option<ShapeSpec>,
    d_angle: f64,
    k_min: f64,
    k_max: f64,
    points: usize,
    grid_m: usize,
    mfs: MfsConfig,
}

impl Default for KScanConfig {
    fn default() -> Self {
        KScanConfig {
            obstacle_a: None,
            obstacle_b: None,
            d_angle: 0.0,
            k_min: 0.5,
            k_max: 3.0,
            points: 500,
            grid_m: 128,
            mfs: MfsConfig::default(),
        }
    }
}

const KSCAN_PLOT: &str = "# gnuplot template for the wavenumber scan\n\
set datafile separator \",\"\n\
set xlabel \"k\"\n\
set ylabel \"relative far-field gap\"\n\
set logscale y\n\
plot \"kscan.csv\" skip 1 using 1:2 with lines title \"delta(k)\"\n";

pub fn k_scan_cmd(args: KScanArgs) -> Result<u8, CmdError> {
    let started = Instant::now();
    let cfg: KScanConfig = load_base(&args.common)?;
    let out = prepare_out(&args.common)?;
    let spec_a = cfg.clone().obstacle_a.ok_or_else(|| config_err("config needs obstacle_a"))?;
    let spec_b = cfg.clone().obstacle_b.ok_or_else(|| config_err("config needs obstacle_b"))?;
    let a = spec_a.into_obstacle().map_err(|e| config_err(e.to_string()))?;
    let b = spec_b.into_obstacle().map_err(|e| config_err(e.to_string()))?;

    let man_cfg = serde_json::to_value(&cfg).map_err(|e| config_err(e.to_string()))?;
    let mut man = RunManifest::new("k-scan", man_cfg, args.common.seed);

    let report = k_scan(
        &a,
        &b,
        cfg.d_angle,
        cfg.k_min,
        cfg.k_max,
        cfg.points,
        cfg.grid_m,
        &cfg.mfs,
    )
    .map_err(|e| config_err(e.to_string()))?;
    eprintln!(
        "k-scan: {} points ({} excluded), min delta {:.6e}; {} eigen-wavenumber annotations",
        report.points.len(),
        report.excluded,
        report.min_delta,
        report.annotations.len()
    );

    let mut scan = Vec::new();
    write_kscan_csv(&mut scan, &report).map_err(|e| io_err("kscan csv", e))?;
    write_output(&mut man, &out, "kscan.csv", &scan)?;

    let ann = serde_json::to_string_pretty(&report.annotations)
        .map_err(|e| config_err(e.to_string()))?;
    write_output(&mut man, &out, "annotations.json", ann.as_bytes())?;
    write_output(&mut man, &out, "plot.gp", KSCAN_PLOT.as_bytes())?;

    let mut summary = serde_json::to_value(&report).map_err(|e| config_err(e.to_string()))?;
    summary.as_object_mut().unwrap().remove("points");
    let text = serde_json::to_string_pretty(&summary).map_err(|e| config_err(e.to_string()))?;
    write_output(&mut man, &out, "summary.json", text.as_bytes())?;
    finish(man, &out, started)?;

    if let Some(floor) = args.assert_min_delta {
        if !(report.min_delta > floor) {
            eprintln!("assertion failed: min delta {:.6e} <= {:.6e}", report.min_delta, floor);
            return Ok(1);
        }
    }
    Ok(0)
}

// ---------------------------------------------------------------- id-success

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct IdSuccessCmdConfig {
    dict_dir: Option<String>,
    success: IdSuccessConfig,
    separability_trials: usize,
    separability_floor: f64,
    separability_seed: u64,
}

impl Default for IdSuccessCmdConfig {
    fn default() -> Self {
        IdSuccessCmdConfig {
            dict_dir: None,
            success: IdSuccessConfig::default(),
            separability_trials: 50,
            separability_floor: 1e-3,
            separability_seed: 0,
        }
    }
}

pub fn id_success(args: IdSuccessArgs) -> Result<u8, CmdError> {
    let started = Instant::now();
    let mut cfg: IdSuccessCmdConfig = load_base(&args.common)?;
    let out = prepare_out(&args.common)?;
    if let Some(d) = &args.dict {
        cfg.dict_dir = Some(d.display().to_string());
    }
    if let Some(t) = args.trials {
        cfg.success.trials = t;
    }
    if let Some(n) = args.noise {
        cfg.success.noise_level = n;
    }
    if let Some(s) = args.common.seed {
        cfg.success.seed = s;
    }
    let dict_dir = PathBuf::from(
        cfg.dict_dir.clone().ok_or_else(|| config_err("no dictionary (--dict or config)"))?,
    );

    let mut man = RunManifest::new(
        "id-success",
        serde_json::to_value(&cfg).map_err(|e| config_err(e.to_string()))?,
        Some(cfg.success.seed),
    );
    record_dict_inputs(&mut man, &dict_dir)?;

    let dict = load_dictionary(&dict_dir).map_err(|e| config_err(e.to_string()))?;

    // identification presumes a separable dictionary; check it first
    let sep =
        separability_check(&dict, cfg.separability_trials, cfg.separability_seed, cfg.separability_floor)
            .map_err(|e| config_err(e.to_string()))?;
    let sep_text = serde_json::to_string_pretty(&sep).map_err(|e| config_err(e.to_string()))?;
    write_output(&mut man, &out, "separability.json", sep_text.as_bytes())?;
    if !sep.pass {
        eprintln!("separability FAIL: min distance {:.3e}", sep.min_distance);
        finish(man, &out, started)?;
        return Ok(1);
    }

    let report = identification_success_rate(&dict, &cfg.success)
        .map_err(|e| config_err(e.to_string()))?;
    eprintln!(
        "id-success: {}/{} correct (rate {:.4}, 95% CI [{:.4}, {:.4}]), {} ambiguous, {} retried",
        report.successes,
        report.trials,
        report.rate,
        report.ci95.0,
        report.ci95.1,
        report.ambiguous,
        report.retried
    );
    for f in report.failures.iter().take(10) {
        eprintln!(
            "  failure #{}: true {:?} got {:?} (d_angle {:.4}, theta {:.4}, z ({:.3},{:.3})) {}",
            f.index,
            f.true_id,
            f.got_id,
            f.d_angle,
            f.pose.theta,
            f.pose.z.x,
            f.pose.z.y,
            f.note
        );
    }
    let text = serde_json::to_string_pretty(&report).map_err(|e| config_err(e.to_string()))?;
    write_output(&mut man, &out, "summary.json", text.as_bytes())?;
    finish(man, &out, started)?;

    if let Some(min_rate) = args.assert_min_rate {
        if !(report.rate >= min_rate) {
            eprintln!("assertion failed: rate {:.4} < {:.4}", report.rate, min_rate);
            return Ok(1);
        }
    }
    Ok(0)
}
