//! Command-line experiments for the 2D acoustic scattering laboratory.
//!
//! Every command resolves its configuration (defaults, then an optional
//! `--config` JSON document, then explicit flags), runs, writes its data
//! files plus a run manifest under `--out`, and exits with a machine
//! exit code. Human-readable progress goes to stderr; data goes to files.
//!
//! Exit codes: 0 success; 1 configured assertion failed; 2 configuration
//! error; 3 solver failure; 4 transform-identity violation; 5 shape not
//! in dictionary; 6 ambiguous identification.

mod commands;
mod manifest;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "scatlab", version, about = "2D acoustic scattering laboratory")]
struct Cli {
    /// Worker threads (0 = auto). Results are independent of this value.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Output directory for data files and the run manifest.
    #[arg(long)]
    out: PathBuf,
    /// JSON configuration document (a manifest.json replays its run).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed override for randomized commands.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ForwardArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Shape specification JSON file.
    #[arg(long)]
    shape: Option<PathBuf>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    d_angle: Option<f64>,
    #[arg(long)]
    grid_m: Option<usize>,
    #[arg(long)]
    mfs_sources: Option<usize>,
}

#[derive(Args)]
struct OracleDiskArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Disk radius.
    #[arg(long)]
    a: Option<f64>,
    /// Boundary condition: dirichlet | neumann | impedance.
    #[arg(long)]
    bc: Option<String>,
    /// Impedance parameter as "re,im".
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    d_angle: Option<f64>,
    #[arg(long)]
    grid_m: Option<usize>,
    /// Disk center as "x,y".
    #[arg(long)]
    center: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    shape: Option<PathBuf>,
    #[arg(long)]
    theta: Option<f64>,
    /// Translation as "x,y".
    #[arg(long)]
    z: Option<String>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    d_angle: Option<f64>,
    #[arg(long)]
    grid_m: Option<usize>,
    #[arg(long)]
    inc_l: Option<usize>,
    #[arg(long)]
    mfs_sources: Option<usize>,
    /// Deliberately mis-sign the translation factor (failure demo).
    #[arg(long, default_value_t = false)]
    flip_translation_sign: bool,
}

#[derive(Args)]
struct PrecomputeDictArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Use the built-in three-shape catalog (disk, ellipse, kite).
    #[arg(long, default_value_t = false)]
    catalog: bool,
}

#[derive(Args)]
struct IdentifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Dictionary directory (from precompute-dict).
    #[arg(long)]
    dict: Option<PathBuf>,
    /// Measured far-field pattern CSV.
    #[arg(long)]
    pattern: Option<PathBuf>,
    /// Known location "x,y" (default known location (0,0)).
    #[arg(long)]
    location: Option<String>,
    /// Joint location search over "x0,x1,y0,y1".
    #[arg(long)]
    search_box: Option<String>,
}

#[derive(Args)]
struct SeparabilityArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    dict: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    floor: Option<f64>,
}

#[derive(Args)]
struct McDistinguishArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Exit nonzero unless the minimum observed delta exceeds this.
    #[arg(long)]
    assert_min_delta: Option<f64>,
}

#[derive(Args)]
struct KScanArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    assert_min_delta: Option<f64>,
}

#[derive(Args)]
struct IdSuccessArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    dict: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    noise: Option<f64>,
    /// Exit nonzero unless the success rate reaches this.
    #[arg(long)]
    assert_min_rate: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Forward scattering: one obstacle, one plane wave, pattern CSV out.
    Forward(ForwardArgs),
    /// Analytic disk-series far field (solver oracle).
    OracleDisk(OracleDiskArgs),
    /// Cross-check translation and rotation transform identities.
    VerifyIdentities(VerifyArgs),
    /// Build a shape dictionary with full-aperture far-field matrices.
    PrecomputeDict(PrecomputeDictArgs),
    /// Identify shape and pose from a single measured pattern.
    Identify(IdentifyArgs),
    /// Empirical pairwise separability of a dictionary.
    Separability(SeparabilityArgs),
    /// Monte Carlo distinguishability of an obstacle pair.
    McDistinguish(McDistinguishArgs),
    /// Far-field gap sweep over wavenumbers at fixed incidence.
    KScan(KScanArgs),
    /// Identification success rate under random single measurements.
    IdSuccess(IdSuccessArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        // results do not depend on the pool size; ignore double-init
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    }
    let outcome = match cli.command {
        Command::Forward(a) => commands::forward(a),
        Command::OracleDisk(a) => commands::oracle_disk(a),
        Command::VerifyIdentities(a) => commands::verify_identities(a),
        Command::PrecomputeDict(a) => commands::precompute_dict(a),
        Command::Identify(a) => commands::identify_cmd(a),
        Command::Separability(a) => commands::separability(a),
        Command::McDistinguish(a) => commands::mc_distinguish(a),
        Command::KScan(a) => commands::k_scan_cmd(a),
        Command::IdSuccess(a) => commands::id_success(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
