//! Dictionary persistence: a directory holding `manifest.json` plus one
//! far-field matrix CSV per entry.

use super::{DictEntry, EntryData, IdentifyError, ShapeDictionary};
use crate::farfield::{read_matrix, write_matrix, DirectionGrid};
use crate::scatter::MfsConfig;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ManifestEntry {
    #[serde(flatten)]
    entry: DictEntry,
    matrix_file: String,
    max_residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Manifest {
    k: f64,
    obs_m: usize,
    inc_l: usize,
    solver: MfsConfig,
    entries: Vec<ManifestEntry>,
}

pub fn save_dictionary(dir: &Path, dict: &ShapeDictionary) -> Result<(), IdentifyError> {
    fs::create_dir_all(dir).map_err(io_err)?;
    let mut manifest = Manifest {
        k: dict.k,
        obs_m: dict.obs.len(),
        inc_l: dict.inc.len(),
        solver: dict.solver,
        entries: Vec::new(),
    };
    for data in dict.entries() {
        let file = format!("{}.csv", data.entry.id);
        let mut buf = Vec::new();
        write_matrix(&mut buf, &data.matrix).map_err(IdentifyError::Field)?;
        fs::write(dir.join(&file), buf).map_err(io_err)?;
        manifest.entries.push(ManifestEntry {
            entry: data.entry.clone(),
            matrix_file: file,
            max_residual: data.max_residual,
        });
    }
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| IdentifyError::Config(format!("manifest serialization: {}", e)))?;
    fs::write(dir.join("manifest.json"), text).map_err(io_err)?;
    Ok(())
}

pub fn load_dictionary(dir: &Path) -> Result<ShapeDictionary, IdentifyError> {
    let text = fs::read_to_string(dir.join("manifest.json")).map_err(io_err)?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| IdentifyError::Config(format!("manifest parse: {}", e)))?;
    let obs = DirectionGrid::new(manifest.obs_m).map_err(IdentifyError::Field)?;
    let inc = DirectionGrid::new(manifest.inc_l).map_err(IdentifyError::Field)?;
    let mut parts = Vec::with_capacity(manifest.entries.len());
    for me in manifest.entries {
        let raw = fs::read(dir.join(&me.matrix_file)).map_err(io_err)?;
        let matrix = read_matrix(&raw[..]).map_err(IdentifyError::Field)?;
        parts.push((me.entry, matrix, me.max_residual));
    }
    ShapeDictionary::from_parts(manifest.k, obs, inc, manifest.solver, parts)
}

fn io_err(e: std::io::Error) -> IdentifyError {
    IdentifyError::Config(format!("dictionary io: {}", e))
}

// EntryData is read back through from_parts; keep the type in scope for
// the doc link above.
#[allow(unused_imports)]
use EntryData as _EntryData;
