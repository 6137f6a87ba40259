//! Run manifests: every command writes one next to its outputs.
//!
//! The manifest embeds the fully resolved configuration, so re-running a
//! command with `--config <out>/manifest.json` reproduces the data files
//! byte-identically. Wall time and digests describe the run itself and
//! are the only fields expected to differ between reruns.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub version: String,
    /// sha256 of each input file read.
    pub inputs: BTreeMap<String, String>,
    /// sha256 of each output file written (the manifest excluded).
    pub outputs: BTreeMap<String, String>,
    pub wall_time_s: f64,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value, seed: Option<u64>) -> Self {
        RunManifest {
            command: command.to_string(),
            config,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            wall_time_s: 0.0,
        }
    }

    pub fn record_input(&mut self, label: &str, path: &Path) -> std::io::Result<()> {
        self.inputs.insert(label.to_string(), digest_file(path)?);
        Ok(())
    }

    pub fn record_output(&mut self, label: &str, path: &Path) -> std::io::Result<()> {
        self.outputs.insert(label.to_string(), digest_file(path)?);
        Ok(())
    }

    /// Write atomically: temp file in the same directory, then rename.
    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        let tmp = dir.join(".manifest.json.tmp");
        fs::write(&tmp, text)?;
        fs::rename(&tmp, dir.join("manifest.json"))?;
        Ok(())
    }
}

pub fn digest_file(path: &Path) -> std::io::Result<String> {
    let bytes = fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    let out = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for b in out {
        hex.push_str(&format!("{:02x}", b));
    }
    Ok(hex)
}

/// Load a config document. A manifest file (recognized by its `command`
/// and `config` keys) yields its embedded config, enabling replays.
pub fn load_config_value(path: &Path) -> Result<serde_json::Value, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("reading {}: {}", path.display(), e))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| format!("parsing {}: {}", path.display(), e))?;
    if let Some(obj) = value.as_object() {
        if obj.contains_key("command") && obj.contains_key("config") {
            return Ok(obj["config"].clone());
        }
    }
    Ok(value)
}
