//! Run manifests and the output directory they describe.
//!
//! Every run writes its artifacts atomically into `--out` followed by
//! `manifest.json`, which records the fully resolved configuration, the seed
//! and a digest of each artifact. `gnakit replay` re-executes a manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: u32,
    pub tool: String,
    pub version: String,
    pub rng: String,
    pub command: String,
    pub seed: Option<u64>,
    /// The resolved configuration of `command`.
    pub config: serde_json::Value,
    pub outputs: Vec<OutputRecord>,
}

impl Manifest {
    pub fn read(path: &Path) -> CliResult<Manifest> {
        let text = fs::read_to_string(path).map_err(|e| CliError::input(path.display(), e))?;
        let m: Manifest = serde_json::from_str(&text).map_err(|e| CliError::input(path.display(), e))?;
        if m.schema != MANIFEST_SCHEMA {
            return Err(CliError::input(path.display(), format!("unsupported manifest schema {}", m.schema)));
        }
        if m.version != env!("CARGO_PKG_VERSION") {
            log::warn!("manifest was written by version {}, this is {}", m.version, env!("CARGO_PKG_VERSION"));
        }
        Ok(m)
    }

    pub fn config_as<T: DeserializeOwned>(&self, path: &Path) -> CliResult<T> {
        serde_json::from_value(self.config.clone()).map_err(|e| CliError::config(path.display(), e))
    }
}

/// Collects artifacts written under one output directory.
pub struct OutDir {
    root: PathBuf,
    records: Vec<OutputRecord>,
}

impl OutDir {
    pub fn create(root: &Path) -> CliResult<OutDir> {
        fs::create_dir_all(root).map_err(|e| CliError::Output(format!("{}: {e}", root.display())))?;
        Ok(OutDir { root: root.to_path_buf(), records: Vec::new() })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.root.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::Output(format!("{}: {e}", parent.display())))?;
        }
        gnakit::io::write_atomic(&path, bytes).map_err(|e| CliError::Output(e.to_string()))?;
        self.records.push(OutputRecord {
            path: name.to_string(),
            bytes: bytes.len(),
            sha256: hex(&Sha256::digest(bytes)),
        });
        Ok(())
    }

    /// Writes the manifest last so its presence marks a complete run.
    pub fn finish<C: Serialize>(self, command: &str, seed: Option<u64>, config: &C) -> CliResult<Manifest> {
        let manifest = Manifest {
            schema: MANIFEST_SCHEMA,
            tool: "gnakit".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            rng: gnakit::rng::RNG_ALGORITHM.into(),
            command: command.into(),
            seed,
            config: serde_json::to_value(config).map_err(CliError::runtime)?,
            outputs: self.records,
        };
        let mut text = serde_json::to_string_pretty(&manifest).map_err(CliError::runtime)?;
        text.push('\n');
        gnakit::io::write_atomic(&self.root.join(MANIFEST_FILE), text.as_bytes())
            .map_err(|e| CliError::Output(e.to_string()))?;
        Ok(manifest)
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Parses an optional TOML config file into `T`, or `T::default()`.
pub fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::config(path.display(), e))?;
    toml::from_str(&text).map_err(|e| CliError::config(path.display(), e.to_string().trim_end()))
}

pub fn require_seed(seed: Option<u64>, what: &str) -> CliResult<u64> {
    seed.ok_or_else(|| CliError::Usage(format!("{what} is stochastic: pass --seed or set `seed` in the config")))
}
