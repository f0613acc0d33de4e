//! Run manifests: every command records what it ran with.
//!
//! The manifest holds the resolved configuration (file keys or flag
//! values), the final seed of every random stream, and all input/output
//! paths. Re-running the same subcommand with the recorded configuration
//! and seeds reproduces the output files byte for byte — all random
//! streams are explicitly seeded and all formatting is deterministic.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CmdError, CmdResult};

/// What a single run looked like; serialized as `manifest.json`.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    /// Resolved key=value configuration (config-file entries or flags).
    pub configuration: BTreeMap<String, String>,
    /// Final seed of each named random stream, after `--seed` overrides.
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            tool: "hfslab",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            configuration: BTreeMap::new(),
            seeds: BTreeMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.configuration.insert(key.to_string(), value.to_string());
    }

    pub fn seed(&mut self, stream: &str, seed: u64) {
        self.seeds.insert(stream.to_string(), seed);
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.display().to_string());
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }
}

/// Where a command's files go: one directory, fixed file names.
pub struct RunContext {
    pub out_dir: PathBuf,
    /// Manifest destination; defaults to `<out_dir>/manifest.json`.
    pub manifest_path: Option<PathBuf>,
    /// `--seed`: overrides every seed found in configs or flags.
    pub seed: Option<u64>,
}

impl RunContext {
    pub fn out_file(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    /// Serializes the manifest (pretty JSON, trailing newline, keys in a
    /// fixed order) so identical runs produce identical manifest bytes.
    pub fn write_manifest(&self, manifest: &RunManifest) -> CmdResult<PathBuf> {
        let path = self
            .manifest_path
            .clone()
            .unwrap_or_else(|| self.out_dir.join("manifest.json"));
        let mut text = serde_json::to_string_pretty(manifest)?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| {
            CmdError::Validation(format!("cannot write manifest '{}': {e}", path.display()))
        })?;
        Ok(path)
    }
}
