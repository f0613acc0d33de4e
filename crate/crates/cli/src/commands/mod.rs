//! One module per subcommand, plus shared file helpers.
//!
//! Every command follows the same contract: read inputs, validate, compute,
//! write fixed-named files into the `--out` directory, print a one-glance
//! summary to stdout, and record a [`crate::manifest::RunManifest`].

pub mod fit;
pub mod linearize;
pub mod lock;
pub mod query;
pub mod synth;

use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::Path;

use hfslab_core::Trace;
use serde::Serialize;

use crate::error::{CmdError, CmdResult};

/// Reads a trace CSV; errors carry the path.
pub fn read_trace(path: &Path) -> CmdResult<Trace> {
    let file = File::open(path).map_err(|e| {
        CmdError::Validation(format!("cannot open trace '{}': {e}", path.display()))
    })?;
    Trace::read_csv(BufReader::new(file))
        .map_err(|e| CmdError::Validation(format!("trace '{}': {e}", path.display())))
}

/// Writes a trace CSV; errors carry the path.
pub fn write_trace(path: &Path, trace: &Trace) -> CmdResult<()> {
    let file = File::create(path).map_err(|e| {
        CmdError::Validation(format!("cannot create '{}': {e}", path.display()))
    })?;
    trace
        .write_csv(BufWriter::new(file))
        .map_err(|e| CmdError::Validation(format!("cannot write '{}': {e}", path.display())))
}

/// Writes pretty JSON with a trailing newline (deterministic bytes).
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CmdResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)
        .map_err(|e| CmdError::Validation(format!("cannot write '{}': {e}", path.display())))
}
