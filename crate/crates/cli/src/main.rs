//! `hfslab` — command-line pipelines for hyperfine-structure spectroscopy.
//!
//! Subcommands cover the full workflow: synthesize spectra (`synth`), fit
//! hyperfine constants (`fit`), predict and identify lines from a level
//! table (`predict`, `classify`), reconstruct frequency axes from etalon
//! markers (`linearize`), simulate laser locks (`lock`) and compute
//! offsets from the Mg+ sub-harmonic references (`mg-offset`).
//!
//! Conventions shared by every subcommand:
//!
//! - outputs are plain data files (CSV / JSON) with fixed names inside the
//!   required `--out` directory — plotting stays external;
//! - every run writes a manifest that pins the resolved configuration and
//!   seeds, so reruns reproduce outputs byte for byte;
//! - exit codes: 0 success, 1 validation failure, 2 numerical failure.

mod commands;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::{CmdError, CmdResult};
use crate::manifest::RunContext;

#[derive(Debug, Parser)]
#[command(
    name = "hfslab",
    version,
    about = "Hyperfine-spectroscopy pipelines: synthesize, fit, predict, calibrate, lock",
    arg_required_else_help = true
)]
struct Cli {
    /// Output directory (created if missing); commands write fixed-named
    /// files into it.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Manifest destination (default: <OUT>/manifest.json).
    #[arg(long, global = true, value_name = "FILE")]
    manifest: Option<PathBuf>,

    /// Override every random seed in configs or flags.
    #[arg(long, global = true, value_name = "SEED")]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    Synth(commands::synth::SynthArgs),
    Fit(commands::fit::FitArgs),
    Predict(commands::query::PredictArgs),
    Classify(commands::query::ClassifyArgs),
    Linearize(commands::linearize::LinearizeArgs),
    Lock(commands::lock::LockArgs),
    MgOffset(commands::query::MgOffsetArgs),
}

fn dispatch(cli: Cli) -> CmdResult<()> {
    let out_dir = cli
        .out
        .ok_or_else(|| CmdError::Validation("--out <DIR> is required".into()))?;
    std::fs::create_dir_all(&out_dir).map_err(|e| {
        CmdError::Validation(format!(
            "cannot create output directory '{}': {e}",
            out_dir.display()
        ))
    })?;
    let ctx = RunContext {
        out_dir,
        manifest_path: cli.manifest,
        seed: cli.seed,
    };
    match &cli.command {
        Command::Synth(args) => commands::synth::run(&ctx, args),
        Command::Fit(args) => commands::fit::run(&ctx, args),
        Command::Predict(args) => commands::query::run_predict(&ctx, args),
        Command::Classify(args) => commands::query::run_classify(&ctx, args),
        Command::Linearize(args) => commands::linearize::run(&ctx, args),
        Command::Lock(args) => commands::lock::run(&ctx, args),
        Command::MgOffset(args) => commands::query::run_mg_offset(&ctx, args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help / --version print to stdout and succeed; genuine
            // usage mistakes are validation failures under the exit-code
            // contract.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
