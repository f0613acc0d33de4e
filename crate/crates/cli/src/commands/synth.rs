//! `hfslab synth`: synthesize a hyperfine spectrum from a config file.

use std::path::PathBuf;

use clap::Args;
use hfslab_core::{
    enumerate_components, synthesize, HalfInt, HfsConstants, Level, Noise, Parity, SpectrumModel,
    Transition,
};

use crate::commands::write_trace;
use crate::config::Config;
use crate::error::{CmdError, CmdResult};
use crate::manifest::{RunContext, RunManifest};

/// Synthesize a hyperfine multiplet scan and write it as `trace.csv`.
///
/// The config file gives the quantum numbers, hyperfine constants, line
/// widths, scan axis and noise:
///
/// ```text
/// transition.i = 5/2        # nuclear spin
/// lower.j = 7/2             # electronic J of the lower level
/// lower.a_mhz = 730.0       # hyperfine constants (default 0)
/// lower.b_mhz = -20.0
/// upper.j = 9/2
/// upper.a_mhz = 640.0
/// upper.b_mhz = 10.0
/// model.gaussian_fwhm_mhz = 360.0
/// model.lorentzian_fwhm_mhz = 25.0
/// model.cog_mhz = 0.0       # centre of gravity on the scan axis
/// model.amplitude = 1.0     # peak of a unit-intensity component
/// model.baseline_offset = 0.0
/// model.baseline_slope = 0.0
/// axis.start_mhz = -4000.0
/// axis.stop_mhz = 4000.0
/// axis.samples = 1000
/// noise.sigma = 0.0         # white detector noise, 0 = exact curve
/// noise.seed = 0            # --seed overrides
/// ```
#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Config file (flat key = value, # comments).
    pub config: PathBuf,
}

pub fn run(ctx: &RunContext, args: &SynthArgs) -> CmdResult<()> {
    let cfg = Config::load(&args.config)?;

    let i: HalfInt = cfg.require("transition.i")?;
    let lower = Level::new(
        "lower",
        cfg.get("lower.energy_cm1", 0.0)?,
        cfg.require::<HalfInt>("lower.j")?,
        Parity::Even,
        Some(HfsConstants::new(
            cfg.get("lower.a_mhz", 0.0)?,
            cfg.get("lower.b_mhz", 0.0)?,
        )),
    )?;
    let upper = Level::new(
        "upper",
        cfg.get("upper.energy_cm1", 10_000.0)?,
        cfg.require::<HalfInt>("upper.j")?,
        Parity::Odd,
        Some(HfsConstants::new(
            cfg.get("upper.a_mhz", 0.0)?,
            cfg.get("upper.b_mhz", 0.0)?,
        )),
    )?;
    let transition = Transition::new(lower, upper, i)?;
    let components = enumerate_components(&transition)?;
    let n_components = components.len();

    let model = SpectrumModel {
        components,
        cog_mhz: cfg.get("model.cog_mhz", 0.0)?,
        gaussian_fwhm_mhz: cfg.require("model.gaussian_fwhm_mhz")?,
        lorentzian_fwhm_mhz: cfg.require("model.lorentzian_fwhm_mhz")?,
        amplitude: cfg.get("model.amplitude", 1.0)?,
        baseline_offset: cfg.get("model.baseline_offset", 0.0)?,
        baseline_slope: cfg.get("model.baseline_slope", 0.0)?,
    };

    let start: f64 = cfg.require("axis.start_mhz")?;
    let stop: f64 = cfg.require("axis.stop_mhz")?;
    let samples: usize = cfg.require("axis.samples")?;
    if !(stop > start) {
        return Err(CmdError::Validation(format!(
            "axis.stop_mhz ({stop}) must exceed axis.start_mhz ({start})"
        )));
    }
    if samples < 2 {
        return Err(CmdError::Validation(format!(
            "axis.samples must be at least 2 (got {samples})"
        )));
    }
    let axis: Vec<f64> = (0..samples)
        .map(|k| start + (stop - start) * k as f64 / (samples - 1) as f64)
        .collect();

    let sigma: f64 = cfg.get("noise.sigma", 0.0)?;
    let config_seed: u64 = cfg.get("noise.seed", 0)?;
    let seed = ctx.seed.unwrap_or(config_seed);
    let noise = if sigma > 0.0 {
        Noise::Gaussian { sigma, seed }
    } else {
        Noise::None
    };
    cfg.finish()?;

    let trace = synthesize(&model, &axis, &noise)?;
    let out = ctx.out_file("trace.csv");
    write_trace(&out, &trace)?;
    println!(
        "synthesized {n_components}-component spectrum, {} samples over {start}..{stop} MHz -> {}",
        trace.len(),
        out.display()
    );

    let mut manifest = RunManifest::new("synth");
    manifest.configuration = cfg.entries();
    manifest.set("noise.seed", seed);
    manifest.seed("noise", seed);
    manifest.input(&args.config);
    manifest.output(&out);
    ctx.write_manifest(&manifest)?;
    Ok(())
}
