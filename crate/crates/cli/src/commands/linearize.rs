//! `hfslab linearize`: turn etalon markers into a frequency axis.

use std::path::PathBuf;

use clap::Args;
use hfslab_core::{
    apply_axis, build_axis, detect_markers, Anchor, MarkerSet, DEFAULT_MIN_PROMINENCE,
};
use serde::Serialize;

use crate::commands::{read_trace, write_json, write_trace};
use crate::error::{CmdError, CmdResult};
use crate::manifest::{RunContext, RunManifest};

/// Reconstruct a per-sample frequency axis from the etalon channel and
/// write the calibrated trace as `calibrated.csv` plus an `axis.json`
/// sidecar (marker positions, FSR, anchor, monotonicity).
///
/// Markers are etalon transmission peaks spaced by the free spectral
/// range; the axis interpolates marker index -> sample position
/// monotonically and is anchored at one absolutely known point (default:
/// the first marker at 0 MHz, i.e. a relative axis).
#[derive(Debug, Args)]
pub struct LinearizeArgs {
    /// Trace CSV whose fpi column holds the etalon channel.
    pub trace: PathBuf,
    /// Etalon free spectral range, MHz.
    #[arg(long)]
    pub fsr_mhz: f64,
    /// One-sigma FSR uncertainty, MHz (reported, not folded into values).
    #[arg(long, default_value_t = 0.0)]
    pub fsr_sigma_mhz: f64,
    /// Anchor position as a fractional sample index (default: the first
    /// detected marker).
    #[arg(long, allow_negative_numbers = true)]
    pub anchor_sample: Option<f64>,
    /// Absolute frequency at the anchor, MHz.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub anchor_mhz: f64,
    /// One-sigma uncertainty of the anchor frequency, MHz.
    #[arg(long, default_value_t = 0.0)]
    pub anchor_sigma_mhz: f64,
    /// Marker prominence threshold, fraction of the channel range.
    #[arg(long, default_value_t = DEFAULT_MIN_PROMINENCE)]
    pub prominence: f64,
}

/// Contents of `axis.json`: everything needed to rebuild the axis.
#[derive(Debug, Serialize)]
struct AxisSidecar {
    /// Sub-sample marker positions, trace sample units.
    marker_positions: Vec<f64>,
    fsr_mhz: f64,
    fsr_uncertainty_mhz: f64,
    anchor: Anchor,
    /// True when the reconstructed axis is strictly increasing.
    monotone: bool,
    n_samples: usize,
}

pub fn run(ctx: &RunContext, args: &LinearizeArgs) -> CmdResult<()> {
    let trace = read_trace(&args.trace)?;
    let positions = detect_markers(&trace, args.prominence)?;
    let markers = MarkerSet::new(positions.clone(), args.fsr_mhz, args.fsr_sigma_mhz)?;
    let anchor = Anchor {
        sample: args.anchor_sample.unwrap_or(positions[0]),
        frequency_mhz: args.anchor_mhz,
        uncertainty_mhz: args.anchor_sigma_mhz,
    };
    let axis = build_axis(&markers, trace.len(), &anchor)?;
    if !axis.monotone {
        return Err(CmdError::Validation(
            "reconstructed axis is not strictly increasing; check the marker channel".into(),
        ));
    }
    let calibrated = apply_axis(&trace, &axis)?;

    let csv_out = ctx.out_file("calibrated.csv");
    write_trace(&csv_out, &calibrated)?;
    let sidecar = AxisSidecar {
        marker_positions: positions.clone(),
        fsr_mhz: args.fsr_mhz,
        fsr_uncertainty_mhz: args.fsr_sigma_mhz,
        anchor: axis.anchor.clone(),
        monotone: axis.monotone,
        n_samples: trace.len(),
    };
    let json_out = ctx.out_file("axis.json");
    write_json(&json_out, &sidecar)?;
    let span = axis.frequencies_mhz[axis.frequencies_mhz.len() - 1] - axis.frequencies_mhz[0];
    println!(
        "{} markers, axis spans {:.1} MHz ({:.1} per sample) -> {}, {}",
        positions.len(),
        span,
        span / (trace.len() - 1) as f64,
        csv_out.display(),
        json_out.display()
    );

    let mut manifest = RunManifest::new("linearize");
    manifest.set("fsr_mhz", args.fsr_mhz);
    manifest.set("fsr_sigma_mhz", args.fsr_sigma_mhz);
    manifest.set("anchor_sample", anchor.sample);
    manifest.set("anchor_mhz", args.anchor_mhz);
    manifest.set("anchor_sigma_mhz", args.anchor_sigma_mhz);
    manifest.set("prominence", args.prominence);
    manifest.input(&args.trace);
    manifest.output(&csv_out);
    manifest.output(&json_out);
    ctx.write_manifest(&manifest)?;
    Ok(())
}
