//! `hfslab fit`: extract hyperfine constants from a measured trace.

use std::path::PathBuf;

use clap::Args;
use hfslab_core::{
    enumerate_components, snr_estimate, FitProblem, FitResult, FittedParameter, HalfInt,
    HfsConstants, InitialGuess, Level, Parity, Transition,
};
use serde::Serialize;

use crate::commands::{read_trace, write_json, write_trace};
use crate::error::{CmdError, CmdResult};
use crate::manifest::{RunContext, RunManifest};

/// Fit a hyperfine multiplet to a trace and write `fit.json` plus the
/// residuals as `deviation.csv`.
///
/// The trace must carry a reconstructed frequency axis (see `linearize`).
/// Component positions and intensity ratios follow from the quantum
/// numbers; the listed start values seed the minimization. `--cog`,
/// `--amplitude` and `--baseline-offset` are estimated from the data when
/// omitted. Exit code 2 signals a fit that did not converge.
#[derive(Debug, Args)]
pub struct FitArgs {
    /// Trace CSV with a frequency axis in MHz.
    pub trace: PathBuf,

    /// Nuclear spin I (e.g. "5/2").
    #[arg(long)]
    pub i: HalfInt,
    /// Electronic J of the lower level.
    #[arg(long)]
    pub j_lower: HalfInt,
    /// Electronic J of the upper level.
    #[arg(long)]
    pub j_upper: HalfInt,

    /// Start value for the lower-level dipole constant A, MHz.
    #[arg(long, allow_negative_numbers = true)]
    pub a_lower: f64,
    /// Start value for the lower-level quadrupole constant B, MHz.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub b_lower: f64,
    /// Start value for the upper-level dipole constant A, MHz.
    #[arg(long, allow_negative_numbers = true)]
    pub a_upper: f64,
    /// Start value for the upper-level quadrupole constant B, MHz.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub b_upper: f64,
    /// Start value for the Gaussian FWHM, MHz.
    #[arg(long)]
    pub gaussian_fwhm: f64,
    /// Start value for the Lorentzian FWHM, MHz.
    #[arg(long)]
    pub lorentzian_fwhm: f64,
    /// Start value for the centre of gravity, MHz (default: intensity
    /// centroid of the trace).
    #[arg(long, allow_negative_numbers = true)]
    pub cog: Option<f64>,
    /// Start value for the amplitude (default: data range).
    #[arg(long, allow_negative_numbers = true)]
    pub amplitude: Option<f64>,
    /// Start value for the baseline offset (default: data minimum).
    #[arg(long, allow_negative_numbers = true)]
    pub baseline_offset: Option<f64>,
    /// Start value for the baseline slope, detector units per MHz.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub baseline_slope: f64,

    /// Fix a parameter at its start value (repeatable), e.g. --fix b_upper.
    #[arg(long = "fix", value_name = "NAME")]
    pub fixed: Vec<String>,
    /// Fix all component intensities at the angular-momentum ratios (the
    /// usual choice when extracting constants).
    #[arg(long)]
    pub fix_intensities: bool,

    /// Before the local fit, grid-search scale factors 1 +/- SPAN on the
    /// two dipole constants to pick the right component assignment.
    #[arg(long, value_name = "SPAN")]
    pub search_span: Option<f64>,
    /// Grid points per axis for --search-span (odd keeps the start on the
    /// grid).
    #[arg(long, value_name = "STEPS")]
    pub search_steps: Option<usize>,
}

/// Contents of `fit.json`.
#[derive(Debug, Serialize)]
struct FitReport<'a> {
    converged: bool,
    iterations: usize,
    chi_square: f64,
    degrees_of_freedom: usize,
    /// Root-mean-square residual, detector units.
    residual_rms: f64,
    /// Peak-to-residual signal-to-noise estimate; null when residuals
    /// vanish.
    snr_estimate: Option<f64>,
    parameters: &'a [FittedParameter],
}

pub fn run(ctx: &RunContext, args: &FitArgs) -> CmdResult<()> {
    let trace = read_trace(&args.trace)?;

    let lower = Level::new(
        "lower",
        0.0,
        args.j_lower,
        Parity::Even,
        Some(HfsConstants::new(args.a_lower, args.b_lower)),
    )?;
    let upper = Level::new(
        "upper",
        10_000.0,
        args.j_upper,
        Parity::Odd,
        Some(HfsConstants::new(args.a_upper, args.b_upper)),
    )?;
    let transition = Transition::new(lower, upper, args.i)?;

    let lif = trace.lif();
    let min = lif.iter().cloned().fold(f64::MAX, f64::min);
    let max = lif.iter().cloned().fold(f64::MIN, f64::max);
    // The median tracks the baseline level even when the multiplet fills
    // only a small part of the scan, where the minimum sits a few noise
    // sigma below it and "above minimum" gives every baseline sample a
    // spurious positive weight.
    let mut sorted = lif.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let amplitude = match args.amplitude {
        Some(a) => a,
        None => {
            if !(max > min) {
                return Err(CmdError::Validation(
                    "trace is flat; pass --amplitude explicitly".into(),
                ));
            }
            // Observed peak height over baseline, converted to the height
            // of a relative-intensity-1 component: the tallest feature is
            // at best the strongest component of the pattern.
            let strongest = enumerate_components(&transition)?
                .iter()
                .map(|c| c.rel_intensity)
                .fold(0.0f64, f64::max);
            let peak = if max > median { max - median } else { max - min };
            peak / strongest.max(f64::MIN_POSITIVE)
        }
    };
    let cog = match args.cog {
        Some(c) => c,
        None => {
            // Centroid weighted by the squared signal above the median:
            // squaring suppresses rectified baseline noise, which would
            // otherwise drag the estimate toward the middle of a scan that
            // is mostly empty.
            let abscissa = trace.abscissa();
            let weight: f64 = lif.iter().map(|y| (y - median).max(0.0).powi(2)).sum();
            if weight > 0.0 {
                lif.iter()
                    .zip(&abscissa)
                    .map(|(y, x)| (y - median).max(0.0).powi(2) * x)
                    .sum::<f64>()
                    / weight
            } else {
                (abscissa[0] + abscissa[abscissa.len() - 1]) / 2.0
            }
        }
    };

    let guess = InitialGuess {
        a_lower_mhz: args.a_lower,
        b_lower_mhz: args.b_lower,
        a_upper_mhz: args.a_upper,
        b_upper_mhz: args.b_upper,
        cog_mhz: cog,
        gaussian_fwhm_mhz: args.gaussian_fwhm,
        lorentzian_fwhm_mhz: args.lorentzian_fwhm,
        amplitude,
        intensities: None,
        baseline_offset: args.baseline_offset.unwrap_or(median),
        baseline_slope: args.baseline_slope,
    };

    let mut problem = FitProblem::new(&transition, trace.clone(), &guess)?;
    if args.fix_intensities {
        for name in problem.parameter_names().to_vec() {
            if name.starts_with("intensity_") {
                problem.set_fixed(&name, true)?;
            }
        }
    }
    for name in &args.fixed {
        problem.set_fixed(name, true)?;
    }

    let fit = match (args.search_span, args.search_steps) {
        (None, None) => problem.fit()?,
        (span, steps) => problem.fit_with_search(span.unwrap_or(0.12), steps.unwrap_or(13))?,
    };

    let rms = (fit.chi_square / trace.len() as f64).sqrt();
    let snr = snr_estimate(&trace, &fit).ok().filter(|s| s.is_finite());
    let report = FitReport {
        converged: fit.converged,
        iterations: fit.iterations,
        chi_square: fit.chi_square,
        degrees_of_freedom: fit.degrees_of_freedom,
        residual_rms: rms,
        snr_estimate: snr,
        parameters: &fit.parameters,
    };

    let json_out = ctx.out_file("fit.json");
    write_json(&json_out, &report)?;
    let dev_out = ctx.out_file("deviation.csv");
    write_trace(&dev_out, &fit.deviation)?;
    print_summary(&fit, rms);
    println!("-> {}, {}", json_out.display(), dev_out.display());

    let mut manifest = RunManifest::new("fit");
    for (key, value) in [
        ("i", args.i.to_string()),
        ("j_lower", args.j_lower.to_string()),
        ("j_upper", args.j_upper.to_string()),
        ("a_lower", args.a_lower.to_string()),
        ("b_lower", args.b_lower.to_string()),
        ("a_upper", args.a_upper.to_string()),
        ("b_upper", args.b_upper.to_string()),
        ("gaussian_fwhm", args.gaussian_fwhm.to_string()),
        ("lorentzian_fwhm", args.lorentzian_fwhm.to_string()),
        ("cog", cog.to_string()),
        ("amplitude", amplitude.to_string()),
        ("baseline_offset", guess.baseline_offset.to_string()),
        ("baseline_slope", args.baseline_slope.to_string()),
        ("fix", args.fixed.join(",")),
        ("fix_intensities", args.fix_intensities.to_string()),
    ] {
        manifest.set(key, value);
    }
    if let (None, None) = (args.search_span, args.search_steps) {
        manifest.set("search", "off");
    } else {
        manifest.set("search_span", args.search_span.unwrap_or(0.12));
        manifest.set("search_steps", args.search_steps.unwrap_or(13));
    }
    manifest.input(&args.trace);
    manifest.output(&json_out);
    manifest.output(&dev_out);
    ctx.write_manifest(&manifest)?;

    if !fit.converged {
        return Err(CmdError::Numerical(format!(
            "fit did not converge within {} iterations (best parameters written to {})",
            fit.iterations,
            json_out.display()
        )));
    }
    Ok(())
}

fn print_summary(fit: &FitResult, rms: f64) {
    println!(
        "fit {} in {} iterations: chi-square {:.6e} over {} dof, residual RMS {:.4e}",
        if fit.converged { "converged" } else { "DID NOT CONVERGE" },
        fit.iterations,
        fit.chi_square,
        fit.degrees_of_freedom,
        rms
    );
    let mut fixed_intensities = 0usize;
    for p in &fit.parameters {
        if p.name.starts_with("intensity_") {
            if p.fixed {
                fixed_intensities += 1;
            }
            continue;
        }
        match (p.fixed, p.sigma) {
            (true, _) => println!("  {} = {:.4} (fixed)", p.name, p.value),
            (false, Some(s)) => println!("  {} = {:.4} +- {:.4}", p.name, p.value, s),
            (false, None) => println!("  {} = {:.4} (no uncertainty)", p.name, p.value),
        }
    }
    if fixed_intensities > 0 {
        println!("  ({fixed_intensities} component intensities fixed at theoretical ratios)");
    }
}
