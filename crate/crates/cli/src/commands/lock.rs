//! `hfslab lock`: simulate a dither lock on a spectral line.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use hfslab_core::{
    run_lock, stability_stats, HalfInt, HfsComponent, LaserModel, LockConfig, LockRun, PidGains,
    SpectrumModel, StabilityStats,
};
use serde::Serialize;

use crate::config::Config;
use crate::error::{CmdError, CmdResult};
use crate::manifest::{RunContext, RunManifest};

/// Simulate locking a drifting laser to a line by dither demodulation and
/// PID feedback; write the time series as `lock.csv`
/// (`t,frequency_mhz,error,control`) and the summary as `stats.json`.
///
/// The config file describes the laser, the discriminator line, the
/// lock-in and the controller:
///
/// ```text
/// laser.start_frequency_mhz = 0.0   # carrier at t = 0
/// laser.drift_mhz_per_hour = 30.0
/// laser.random_walk_mhz_per_sqrt_s = 0.02
/// laser.white_noise_mhz = 0.3
/// laser.seed = 1                    # --seed overrides
/// discriminator.center_mhz = 0.0    # line centre on the same axis
/// discriminator.gaussian_fwhm_mhz = 360.0
/// discriminator.lorentzian_fwhm_mhz = 25.0
/// discriminator.amplitude = 1.0
/// discriminator.baseline_offset = 0.0
/// discriminator.baseline_slope = 0.0
/// lock.dither_frequency_hz = 8.2
/// lock.dither_amplitude_mhz = 18.7
/// lock.lockin_time_constant_s = 0.12195121951219512  # 1/8.2
/// lock.sample_rate_hz = 164.0
/// lock.detector_noise_sigma = 0.0
/// pid.kp = 0.5
/// pid.ki_per_s = 2.0
/// pid.kd_s = 0.0
/// pid.output_limit_mhz = 50.0
/// run.duration_s = 600.0
/// run.engaged = true                # false = watch the free-running laser
/// run.averaging_times_s = 0.2, 1, 10, 60   # optional; default times that fit
/// ```
#[derive(Debug, Args)]
pub struct LockArgs {
    /// Config file (flat key = value, # comments).
    pub config: PathBuf,
}

/// Contents of `stats.json`.
#[derive(Debug, Serialize)]
struct LockReport {
    engaged: bool,
    /// True when the loop was engaged and the windowed carrier never left
    /// the capture range around the lock point.
    locked: bool,
    sample_rate_hz: f64,
    duration_s: f64,
    stats: StabilityStats,
}

pub fn run(ctx: &RunContext, args: &LockArgs) -> CmdResult<()> {
    let cfg = Config::load(&args.config)?;

    let config_seed: u64 = cfg.get("laser.seed", 0)?;
    let seed = ctx.seed.unwrap_or(config_seed);
    let laser = LaserModel {
        start_frequency_mhz: cfg.get("laser.start_frequency_mhz", 0.0)?,
        drift_mhz_per_hour: cfg.get("laser.drift_mhz_per_hour", 0.0)?,
        random_walk_mhz_per_sqrt_s: cfg.get("laser.random_walk_mhz_per_sqrt_s", 0.0)?,
        white_noise_mhz: cfg.get("laser.white_noise_mhz", 0.0)?,
        seed,
    };

    // A single unit-intensity line is all a lock needs; its F labels are
    // bookkeeping only.
    let discriminator = SpectrumModel {
        components: vec![HfsComponent {
            f_lower: HalfInt::from_twice(0),
            f_upper: HalfInt::from_twice(2),
            offset_mhz: 0.0,
            rel_intensity: 1.0,
            diagonal: true,
        }],
        cog_mhz: cfg.get("discriminator.center_mhz", 0.0)?,
        gaussian_fwhm_mhz: cfg.require("discriminator.gaussian_fwhm_mhz")?,
        lorentzian_fwhm_mhz: cfg.require("discriminator.lorentzian_fwhm_mhz")?,
        amplitude: cfg.get("discriminator.amplitude", 1.0)?,
        baseline_offset: cfg.get("discriminator.baseline_offset", 0.0)?,
        baseline_slope: cfg.get("discriminator.baseline_slope", 0.0)?,
    };

    let lock = LockConfig {
        discriminator,
        target_component: 0,
        dither_frequency_hz: cfg.require("lock.dither_frequency_hz")?,
        dither_amplitude_mhz: cfg.require("lock.dither_amplitude_mhz")?,
        lockin_time_constant_s: cfg.require("lock.lockin_time_constant_s")?,
        sample_rate_hz: cfg.require("lock.sample_rate_hz")?,
        detector_noise_sigma: cfg.get("lock.detector_noise_sigma", 0.0)?,
        pid: PidGains {
            kp: cfg.require("pid.kp")?,
            ki_per_s: cfg.require("pid.ki_per_s")?,
            kd_s: cfg.get("pid.kd_s", 0.0)?,
            output_limit_mhz: cfg.require("pid.output_limit_mhz")?,
        },
        duration_s: cfg.require("run.duration_s")?,
    };
    let engaged: bool = cfg.get("run.engaged", true)?;
    let averaging_times = cfg.get_list("run.averaging_times_s")?;
    cfg.finish()?;

    let run = run_lock(&laser, &lock, engaged)?;
    // Explicit averaging times must all fit the run (error if not); the
    // default set silently keeps only the times the run can support.
    let stats = match &averaging_times {
        Some(times) => stability_stats(&run, times)?,
        None => run.stats.clone().ok_or_else(|| {
            CmdError::Validation(format!(
                "run of {} s is too short for any default averaging window",
                lock.duration_s
            ))
        })?,
    };

    let csv_out = ctx.out_file("lock.csv");
    write_lock_csv(&csv_out, &run)?;
    let report = LockReport {
        engaged,
        locked: run.locked,
        sample_rate_hz: run.sample_rate_hz,
        duration_s: lock.duration_s,
        stats,
    };
    let json_out = ctx.out_file("stats.json");
    crate::commands::write_json(&json_out, &report)?;

    println!(
        "{} for {} s: {}, drift {:+.2} MHz/h -> {}, {}",
        if engaged { "locked" } else { "free-running" },
        lock.duration_s,
        if report.locked { "lock held" } else { "not locked" },
        report.stats.drift_mhz_per_hour,
        csv_out.display(),
        json_out.display()
    );
    for w in &report.stats.windows {
        println!(
            "  dt = {:>6} s: spread {:.3} MHz over {} windows",
            w.tau_s, w.spread_mhz, w.window_count
        );
    }

    let mut manifest = RunManifest::new("lock");
    manifest.configuration = cfg.entries();
    manifest.set("laser.seed", seed);
    manifest.seed("laser", seed);
    manifest.input(&args.config);
    manifest.output(&csv_out);
    manifest.output(&json_out);
    ctx.write_manifest(&manifest)?;
    Ok(())
}

/// `t,frequency_mhz,error,control` with shortest-round-trip number
/// formatting, matching the trace CSV convention.
fn write_lock_csv(path: &std::path::Path, run: &LockRun) -> CmdResult<()> {
    let mut text = String::with_capacity(run.samples.len() * 48 + 40);
    text.push_str("t,frequency_mhz,error,control\n");
    for s in &run.samples {
        // Writing to a String cannot fail.
        let _ = writeln!(
            text,
            "{},{},{},{}",
            s.t_s, s.frequency_mhz, s.error_mhz, s.control_mhz
        );
    }
    std::fs::write(path, text)
        .map_err(|e| CmdError::Validation(format!("cannot write '{}': {e}", path.display())))
}
