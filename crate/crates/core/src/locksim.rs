//! Simulation of a dither lock: a laser with drift and noise, a
//! fluorescence detector looking at one hyperfine component, lock-in
//! demodulation of a small frequency dither, and a PID loop feeding the
//! correction back onto the laser.
//!
//! The simulated quantities mirror the bench setup: the laser carrier is
//! dithered by `A sin(2 pi f_d t)`; the detector sees the spectrum model
//! evaluated at the instantaneous optical frequency plus white noise; whole
//! dither periods are demodulated into an error signal proportional to the
//! local derivative of the line shape, which vanishes exactly on top of the
//! component — the lock point.
//!
//! Everything is deterministic for a fixed seed: one ChaCha8 stream drives
//! the run, with three draws per sample (random-walk increment, white
//! carrier jitter, detector noise) in that fixed order regardless of which
//! sigmas are zero.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lineshape::SpectrumModel;

/// Averaging times used for the stability summary attached to a lock run, s.
pub const DEFAULT_AVERAGING_TIMES_S: [f64; 4] = [0.2, 1.0, 10.0, 60.0];

/// Header of the lock-run CSV format.
pub const LOCK_CSV_HEADER: &str = "t,frequency_mhz,error,control";

/// Free-running laser model: linear drift plus a frequency random walk plus
/// white per-sample jitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaserModel {
    /// Carrier frequency at t = 0 on the simulation's axis, MHz.
    pub start_frequency_mhz: f64,
    /// Deterministic linear drift, MHz per hour.
    pub drift_mhz_per_hour: f64,
    /// Random-walk strength: the increment over dt has standard deviation
    /// `random_walk_mhz_per_sqrt_s * sqrt(dt)`.
    pub random_walk_mhz_per_sqrt_s: f64,
    /// White jitter added independently to every sample, MHz.
    pub white_noise_mhz: f64,
    /// Seed of the run's random stream.
    pub seed: u64,
}

impl LaserModel {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("random_walk_mhz_per_sqrt_s", self.random_walk_mhz_per_sqrt_s),
            ("white_noise_mhz", self.white_noise_mhz),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Negative { name, value: v });
            }
        }
        if !self.start_frequency_mhz.is_finite() || !self.drift_mhz_per_hour.is_finite() {
            return Err(Error::LockConfig("non-finite laser parameter".into()));
        }
        Ok(())
    }
}

/// PID gains acting on the demodulated error (which is normalized to MHz of
/// detuning, so `kp` is dimensionless).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidGains {
    pub kp: f64,
    pub ki_per_s: f64,
    pub kd_s: f64,
    /// Correction authority: the controller output is clamped to this
    /// magnitude, with integrator back-calculation so it does not wind up
    /// while saturated. MHz.
    pub output_limit_mhz: f64,
}

impl PidGains {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("kp", self.kp), ("ki_per_s", self.ki_per_s), ("kd_s", self.kd_s)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Negative { name, value: v });
            }
        }
        if !(self.output_limit_mhz > 0.0) || !self.output_limit_mhz.is_finite() {
            return Err(Error::NonPositive {
                name: "output_limit_mhz",
                value: self.output_limit_mhz,
            });
        }
        Ok(())
    }
}

/// Full configuration of a lock run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LockConfig {
    /// The spectrum the detector sees (the discriminator line shape).
    pub discriminator: SpectrumModel,
    /// Index into `discriminator.components` of the component to lock to.
    pub target_component: usize,
    pub dither_frequency_hz: f64,
    pub dither_amplitude_mhz: f64,
    /// Lock-in integration window. Must be a whole number of dither periods
    /// *and* a whole number of samples.
    pub lockin_time_constant_s: f64,
    pub sample_rate_hz: f64,
    /// White noise on the detector signal, in detector units per sample.
    pub detector_noise_sigma: f64,
    pub pid: PidGains,
    pub duration_s: f64,
}

impl LockConfig {
    /// Checks the timing and model invariants:
    ///
    /// - at least 20 samples per dither period (clean demodulation),
    /// - the lock-in window is >= 1 dither period, a whole number of
    ///   periods, and a whole number of samples (both to 1e-6), so the
    ///   demodulated fundamental is exactly orthogonal to DC and harmonics,
    /// - the run covers at least one window.
    pub fn validate(&self) -> Result<()> {
        self.discriminator.validate()?;
        self.pid.validate()?;
        if self.target_component >= self.discriminator.components.len() {
            return Err(Error::LockConfig(format!(
                "target_component {} out of range ({} components)",
                self.target_component,
                self.discriminator.components.len()
            )));
        }
        for (name, v) in [
            ("dither_frequency_hz", self.dither_frequency_hz),
            ("dither_amplitude_mhz", self.dither_amplitude_mhz),
            ("lockin_time_constant_s", self.lockin_time_constant_s),
            ("sample_rate_hz", self.sample_rate_hz),
            ("duration_s", self.duration_s),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::NonPositive { name, value: v });
            }
        }
        if !(self.detector_noise_sigma >= 0.0) || !self.detector_noise_sigma.is_finite() {
            return Err(Error::Negative {
                name: "detector_noise_sigma",
                value: self.detector_noise_sigma,
            });
        }
        if self.sample_rate_hz < 20.0 * self.dither_frequency_hz {
            return Err(Error::LockConfig(format!(
                "sample rate {} Hz below 20 samples per dither period (dither {} Hz)",
                self.sample_rate_hz, self.dither_frequency_hz
            )));
        }
        let periods = self.lockin_time_constant_s * self.dither_frequency_hz;
        if periods < 1.0 - 1e-6 || (periods - periods.round()).abs() > 1e-6 {
            return Err(Error::LockConfig(format!(
                "lock-in window covers {periods} dither periods; need a whole number >= 1"
            )));
        }
        let samples = self.lockin_time_constant_s * self.sample_rate_hz;
        if (samples - samples.round()).abs() > 1e-6 || samples.round() < 2.0 {
            return Err(Error::LockConfig(format!(
                "lock-in window covers {samples} samples; need a whole number >= 2"
            )));
        }
        if self.duration_s + 1e-9 < self.lockin_time_constant_s {
            return Err(Error::LockConfig(format!(
                "duration {} s shorter than one lock-in window ({} s)",
                self.duration_s, self.lockin_time_constant_s
            )));
        }
        Ok(())
    }

    /// Samples per lock-in window.
    pub fn window_samples(&self) -> usize {
        (self.lockin_time_constant_s * self.sample_rate_hz).round() as usize
    }

    /// The lock point: centre frequency of the target component, MHz.
    pub fn target_frequency_mhz(&self) -> f64 {
        self.discriminator.cog_mhz
            + self.discriminator.components[self.target_component].offset_mhz
    }
}

/// Detector response: the discriminator spectrum evaluated at the laser's
/// instantaneous optical frequency.
pub fn lif_response(model: &SpectrumModel, frequency_mhz: f64) -> Result<f64> {
    model.eval(frequency_mhz)
}

/// Lock-in demodulation at the dither fundamental:
/// `(2/N) sum s_n sin(2 pi f_d n / f_s + phase)`.
///
/// The block must span a whole number of dither periods — otherwise the
/// demodulation mixes in DC and quadrature leakage, which is a setup error,
/// not a measurement.
pub fn lockin_demodulate(
    samples: &[f64],
    dither_frequency_hz: f64,
    sample_rate_hz: f64,
    phase_rad: f64,
) -> Result<f64> {
    let n = samples.len();
    let periods = dither_frequency_hz * n as f64 / sample_rate_hz;
    if n == 0 || periods < 1.0 - 1e-6 || (periods - periods.round()).abs() > 1e-6 {
        return Err(Error::NonIntegerPeriods {
            samples: n,
            periods,
        });
    }
    let omega = std::f64::consts::TAU * dither_frequency_hz / sample_rate_hz;
    let sum: f64 = samples
        .iter()
        .enumerate()
        .map(|(k, s)| s * (omega * k as f64 + phase_rad).sin())
        .sum();
    Ok(2.0 * sum / n as f64)
}

/// Noiseless demodulated error at a fixed carrier detuning from the lock
/// point: one lock-in window of the dithered discriminator signal,
/// demodulated in phase. This is the static discriminant curve of the lock.
pub fn demodulated_error(config: &LockConfig, detuning_mhz: f64) -> Result<f64> {
    config.validate()?;
    let eval = config.discriminator.evaluator()?;
    let carrier = config.target_frequency_mhz() + detuning_mhz;
    let n = config.window_samples();
    let omega = std::f64::consts::TAU * config.dither_frequency_hz / config.sample_rate_hz;
    let lif: Vec<f64> = (0..n)
        .map(|k| eval.eval(carrier + config.dither_amplitude_mhz * (omega * k as f64).sin()))
        .collect();
    lockin_demodulate(
        &lif,
        config.dither_frequency_hz,
        config.sample_rate_hz,
        0.0,
    )
}

/// Discriminator slope d(error)/d(detuning) at the lock point, from the
/// noiseless discriminant curve (central difference over 1% of the
/// component width). The simulated loop divides by this to convert the
/// demodulated signal into MHz of detuning.
pub fn discriminator_slope(config: &LockConfig) -> Result<f64> {
    let h = config.discriminator.component_fwhm_mhz() / 100.0;
    let slope = (demodulated_error(config, h)? - demodulated_error(config, -h)?) / (2.0 * h);
    if !slope.is_finite() || slope == 0.0 {
        return Err(Error::LockConfig(
            "discriminator slope vanishes at the lock point (dither too small \
             or component has no curvature)"
                .into(),
        ));
    }
    Ok(slope)
}

/// One recorded simulation step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LockSample {
    pub t_s: f64,
    /// Laser carrier frequency (free-running plus correction, without the
    /// dither modulation), MHz.
    pub frequency_mhz: f64,
    /// Most recent demodulated error, MHz of estimated detuning (zero-order
    /// hold between lock-in windows).
    pub error_mhz: f64,
    /// Correction currently applied to the carrier, MHz.
    pub control_mhz: f64,
}

/// Stability figures over one averaging time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AveragingWindowStats {
    pub tau_s: f64,
    pub window_count: usize,
    /// max - min of the per-window mean frequencies, MHz.
    pub spread_mhz: f64,
    /// Two-sample (Allan) variance of the window means, MHz^2.
    pub allan_variance_mhz2: f64,
}

/// Stability summary of a lock run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityStats {
    pub mean_frequency_mhz: f64,
    /// Least-squares linear drift of the carrier, MHz per hour.
    pub drift_mhz_per_hour: f64,
    pub windows: Vec<AveragingWindowStats>,
}

/// A completed lock simulation. The samples go to CSV; the summary fields
/// are what the JSON output carries.
#[derive(Debug, Clone, Serialize)]
pub struct LockRun {
    #[serde(skip)]
    pub samples: Vec<LockSample>,
    pub sample_rate_hz: f64,
    /// True when the loop was engaged and the windowed mean carrier never
    /// left the capture range (one component FWHM) around the lock point.
    pub locked: bool,
    /// Stability summary over the default averaging times that fit the run
    /// (at least three windows each); `None` when the run is too short for
    /// any of them.
    pub stats: Option<StabilityStats>,
}

impl LockRun {
    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    /// Writes `t,frequency_mhz,error,control` rows; floats use shortest
    /// round-trip formatting, so a rerun with the same seed is
    /// byte-identical.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{LOCK_CSV_HEADER}")?;
        for s in &self.samples {
            writeln!(
                w,
                "{},{},{},{}",
                s.t_s, s.frequency_mhz, s.error_mhz, s.control_mhz
            )?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_csv(&mut file)?;
        Ok(())
    }
}

/// Runs the simulation. With `engaged == false` the controller output stays
/// zero (open loop) while the error signal is still demodulated and
/// recorded — that is how free-running drift is measured against the line.
///
/// The run is truncated to whole lock-in windows. The recorded
/// `frequency_mhz` is the carrier (dither excluded); correction updates
/// take effect on the sample after each completed window.
pub fn run_lock(laser: &LaserModel, config: &LockConfig, engaged: bool) -> Result<LockRun> {
    laser.validate()?;
    config.validate()?;

    let fs = config.sample_rate_hz;
    let dt = 1.0 / fs;
    let n_window = config.window_samples();
    let n_total = (config.duration_s * fs).round() as usize / n_window * n_window;
    if n_total == 0 {
        return Err(Error::EmptyRun {
            samples: (config.duration_s * fs).round() as usize,
            window: n_window,
        });
    }

    let slope = discriminator_slope(config)?;
    let eval = config.discriminator.evaluator()?;
    let target = config.target_frequency_mhz();
    let fwhm = config.discriminator.component_fwhm_mhz();
    let omega = std::f64::consts::TAU * config.dither_frequency_hz / fs;
    let drift_per_s = laser.drift_mhz_per_hour / 3600.0;
    let rw_step = laser.random_walk_mhz_per_sqrt_s * dt.sqrt();
    let window_duration = n_window as f64 * dt;

    let mut rng = ChaCha8Rng::seed_from_u64(laser.seed);
    let mut random_walk = 0.0;
    let mut control = 0.0;
    let mut integral = 0.0;
    let mut previous_error: Option<f64> = None;
    let mut current_error = 0.0;
    let mut locked = engaged;

    let mut samples = Vec::with_capacity(n_total);
    let mut window_lif = Vec::with_capacity(n_window);
    let mut window_carrier_sum = 0.0;

    for n in 0..n_total {
        let t = n as f64 * dt;
        let n_local = n % n_window;

        // Fixed draw order keeps runs with different zero/non-zero sigmas
        // on the same random stream.
        let g_walk: f64 = rng.sample(StandardNormal);
        let g_white: f64 = rng.sample(StandardNormal);
        let g_detector: f64 = rng.sample(StandardNormal);

        random_walk += rw_step * g_walk;
        let free_running = laser.start_frequency_mhz
            + drift_per_s * t
            + random_walk
            + laser.white_noise_mhz * g_white;
        let carrier = free_running + control;
        // Window-local dither phase; with whole periods per window this is
        // identical to the global phase but avoids large sine arguments.
        let dither = config.dither_amplitude_mhz * (omega * n_local as f64).sin();
        let lif = eval.eval(carrier + dither) + config.detector_noise_sigma * g_detector;

        window_lif.push(lif);
        window_carrier_sum += carrier;
        samples.push(LockSample {
            t_s: t,
            frequency_mhz: carrier,
            error_mhz: current_error,
            control_mhz: control,
        });

        if n_local == n_window - 1 {
            let raw = lockin_demodulate(
                &window_lif,
                config.dither_frequency_hz,
                fs,
                0.0,
            )?;
            let error = raw / slope;
            current_error = error;

            if engaged {
                let previous = previous_error.unwrap_or(error);
                integral += window_duration * 0.5 * (error + previous);
                let derivative = (error - previous) / window_duration;
                let mut u = config.pid.kp * error
                    + config.pid.ki_per_s * integral
                    + config.pid.kd_s * derivative;
                let clamped = u.clamp(-config.pid.output_limit_mhz, config.pid.output_limit_mhz);
                if clamped != u && config.pid.ki_per_s > 0.0 {
                    // Back-calculation anti-windup: remove the excess from
                    // the integrator instead of accumulating it.
                    integral -= (u - clamped) / config.pid.ki_per_s;
                }
                u = clamped;
                control = -u;

                let window_mean = window_carrier_sum / n_window as f64;
                if (window_mean - target).abs() > fwhm {
                    locked = false;
                }
            }
            previous_error = Some(error);
            window_lif.clear();
            window_carrier_sum = 0.0;
        }
    }

    let mut run = LockRun {
        samples,
        sample_rate_hz: fs,
        locked,
        stats: None,
    };
    let duration = run.duration_s();
    let usable: Vec<f64> = DEFAULT_AVERAGING_TIMES_S
        .iter()
        .copied()
        .filter(|&tau| 3.0 * tau <= duration)
        .collect();
    if !usable.is_empty() {
        run.stats = Some(stability_stats(&run, &usable)?);
    }
    Ok(run)
}

/// Stability analysis of a run: the carrier is partitioned into
/// non-overlapping windows of each averaging time, and the spread
/// (max - min) and two-sample (Allan) variance of the window means are
/// reported, together with the least-squares drift of the whole record.
///
/// Each averaging time must give at least two full windows.
pub fn stability_stats(run: &LockRun, averaging_times_s: &[f64]) -> Result<StabilityStats> {
    let n = run.samples.len();
    if n < 2 {
        return Err(Error::EmptyRun {
            samples: n,
            window: 2,
        });
    }
    let freq: Vec<f64> = run.samples.iter().map(|s| s.frequency_mhz).collect();
    let times: Vec<f64> = run.samples.iter().map(|s| s.t_s).collect();
    let duration = run.duration_s();

    let mean = freq.iter().sum::<f64>() / n as f64;
    let t_mean = times.iter().sum::<f64>() / n as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..n {
        num += (times[k] - t_mean) * (freq[k] - mean);
        den += (times[k] - t_mean) * (times[k] - t_mean);
    }
    let drift_mhz_per_hour = num / den * 3600.0;

    let mut windows = Vec::with_capacity(averaging_times_s.len());
    for &tau in averaging_times_s {
        let len = (tau * run.sample_rate_hz).round() as usize;
        if len < 2 {
            return Err(Error::NonPositive {
                name: "averaging window (below two samples)",
                value: tau,
            });
        }
        let count = n / len;
        if count < 2 {
            return Err(Error::RunTooShort { duration, tau });
        }
        let means: Vec<f64> = (0..count)
            .map(|k| freq[k * len..(k + 1) * len].iter().sum::<f64>() / len as f64)
            .collect();
        let max = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = means.iter().cloned().fold(f64::INFINITY, f64::min);
        let allan = means
            .windows(2)
            .map(|w| (w[1] - w[0]) * (w[1] - w[0]))
            .sum::<f64>()
            / (2.0 * (count - 1) as f64);
        windows.push(AveragingWindowStats {
            tau_s: tau,
            window_count: count,
            spread_mhz: max - min,
            allan_variance_mhz2: allan,
        });
    }

    Ok(StabilityStats {
        mean_frequency_mhz: mean,
        drift_mhz_per_hour,
        windows,
    })
}
