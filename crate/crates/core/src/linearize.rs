//! Frequency-axis reconstruction for piezo scans from etalon transmission
//! markers plus one absolute anchor.
//!
//! A confocal etalon transmits at frequencies spaced by its free spectral
//! range (FSR), so its transmission channel puts a comb of peaks on the scan
//! whose *frequency* spacing is known even when the scan is nonlinear in
//! sample index. Marker k is assigned relative frequency k * FSR, the
//! sample→frequency map is interpolated through those knots with a
//! shape-preserving (monotone) piecewise cubic, extrapolated linearly past
//! the outermost markers, and the whole axis is shifted so one anchor sample
//! (e.g. a wavemeter reading) has its absolute frequency.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::Trace;

/// Default marker prominence threshold as a fraction of the etalon-channel
/// range; robust against sloped discharge backgrounds.
pub const DEFAULT_MIN_PROMINENCE: f64 = 0.2;

/// Detected etalon markers: fractional sample positions plus the etalon's
/// free spectral range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkerSet {
    /// Strictly increasing fractional sample positions, >= 2 entries.
    pub peak_positions: Vec<f64>,
    /// Marker spacing in MHz.
    pub fsr_mhz: f64,
    /// One-sigma uncertainty of the FSR, MHz. Propagated as a scale
    /// uncertainty on relative frequencies in reported metadata, not folded
    /// into per-sample values.
    pub fsr_uncertainty_mhz: f64,
}

impl MarkerSet {
    /// Validates the invariants: >= 2 strictly increasing positions and a
    /// positive FSR.
    pub fn new(peak_positions: Vec<f64>, fsr_mhz: f64, fsr_uncertainty_mhz: f64) -> Result<Self> {
        if peak_positions.len() < 2 {
            return Err(Error::TooFewMarkers {
                found: peak_positions.len(),
                needed: 2,
            });
        }
        for (i, w) in peak_positions.windows(2).enumerate() {
            if w[0] >= w[1] {
                return Err(Error::MarkersNotMonotone(i + 1));
            }
        }
        if !(fsr_mhz > 0.0) || !fsr_mhz.is_finite() {
            return Err(Error::NonPositive {
                name: "fsr",
                value: fsr_mhz,
            });
        }
        if !(fsr_uncertainty_mhz >= 0.0) || !fsr_uncertainty_mhz.is_finite() {
            return Err(Error::Negative {
                name: "fsr uncertainty",
                value: fsr_uncertainty_mhz,
            });
        }
        Ok(MarkerSet {
            peak_positions,
            fsr_mhz,
            fsr_uncertainty_mhz,
        })
    }
}

/// The absolute calibration point: one sample position whose optical
/// frequency is known (typically from a wavemeter).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    /// Fractional sample position of the calibration point.
    pub sample: f64,
    /// Absolute frequency at that sample, MHz.
    pub frequency_mhz: f64,
    /// One-sigma uncertainty of the absolute frequency, MHz.
    pub uncertainty_mhz: f64,
}

/// A reconstructed per-sample frequency axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyAxis {
    /// Frequency of each sample, MHz.
    pub frequencies_mhz: Vec<f64>,
    /// The anchor the axis was shifted to.
    pub anchor: Anchor,
    /// True when the axis came out strictly increasing (always the case for
    /// monotone marker input; recorded for downstream sanity checks).
    pub monotone: bool,
}

/// Finds etalon marker peaks in the fpi channel of `trace`: 5-point
/// moving-average smoothing, local maxima with topographic prominence at
/// least `min_prominence` times the smoothed channel range, and sub-sample
/// positioning by a parabola through the three samples around each maximum.
///
/// Returns the fractional sample positions (strictly increasing). Fails if
/// any sample lacks the fpi channel or fewer than 2 peaks survive (an axis
/// cannot be built from fewer).
pub fn detect_markers(trace: &Trace, min_prominence: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&min_prominence) {
        return Err(Error::Negative {
            name: "min_prominence",
            value: min_prominence,
        });
    }
    let fpi: Vec<f64> = trace
        .samples()
        .iter()
        .enumerate()
        .map(|(i, s)| s.fpi.ok_or(Error::MissingEtalonChannel(i)))
        .collect::<Result<_>>()?;
    let n = fpi.len();
    if n < 3 {
        return Err(Error::TooFewMarkers { found: 0, needed: 2 });
    }

    // 5-point moving average with window shrink at the edges.
    let smoothed: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(2);
            let hi = (i + 2).min(n - 1);
            fpi[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect();

    let max = smoothed.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = smoothed.iter().cloned().fold(f64::INFINITY, f64::min);
    let range = max - min;
    let threshold = min_prominence * range;

    let mut positions = Vec::new();
    for p in 1..n - 1 {
        // Local maximum; for flat tops take the left edge sample.
        if !(smoothed[p] > smoothed[p - 1] && smoothed[p] >= smoothed[p + 1]) {
            continue;
        }
        if prominence(&smoothed, p) < threshold {
            continue;
        }
        // Parabolic sub-sample refinement through (p-1, p, p+1).
        let (ym, y0, yp) = (smoothed[p - 1], smoothed[p], smoothed[p + 1]);
        let denom = ym - 2.0 * y0 + yp;
        let delta = if denom < 0.0 {
            (0.5 * (ym - yp) / denom).clamp(-0.5, 0.5)
        } else {
            0.0
        };
        positions.push(p as f64 + delta);
    }

    if positions.len() < 2 {
        return Err(Error::TooFewMarkers {
            found: positions.len(),
            needed: 2,
        });
    }
    Ok(positions)
}

/// Topographic prominence of the local maximum at index `p`: height above
/// the higher of the two lowest points separating it from higher terrain
/// (or from the series ends).
fn prominence(y: &[f64], p: usize) -> f64 {
    let peak = y[p];
    let mut left_min = peak;
    for i in (0..p).rev() {
        if y[i] > peak {
            break;
        }
        left_min = left_min.min(y[i]);
    }
    let mut right_min = peak;
    for &v in &y[p + 1..] {
        if v > peak {
            break;
        }
        right_min = right_min.min(v);
    }
    peak - left_min.max(right_min)
}

/// Fritsch–Carlson shape-preserving slopes for a piecewise cubic Hermite
/// interpolant through (x, y). For monotone data the interpolant is
/// monotone. x must be strictly increasing, len >= 2.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    if n == 2 {
        return vec![delta[0], delta[0]];
    }

    let mut m = vec![0.0; n];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] <= 0.0 {
            m[i] = 0.0;
        } else {
            // Weighted harmonic mean of the neighboring secant slopes.
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    m[0] = endpoint_slope(h[0], h[1], delta[0], delta[1]);
    m[n - 1] = endpoint_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    m
}

/// Non-centered three-point endpoint slope with monotonicity clamps.
///
/// When the three-point estimate turns against the end secant (which happens
/// for strongly uneven knot spacing, gap ratio above 2 + h1/h0), the classic
/// pchip recipe would clamp the slope to zero — but a zero end slope makes
/// the linearly extrapolated axis flat beyond the outermost marker and hence
/// non-invertible. The end secant itself is used instead: it always lies in
/// the Fritsch–Carlson safe band (0, 3|d0|], so the interpolant stays
/// monotone, and extrapolation keeps a strictly positive slope.
fn endpoint_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let mut m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m.signum() != d0.signum() {
        m = d0;
    } else if d0.signum() != d1.signum() && m.abs() > 3.0 * d0.abs() {
        m = 3.0 * d0;
    }
    m
}

/// Evaluates the Hermite interpolant defined by knots (x, y) and slopes m at
/// `t`, with linear extrapolation beyond the ends using the end slopes.
fn pchip_eval(x: &[f64], y: &[f64], m: &[f64], t: f64) -> f64 {
    let n = x.len();
    if t <= x[0] {
        return y[0] + m[0] * (t - x[0]);
    }
    if t >= x[n - 1] {
        return y[n - 1] + m[n - 1] * (t - x[n - 1]);
    }
    // partition_point returns the first knot > t, so the segment is i-1..i.
    let i = x.partition_point(|&xi| xi <= t);
    let (x0, x1) = (x[i - 1], x[i]);
    let h = x1 - x0;
    let s = (t - x0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    y[i - 1] * h00 + h * m[i - 1] * h10 + y[i] * h01 + h * m[i] * h11
}

/// Builds the per-sample frequency axis for a scan of `n_samples` samples
/// from detected markers and one absolute anchor.
///
/// Marker k gets relative frequency k * fsr; samples map to frequency by
/// the monotone cubic through those knots (linear beyond the outermost
/// markers); the whole axis is then shifted so the anchor sample carries the
/// anchor frequency. The interpolant passes through the knots exactly and
/// preserves strict monotonicity of the marker positions.
pub fn build_axis(markers: &MarkerSet, n_samples: usize, anchor: &Anchor) -> Result<FrequencyAxis> {
    // Re-validate invariants (MarkerSet may have been deserialized).
    let markers = MarkerSet::new(
        markers.peak_positions.clone(),
        markers.fsr_mhz,
        markers.fsr_uncertainty_mhz,
    )?;
    if n_samples < 2 {
        return Err(Error::TooFewSamples {
            samples: n_samples,
            free: 0,
            needed: 2,
        });
    }
    let max_sample = (n_samples - 1) as f64;
    if !(0.0..=max_sample).contains(&anchor.sample) {
        return Err(Error::AnchorOutsideTrace {
            sample: anchor.sample,
            max: max_sample,
        });
    }

    let x = &markers.peak_positions;
    let y: Vec<f64> = (0..x.len()).map(|k| k as f64 * markers.fsr_mhz).collect();
    let m = pchip_slopes(x, &y);

    let shift = anchor.frequency_mhz - pchip_eval(x, &y, &m, anchor.sample);
    let frequencies_mhz: Vec<f64> = (0..n_samples)
        .map(|i| pchip_eval(x, &y, &m, i as f64) + shift)
        .collect();

    let monotone = frequencies_mhz.windows(2).all(|w| w[0] < w[1]);
    Ok(FrequencyAxis {
        frequencies_mhz,
        anchor: *anchor,
        monotone,
    })
}

/// Replaces the abscissa of `trace` with the reconstructed axis, yielding a
/// frequency-calibrated trace.
pub fn apply_axis(trace: &Trace, axis: &FrequencyAxis) -> Result<Trace> {
    trace.with_abscissa(&axis.frequencies_mhz, true)
}
