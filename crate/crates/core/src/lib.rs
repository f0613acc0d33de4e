//! Toolkit for laser-spectroscopy of hyperfine structure: exact
//! angular-momentum algebra, Voigt line shapes, spectrum synthesis and
//! least-squares fitting, an energy-level database with transition
//! prediction and line classification, frequency-axis reconstruction from
//! etalon markers, and a dither-lock simulator.
//!
//! The crate is organized bottom-up:
//!
//! - [`halfint`]: half-integer angular momenta stored exactly.
//! - [`wigner`]: exact-rational 6-j symbols.
//! - [`hfs`]: levels, transitions, hyperfine shifts, component
//!   enumeration and relative intensities.
//! - [`faddeeva`] / [`lineshape`]: the complex error function, Voigt
//!   profiles, Doppler widths, spectrum models and synthesis.
//! - [`trace`]: the scan container and its CSV format.
//! - [`fitter`]: Levenberg–Marquardt fitting of scans in terms of
//!   hyperfine constants.
//! - [`levels`]: the level database, Ritz prediction, line
//!   classification, standard-air conversion, reference offsets.
//! - [`linearize`]: etalon-marker detection and frequency-axis
//!   reconstruction.
//! - [`locksim`]: dither lock-in and PID lock simulation with stability
//!   statistics.
//!
//! All frequencies are MHz, wavelengths nm, energies cm^-1, times seconds,
//! unless a name says otherwise. Every random process takes an explicit
//! seed and is bit-reproducible.

// Validity tests are written `!(x > 0.0)` on purpose: the negation is true
// for NaN, so non-numbers are rejected along with out-of-range values.
// The `<=` rewrite clippy suggests would silently accept NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Physical constants and frozen reference values are quoted at their full
// published precision, even where that exceeds what f64 resolves.
#![allow(clippy::excessive_precision)]

pub mod constants;
pub mod error;
pub mod faddeeva;
pub mod fitter;
pub mod halfint;
pub mod hfs;
pub mod levels;
pub mod lineshape;
pub mod linearize;
pub mod locksim;
pub mod trace;
pub mod wigner;

pub use error::{Error, Result};
pub use faddeeva::faddeeva_w;
pub use fitter::{snr_estimate, FitProblem, FitResult, FittedParameter, InitialGuess};
pub use halfint::HalfInt;
pub use hfs::{
    casimir_shift, component_pairs, dipole_allowed, enumerate_components, relative_intensity,
    sublevel_count, HfsComponent, HfsConstants, Level, Parity, Transition,
};
pub use levels::{
    air_to_vacuum, classify, mg_offset_mhz, mg_reference, predict, vacuum_to_air, ClassifiedLine,
    FluorescenceCandidate, LevelDatabase, MgReference, PredictedLine, MG_REFERENCES,
};
pub use lineshape::{
    doppler_fwhm, synthesize, voigt, voigt_fwhm, Noise, SpectrumEvaluator, SpectrumModel,
    VoigtProfile,
};
pub use linearize::{
    apply_axis, build_axis, detect_markers, Anchor, FrequencyAxis, MarkerSet,
    DEFAULT_MIN_PROMINENCE,
};
pub use locksim::{
    demodulated_error, discriminator_slope, lif_response, lockin_demodulate, run_lock,
    stability_stats, LaserModel, LockConfig, LockRun, LockSample, PidGains, StabilityStats,
};
pub use trace::{Sample, Trace};
pub use wigner::six_j;
