//! Crate-wide error type.
//!
//! Every fallible operation in this crate returns [`Error`]. Variants are
//! grouped by the module that raises them; messages carry enough context
//! (line numbers, offending values, valid ranges) that a CLI can print them
//! verbatim.

use crate::halfint::HalfInt;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All errors raised by this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    // --- angular momentum / level algebra ---
    /// F outside the coupling range |J - I| ..= J + I.
    #[error("F = {f} outside the coupling range {lo} ..= {hi} set by I and J")]
    CouplingRange {
        f: HalfInt,
        lo: HalfInt,
        hi: HalfInt,
    },

    /// A transition pair violates an electric-dipole selection rule.
    #[error("selection rule violated: {0}")]
    SelectionRule(&'static str),

    /// Upper level does not lie above the lower level.
    #[error("upper level ({upper} cm^-1) must lie above lower level ({lower} cm^-1)")]
    LevelOrdering { lower: f64, upper: f64 },

    /// Negative level energy.
    #[error("level energy {0} cm^-1 is negative")]
    NegativeEnergy(f64),

    /// A level is missing the hyperfine constants required by the caller.
    #[error("level '{0}' has no hyperfine constants (A/B columns empty)")]
    MissingHfsConstants(String),

    // --- lineshapes ---
    /// Both width parameters are zero; the profile is undefined.
    #[error("Gaussian and Lorentzian FWHM are both zero; profile undefined")]
    BothWidthsZero,

    /// A quantity that must be strictly positive was not.
    #[error("{name} must be > 0 (got {value})")]
    NonPositive { name: &'static str, value: f64 },

    /// A quantity that must be non-negative was not.
    #[error("{name} must be >= 0 (got {value})")]
    Negative { name: &'static str, value: f64 },

    /// Model intensities do not form a usable set.
    #[error("component intensities invalid: {0}")]
    BadIntensities(&'static str),

    /// Abscissa (or frequency axis) not strictly increasing.
    #[error("abscissa must be strictly increasing (violated at index {index})")]
    AxisNotIncreasing { index: usize },

    /// A sample value is not finite.
    #[error("non-finite {channel} value at sample {index}")]
    NonFiniteSample { channel: &'static str, index: usize },

    /// Two containers that must be the same length are not.
    #[error("length mismatch: expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    // --- trace / level-table parsing ---
    /// Malformed trace CSV.
    #[error("trace CSV line {line}: {msg}")]
    TraceParse { line: usize, msg: String },

    /// Malformed level table.
    #[error("level table line {line}: {msg}")]
    LevelParse { line: usize, msg: String },

    /// Two level rows are indistinguishable.
    #[error("level table line {line}: duplicate of line {previous} (same energy within 0.001 cm^-1, same J and parity)")]
    DuplicateLevel { line: usize, previous: usize },

    // --- level-database queries ---
    /// Requested wavelength window is empty or inverted.
    #[error("wavelength window [{min} nm, {max} nm] is empty")]
    EmptyWindow { min: f64, max: f64 },

    /// Wavelength outside the validity range of the standard-air dispersion
    /// formula.
    #[error("wavelength {0} nm outside the 200-2000 nm validity range of the standard-air dispersion relation")]
    AirDispersionRange(f64),

    // --- fitting ---
    /// The trace still carries raw sample indices instead of frequencies.
    #[error("trace abscissa looks like raw sample indices, not frequencies; reconstruct a frequency axis first (see `linearize`)")]
    MissingFrequencyAxis,

    /// Not enough samples to constrain the free parameters.
    #[error("only {samples} samples for {free} free parameters; need at least {needed}")]
    TooFewSamples {
        samples: usize,
        free: usize,
        needed: usize,
    },

    /// A fit-parameter vector has the wrong length.
    #[error("parameter vector has {got} entries, model needs {expected}")]
    ParameterCount { got: usize, expected: usize },

    /// A parameter name does not exist in the fit layout.
    #[error("no fit parameter named '{0}'")]
    UnknownParameter(String),

    /// The normal equations could not be solved even under heavy damping.
    #[error("normal equations singular: {0}")]
    SingularNormalEquations(&'static str),

    /// Invalid grid-search settings passed to `fit_with_search`.
    #[error("invalid fit search: {0}")]
    SearchConfig(&'static str),

    // --- marker detection / axis reconstruction ---
    /// Trace lacks the etalon channel needed for marker detection.
    #[error("sample {0} has no etalon channel value; marker detection needs the full channel")]
    MissingEtalonChannel(usize),

    /// Fewer markers than the minimum needed to build an axis.
    #[error("found {found} etalon markers, need at least {needed}")]
    TooFewMarkers { found: usize, needed: usize },

    /// Marker positions are not strictly increasing.
    #[error("marker positions not strictly increasing at index {0}")]
    MarkersNotMonotone(usize),

    /// Anchor sample position falls outside the trace.
    #[error("anchor sample {sample} outside trace range 0 ..= {max}")]
    AnchorOutsideTrace { sample: f64, max: f64 },

    // --- lock simulation ---
    /// A lock configuration value violates a documented constraint.
    #[error("lock config: {0}")]
    LockConfig(String),

    /// Demodulation window does not hold an integer number of dither periods.
    #[error("lock-in window of {samples} samples spans {periods} dither periods; an integer count is required")]
    NonIntegerPeriods { samples: usize, periods: f64 },

    /// The recorded run is too short for the requested statistics.
    #[error("run duration {duration} s is shorter than 3x the longest averaging time ({tau} s)")]
    RunTooShort { duration: f64, tau: f64 },

    /// The lock run produced no complete demodulation window.
    #[error("run holds no complete lock-in window ({samples} samples, window is {window})")]
    EmptyRun { samples: usize, window: usize },

    // --- I/O ---
    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization failure.
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
