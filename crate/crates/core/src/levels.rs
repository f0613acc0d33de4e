//! Energy-level database: TSV ingestion, Ritz-combination prediction of
//! transitions in a wavelength window, classification of measured lines,
//! vacuum/air conversion, Boltzmann ranking, and the Mg+ sub-harmonic
//! reference table with its offset computation.
//!
//! Wavelength conventions: level energies in cm^-1, wavelengths in nm,
//! `1e7 / delta E` converts a wavenumber difference to a vacuum wavelength.
//! Air wavelengths use the Edlén (1966) standard-air dispersion relation.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::constants::{SECOND_RADIATION_CM_K, SPEED_OF_LIGHT_NM_MHZ};
use crate::error::{Error, Result};
use crate::halfint::HalfInt;
use crate::hfs::{dipole_allowed, HfsConstants, Level, Parity, Transition};

/// Default temperature for Boltzmann ranking of lower-level populations, K.
/// Discharge excitation temperatures are rarely measured; 2000 K ranks
/// low-lying levels far above high ones without flattening the ordering.
pub const DEFAULT_BOLTZMANN_TEMPERATURE_K: f64 = 2000.0;

/// Monochromator passband used to filter fluorescence candidates, nm (air).
pub const FLUORESCENCE_WINDOW_NM: (f64, f64) = (300.0, 900.0);

/// The exact header line of the level TSV format.
pub const LEVEL_TSV_HEADER: &str = "energy_cm1\tparity\ttwoJ\tA_MHz\tB_MHz\tlabel";

/// An immutable collection of energy levels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelDatabase {
    levels: Vec<Level>,
    /// Free-form source description (file path, catalogue name, ...).
    pub metadata: String,
}

impl LevelDatabase {
    /// Builds a database from levels, rejecting duplicates: two rows with
    /// energies within 0.001 cm^-1 and identical J and parity are
    /// indistinguishable for prediction purposes.
    pub fn new(levels: Vec<Level>, metadata: impl Into<String>) -> Result<Self> {
        for level in &levels {
            level.validate()?;
        }
        for i in 1..levels.len() {
            for j in 0..i {
                if is_duplicate(&levels[j], &levels[i]) {
                    return Err(Error::DuplicateLevel {
                        line: i + 1,
                        previous: j + 1,
                    });
                }
            }
        }
        Ok(LevelDatabase {
            levels,
            metadata: metadata.into(),
        })
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// Parses the TSV format (header `energy_cm1 parity twoJ A_MHz B_MHz
    /// label`, tab-separated, `#` comment lines, A/B may be empty). Errors
    /// name the 1-based line and the offending column.
    pub fn from_tsv(text: &str, metadata: impl Into<String>) -> Result<Self> {
        let metadata = metadata.into();
        let mut levels = Vec::new();
        let mut line_of_level = Vec::new();
        let mut header_seen = false;

        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            if !header_seen {
                if line.trim() != LEVEL_TSV_HEADER {
                    return Err(Error::LevelParse {
                        line: lineno,
                        msg: format!(
                            "bad header '{}' (expected '{}')",
                            line.trim(),
                            LEVEL_TSV_HEADER.replace('\t', "<TAB>")
                        ),
                    });
                }
                header_seen = true;
                continue;
            }

            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 6 {
                return Err(Error::LevelParse {
                    line: lineno,
                    msg: format!("expected 6 tab-separated columns, got {}", fields.len()),
                });
            }
            let col = |idx: usize, name: &str, text: &str, what: String| Error::LevelParse {
                line: lineno,
                msg: format!("column {} ({name}): {what} '{}'", idx + 1, text.trim()),
            };

            let energy_cm1: f64 = fields[0].trim().parse().map_err(|_| {
                col(0, "energy_cm1", fields[0], "not a number".into())
            })?;
            if !energy_cm1.is_finite() || energy_cm1 < 0.0 {
                return Err(col(0, "energy_cm1", fields[0], "must be >= 0:".into()));
            }
            let parity = Parity::from_str(fields[1])
                .map_err(|e| col(1, "parity", fields[1], e))?;
            let two_j: u32 = fields[2].trim().parse().map_err(|_| {
                col(2, "twoJ", fields[2], "not a non-negative integer".into())
            })?;
            let a_mhz = parse_optional_mhz(fields[3])
                .map_err(|w| col(3, "A_MHz", fields[3], w))?;
            let b_mhz = parse_optional_mhz(fields[4])
                .map_err(|w| col(4, "B_MHz", fields[4], w))?;
            let label = fields[5].trim().to_owned();

            // Both constants absent means "unknown"; a single present
            // constant keeps the other at 0 (a known-dipole-only entry).
            let hfs = match (a_mhz, b_mhz) {
                (None, None) => None,
                (a, b) => Some(HfsConstants::new(a.unwrap_or(0.0), b.unwrap_or(0.0))),
            };

            let level = Level::new(label, energy_cm1, HalfInt::from_twice(two_j), parity, hfs)
                .map_err(|e| Error::LevelParse {
                    line: lineno,
                    msg: e.to_string(),
                })?
                .with_source(metadata.clone());

            // Duplicate check against everything parsed so far, reporting
            // real file line numbers.
            for (k, existing) in levels.iter().enumerate() {
                if is_duplicate(existing, &level) {
                    return Err(Error::DuplicateLevel {
                        line: lineno,
                        previous: line_of_level[k],
                    });
                }
            }
            line_of_level.push(lineno);
            levels.push(level);
        }

        if !header_seen {
            return Err(Error::LevelParse {
                line: 1,
                msg: "missing header line".into(),
            });
        }
        Ok(LevelDatabase { levels, metadata })
    }

    /// Loads the TSV format from a file; the path becomes the metadata tag.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_tsv(&text, path.display().to_string())
    }
}

fn parse_optional_mhz(field: &str) -> std::result::Result<Option<f64>, String> {
    let t = field.trim();
    if t.is_empty() {
        return Ok(None);
    }
    t.parse::<f64>()
        .map(Some)
        .map_err(|_| "not a number".to_string())
}

fn is_duplicate(a: &Level, b: &Level) -> bool {
    (a.energy_cm1 - b.energy_cm1).abs() < 0.001 && a.j == b.j && a.parity == b.parity
}

/// A dipole-allowed decay channel of a predicted line's upper level that a
/// 300-900 nm monochromator could observe.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluorescenceCandidate {
    pub final_level: Level,
    pub air_wavelength_nm: f64,
}

/// One Ritz-predicted transition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictedLine {
    pub lower: Level,
    pub upper: Level,
    pub wavenumber_cm1: f64,
    pub vacuum_wavelength_nm: f64,
    /// exp(-c2 E_lower / T): relative thermal population of the lower level
    /// (statistical-weight-free ranking; see `predict`).
    pub boltzmann_weight: f64,
    pub fluorescence_candidates: Vec<FluorescenceCandidate>,
}

/// All dipole-allowed level pairs of `db` whose Ritz vacuum wavelength falls
/// inside `window_nm = (min, max)`, sorted by Boltzmann weight of the lower
/// level, descending (ties broken by wavelength, then labels, so output is
/// independent of database row order).
///
/// `temperature_k` defaults to [`DEFAULT_BOLTZMANN_TEMPERATURE_K`]. The
/// weight is exp(-c2 E_lower / T) with c2 = h c / k_B: lower-lying levels
/// are exponentially more populated, which is the ranking that matters when
/// hunting for observable excitation lines. An empty result is not an
/// error.
pub fn predict(
    db: &LevelDatabase,
    window_nm: (f64, f64),
    temperature_k: Option<f64>,
) -> Result<Vec<PredictedLine>> {
    let (min_nm, max_nm) = window_nm;
    if !(min_nm < max_nm) || !(min_nm > 0.0) {
        return Err(Error::EmptyWindow {
            min: min_nm,
            max: max_nm,
        });
    }
    let temperature = temperature_k.unwrap_or(DEFAULT_BOLTZMANN_TEMPERATURE_K);
    if !(temperature > 0.0) {
        return Err(Error::NonPositive {
            name: "temperature",
            value: temperature,
        });
    }

    // The window in wavenumber space (reciprocal flips the bounds).
    let (sigma_min, sigma_max) = (1e7 / max_nm, 1e7 / min_nm);

    let mut lines = Vec::new();
    for lower in db.levels() {
        for upper in db.levels() {
            let wavenumber = upper.energy_cm1 - lower.energy_cm1;
            if wavenumber < sigma_min || wavenumber > sigma_max {
                continue;
            }
            if !dipole_allowed(lower, upper) {
                continue;
            }
            lines.push(PredictedLine {
                lower: lower.clone(),
                upper: upper.clone(),
                wavenumber_cm1: wavenumber,
                vacuum_wavelength_nm: 1e7 / wavenumber,
                boltzmann_weight: (-SECOND_RADIATION_CM_K * lower.energy_cm1 / temperature).exp(),
                fluorescence_candidates: fluorescence_candidates(db, upper),
            });
        }
    }

    lines.sort_by(|a, b| {
        b.boltzmann_weight
            .partial_cmp(&a.boltzmann_weight)
            .unwrap()
            .then(
                a.vacuum_wavelength_nm
                    .partial_cmp(&b.vacuum_wavelength_nm)
                    .unwrap(),
            )
            .then_with(|| (&a.lower.label, &a.upper.label).cmp(&(&b.lower.label, &b.upper.label)))
    });
    Ok(lines)
}

/// Dipole-allowed decays of `upper` to database levels below it whose air
/// wavelength lies in the monochromator window, sorted by wavelength.
fn fluorescence_candidates(db: &LevelDatabase, upper: &Level) -> Vec<FluorescenceCandidate> {
    let mut out = Vec::new();
    for fin in db.levels() {
        if fin.energy_cm1 >= upper.energy_cm1 || !dipole_allowed(fin, upper) {
            continue;
        }
        let vac_nm = 1e7 / (upper.energy_cm1 - fin.energy_cm1);
        // Decays outside the dispersion relation's validity cannot reach the
        // monochromator window anyway.
        let Ok(air_nm) = vacuum_to_air(vac_nm) else {
            continue;
        };
        if air_nm >= FLUORESCENCE_WINDOW_NM.0 && air_nm <= FLUORESCENCE_WINDOW_NM.1 {
            out.push(FluorescenceCandidate {
                final_level: fin.clone(),
                air_wavelength_nm: air_nm,
            });
        }
    }
    out.sort_by(|a, b| a.air_wavelength_nm.partial_cmp(&b.air_wavelength_nm).unwrap());
    out
}

/// A predicted line matched to a measured wavelength.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifiedLine {
    /// |lambda_ritz - lambda_measured| in nm, the match quality.
    pub deviation_nm: f64,
    pub line: PredictedLine,
}

/// Candidate identifications of a measured line: every predicted line
/// within `tolerance_nm` of `measured_vacuum_nm`, ordered best match first.
/// Zero tolerance yields an empty list; negative tolerance is rejected.
pub fn classify(
    db: &LevelDatabase,
    measured_vacuum_nm: f64,
    tolerance_nm: f64,
) -> Result<Vec<ClassifiedLine>> {
    if !(tolerance_nm >= 0.0) {
        return Err(Error::Negative {
            name: "tolerance",
            value: tolerance_nm,
        });
    }
    if tolerance_nm == 0.0 {
        return Ok(Vec::new());
    }
    let window = (
        measured_vacuum_nm - tolerance_nm,
        measured_vacuum_nm + tolerance_nm,
    );
    let mut out: Vec<ClassifiedLine> = predict(db, window, None)?
        .into_iter()
        .map(|line| ClassifiedLine {
            deviation_nm: (line.vacuum_wavelength_nm - measured_vacuum_nm).abs(),
            line,
        })
        .collect();
    out.sort_by(|a, b| a.deviation_nm.partial_cmp(&b.deviation_nm).unwrap());
    Ok(out)
}

// --- standard air ---

/// Refractive index of standard air at vacuum wavenumber sigma = 1/lambda
/// (lambda in micrometers), Edlén (1966):
/// n - 1 = 1e-8 (8342.13 + 2406030/(130 - sigma^2) + 15997/(38.9 - sigma^2)).
fn air_refractive_index(wavelength_nm: f64) -> f64 {
    let sigma = 1e3 / wavelength_nm; // 1/um
    let s2 = sigma * sigma;
    1.0 + 1e-8 * (8342.13 + 2_406_030.0 / (130.0 - s2) + 15_997.0 / (38.9 - s2))
}

fn check_air_range(wavelength_nm: f64) -> Result<()> {
    if !(200.0..=2000.0).contains(&wavelength_nm) {
        return Err(Error::AirDispersionRange(wavelength_nm));
    }
    Ok(())
}

/// Converts a vacuum wavelength (nm) to the standard-air wavelength.
/// Valid for 200-2000 nm.
pub fn vacuum_to_air(vacuum_nm: f64) -> Result<f64> {
    check_air_range(vacuum_nm)?;
    Ok(vacuum_nm / air_refractive_index(vacuum_nm))
}

/// Converts a standard-air wavelength (nm) to vacuum by fixed-point
/// iteration of lambda_vac = lambda_air * n(lambda_vac), converged to
/// 1e-7 nm (round trips close to better than 1e-6 nm). Valid for
/// 200-2000 nm.
pub fn air_to_vacuum(air_nm: f64) -> Result<f64> {
    check_air_range(air_nm)?;
    let mut vac = air_nm;
    for _ in 0..50 {
        let next = air_nm * air_refractive_index(vac);
        if (next - vac).abs() < 1e-7 {
            return Ok(next);
        }
        vac = next;
    }
    Ok(vac) // n is so close to 1 that two iterations always suffice.
}

// --- Mg+ sub-harmonic references ---

/// Published wavelengths of one Mg+ D2 isotope component: the fundamental
/// UV resonance line and its 2nd and 4th sub-harmonics, nm (vacuum).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MgReference {
    pub isotope: u32,
    pub fundamental_nm: f64,
    pub second_subharmonic_nm: f64,
    pub fourth_subharmonic_nm: f64,
}

/// The three Mg+ isotope reference entries (fundamental near 279.6 nm and
/// its sub-harmonics near 559.3 / 1118.5 nm).
pub const MG_REFERENCES: [MgReference; 3] = [
    MgReference {
        isotope: 24,
        fundamental_nm: 279.6355,
        second_subharmonic_nm: 559.2710,
        fourth_subharmonic_nm: 1118.5420,
    },
    MgReference {
        isotope: 25,
        fundamental_nm: 279.6349,
        second_subharmonic_nm: 559.2698,
        fourth_subharmonic_nm: 1118.5396,
    },
    MgReference {
        isotope: 26,
        fundamental_nm: 279.6347,
        second_subharmonic_nm: 559.2694,
        fourth_subharmonic_nm: 1118.5388,
    },
];

/// Looks up the reference entry for an isotope number (24, 25 or 26).
pub fn mg_reference(isotope: u32) -> Option<&'static MgReference> {
    MG_REFERENCES.iter().find(|r| r.isotope == isotope)
}

/// Signed frequency offset in MHz between a line at `pr_vacuum_nm` and the
/// 4th sub-harmonic of the given Mg+ reference:
/// c (1/lambda_pr - 1/lambda_ref4). Positive when the line lies above the
/// sub-harmonic in frequency.
pub fn mg_offset_mhz(pr_vacuum_nm: f64, reference: &MgReference) -> f64 {
    SPEED_OF_LIGHT_NM_MHZ * (1.0 / pr_vacuum_nm - 1.0 / reference.fourth_subharmonic_nm)
}

// --- helpers shared with fitting/synthesis pipelines ---

/// Builds the transition between the two labelled levels of `db`, ordering
/// them by energy. A convenience for fixtures and the CLI.
pub fn transition_between(
    db: &LevelDatabase,
    lower_label: &str,
    upper_label: &str,
    nuclear_spin: HalfInt,
) -> Result<Transition> {
    let find = |label: &str| {
        db.levels()
            .iter()
            .find(|l| l.label == label)
            .cloned()
            .ok_or_else(|| Error::MissingHfsConstants(format!("no level labelled '{label}'")))
    };
    Transition::new(find(lower_label)?, find(upper_label)?, nuclear_spin)
}
