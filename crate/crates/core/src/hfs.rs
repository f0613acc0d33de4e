//! Hyperfine structure of atomic levels: magnetic-dipole / electric-quadrupole
//! level shifts, allowed components of an optical transition, and their
//! relative intensities.
//!
//! Conventions used throughout:
//!
//! * I is the nuclear spin, J the electronic angular momentum, F = I + J the
//!   total angular momentum; all three are [`HalfInt`]s.
//! * Hyperfine constants A (dipole) and B (quadrupole) are in MHz, so level
//!   shifts and component offsets come out in MHz.
//! * A component is a pair F -> F'; "diagonal" means delta F equals delta J,
//!   which for the interval structures treated here is always the strong
//!   branch.
//!
//! The shift coefficients and the intensity weights are small rationals, and
//! both are evaluated in exact rational arithmetic with a single conversion
//! to `f64` per coefficient. This keeps sum rules (centre of gravity,
//! intensity normalization) exact instead of accumulating rounding from
//! cascaded floating-point fractions.

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::constants::SPEED_OF_LIGHT_NM_MHZ;
use crate::error::{Error, Result};
use crate::halfint::HalfInt;
use crate::wigner;

/// Hyperfine coupling constants of one fine-structure level, in MHz.
#[derive(Debug, Copy, Clone, PartialEq, Serialize, Deserialize)]
pub struct HfsConstants {
    /// Magnetic-dipole constant A.
    pub a_mhz: f64,
    /// Electric-quadrupole constant B.
    pub b_mhz: f64,
}

impl HfsConstants {
    pub fn new(a_mhz: f64, b_mhz: f64) -> Self {
        HfsConstants { a_mhz, b_mhz }
    }
}

/// Parity of a level.
#[derive(Debug, Copy, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// The opposite parity; electric-dipole transitions must flip parity.
    pub fn flipped(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

impl fmt::Display for Parity {
    /// Formats as the single-letter table token (`e` / `o`).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parity::Even => write!(f, "e"),
            Parity::Odd => write!(f, "o"),
        }
    }
}

impl FromStr for Parity {
    type Err = String;

    /// Accepts the single-letter table tokens `e` / `o` and the spelled-out
    /// forms, case-insensitive.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "e" | "even" => Ok(Parity::Even),
            "o" | "odd" => Ok(Parity::Odd),
            other => Err(format!("'{other}' is not a parity (expected 'e' or 'o')")),
        }
    }
}

/// One fine-structure level of the atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    /// Free-form identifier (configuration/term string or a plain name).
    pub label: String,
    /// Level energy above the ground state, cm^-1. Must be >= 0.
    pub energy_cm1: f64,
    /// Electronic angular momentum J.
    pub j: HalfInt,
    pub parity: Parity,
    /// Hyperfine constants when known; `None` when the A/B columns of the
    /// source table are empty.
    pub hfs: Option<HfsConstants>,
    /// Provenance tag (catalogue name, file path, ...); empty when untracked.
    #[serde(default)]
    pub source: String,
}

impl Level {
    pub fn new(
        label: impl Into<String>,
        energy_cm1: f64,
        j: HalfInt,
        parity: Parity,
        hfs: Option<HfsConstants>,
    ) -> Result<Self> {
        let level = Level {
            label: label.into(),
            energy_cm1,
            j,
            parity,
            hfs,
            source: String::new(),
        };
        level.validate()?;
        Ok(level)
    }

    /// Tags the level with a provenance string (builder style).
    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = source.into();
        self
    }

    /// Checks the level invariants (finite, non-negative energy).
    pub fn validate(&self) -> Result<()> {
        if !self.energy_cm1.is_finite() || self.energy_cm1 < 0.0 {
            return Err(Error::NegativeEnergy(self.energy_cm1));
        }
        Ok(())
    }

    /// The hyperfine constants, or an error naming the level when absent.
    pub fn hfs_or_err(&self) -> Result<HfsConstants> {
        self.hfs
            .ok_or_else(|| Error::MissingHfsConstants(self.label.clone()))
    }
}

/// An electric-dipole transition between two levels of an atom with nuclear
/// spin I.
///
/// Construction enforces the selection rules (parity flip, |delta J| <= 1,
/// no J = 0 -> J' = 0) and the energy ordering, so a `Transition` value is
/// always physically allowed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transition {
    lower: Level,
    upper: Level,
    nuclear_spin: HalfInt,
}

impl Transition {
    pub fn new(lower: Level, upper: Level, nuclear_spin: HalfInt) -> Result<Self> {
        lower.validate()?;
        upper.validate()?;
        if upper.energy_cm1 <= lower.energy_cm1 {
            return Err(Error::LevelOrdering {
                lower: lower.energy_cm1,
                upper: upper.energy_cm1,
            });
        }
        if !dipole_allowed(&lower, &upper) {
            // Re-derive the specific failure for a useful message.
            let reason = if lower.parity == upper.parity {
                "parity must flip"
            } else if lower.j.abs_diff(upper.j) > HalfInt::from_int(1) {
                "|delta J| must be <= 1"
            } else {
                "J = 0 -> J' = 0 is forbidden"
            };
            return Err(Error::SelectionRule(reason));
        }
        Ok(Transition {
            lower,
            upper,
            nuclear_spin,
        })
    }

    pub fn lower(&self) -> &Level {
        &self.lower
    }

    pub fn upper(&self) -> &Level {
        &self.upper
    }

    pub fn nuclear_spin(&self) -> HalfInt {
        self.nuclear_spin
    }

    /// Transition wavenumber, cm^-1 (the Ritz combination of the two level
    /// energies).
    pub fn wavenumber_cm1(&self) -> f64 {
        self.upper.energy_cm1 - self.lower.energy_cm1
    }

    /// Vacuum wavelength in nm, 1e7 / wavenumber.
    pub fn vacuum_wavelength_nm(&self) -> f64 {
        1e7 / self.wavenumber_cm1()
    }

    /// Transition frequency in MHz.
    pub fn frequency_mhz(&self) -> f64 {
        SPEED_OF_LIGHT_NM_MHZ / self.vacuum_wavelength_nm()
    }
}

/// True when `lower -> upper` satisfies the electric-dipole selection rules
/// (parity flip, |delta J| <= 1, not J = 0 -> J' = 0). Energy ordering is
/// *not* checked here; callers that enumerate pairs handle ordering.
pub fn dipole_allowed(lower: &Level, upper: &Level) -> bool {
    lower.parity != upper.parity
        && lower.j.abs_diff(upper.j) <= HalfInt::from_int(1)
        && !(lower.j == HalfInt::ZERO && upper.j == HalfInt::ZERO)
}

/// One hyperfine component F -> F' of a transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HfsComponent {
    pub f_lower: HalfInt,
    pub f_upper: HalfInt,
    /// Offset of this component from the transition's hyperfine-free centre
    /// of gravity, MHz: shift(upper, F') - shift(lower, F).
    pub offset_mhz: f64,
    /// Relative intensity, normalized so the components of one transition
    /// sum to 1.
    pub rel_intensity: f64,
    /// True when delta F = delta J (the strong branch).
    pub diagonal: bool,
}

/// Number of distinct hyperfine sublevels F of a level: 2J+1 of them when
/// J < I, otherwise 2I+1.
pub fn sublevel_count(i: HalfInt, j: HalfInt) -> u32 {
    i.multiplicity().min(j.multiplicity())
}

/// Hyperfine shift of the sublevel F of a level (I, J) with constants
/// (A, B), in MHz:
///
/// ```text
/// shift = A/2 * K  +  B * [ 3/4 K (K+1) - I(I+1) J(J+1) ]
///                        / [ 2 I (2I-1) J (2J-1) ]
/// K = F(F+1) - I(I+1) - J(J+1)
/// ```
///
/// The quadrupole term is identically zero when I <= 1/2 or J <= 1/2 (its
/// angular factor vanishes; the closed form above would divide by zero).
/// Both coefficients are computed in exact rational arithmetic and converted
/// to `f64` once, so interval ratios and centre-of-gravity sums behave
/// exactly.
///
/// Errors when F is outside the coupling range of I and J.
pub fn casimir_shift(i: HalfInt, j: HalfInt, f: HalfInt, constants: HfsConstants) -> Result<f64> {
    if !f.in_coupling_range(i, j) {
        let lo = i.abs_diff(j);
        let hi = i + j;
        return Err(Error::CouplingRange { f, lo, hi });
    }

    let (ti, tj, tf) = (
        i64::from(i.twice()),
        i64::from(j.twice()),
        i64::from(f.twice()),
    );
    // X(X+1) for a half-integer with twice-value t is t(t+2)/4.
    let ii = Rational64::new(ti * (ti + 2), 4);
    let jj = Rational64::new(tj * (tj + 2), 4);
    let ff = Rational64::new(tf * (tf + 2), 4);
    let k = ff - ii - jj;

    let dipole_coeff = k / 2;

    let quadrupole_coeff = if ti <= 1 || tj <= 1 {
        Rational64::from_integer(0)
    } else {
        let numer = Rational64::new(3, 4) * k * (k + 1) - ii * jj;
        // 2 I (2I-1) J (2J-1) = ti (ti-1) tj (tj-1) / 2.
        let denom = Rational64::new(ti * (ti - 1) * tj * (tj - 1), 2);
        numer / denom
    };

    Ok(ratio_to_f64(dipole_coeff) * constants.a_mhz + ratio_to_f64(quadrupole_coeff) * constants.b_mhz)
}

fn ratio_to_f64(r: Rational64) -> f64 {
    // Numerator and denominator stay far below 2^53 here, so both convert
    // exactly and the quotient is correctly rounded.
    *r.numer() as f64 / *r.denom() as f64
}

/// All allowed hyperfine component pairs (F, F') of a J -> J' transition
/// with nuclear spin I, in ascending (F, F') order.
///
/// Allowed means: F couples (I, J), F' couples (I, J'), |delta F| <= 1, and
/// not F = 0 -> F' = 0.
pub fn component_pairs(i: HalfInt, j_lower: HalfInt, j_upper: HalfInt) -> Vec<(HalfInt, HalfInt)> {
    let mut pairs = Vec::new();
    for f in HalfInt::coupling_range(i, j_lower) {
        for fp in HalfInt::coupling_range(i, j_upper) {
            if f.signed_twice_diff(fp).abs() <= 2 && (f.twice() + fp.twice()) >= 2 {
                pairs.push((f, fp));
            }
        }
    }
    pairs
}

/// Exact relative intensity of the component F -> F' as a `BigRational`,
/// normalized so the full component set of the transition sums to exactly 1:
///
/// ```text
/// rel(F, F') = (2F+1)(2F'+1) {J F I; F' J' 1}^2 / (2I+1)
/// ```
///
/// The 6-j square is exactly rational and the raw weights sum to 2I+1, which
/// is what makes the normalization exact.
fn exact_relative_intensity(
    i: HalfInt,
    j_lower: HalfInt,
    j_upper: HalfInt,
    f: HalfInt,
    fp: HalfInt,
) -> BigRational {
    let one = HalfInt::from_int(1);
    let (w2, sign) = wigner::six_j_squared(j_lower, f, i, fp, j_upper, one);
    if sign == 0 {
        return BigRational::from(BigInt::from(0));
    }
    let degeneracy = BigInt::from(f.multiplicity()) * BigInt::from(fp.multiplicity());
    BigRational::from(degeneracy) * w2 / BigRational::from(BigInt::from(i.multiplicity()))
}

/// Relative intensity of the hyperfine component F -> F' of `transition`,
/// normalized so all components of the transition sum to 1. This is the
/// standard initial guess for fitting measured component amplitudes.
///
/// Errors when (F, F') is outside the allowed component set.
pub fn relative_intensity(transition: &Transition, f: HalfInt, f_upper: HalfInt) -> Result<f64> {
    let i = transition.nuclear_spin();
    let (jl, ju) = (transition.lower().j, transition.upper().j);
    if !f.in_coupling_range(i, jl) {
        return Err(Error::CouplingRange {
            f,
            lo: i.abs_diff(jl),
            hi: i + jl,
        });
    }
    if !f_upper.in_coupling_range(i, ju) {
        return Err(Error::CouplingRange {
            f: f_upper,
            lo: i.abs_diff(ju),
            hi: i + ju,
        });
    }
    if f.signed_twice_diff(f_upper).abs() > 2 {
        return Err(Error::SelectionRule("|delta F| must be <= 1"));
    }
    if f.twice() + f_upper.twice() < 2 {
        return Err(Error::SelectionRule("F = 0 -> F' = 0 is forbidden"));
    }
    Ok(wigner::rational_to_f64(&exact_relative_intensity(
        i, jl, ju, f, f_upper,
    )))
}

/// Enumerates the hyperfine components of `transition`: selection-rule
/// filtered (F, F') pairs in ascending order, each with its offset from the
/// centre of gravity (from [`casimir_shift`] of both levels) and its
/// normalized relative intensity.
///
/// Errors when either level lacks hyperfine constants.
pub fn enumerate_components(transition: &Transition) -> Result<Vec<HfsComponent>> {
    let i = transition.nuclear_spin();
    let (jl, ju) = (transition.lower().j, transition.upper().j);
    let lower_hfs = transition.lower().hfs_or_err()?;
    let upper_hfs = transition.upper().hfs_or_err()?;
    let dj = ju.signed_twice_diff(jl);

    component_pairs(i, jl, ju)
        .into_iter()
        .map(|(f, fp)| {
            let offset_mhz =
                casimir_shift(i, ju, fp, upper_hfs)? - casimir_shift(i, jl, f, lower_hfs)?;
            Ok(HfsComponent {
                f_lower: f,
                f_upper: fp,
                offset_mhz,
                rel_intensity: wigner::rational_to_f64(&exact_relative_intensity(
                    i, jl, ju, f, fp,
                )),
                diagonal: fp.signed_twice_diff(f) == dj,
            })
        })
        .collect()
}
