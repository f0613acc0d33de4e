//! Physical constants used across the crate, in one table so every module
//! agrees on the values.
//!
//! Values follow the 2019 SI redefinition (exact where exact) and CODATA 2018
//! for the measured ones. Units are spelled out in the names; the working
//! units of the crate are MHz for optical detunings, nm for wavelengths,
//! cm^-1 for level energies and K for temperatures.

/// Boltzmann constant, J/K (exact since the 2019 SI redefinition).
pub const BOLTZMANN_J_PER_K: f64 = 1.380_649e-23;

/// Planck constant, J s (exact).
pub const PLANCK_J_S: f64 = 6.626_070_15e-34;

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT_M_PER_S: f64 = 299_792_458.0;

/// Unified atomic mass unit, kg (CODATA 2018).
pub const ATOMIC_MASS_KG: f64 = 1.660_539_066_60e-27;

/// Second radiation constant c2 = h c / k_B in cm K, used by the Boltzmann
/// ranking of level populations (E in cm^-1 enters as exp(-c2 E / T)).
pub const SECOND_RADIATION_CM_K: f64 =
    PLANCK_J_S * SPEED_OF_LIGHT_M_PER_S / BOLTZMANN_J_PER_K * 100.0;

/// Speed of light in nm MHz (1e9 nm/m * 1e-6 s/us): converting between
/// vacuum wavelength in nm and optical frequency in MHz is nu = C / lambda.
pub const SPEED_OF_LIGHT_NM_MHZ: f64 = SPEED_OF_LIGHT_M_PER_S * 1e3;
