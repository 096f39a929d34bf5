//! Physical constants and unit conversions.
//!
//! All internal energies and frequencies are angular (rad/s). The CLI and
//! serialized outputs use GHz (ordinary frequency, omega / 2 pi) and tesla;
//! conversions live here so the factor of 2 pi appears in exactly one place.

use std::f64::consts::TAU;

/// Bohr magneton over hbar, in rad s^-1 T^-1 (CODATA 2018).
pub const MU_B_OVER_HBAR: f64 = 9.274_010_078_3e-24 / 1.054_571_817e-34;

/// Free-electron g-factor, the default when a species does not pin one.
pub const G_FREE_ELECTRON: f64 = 2.0023;

pub fn ghz_to_angular(f_ghz: f64) -> f64 {
    TAU * 1.0e9 * f_ghz
}

pub fn angular_to_ghz(omega: f64) -> f64 {
    omega / (TAU * 1.0e9)
}

pub fn mhz_to_angular(f_mhz: f64) -> f64 {
    TAU * 1.0e6 * f_mhz
}
