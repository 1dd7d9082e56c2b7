//! Frequency and wavelength conversions. Internal calculations use angular
//! frequency in rad/s; I/O surfaces use nm and THz.

use std::f64::consts::TAU;

/// Speed of light in vacuum (m/s), exact.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Vacuum wavelength (m) to angular frequency (rad/s).
pub fn wavelength_to_angular(wavelength_m: f64) -> f64 {
    TAU * SPEED_OF_LIGHT / wavelength_m
}

/// Angular frequency (rad/s) to vacuum wavelength (m).
pub fn angular_to_wavelength(omega: f64) -> f64 {
    TAU * SPEED_OF_LIGHT / omega
}

/// Vacuum wavelength (nm) to angular frequency (rad/s).
pub fn nm_to_angular(wavelength_nm: f64) -> f64 {
    wavelength_to_angular(wavelength_nm * 1e-9)
}

/// Angular frequency (rad/s) to vacuum wavelength (nm).
pub fn angular_to_nm(omega: f64) -> f64 {
    angular_to_wavelength(omega) * 1e9
}

/// Ordinary frequency (THz) to angular frequency (rad/s).
pub fn thz_to_angular(frequency_thz: f64) -> f64 {
    TAU * frequency_thz * 1e12
}

/// Angular frequency (rad/s) to ordinary frequency (THz).
pub fn angular_to_thz(omega: f64) -> f64 {
    omega / TAU * 1e-12
}
