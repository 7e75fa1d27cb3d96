//! Unit helpers. Internally everything is SI: seconds and rad/s.

use std::f64::consts::TAU;

/// Angular frequency (rad/s) of a frequency given in kHz: 2π·1000·f.
pub fn khz(f_khz: f64) -> f64 {
    TAU * 1e3 * f_khz
}

/// Inverse of [`khz`]: the Δ/2π value in kHz.
pub fn to_khz(omega: f64) -> f64 {
    omega / (TAU * 1e3)
}

pub fn us(t_us: f64) -> f64 {
    t_us / 1e6
}

pub fn to_us(t: f64) -> f64 {
    t * 1e6
}
