//! Physical constants, quantity newtypes and unit conversions.
//!
//! Frequencies and rates are always rad/s inside the crate. Anything that
//! crosses an I/O boundary is in Hz and goes through [`hz_to_angular`] or
//! [`AngularFrequency::hz`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Reduced Planck constant, J·s (CODATA 2018, exact).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K (CODATA 2018, exact).
pub const K_B: f64 = 1.380_649e-23;
/// Electron gyromagnetic ratio, rad/s per tesla (2π × 28 GHz/T).
pub const GAMMA_E: f64 = 2.0 * PI * 28.0e9;

/// The fixed constant set, for callers that want them as a value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub k_b: f64,
    pub gamma_e: f64,
}

pub const CONSTANTS: PhysicalConstants = PhysicalConstants {
    hbar: HBAR,
    k_b: K_B,
    gamma_e: GAMMA_E,
};

/// An angular frequency in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
pub struct AngularFrequency(pub f64);

impl AngularFrequency {
    pub fn from_hz(f: f64) -> Self {
        Self(2.0 * PI * f)
    }

    pub fn hz(self) -> f64 {
        self.0 / (2.0 * PI)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// A damping, coupling or broadening rate in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
pub struct Rate(pub f64);

impl Rate {
    pub fn from_hz(f: f64) -> Self {
        Self(2.0 * PI * f)
    }

    pub fn hz(self) -> f64 {
        self.0 / (2.0 * PI)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// A temperature in kelvin.
///
/// Signed: a negative value is only meaningful as the spin temperature of an
/// inverted ensemble. Bath and ambient temperatures are positive and are
/// validated as such by the modules that consume them.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Temperature(pub f64);

impl Temperature {
    pub fn kelvin(self) -> f64 {
        self.0
    }

    /// True for the negative spin temperature of an inverted population.
    pub fn is_inverted(self) -> bool {
        self.0 < 0.0
    }

    pub fn magnitude(self) -> Temperature {
        Temperature(self.0.abs())
    }
}

pub fn hz_to_angular(f: f64) -> Result<AngularFrequency> {
    if !f.is_finite() {
        return invalid(format!("frequency must be finite, got {f}"));
    }
    Ok(AngularFrequency::from_hz(f))
}

pub fn dbm_to_watt(p_dbm: f64) -> Result<f64> {
    if !p_dbm.is_finite() {
        return invalid(format!("power must be finite, got {p_dbm} dBm"));
    }
    Ok(1e-3 * 10f64.powf(p_dbm / 10.0))
}

pub fn watt_to_dbm(p_w: f64) -> Result<f64> {
    if !(p_w > 0.0) || !p_w.is_finite() {
        return invalid(format!("power must be positive and finite, got {p_w} W"));
    }
    Ok(10.0 * (p_w / 1e-3).log10())
}

pub fn power_ratio_to_db(r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return invalid(format!("power ratio must be positive and finite, got {r}"));
    }
    Ok(10.0 * r.log10())
}

pub fn db_to_power_ratio(db: f64) -> Result<f64> {
    if !db.is_finite() {
        return invalid(format!("dB value must be finite, got {db}"));
    }
    Ok(10f64.powf(db / 10.0))
}

/// ħω/k_B in kelvin: the temperature scale of a photon at `omega`.
pub fn photon_temperature(omega: AngularFrequency) -> f64 {
    HBAR * omega.0 / K_B
}
