//! Spin–photon coupling from a sampled resonator mode field.
//!
//! The spin quantization axis (and the static field) is taken along x, so
//! only the y and z components of the drive field rotate the spins.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::quantities::{AngularFrequency, Rate, GAMMA_E, HBAR};

/// Transition matrix element between m_s = 0 and m_s = ±1.
pub const MATRIX_ELEMENT: f64 = std::f64::consts::FRAC_1_SQRT_2;

const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldCell {
    pub position: [f64; 3],
    pub volume: f64,
    /// Classical drive field amplitude (x, y, z), tesla.
    pub b1: [f64; 3],
    pub in_sample: bool,
}

impl FieldCell {
    pub fn perp_sq(&self) -> f64 {
        self.b1[1] * self.b1[1] + self.b1[2] * self.b1[2]
    }

    pub fn norm_sq(&self) -> f64 {
        self.b1[0] * self.b1[0] + self.perp_sq()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldMap {
    cells: Vec<FieldCell>,
}

impl FieldMap {
    pub fn new(cells: Vec<FieldCell>) -> Result<Self> {
        if cells.is_empty() {
            return invalid("field map has no cells");
        }
        for (k, c) in cells.iter().enumerate() {
            if !(c.volume > 0.0) || !c.volume.is_finite() {
                return invalid(format!("cell {k}: volume must be positive, got {}", c.volume));
            }
            if c.b1.iter().chain(c.position.iter()).any(|v| !v.is_finite()) {
                return invalid(format!("cell {k}: non-finite field or position"));
            }
        }
        Ok(Self { cells })
    }

    pub fn cells(&self) -> &[FieldCell] {
        &self.cells
    }

    /// Fixed-chunk parallel sum; the result does not depend on the thread count.
    fn sum(&self, f: impl Fn(&FieldCell) -> f64 + Sync) -> f64 {
        let partial: Vec<f64> = self.cells.par_chunks(CHUNK).map(|c| c.iter().map(&f).sum::<f64>()).collect();
        partial.iter().sum()
    }

    pub fn sample_volume(&self) -> f64 {
        self.sum(|c| if c.in_sample { c.volume } else { 0.0 })
    }

    /// Volume-weighted mean of |B⊥| over the sample cells.
    pub fn sample_mean_perp(&self) -> Result<f64> {
        let v = self.sample_volume();
        if v == 0.0 {
            return invalid("field map has no sample cells");
        }
        Ok(self.sum(|c| if c.in_sample { c.perp_sq().sqrt() * c.volume } else { 0.0 }) / v)
    }
}

/// Drive and resonator data that accompany a field map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drive {
    /// Incident power, W.
    pub power: f64,
    pub kappa_e: Rate,
    pub kappa_i: Rate,
    pub omega_r: AngularFrequency,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingResult {
    /// Single-spin coupling, rad/s.
    pub g0: f64,
    pub n_bar: f64,
    pub eta: f64,
    /// Magnetic mode volume, m³.
    pub v_m: f64,
    /// Volume-weighted |B⊥| over the sample, tesla.
    pub b1_perp_mean: f64,
}

/// Mean intra-resonator photon number for a resonant drive of power `p_m` (W).
pub fn mean_photon_number(p_m: f64, kappa_e: Rate, kappa_i: Rate, omega_r: AngularFrequency) -> Result<f64> {
    if !(p_m >= 0.0) || !p_m.is_finite() {
        return invalid(format!("drive power must be non-negative, got {p_m}"));
    }
    let total = kappa_e.0 + kappa_i.0;
    if !(total > 0.0) {
        return invalid("total resonator loss rate must be positive");
    }
    if !(omega_r.0 > 0.0) {
        return invalid("resonator frequency must be positive");
    }
    Ok(4.0 * kappa_e.0 * p_m / (HBAR * omega_r.0 * total * total))
}

/// g₀ = γ_e·M·|B⊥|/(2√n̄), rad/s.
pub fn single_spin_coupling(b1_perp: f64, n_bar: f64) -> Result<f64> {
    if !(n_bar > 0.0) || !n_bar.is_finite() {
        return invalid(format!("photon number must be positive, got {n_bar}"));
    }
    if !(b1_perp >= 0.0) || !b1_perp.is_finite() {
        return invalid(format!("field amplitude must be non-negative, got {b1_perp}"));
    }
    Ok(GAMMA_E * MATRIX_ELEMENT * b1_perp / (2.0 * n_bar.sqrt()))
}

/// √N·g₀ for N identically coupled spins.
pub fn ensemble_coupling(n_spins: u64, g0: f64) -> f64 {
    (n_spins as f64).sqrt() * g0
}

/// √Σ g_j² for individually coupled spins.
pub fn ensemble_coupling_from(couplings: &[f64]) -> f64 {
    couplings.iter().map(|g| g * g).sum::<f64>().sqrt()
}

/// Share of the magnetic energy that sits in the sample with transverse
/// polarization.
pub fn filling_factor(map: &FieldMap) -> Result<f64> {
    let total = map.sum(|c| c.norm_sq() * c.volume);
    if !(total > 0.0) {
        return invalid("field map carries no magnetic energy");
    }
    Ok(map.sum(|c| if c.in_sample { c.perp_sq() * c.volume } else { 0.0 }) / total)
}

/// Energy-weighted mode volume Σ|B|²V / max|B|².
pub fn mode_volume(map: &FieldMap) -> Result<f64> {
    let peak = map.cells().iter().map(FieldCell::norm_sq).fold(0.0, f64::max);
    if !(peak > 0.0) {
        return invalid("field map has zero maximum field");
    }
    Ok(map.sum(|c| c.norm_sq() * c.volume) / peak)
}

/// Full pipeline from a field map and its drive conditions.
pub fn analyze(map: &FieldMap, drive: &Drive) -> Result<CouplingResult> {
    let n_bar = mean_photon_number(drive.power, drive.kappa_e, drive.kappa_i, drive.omega_r)?;
    let b1_perp_mean = map.sample_mean_perp()?;
    let g0 = single_spin_coupling(b1_perp_mean, n_bar)?;
    Ok(CouplingResult { g0, n_bar, eta: filling_factor(map)?, v_m: mode_volume(map)?, b1_perp_mean })
}
