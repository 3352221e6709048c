//! Reflection, gain and noise of a resonator coupled to a spin ensemble.
//!
//! Both branches share the denominator D(ω) = ω − ω_r + iκ̄ ± K(ω):
//! the upper sign describes an inverted (amplifying) ensemble, the lower
//! sign an absorbing one that cools the mode.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quantities::{AngularFrequency, Rate};
use crate::spectrum::SpinEnsemble;

/// Floor applied to 20·log10|r| when the reflection vanishes.
pub const GAIN_FLOOR_DB: f64 = -300.0;

const THRESHOLD_REL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonatorParams {
    pub omega_r: AngularFrequency,
    pub kappa_e: Rate,
    pub kappa_i: Rate,
}

impl ResonatorParams {
    pub fn new(omega_r: AngularFrequency, kappa_e: Rate, kappa_i: Rate) -> Result<Self> {
        let p = Self { omega_r, kappa_e, kappa_i };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_r.0 > 0.0) || !self.omega_r.0.is_finite() {
            return invalid(format!("omega_r must be positive, got {}", self.omega_r.0));
        }
        if !(self.kappa_e.0 > 0.0) || !self.kappa_e.0.is_finite() {
            return invalid(format!("kappa_e must be positive, got {}", self.kappa_e.0));
        }
        if !(self.kappa_i.0 >= 0.0) || !self.kappa_i.0.is_finite() {
            return invalid(format!("kappa_i must be non-negative, got {}", self.kappa_i.0));
        }
        Ok(())
    }

    /// κ̄ = (κ_e + κ_i)/2.
    pub fn kappa_bar(&self) -> f64 {
        0.5 * (self.kappa_e.0 + self.kappa_i.0)
    }

    pub fn total_loss(&self) -> f64 {
        self.kappa_e.0 + self.kappa_i.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Amplify,
    Cool,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Amplify => 1.0,
            Branch::Cool => -1.0,
        }
    }
}

/// Thermal photon numbers of the input line, the spin bath and the internal
/// loss bath.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathOccupations {
    pub n_in: f64,
    pub n_s: f64,
    pub n_i: f64,
}

impl BathOccupations {
    pub fn new(n_in: f64, n_s: f64, n_i: f64) -> Result<Self> {
        for (name, v) in [("n_in", n_in), ("n_s", n_s), ("n_i", n_i)] {
            if !(v >= 0.0) || !v.is_finite() {
                return invalid(format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        Ok(Self { n_in, n_s, n_i })
    }

    pub fn uniform(n: f64) -> Result<Self> {
        Self::new(n, n, n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseCoefficients {
    pub r_in: f64,
    pub r_s: f64,
    pub r_i: f64,
}

impl NoiseCoefficients {
    /// R_in − R_s + R_i for amplification, R_in + R_s + R_i for cooling.
    /// Both equal one.
    pub fn sum_rule(&self, branch: Branch) -> f64 {
        self.r_in - branch.sign() * self.r_s + self.r_i
    }

    /// Output noise in photons for the given bath occupations.
    pub fn output_noise(&self, occ: &BathOccupations) -> f64 {
        self.r_in * (occ.n_in + 0.5) + self.r_s * (occ.n_s + 0.5) + self.r_i * (occ.n_i + 0.5)
    }
}

fn threshold_error(res: &ResonatorParams) -> Error {
    Error::OscillationThreshold { threshold_kappa_s: res.total_loss() }
}

/// D(ω) = ω − ω_r + iκ̄ ± K(ω), together with C(ω).
fn denominator(
    res: &ResonatorParams,
    ens: &SpinEnsemble,
    branch: Branch,
    omega: AngularFrequency,
) -> Result<(Complex64, f64)> {
    res.validate()?;
    let k = ens.eval_k(omega)?;
    let d = Complex64::new(omega.0 - res.omega_r.0, res.kappa_bar()) + branch.sign() * k;
    if d.norm() <= 0.5 * THRESHOLD_REL * res.total_loss() {
        return Err(threshold_error(res));
    }
    let c = ens.eval_c(omega)?.0;
    Ok((d, c))
}

/// r(ω) = iκ_e/D(ω) − 1.
pub fn reflection(
    res: &ResonatorParams,
    ens: &SpinEnsemble,
    branch: Branch,
    omega: AngularFrequency,
) -> Result<Complex64> {
    let (d, _) = denominator(res, ens, branch, omega)?;
    Ok(Complex64::new(0.0, res.kappa_e.0) / d - 1.0)
}

/// 20·log10|r|, floored at [`GAIN_FLOOR_DB`].
pub fn gain_db(r: Complex64) -> f64 {
    let m = r.norm();
    if m == 0.0 {
        return GAIN_FLOOR_DB;
    }
    (20.0 * m.log10()).max(GAIN_FLOOR_DB)
}

fn check_grid(grid: &[AngularFrequency]) -> Result<()> {
    if grid.is_empty() {
        return invalid("frequency grid is empty");
    }
    if grid.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return invalid("frequency grid must be strictly increasing");
    }
    Ok(())
}

/// Gain in dB at every grid point. A failing point keeps its error and does
/// not abort the sweep.
pub fn gain_spectrum(
    res: &ResonatorParams,
    ens: &SpinEnsemble,
    branch: Branch,
    grid: &[AngularFrequency],
) -> Result<Vec<(AngularFrequency, Result<f64>)>> {
    check_grid(grid)?;
    Ok(grid
        .par_iter()
        .map(|&w| (w, reflection(res, ens, branch, w).map(gain_db)))
        .collect())
}

/// Peak power gain on resonance, ((κ_e − κ_i + κ_s)/(κ_e + κ_i − κ_s))².
pub fn peak_gain(kappa_e: Rate, kappa_i: Rate, kappa_s: Rate) -> Result<f64> {
    let (ke, ki, ks) = (kappa_e.0, kappa_i.0, kappa_s.0);
    if !(ke > 0.0) || !(ki >= 0.0) || !(ks >= 0.0) {
        return invalid("peak gain needs kappa_e > 0 and non-negative kappa_i, kappa_s");
    }
    let den = ke + ki - ks;
    if den.abs() < THRESHOLD_REL * (ke + ki) {
        return Err(Error::OscillationThreshold { threshold_kappa_s: ke + ki });
    }
    let q = (ke - ki + ks) / den;
    Ok(q * q)
}

pub fn noise_coefficients(
    res: &ResonatorParams,
    ens: &SpinEnsemble,
    branch: Branch,
    omega: AngularFrequency,
) -> Result<NoiseCoefficients> {
    let (d, c) = denominator(res, ens, branch, omega)?;
    let r = Complex64::new(0.0, res.kappa_e.0) / d - 1.0;
    let d2 = d.norm_sqr();
    Ok(NoiseCoefficients {
        r_in: r.norm_sqr(),
        r_s: res.kappa_e.0 * c / d2,
        r_i: res.kappa_e.0 * res.kappa_i.0 / d2,
    })
}

/// n_out = R_in(n_in+½) + R_s(n_s+½) + R_i(n_i+½), in photons.
pub fn output_noise(
    res: &ResonatorParams,
    ens: &SpinEnsemble,
    branch: Branch,
    occ: &BathOccupations,
    omega: AngularFrequency,
) -> Result<f64> {
    Ok(noise_coefficients(res, ens, branch, omega)?.output_noise(occ))
}

/// Amplifier noise referred to its input, n_m = (R_s/R_in)(n_s+½) + (R_i/R_in)(n_i+½).
pub fn input_referred_noise(
    res: &ResonatorParams,
    ens: &SpinEnsemble,
    occ: &BathOccupations,
    omega: AngularFrequency,
) -> Result<f64> {
    let c = noise_coefficients(res, ens, Branch::Amplify, omega)?;
    referred(&c, occ)
}

fn referred(c: &NoiseCoefficients, occ: &BathOccupations) -> Result<f64> {
    if c.r_in == 0.0 {
        return Err(Error::ZeroGain);
    }
    Ok((c.r_s * (occ.n_s + 0.5) + c.r_i * (occ.n_i + 0.5)) / c.r_in)
}

/// Resonant amplifier coefficients (ω = ω_r = ω_s) in closed form.
pub fn resonant_amplifier_coefficients(kappa_e: Rate, kappa_i: Rate, kappa_s: Rate) -> Result<NoiseCoefficients> {
    let (ke, ki, ks) = (kappa_e.0, kappa_i.0, kappa_s.0);
    let gm = peak_gain(kappa_e, kappa_i, kappa_s)?;
    let den = (ke + ki - ks).powi(2);
    Ok(NoiseCoefficients { r_in: gm, r_s: 4.0 * ke * ks / den, r_i: 4.0 * ke * ki / den })
}

/// (G_s/G_m, G_i/G_m) on resonance.
pub fn resonant_noise_ratios(kappa_e: Rate, kappa_i: Rate, kappa_s: Rate) -> Result<(f64, f64)> {
    let (ke, ki, ks) = (kappa_e.0, kappa_i.0, kappa_s.0);
    let num = (ke - ki + ks).powi(2);
    if num == 0.0 {
        return Err(Error::ZeroGain);
    }
    Ok((4.0 * ke * ks / num, 4.0 * ke * ki / num))
}

/// Input-referred amplifier noise on resonance.
pub fn resonant_input_referred_noise(
    kappa_e: Rate,
    kappa_i: Rate,
    kappa_s: Rate,
    occ: &BathOccupations,
) -> Result<f64> {
    let (gs, gi) = resonant_noise_ratios(kappa_e, kappa_i, kappa_s)?;
    Ok(gs * (occ.n_s + 0.5) + gi * (occ.n_i + 0.5))
}

/// Resonant cooling coefficients (ω = ω_r = ω_s) in closed form.
pub fn resonant_cooling_coefficients(kappa_e: Rate, kappa_i: Rate, kappa_s: Rate) -> Result<NoiseCoefficients> {
    let (ke, ki, ks) = (kappa_e.0, kappa_i.0, kappa_s.0);
    if !(ke > 0.0) || !(ki >= 0.0) || !(ks >= 0.0) {
        return invalid("cooling coefficients need kappa_e > 0 and non-negative kappa_i, kappa_s");
    }
    let den = (ke + ki + ks).powi(2);
    Ok(NoiseCoefficients {
        r_in: (ke - ki - ks).powi(2) / den,
        r_s: 4.0 * ke * ks / den,
        r_i: 4.0 * ke * ki / den,
    })
}

/// Cooler output noise at critical coupling κ_e = κ_i + κ_s, on resonance.
pub fn critical_cooler_noise(kappa_e: Rate, kappa_i: Rate, kappa_s: Rate, occ: &BathOccupations) -> Result<f64> {
    if !(kappa_e.0 > 0.0) {
        return invalid("kappa_e must be positive");
    }
    Ok(kappa_s.0 / kappa_e.0 * (occ.n_s + 0.5) + kappa_i.0 / kappa_e.0 * (occ.n_i + 0.5))
}

/// Bandwidth summary of a gain peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bandwidth {
    pub peak_omega: AngularFrequency,
    pub peak_gain_db: f64,
    /// Full width at half power, Hz.
    pub fwhm_hz: f64,
    /// √G_m × FWHM, Hz.
    pub gbp_hz: f64,
}

/// FWHM and gain-bandwidth product of a sampled gain peak `(ω, gain_dB)`.
///
/// The half-power points are located by linear interpolation around the
/// maximum. The product uses the voltage-gain convention √G_m · FWHM.
pub fn bandwidth_and_gbp(spectrum: &[(AngularFrequency, f64)]) -> Result<Bandwidth> {
    if spectrum.len() < 3 {
        return invalid("gain spectrum needs at least 3 points");
    }
    if spectrum.windows(2).any(|w| !(w[1].0 .0 > w[0].0 .0)) {
        return invalid("gain spectrum frequencies must be strictly increasing");
    }
    let (imax, &(wmax, gmax)) = spectrum
        .iter()
        .enumerate()
        .filter(|(_, p)| p.1.is_finite())
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .ok_or_else(|| Error::InvalidInput("gain spectrum has no finite values".into()))?;
    if !(gmax > 3.0) {
        return invalid(format!("no gain peak above 3 dB (maximum {gmax} dB)"));
    }
    if imax == 0 || imax == spectrum.len() - 1 {
        return Err(Error::FeatureAtEdge("gain maximum at the edge of the sweep".into()));
    }
    let level = gmax - 10.0 * 2f64.log10();
    let cross = |a: (AngularFrequency, f64), b: (AngularFrequency, f64)| {
        let t = (level - a.1) / (b.1 - a.1);
        a.0 .0 + t * (b.0 .0 - a.0 .0)
    };
    let left = (1..=imax)
        .rev()
        .find(|&k| spectrum[k - 1].1 <= level)
        .map(|k| cross(spectrum[k - 1], spectrum[k]))
        .ok_or_else(|| Error::FeatureAtEdge("lower half-power point outside the sweep".into()))?;
    let right = (imax..spectrum.len() - 1)
        .find(|&k| spectrum[k + 1].1 <= level)
        .map(|k| cross(spectrum[k], spectrum[k + 1]))
        .ok_or_else(|| Error::FeatureAtEdge("upper half-power point outside the sweep".into()))?;
    let fwhm_hz = AngularFrequency(right - left).hz();
    let gm = 10f64.powf(gmax / 10.0);
    Ok(Bandwidth { peak_omega: wmax, peak_gain_db: gmax, fwhm_hz, gbp_hz: gm.sqrt() * fwhm_hz })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompressionPoint {
    pub small_signal_gain_db: f64,
    /// Input power at which the gain has dropped by 1 dB.
    pub p_1db_in_dbm: f64,
    /// The same point referred to the output, P_1dB + G_ss − 1 dB.
    pub p_1db_out_dbm: f64,
}

/// 1 dB compression point of a gain-versus-input-power curve.
///
/// The small-signal gain is the median over the lowest-power 20% of points.
pub fn compression_point(curve: &[(f64, f64)]) -> Result<CompressionPoint> {
    if curve.len() < 3 {
        return invalid("compression curve needs at least 3 points");
    }
    if curve.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return invalid("compression curve contains non-finite values");
    }
    if curve.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return invalid("compression curve input powers must be strictly increasing");
    }
    let m = (curve.len() / 5).max(1);
    let mut low: Vec<f64> = curve[..m].iter().map(|p| p.1).collect();
    low.sort_by(f64::total_cmp);
    let gss = if m % 2 == 1 { low[m / 2] } else { 0.5 * (low[m / 2 - 1] + low[m / 2]) };
    let level = gss - 1.0;
    let k = (1..curve.len())
        .find(|&k| curve[k].1 <= level)
        .ok_or_else(|| Error::InvalidInput("no 1 dB compression within the measured range".into()))?;
    let (a, b) = (curve[k - 1], curve[k]);
    let p = if b.1 == a.1 { b.0 } else { a.0 + (level - a.1) / (b.1 - a.1) * (b.0 - a.0) };
    Ok(CompressionPoint { small_signal_gain_db: gss, p_1db_in_dbm: p, p_1db_out_dbm: p + gss - 1.0 })
}

/// Input power corresponding to an output power at a given gain.
pub fn input_referred_power(p_out_dbm: f64, gain_db: f64) -> f64 {
    p_out_dbm - gain_db
}
