//! Receiver-chain noise model: device → lossy line (transmissivity β) →
//! second-stage amplifier (gain G_A, noise n_A).
//!
//! All bookkeeping is in photon numbers; temperatures are converted at the
//! boundary only.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quantities::{AngularFrequency, Temperature};
use crate::response::{output_noise, BathOccupations, Branch, ResonatorParams};
use crate::spectrum::SpinEnsemble;
use crate::thermo::{bose_occupation, temperature_from_occupation};

/// Half-width of the insertion-loss uncertainty band, dB.
pub const INSERTION_LOSS_UNCERTAINTY_DB: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainMode {
    /// Keeps G_A − 1 as written.
    #[default]
    Exact,
    /// Replaces G_A − 1 by G_A, and reports temperatures from the
    /// large-occupation linear form.
    PaperApprox,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub beta: f64,
    pub g_a: f64,
    pub t_a: Temperature,
    pub t_0: Temperature,
    pub omega: AngularFrequency,
}

impl ChainParams {
    pub fn new(beta: f64, g_a: f64, t_a: Temperature, t_0: Temperature, omega: AngularFrequency) -> Result<Self> {
        let c = Self { beta, g_a, t_a, t_0, omega };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return invalid(format!("transmissivity beta must lie in (0, 1], got {}", self.beta));
        }
        if !(self.g_a > 1.0) || !self.g_a.is_finite() {
            return invalid(format!("second-stage gain must exceed 1, got {}", self.g_a));
        }
        if !(self.t_a.0 > 0.0) || !self.t_a.0.is_finite() {
            return invalid(format!("amplifier noise temperature must be positive, got {}", self.t_a.0));
        }
        if !(self.t_0.0 > 0.0) || !self.t_0.0.is_finite() {
            return invalid(format!("ambient temperature must be positive, got {}", self.t_0.0));
        }
        if !(self.omega.0 > 0.0) {
            return invalid(format!("chain frequency must be positive, got {}", self.omega.0));
        }
        Ok(())
    }

    /// β from an insertion loss in dB.
    pub fn beta_from_insertion_loss(loss_db: f64) -> Result<f64> {
        if !(loss_db >= 0.0) || !loss_db.is_finite() {
            return invalid(format!("insertion loss must be non-negative, got {loss_db} dB"));
        }
        Ok(10f64.powf(-loss_db / 10.0))
    }

    pub fn insertion_loss_db(&self) -> f64 {
        -10.0 * self.beta.log10()
    }

    pub fn with_beta(&self, beta: f64) -> Self {
        Self { beta, ..*self }
    }

    /// Ambient occupation n₀.
    pub fn n0(&self) -> Result<f64> {
        bose_occupation(self.omega, self.t_0)
    }

    /// Second-amplifier occupation n_A.
    pub fn n_a(&self) -> Result<f64> {
        bose_occupation(self.omega, self.t_a)
    }

    fn added_gain(&self, mode: ChainMode) -> f64 {
        match mode {
            ChainMode::Exact => self.g_a - 1.0,
            ChainMode::PaperApprox => self.g_a,
        }
    }
}

/// Which path the forward model describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainPath {
    /// Device in line, emitting `device_output` photons.
    On,
    /// Device disabled: the line sees the ambient load directly.
    OffBaseline,
}

/// Photons at the second-amplifier output.
pub fn forward_output_noise(chain: &ChainParams, device_output: f64, path: ChainPath, mode: ChainMode) -> Result<f64> {
    chain.validate()?;
    let n0h = chain.n0()? + 0.5;
    let nah = chain.n_a()? + 0.5;
    let amp = chain.added_gain(mode) * nah;
    Ok(match path {
        ChainPath::On => chain.g_a * chain.beta * device_output + chain.g_a * (1.0 - chain.beta) * n0h + amp,
        ChainPath::OffBaseline => chain.g_a * n0h + amp,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NoiseMeasurement {
    /// On/off noise ratio G_n of the maser, with its peak power gain.
    MaserOnOff { ratio: f64, g_m: f64 },
    /// On/off noise ratio R_n of the cooler.
    CoolerOnOff { ratio: f64 },
}

/// An extracted device noise figure and its spread over β ± 0.1 dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extraction {
    /// Photons.
    pub n: f64,
    /// Noise temperature; `None` when the photon number is not positive.
    pub t: Option<Temperature>,
    pub n_interval: (f64, f64),
    pub t_interval: Option<(Temperature, Temperature)>,
}

/// On/off ratio G_n for a maser of peak gain `g_m` and input-referred noise `n_m`.
pub fn forward_maser_ratio(chain: &ChainParams, g_m: f64, n_m: f64, mode: ChainMode) -> Result<f64> {
    let n0h = chain.n0()? + 0.5;
    let on = forward_output_noise(chain, g_m * (n0h + n_m), ChainPath::On, mode)?;
    let off = forward_output_noise(chain, n0h, ChainPath::OffBaseline, mode)?;
    Ok(on / off)
}

/// On/off ratio R_n for a cooler emitting `n_c` photons.
pub fn forward_cooler_ratio(chain: &ChainParams, n_c: f64, mode: ChainMode) -> Result<f64> {
    let on = forward_output_noise(chain, n_c, ChainPath::On, mode)?;
    let off = forward_output_noise(chain, chain.n0()? + 0.5, ChainPath::OffBaseline, mode)?;
    Ok(on / off)
}

fn maser_photons(chain: &ChainParams, ratio: f64, g_m: f64, mode: ChainMode) -> Result<f64> {
    let n0h = chain.n0()? + 0.5;
    let nah = chain.n_a()? + 0.5;
    let off = forward_output_noise(chain, n0h, ChainPath::OffBaseline, mode)?;
    let rest = chain.g_a * (1.0 - chain.beta) * n0h + chain.added_gain(mode) * nah;
    Ok((ratio * off - rest) / (chain.g_a * g_m * chain.beta) - n0h)
}

fn cooler_photons(chain: &ChainParams, ratio: f64, mode: ChainMode) -> Result<f64> {
    let n0h = chain.n0()? + 0.5;
    let nah = chain.n_a()? + 0.5;
    let off = forward_output_noise(chain, n0h, ChainPath::OffBaseline, mode)?;
    let rest = chain.g_a * (1.0 - chain.beta) * n0h + chain.added_gain(mode) * nah;
    Ok((ratio * off - rest) / (chain.g_a * chain.beta))
}

/// Large-occupation temperature form of the maser inversion.
pub fn maser_temperature_linear(chain: &ChainParams, ratio: f64, g_m: f64) -> f64 {
    let (t0, ta, b) = (chain.t_0.0, chain.t_a.0, chain.beta);
    (ratio * (t0 + ta) - (1.0 - b) * t0 - ta) / (g_m * b) - t0
}

/// Large-occupation temperature form of the cooler inversion.
pub fn cooler_temperature_linear(chain: &ChainParams, ratio: f64) -> f64 {
    let (t0, ta, b) = (chain.t_0.0, chain.t_a.0, chain.beta);
    (ratio * (t0 + ta) - (1.0 - b) * t0 - ta) / b
}

fn beta_band(chain: &ChainParams) -> Result<[ChainParams; 3]> {
    let il = chain.insertion_loss_db();
    let lo = ChainParams::beta_from_insertion_loss((il - INSERTION_LOSS_UNCERTAINTY_DB).max(0.0))?;
    let hi = ChainParams::beta_from_insertion_loss(il + INSERTION_LOSS_UNCERTAINTY_DB)?;
    Ok([chain.with_beta(hi), *chain, chain.with_beta(lo)])
}

fn spread(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

fn positive_temperature(chain: &ChainParams, n: f64, linear: Option<f64>) -> Result<Option<Temperature>> {
    match linear {
        Some(t) => Ok((t > 0.0).then_some(Temperature(t))),
        // occupations within round-off of zero carry no temperature
        None if n > 1e-12 * (chain.n0()? + 0.5) => Ok(Some(temperature_from_occupation(chain.omega, n)?)),
        None => Ok(None),
    }
}

fn assemble(
    band: &[ChainParams; 3],
    photons: impl Fn(&ChainParams) -> Result<f64>,
    linear: impl Fn(&ChainParams) -> Option<f64>,
) -> Result<Extraction> {
    let ns: Vec<f64> = band.iter().map(&photons).collect::<Result<_>>()?;
    let ts: Vec<Option<Temperature>> = band
        .iter()
        .zip(&ns)
        .map(|(c, &n)| positive_temperature(c, n, linear(c)))
        .collect::<Result<_>>()?;
    let t_interval = if ts.iter().all(Option::is_some) {
        let v: Vec<f64> = ts.iter().map(|t| t.unwrap().0).collect();
        let (a, b) = spread(&v);
        Some((Temperature(a), Temperature(b)))
    } else {
        None
    };
    Ok(Extraction { n: ns[1], t: ts[1], n_interval: spread(&ns), t_interval })
}

/// Maser input-referred noise from a measured on/off ratio G_n.
pub fn extract_maser_noise(meas: &NoiseMeasurement, chain: &ChainParams, mode: ChainMode) -> Result<Extraction> {
    chain.validate()?;
    let NoiseMeasurement::MaserOnOff { ratio, g_m } = *meas else {
        return invalid("maser extraction needs a maser on/off measurement");
    };
    if !(ratio > 0.0) || !ratio.is_finite() {
        return invalid(format!("noise ratio must be positive, got {ratio}"));
    }
    if !(g_m > 0.0) || !g_m.is_finite() {
        return invalid(format!("maser gain must be positive, got {g_m}"));
    }
    let n = maser_photons(chain, ratio, g_m, mode)?;
    if n <= -0.5 {
        return Err(Error::InconsistentMeasurement(format!(
            "noise ratio {ratio} at gain {g_m} implies maser noise {n} photons, below -1/2"
        )));
    }
    let band = beta_band(chain)?;
    assemble(
        &band,
        |c| maser_photons(c, ratio, g_m, mode),
        |c| (mode == ChainMode::PaperApprox).then(|| maser_temperature_linear(c, ratio, g_m)),
    )
}

/// Cooler output noise from a measured on/off ratio R_n.
pub fn extract_cooler_temperature(meas: &NoiseMeasurement, chain: &ChainParams, mode: ChainMode) -> Result<Extraction> {
    chain.validate()?;
    let NoiseMeasurement::CoolerOnOff { ratio } = *meas else {
        return invalid("cooler extraction needs a cooler on/off measurement");
    };
    if !(ratio > 0.0) || !ratio.is_finite() {
        return invalid(format!("noise ratio must be positive, got {ratio}"));
    }
    let n = cooler_photons(chain, ratio, mode)?;
    if n <= 0.0 {
        return Err(Error::InconsistentMeasurement(format!(
            "noise ratio {ratio} implies cooler output {n} photons"
        )));
    }
    let band = beta_band(chain)?;
    assemble(
        &band,
        |c| cooler_photons(c, ratio, mode),
        |c| (mode == ChainMode::PaperApprox).then(|| cooler_temperature_linear(c, ratio)),
    )
}

/// Predicted on/off noise reduction of the cooler across a sweep, in dB
/// (positive when the output is colder than the ambient baseline).
pub fn predict_cooling_spectrum(
    res: &ResonatorParams,
    ens: &SpinEnsemble,
    occ: &BathOccupations,
    chain: &ChainParams,
    grid: &[AngularFrequency],
    mode: ChainMode,
) -> Result<Vec<(AngularFrequency, Result<f64>)>> {
    use rayon::prelude::*;
    chain.validate()?;
    if grid.is_empty() {
        return invalid("frequency grid is empty");
    }
    let off = forward_output_noise(chain, chain.n0()? + 0.5, ChainPath::OffBaseline, mode)?;
    Ok(grid
        .par_iter()
        .map(|&w| {
            let point = output_noise(res, ens, Branch::Cool, occ, w)
                .and_then(|n| forward_output_noise(chain, n, ChainPath::On, mode))
                .map(|on| -10.0 * (on / off).log10());
            (w, point)
        })
        .collect())
}
