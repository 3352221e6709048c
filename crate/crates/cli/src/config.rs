//! TOML run configuration. Frequencies and rates are given in Hz (ω/2π),
//! temperatures in kelvin and powers in W or dBm.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use maser_core::chain::{ChainMode, ChainParams};
use maser_core::quantities::dbm_to_watt;
use maser_core::spectrum::{Spin, TabulatedProfile};
use maser_core::thermo::bose_occupation;
use maser_core::{AngularFrequency, BathOccupations, Branch, Rate, ResonatorParams, SpinEnsemble, Temperature};
use serde::Deserialize;

use crate::error::{config, CliError, CliResult};
use crate::io::Table;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub resonator: Option<ResonatorCfg>,
    pub ensemble: Option<EnsembleCfg>,
    pub baths: Option<BathsCfg>,
    pub chain: Option<ChainCfg>,
    pub sweep: Option<SweepCfg>,
    #[serde(default)]
    pub mode: ModeCfg,
    pub drive: Option<DriveCfg>,
    /// Directory that relative paths in the file are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonatorCfg {
    pub omega_r_hz: f64,
    pub kappa_e_hz: f64,
    pub kappa_i_hz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    /// No spins: a bare resonator.
    None,
    Lorentzian,
    Gaussian,
    TripleLorentzian,
    Discrete,
    Tabulated,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleCfg {
    pub profile: ProfileKind,
    pub omega_s_hz: Option<f64>,
    /// Lorentzian FWHM of the distribution.
    pub width_hz: Option<f64>,
    pub sigma_hz: Option<f64>,
    pub splitting_hz: Option<f64>,
    /// Homogeneous (spin) linewidth.
    pub gamma_hz: Option<f64>,
    pub g_ens_hz: Option<f64>,
    /// Alternative to `g_ens_hz`: the on-resonance spin emission rate.
    pub kappa_s_hz: Option<f64>,
    /// CSV `omega_hz,g_hz`, one row per spin.
    pub spins_csv: Option<PathBuf>,
    /// CSV `omega_hz,f_per_hz`.
    pub profile_csv: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathsCfg {
    pub t_in_k: Option<f64>,
    pub n_in: Option<f64>,
    /// Negative for an inverted spin bath.
    pub t_s_k: Option<f64>,
    pub n_s: Option<f64>,
    pub t_i_k: Option<f64>,
    pub n_i: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainCfg {
    pub beta: Option<f64>,
    pub insertion_loss_db: Option<f64>,
    pub g_a: Option<f64>,
    pub g_a_db: Option<f64>,
    pub t_a_k: f64,
    pub t_0_k: f64,
    /// Defaults to the resonator frequency.
    pub omega_hz: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepCfg {
    pub start_hz: f64,
    pub stop_hz: f64,
    pub points: usize,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeCfg {
    pub branch: Option<Branch>,
    pub chain: Option<ChainMode>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveCfg {
    pub power_w: Option<f64>,
    pub power_dbm: Option<f64>,
    /// Number of identically coupled spins, for an ensemble coupling estimate.
    pub n_spins: Option<u64>,
}

fn finite(name: &str, v: f64) -> CliResult<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        config(format!("{name} must be finite, got {v}"))
    }
}

fn positive(name: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        config(format!("{name} must be positive, got {v}"))
    }
}

fn non_negative(name: &str, v: f64) -> CliResult<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        config(format!("{name} must be non-negative, got {v}"))
    }
}

fn require<T: Copy>(name: &str, v: Option<T>) -> CliResult<T> {
    v.ok_or_else(|| CliError::Config(format!("{name} is required")))
}

fn one_of(a: (&str, Option<f64>), b: (&str, Option<f64>)) -> CliResult<Option<Result<f64, f64>>> {
    match (a.1, b.1) {
        (Some(_), Some(_)) => config(format!("give only one of {} and {}", a.0, b.0)),
        (Some(x), None) => Ok(Some(Ok(x))),
        (None, Some(y)) => Ok(Some(Err(y))),
        (None, None) => Ok(None),
    }
}

fn section<'a, T>(name: &str, s: &'a Option<T>) -> CliResult<&'a T> {
    s.as_ref().ok_or_else(|| CliError::Config(format!("missing [{name}] section")))
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self { base_dir: PathBuf::from("."), ..Self::default() });
        };
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn resonator(&self) -> CliResult<ResonatorParams> {
        let r = section("resonator", &self.resonator)?;
        let w = positive("resonator.omega_r_hz", r.omega_r_hz)?;
        let ke = positive("resonator.kappa_e_hz", r.kappa_e_hz)?;
        let ki = non_negative("resonator.kappa_i_hz", r.kappa_i_hz)?;
        Ok(ResonatorParams::new(AngularFrequency::from_hz(w), Rate::from_hz(ke), Rate::from_hz(ki))?)
    }

    /// The configured ensemble. Without a coupling entry, continuous
    /// profiles get unit coupling unless `need_coupling` is set.
    pub fn ensemble(&self, need_coupling: bool) -> CliResult<SpinEnsemble> {
        let e = section("ensemble", &self.ensemble)?;
        let hz = |name: &str, v: Option<f64>| -> CliResult<Rate> {
            Ok(Rate::from_hz(non_negative(&format!("ensemble.{name}"), require(&format!("ensemble.{name}"), v)?)?))
        };
        let center = || -> CliResult<AngularFrequency> {
            let f = require("ensemble.omega_s_hz", e.omega_s_hz)?;
            Ok(AngularFrequency::from_hz(finite("ensemble.omega_s_hz", f)?))
        };
        let unit = Rate(1.0);
        let base = match e.profile {
            ProfileKind::None => {
                let w = AngularFrequency::from_hz(finite("ensemble.omega_s_hz", e.omega_s_hz.unwrap_or(0.0))?);
                return Ok(SpinEnsemble::lorentzian(w, Rate(0.0), unit, Rate(0.0))?);
            }
            ProfileKind::Lorentzian => {
                SpinEnsemble::lorentzian(center()?, hz("width_hz", e.width_hz)?, hz("gamma_hz", e.gamma_hz)?, unit)?
            }
            ProfileKind::Gaussian => {
                let sigma = positive("ensemble.sigma_hz", require("ensemble.sigma_hz", e.sigma_hz)?)?;
                SpinEnsemble::gaussian(center()?, Rate::from_hz(sigma), hz("gamma_hz", e.gamma_hz)?, unit)?
            }
            ProfileKind::TripleLorentzian => SpinEnsemble::triple_lorentzian(
                center()?,
                hz("width_hz", e.width_hz)?,
                hz("splitting_hz", e.splitting_hz)?,
                hz("gamma_hz", e.gamma_hz)?,
                unit,
            )?,
            ProfileKind::Discrete => {
                let path = self.resolve(e.spins_csv.as_deref().ok_or_else(|| {
                    CliError::Config("ensemble.spins_csv is required for a discrete profile".into())
                })?);
                let t = Table::read(&path, &["omega_hz", "g_hz"])?;
                let spins = t
                    .numeric()?
                    .into_iter()
                    .map(|r| Spin { omega: AngularFrequency::from_hz(r[0]), g: 2.0 * PI * r[1] })
                    .collect();
                SpinEnsemble::discrete(spins, hz("gamma_hz", e.gamma_hz)?)?
            }
            ProfileKind::Tabulated => {
                let path = self.resolve(e.profile_csv.as_deref().ok_or_else(|| {
                    CliError::Config("ensemble.profile_csv is required for a tabulated profile".into())
                })?);
                let t = Table::read(&path, &["omega_hz", "f_per_hz"])?;
                let points: Vec<(f64, f64)> =
                    t.numeric()?.into_iter().map(|r| (2.0 * PI * r[0], r[1] / (2.0 * PI))).collect();
                SpinEnsemble::tabulated(TabulatedProfile::new(&points)?, hz("gamma_hz", e.gamma_hz)?, unit)?
            }
        };
        match one_of(("ensemble.g_ens_hz", e.g_ens_hz), ("ensemble.kappa_s_hz", e.kappa_s_hz))? {
            Some(Ok(g)) => Ok(base.with_coupling(Rate::from_hz(non_negative("ensemble.g_ens_hz", g)?))?),
            Some(Err(ks)) => {
                let ks = Rate::from_hz(non_negative("ensemble.kappa_s_hz", ks)?).0;
                let gamma_eff = base.effective_linewidth()?.0;
                Ok(base.with_coupling(Rate((ks * gamma_eff / 4.0).sqrt()))?)
            }
            None if e.profile == ProfileKind::Discrete || !need_coupling => Ok(base),
            None => config("ensemble needs g_ens_hz or kappa_s_hz"),
        }
    }

    /// Bath occupations at `omega`. A missing section means all baths are
    /// in their ground state.
    pub fn baths(&self, omega: AngularFrequency) -> CliResult<BathOccupations> {
        let Some(b) = &self.baths else {
            return Ok(BathOccupations::uniform(0.0)?);
        };
        let occ = |t: (&str, Option<f64>), n: (&str, Option<f64>)| -> CliResult<f64> {
            match one_of(t, n)? {
                Some(Ok(t_k)) => {
                    if t_k == 0.0 {
                        return Ok(0.0);
                    }
                    Ok(bose_occupation(omega, Temperature(finite(&format!("baths.{}", t.0), t_k)?))?)
                }
                Some(Err(n_v)) => non_negative(&format!("baths.{}", n.0), n_v),
                None => config(format!("baths needs {} or {}", t.0, n.0)),
            }
        };
        Ok(BathOccupations::new(
            occ(("t_in_k", b.t_in_k), ("n_in", b.n_in))?,
            occ(("t_s_k", b.t_s_k), ("n_s", b.n_s))?,
            occ(("t_i_k", b.t_i_k), ("n_i", b.n_i))?,
        )?)
    }

    pub fn chain(&self) -> CliResult<ChainParams> {
        let c = section("chain", &self.chain)?;
        let beta = match one_of(("chain.beta", c.beta), ("chain.insertion_loss_db", c.insertion_loss_db))? {
            Some(Ok(b)) => b,
            Some(Err(db)) => ChainParams::beta_from_insertion_loss(db)?,
            None => return config("chain needs beta or insertion_loss_db"),
        };
        let g_a = match one_of(("chain.g_a", c.g_a), ("chain.g_a_db", c.g_a_db))? {
            Some(Ok(g)) => g,
            Some(Err(db)) => 10f64.powf(finite("chain.g_a_db", db)? / 10.0),
            None => return config("chain needs g_a or g_a_db"),
        };
        let omega = match (c.omega_hz, &self.resonator) {
            (Some(f), _) => positive("chain.omega_hz", f)?,
            (None, Some(r)) => positive("resonator.omega_r_hz", r.omega_r_hz)?,
            (None, None) => return config("chain.omega_hz is required without a [resonator] section"),
        };
        Ok(ChainParams::new(
            beta,
            g_a,
            Temperature(positive("chain.t_a_k", c.t_a_k)?),
            Temperature(positive("chain.t_0_k", c.t_0_k)?),
            AngularFrequency::from_hz(omega),
        )?)
    }

    pub fn sweep(&self) -> CliResult<Vec<AngularFrequency>> {
        let s = section("sweep", &self.sweep)?;
        let a = positive("sweep.start_hz", s.start_hz)?;
        let b = positive("sweep.stop_hz", s.stop_hz)?;
        if s.points < 2 {
            return config(format!("sweep.points must be at least 2, got {}", s.points));
        }
        if !(b > a) {
            return config("sweep.stop_hz must exceed sweep.start_hz");
        }
        let n = (s.points - 1) as f64;
        Ok((0..s.points).map(|k| AngularFrequency::from_hz(a + (b - a) * (k as f64 / n))).collect())
    }

    /// Drive power in W.
    pub fn drive_power(&self) -> CliResult<f64> {
        let d = section("drive", &self.drive)?;
        match one_of(("drive.power_w", d.power_w), ("drive.power_dbm", d.power_dbm))? {
            Some(Ok(w)) => non_negative("drive.power_w", w),
            Some(Err(dbm)) => Ok(dbm_to_watt(finite("drive.power_dbm", dbm)?)?),
            None => config("drive needs power_w or power_dbm"),
        }
    }
}
