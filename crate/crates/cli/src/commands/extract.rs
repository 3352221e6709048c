use std::fs;
use std::path::Path;

use maser_core::chain::{
    extract_cooler_temperature, extract_maser_noise, ChainMode, ChainParams, Extraction, NoiseMeasurement,
};
use maser_core::quantities::db_to_power_ratio;
use maser_core::{AngularFrequency, Error};
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::config::RunConfig;
use crate::error::{config, CliError, CliResult};
use crate::io::{json_text, num, write_atomic, Table};

pub const PSD_COLUMNS: [&str; 3] = ["frequency_hz", "psd_on_dbm_per_hz", "psd_off_dbm_per_hz"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Device {
    Maser,
    Cooler,
}

/// Measured on/off noise ratio, plus the maser's peak gain (linear or dB).
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasurementFile {
    ratio: Option<f64>,
    ratio_db: Option<f64>,
    g_m: Option<f64>,
    g_m_db: Option<f64>,
}

fn linear(path: &Path, name: &str, lin: Option<f64>, db: Option<f64>) -> CliResult<Option<f64>> {
    match (lin, db) {
        (Some(_), Some(_)) => config(format!("{}: give only one of {name} and {name}_db", path.display())),
        (Some(v), None) => Ok(Some(v)),
        (None, Some(d)) => Ok(Some(10f64.powf(d / 10.0))),
        (None, None) => Ok(None),
    }
}

fn measurement(path: &Path, device: Device) -> CliResult<NoiseMeasurement> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let m: MeasurementFile =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let ratio = linear(path, "ratio", m.ratio, m.ratio_db)?
        .ok_or_else(|| CliError::Config(format!("{}: ratio or ratio_db is required", path.display())))?;
    let g_m = linear(path, "g_m", m.g_m, m.g_m_db)?;
    Ok(match device {
        Device::Maser => NoiseMeasurement::MaserOnOff {
            ratio,
            g_m: g_m.ok_or_else(|| CliError::Config(format!("{}: g_m or g_m_db is required", path.display())))?,
        },
        Device::Cooler => {
            if g_m.is_some() {
                return config(format!("{}: g_m does not apply to a cooler measurement", path.display()));
            }
            NoiseMeasurement::CoolerOnOff { ratio }
        }
    })
}

fn pair(p: (f64, f64)) -> Value {
    json!([num(p.0), num(p.1)])
}

fn extract(device: Device, meas: &NoiseMeasurement, chain: &ChainParams, mode: ChainMode) -> Result<Extraction, Error> {
    match device {
        Device::Maser => extract_maser_noise(meas, chain, mode),
        Device::Cooler => extract_cooler_temperature(meas, chain, mode),
    }
}

fn report(ex: &Extraction, doc: &mut Map<String, Value>) {
    doc.insert("n".into(), num(ex.n));
    doc.insert("n_interval".into(), pair(ex.n_interval));
    doc.insert("t_k".into(), ex.t.map_or(Value::Null, |t| num(t.0)));
    doc.insert("t_interval_k".into(), ex.t_interval.map_or(Value::Null, |(a, b)| pair((a.0, b.0))));
}

/// Per-bin extraction from a table of on and off noise spectral densities.
fn psd_table(
    device: Device,
    input: &Path,
    g_m_db: Option<f64>,
    chain: &ChainParams,
    mode: ChainMode,
) -> CliResult<Vec<Value>> {
    let g_m = match (device, g_m_db) {
        (Device::Maser, Some(db)) => Some(db_to_power_ratio(db)?),
        (Device::Maser, None) => return config("--g-m-db is required with a maser PSD table"),
        (Device::Cooler, Some(_)) => return config("--g-m-db does not apply to a cooler"),
        (Device::Cooler, None) => None,
    };
    let t = Table::read(input, &PSD_COLUMNS)?;
    let mut points = Vec::with_capacity(t.rows.len());
    for row in t.numeric()? {
        let (f, ratio) = (row[0], db_to_power_ratio(row[1] - row[2])?);
        if !(f > 0.0) {
            return config(format!("{}: frequency_hz must be positive, got {f}", input.display()));
        }
        let meas = match g_m {
            Some(g_m) => NoiseMeasurement::MaserOnOff { ratio, g_m },
            None => NoiseMeasurement::CoolerOnOff { ratio },
        };
        let at = ChainParams { omega: AngularFrequency::from_hz(f), ..*chain };
        let ex = extract(device, &meas, &at, mode).map_err(|e| match e {
            Error::InconsistentMeasurement(m) => Error::InconsistentMeasurement(format!("at {f} Hz: {m}")),
            e => e,
        })?;
        let mut p = Map::new();
        p.insert("frequency_hz".into(), num(f));
        p.insert("ratio".into(), num(ratio));
        report(&ex, &mut p);
        points.push(Value::Object(p));
    }
    Ok(points)
}

/// `input` is either a JSON measurement or, with a `.csv` extension, a PSD
/// table `frequency_hz,psd_on_dbm_per_hz,psd_off_dbm_per_hz`.
pub fn run(
    device: Device,
    input: &Path,
    g_m_db: Option<f64>,
    cfg: &RunConfig,
    mode: ChainMode,
    out: &Path,
) -> CliResult<Value> {
    let chain = cfg.chain()?;
    let name = match device {
        Device::Maser => "maser",
        Device::Cooler => "cooler",
    };
    let mut doc = Map::new();
    doc.insert("kind".into(), json!(name));
    doc.insert("mode".into(), serde_json::to_value(mode).expect("chain mode serializes"));
    doc.insert("beta".into(), num(chain.beta));
    doc.insert("insertion_loss_db".into(), num(chain.insertion_loss_db()));
    if input.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        doc.insert("points".into(), Value::Array(psd_table(device, input, g_m_db, &chain, mode)?));
    } else {
        if g_m_db.is_some() {
            return config("--g-m-db applies to PSD tables; put g_m_db in the measurement file");
        }
        report(&extract(device, &measurement(input, device)?, &chain, mode)?, &mut doc);
    }
    let doc = Value::Object(doc);
    write_atomic(out, &format!("extract_{name}.json"), &json_text(&doc))?;
    Ok(doc)
}
