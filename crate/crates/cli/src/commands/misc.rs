use std::path::Path;

use maser_core::coupling::{analyze, ensemble_coupling, Drive, FieldCell, FieldMap};
use maser_core::spectrum::SpinProfile;
use maser_core::thermo::spin_state_from_echo_enhancement;
use maser_core::{AngularFrequency, Rate, Temperature};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{config, CliResult};
use crate::io::{csv_text, json_text, num, write_atomic, Table};

pub const FIELD_MAP_COLUMNS: [&str; 8] = ["x_m", "y_m", "z_m", "volume_m3", "b1x_t", "b1y_t", "b1z_t", "in_sample"];

pub fn spin_temp(chi: f64, t0_k: f64, omega_s_hz: f64, out: &Path) -> CliResult<Value> {
    if !(omega_s_hz > 0.0) || !omega_s_hz.is_finite() {
        return config(format!("--omega-s-hz must be positive, got {omega_s_hz}"));
    }
    let s = spin_state_from_echo_enhancement(chi, Temperature(t0_k), AngularFrequency::from_hz(omega_s_hz))?;
    let doc = json!({
        "chi": num(chi),
        "t0_k": num(t0_k),
        "omega_s_hz": num(omega_s_hz),
        "rho": num(s.rho),
        "t_s_k": num(s.t_s.0),
        "rho_abs": num(s.rho.abs()),
        "t_s_abs_k": num(s.t_s.0.abs()),
        "inverted": s.inverted(),
    });
    write_atomic(out, "spin_temp.json", &json_text(&doc))?;
    Ok(doc)
}

pub fn coupling(input: &Path, cfg: &RunConfig, out: &Path) -> CliResult<Value> {
    let t = Table::read(input, &FIELD_MAP_COLUMNS)?;
    let mut cells = Vec::with_capacity(t.rows.len());
    for r in 0..t.rows.len() {
        let v = |c: usize| t.f64(r, c);
        cells.push(FieldCell {
            position: [v(0)?, v(1)?, v(2)?],
            volume: v(3)?,
            b1: [v(4)?, v(5)?, v(6)?],
            in_sample: t.flag(r, 7)?,
        });
    }
    let map = FieldMap::new(cells)?;
    let res = cfg.resonator()?;
    let drive = Drive { power: cfg.drive_power()?, kappa_e: res.kappa_e, kappa_i: res.kappa_i, omega_r: res.omega_r };
    let c = analyze(&map, &drive)?;
    let mut doc = json!({
        "power_w": num(drive.power),
        "n_bar": num(c.n_bar),
        "g0_hz": num(Rate(c.g0).hz()),
        "eta": num(c.eta),
        "v_m_m3": num(c.v_m),
        "b1_perp_mean_t": num(c.b1_perp_mean),
    });
    if let Some(n) = cfg.drive.as_ref().and_then(|d| d.n_spins) {
        doc["n_spins"] = json!(n);
        doc["g_ens_hz"] = num(Rate(ensemble_coupling(n, c.g0)).hz());
    }
    write_atomic(out, "coupling.json", &json_text(&doc))?;
    Ok(doc)
}

pub const SPIN_COLUMNS: [&str; 2] = ["omega_hz", "g_hz"];

pub fn sample_ensemble(cfg: &RunConfig, spins: usize, seed: u64, out: &Path) -> CliResult<Value> {
    let ens = cfg.ensemble(true)?.sample_discrete(spins, seed)?;
    let SpinProfile::Discrete { spins: drawn } = ens.profile() else {
        unreachable!("sampling always yields a discrete ensemble")
    };
    let rows = drawn.iter().map(|s| vec![s.omega.hz(), Rate(s.g).hz()]);
    let file = write_atomic(out, "spins.csv", &csv_text(&SPIN_COLUMNS, rows))?;
    let doc = json!({
        "spins": drawn.len(),
        "seed": seed,
        "g_ens_hz": num(ens.g_ens().hz()),
        "file": file.file_name().map(|f| f.to_string_lossy().into_owned()),
    });
    Ok(doc)
}
