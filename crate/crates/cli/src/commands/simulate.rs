use std::path::Path;

use maser_core::response::{bandwidth_and_gbp, gain_db, noise_coefficients, reflection};
use maser_core::{Branch, Rate, SpinEnsemble};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::io::{csv_text, json_text, num, opt_num, write_atomic};

pub const SPECTRUM_COLUMNS: [&str; 8] = ["omega_hz", "re", "im", "gain_db", "r_in", "r_s", "r_i", "n_out"];

/// Relative distance to threshold below which the amplifier is treated as
/// oscillating.
const THRESHOLD_REL: f64 = 1e-9;

pub fn run(cfg: &RunConfig, branch: Branch, out: &Path) -> CliResult<Value> {
    let res = cfg.resonator()?;
    let ens = match cfg.ensemble {
        Some(_) => cfg.ensemble(true)?,
        None => SpinEnsemble::lorentzian(res.omega_r, Rate(0.0), Rate(1.0), Rate(0.0))?,
    };
    let grid = cfg.sweep()?;
    let occ = cfg.baths(res.omega_r)?;

    let kappa_s = ens.kappa_s()?.0;
    let total = res.total_loss();
    if branch == Branch::Amplify && kappa_s >= total * (1.0 - THRESHOLD_REL) {
        return Err(CliError::Threshold(format!(
            "kappa_s = {} Hz is at or above the threshold kappa_e + kappa_i = {} Hz",
            Rate(kappa_s).hz(),
            Rate(total).hz()
        )));
    }

    let mut rows = Vec::with_capacity(grid.len());
    let mut gains = Vec::with_capacity(grid.len());
    for &w in &grid {
        let r = reflection(&res, &ens, branch, w)?;
        let c = noise_coefficients(&res, &ens, branch, w)?;
        let g = gain_db(r);
        gains.push((w, g));
        rows.push(vec![w.hz(), r.re, r.im, g, c.r_in, c.r_s, c.r_i, c.output_noise(&occ)]);
    }

    // gain on resonance without the plotting floor, so a perfect match
    // reports -inf
    let r0 = reflection(&res, &ens, branch, res.omega_r)?;
    let g_m_db = 10.0 * r0.norm_sqr().log10();
    // no gain peak (cooler, bare resonator, peak outside the sweep) leaves
    // the bandwidth fields empty
    let band = match branch {
        Branch::Amplify => bandwidth_and_gbp(&gains).ok(),
        Branch::Cool => None,
    };

    let summary = json!({
        "branch": branch_name(branch),
        "points": grid.len(),
        "omega_r_hz": num(res.omega_r.hz()),
        "kappa_e_hz": num(res.kappa_e.hz()),
        "kappa_i_hz": num(res.kappa_i.hz()),
        "kappa_s_hz": num(Rate(kappa_s).hz()),
        "g_m": num(r0.norm_sqr()),
        "g_m_db": num(g_m_db),
        "sweep_peak_gain_db": num(gains.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max)),
        "fwhm_hz": opt_num(band.map(|b| b.fwhm_hz)),
        "gbp_hz": opt_num(band.map(|b| b.gbp_hz)),
        "threshold_kappa_s_hz": num(Rate(total).hz()),
        "threshold_margin": match branch {
            Branch::Amplify => num(1.0 - kappa_s / total),
            Branch::Cool => Value::Null,
        },
    });

    write_atomic(out, "spectrum.csv", &csv_text(&SPECTRUM_COLUMNS, rows))?;
    write_atomic(out, "summary.json", &json_text(&summary))?;
    Ok(summary)
}

pub fn branch_name(b: Branch) -> &'static str {
    match b {
        Branch::Amplify => "amplify",
        Branch::Cool => "cool",
    }
}

