use std::f64::consts::PI;
use std::path::Path;

use maser_core::fitting::{
    fit_exp_decay, fit_gain_curve, fit_lineshape, fit_reflection, ComplexTrace, FitResult, GainFitFixed, LineModel,
    TraceKind,
};
use maser_core::quantities::GAMMA_E;
use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::config::RunConfig;
use crate::error::CliResult;
use crate::io::{json_text, num, write_atomic, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitKind {
    Reflection,
    Gain,
    Line(LineModel),
    Decay,
}

impl FitKind {
    fn name(self) -> &'static str {
        match self {
            FitKind::Reflection => "reflection",
            FitKind::Gain => "gain",
            FitKind::Line(_) => "line",
            FitKind::Decay => "decay",
        }
    }

    pub fn columns(self) -> &'static [&'static str] {
        match self {
            FitKind::Reflection => &["freq_hz", "re", "im"],
            FitKind::Gain => &["freq_hz", "gain_db"],
            FitKind::Line(_) => &["b0_t", "signal"],
            FitKind::Decay => &["time_s", "signal"],
        }
    }
}

/// Parameters carried in rad/s by the fits.
const ANGULAR: [&str; 11] = [
    "kappa_e", "kappa_i", "omega_r", "g_ens", "g_threshold", "center", "sigma", "splitting", "fwhm_m1", "fwhm_0",
    "fwhm_p1",
];

/// External names and units for one fitted quantity.
fn external(name: &str, v: f64, field_axis: bool) -> Vec<(String, f64)> {
    if ANGULAR.contains(&name) {
        let mut out = vec![(format!("{name}_hz"), v / (2.0 * PI))];
        if field_axis {
            out.push((format!("{name}_t"), v / GAMMA_E));
        }
        return out;
    }
    let renamed = match name {
        "phase_offset" => "phase_offset_rad".to_string(),
        "electrical_delay" => "electrical_delay_s".to_string(),
        "tau" => "tau_s".to_string(),
        _ => name.to_string(),
    };
    vec![(renamed, v)]
}

fn table(values: &std::collections::BTreeMap<String, f64>, field_axis: bool) -> Value {
    let mut m = Map::new();
    for (k, &v) in values {
        for (name, x) in external(k, v, field_axis) {
            m.insert(name, num(x));
        }
    }
    Value::Object(m)
}

pub fn run(kind: FitKind, input: &Path, cfg: &RunConfig, out: &Path) -> CliResult<Value> {
    let t = Table::read(input, kind.columns())?;
    let rows = t.numeric()?;
    let col = |c: usize| -> Vec<f64> { rows.iter().map(|r| r[c]).collect() };
    let fit: FitResult = match kind {
        FitKind::Reflection => {
            let pts = rows.iter().map(|r| (2.0 * PI * r[0], Complex64::new(r[1], r[2]))).collect();
            fit_reflection(&ComplexTrace::new(pts, TraceKind::Reflection)?)?
        }
        FitKind::Gain => {
            let w: Vec<f64> = col(0).iter().map(|f| 2.0 * PI * f).collect();
            let trace = ComplexTrace::real(&w, &col(1), TraceKind::GainDb)?;
            let fixed = GainFitFixed { resonator: cfg.resonator()?, ensemble: cfg.ensemble(false)? };
            fit_gain_curve(&trace, &fixed)?
        }
        FitKind::Line(model) => {
            let w: Vec<f64> = col(0).iter().map(|b| GAMMA_E * b).collect();
            fit_lineshape(&ComplexTrace::real(&w, &col(1), TraceKind::RealSpectrum)?, model)?
        }
        FitKind::Decay => fit_exp_decay(&ComplexTrace::real(&col(0), &col(1), TraceKind::Decay)?)?,
    };

    let field_axis = matches!(kind, FitKind::Line(_));
    let mut extras = table(&fit.extras, false);
    if field_axis {
        extras.as_object_mut().expect("object").insert("gamma_e_hz_per_t".into(), num(GAMMA_E / (2.0 * PI)));
    }
    let mut doc = json!({
        "kind": kind.name(),
        "points": rows.len(),
        "converged": fit.converged,
        "iterations": fit.iterations,
        "residual_norm": num(fit.residual_norm),
        "params": table(&fit.params, field_axis),
        "sigmas": table(&fit.sigmas, field_axis),
        "extras": extras,
    });
    if let FitKind::Line(model) = kind {
        doc["model"] = serde_json::to_value(model).expect("line model serializes");
    }
    write_atomic(out, &format!("fit_{}.json", kind.name()), &json_text(&doc))?;
    Ok(doc)
}
