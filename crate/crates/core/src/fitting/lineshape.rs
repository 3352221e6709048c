//! ESR lineshape fits: single Gaussian and hyperfine-split Lorentzian triplet.

use serde::{Deserialize, Serialize};

use super::lm::{minimize, LmOptions};
use super::{half_max_width, median, ComplexTrace, FitResult, TraceKind};
use crate::error::{Error, Result};

/// Initial hyperfine splitting for the triplet, rad/s.
pub const TRIPLET_SPLITTING_GUESS: f64 = 2.0 * std::f64::consts::PI * 2.17e6;

const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LineModel {
    /// {center, sigma, amplitude, baseline}
    Gaussian,
    /// {center, splitting, fwhm_m1, fwhm_0, fwhm_p1, amp_m1, amp_0, amp_p1,
    /// baseline}; amplitudes are peak heights.
    TripleLorentzian,
}

fn gaussian(x: f64, p: &[f64]) -> f64 {
    let u = (x - p[0]) / p[1];
    p[2] * (-0.5 * u * u).exp() + p[3]
}

fn lorentz_peak(x: f64, fwhm: f64) -> f64 {
    let u = 2.0 * x / fwhm;
    1.0 / (1.0 + u * u)
}

fn triplet(x: f64, p: &[f64]) -> f64 {
    let (c, d) = (p[0], p[1]);
    p[8] + (0..3).map(|j| p[5 + j] * lorentz_peak(x - c - (j as f64 - 1.0) * d, p[2 + j])).sum::<f64>()
}

/// Linear interpolation of y at u (clamped to the ends).
fn interp(x: &[f64], y: &[f64], u: f64) -> f64 {
    let m = x.len();
    if u <= x[0] {
        return y[0];
    }
    if u >= x[m - 1] {
        return y[m - 1];
    }
    let k = x.partition_point(|&v| v <= u).max(1);
    let t = (u - x[k - 1]) / (x[k] - x[k - 1]);
    y[k - 1] + t * (y[k] - y[k - 1])
}

/// Fits a lineshape to a real spectrum on an angular-frequency axis.
pub fn fit_lineshape(trace: &ComplexTrace, model: LineModel) -> Result<FitResult> {
    trace.expect_kind(TraceKind::RealSpectrum)?;
    let w = trace.x();
    let y = trace.real_values();
    let m = w.len();
    let wc = 0.5 * (w[0] + w[m - 1]);
    let span = w[m - 1] - w[0];
    let x: Vec<f64> = w.iter().map(|v| (v - wc) / span).collect();

    let edge = (m / 10).max(2);
    let base = median(y[..edge].iter().chain(&y[m - edge..]).copied().collect());
    let (k_peak, height) = y
        .iter()
        .map(|v| v - base)
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .expect("trace is non-empty");
    let y_scale = y.iter().map(|v| (v - base).abs()).fold(0.0, f64::max);
    if !(y_scale > 0.0) || height == 0.0 {
        return Err(Error::NonConvergence("spectrum is flat".into()));
    }
    let sign = height.signum();
    let ys: Vec<f64> = y.iter().map(|v| v / y_scale).collect();
    let lifted: Vec<f64> = y.iter().map(|v| sign * (v - base) / y_scale).collect();
    if k_peak == 0 || k_peak == m - 1 {
        return Err(Error::FeatureAtEdge("line maximum at the edge of the trace".into()));
    }
    let fwhm = half_max_width(&x, &lifted, k_peak)
        .ok_or_else(|| Error::FeatureAtEdge("line extends past the trace".into()))?;
    let b0 = base / y_scale;

    match model {
        LineModel::Gaussian => {
            let p0 = [x[k_peak], fwhm / FWHM_PER_SIGMA, height / y_scale, b0];
            let scale = [p0[1], p0[1], 1.0, 1.0];
            let residuals =
                |p: &[f64]| -> Vec<f64> { x.iter().zip(&ys).map(|(&xi, &yi)| gaussian(xi, p) - yi).collect() };
            let out = minimize(residuals, &p0, &scale, &LmOptions::default())?;
            let (p, s) = (&out.params, out.sigmas());
            if p[1].abs() < 1e-12 {
                return Err(Error::NegativeWidth("Gaussian width collapsed to zero".into()));
            }
            let mut fit = FitResult::new((out.rss / m as f64).sqrt() * y_scale, out.iterations);
            fit.set("center", wc + p[0] * span, s[0] * span);
            fit.set("sigma", p[1].abs() * span, s[1] * span);
            fit.set("amplitude", p[2] * y_scale, s[2] * y_scale);
            fit.set("baseline", p[3] * y_scale, s[3] * y_scale);
            Ok(fit)
        }
        LineModel::TripleLorentzian => {
            let d = TRIPLET_SPLITTING_GUESS / span;
            // center: place the comb where the three samples add up highest
            let c = (0..m)
                .map(|k| x[k])
                .max_by(|&a, &b| {
                    let sa: f64 = (-1..=1).map(|j| interp(&x, &lifted, a + j as f64 * d)).sum();
                    let sb: f64 = (-1..=1).map(|j| interp(&x, &lifted, b + j as f64 * d)).sum();
                    sa.total_cmp(&sb)
                })
                .expect("trace is non-empty");
            let width = if fwhm < d { fwhm } else { fwhm - 2.0 * d }.clamp(0.1 * d, 2.0 * d);
            let mut p0 = [c, d, width, width, width, 0.0, 0.0, 0.0, b0];
            for j in 0..3 {
                p0[5 + j] = sign * interp(&x, &lifted, c + (j as f64 - 1.0) * d).max(0.05);
            }
            let scale = [d, d, width, width, width, 1.0, 1.0, 1.0, 1.0];
            let residuals =
                |p: &[f64]| -> Vec<f64> { x.iter().zip(&ys).map(|(&xi, &yi)| triplet(xi, p) - yi).collect() };
            let out = minimize(residuals, &p0, &scale, &LmOptions::default())?;
            let (p, s) = (&out.params, out.sigmas());
            if p[2..5].iter().any(|v| v.abs() < 1e-12) {
                return Err(Error::NegativeWidth("a triplet linewidth collapsed to zero".into()));
            }
            let mut fit = FitResult::new((out.rss / m as f64).sqrt() * y_scale, out.iterations);
            fit.set("center", wc + p[0] * span, s[0] * span);
            fit.set("splitting", p[1].abs() * span, s[1] * span);
            // a negative splitting swaps the outer lines
            let order = if p[1] < 0.0 { [2, 1, 0] } else { [0, 1, 2] };
            for (name, j) in ["m1", "0", "p1"].iter().zip(order) {
                fit.set(&format!("fwhm_{name}"), p[2 + j].abs() * span, s[2 + j] * span);
                fit.set(&format!("amp_{name}"), p[5 + j] * y_scale, s[5 + j] * y_scale);
            }
            fit.set("baseline", p[8] * y_scale, s[8] * y_scale);
            Ok(fit)
        }
    }
}
