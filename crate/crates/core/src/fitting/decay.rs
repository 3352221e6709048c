//! Single-exponential decay fit, A·e^{−t/τ} + c, for T₁ and T₂ records.

use super::lm::{minimize, LmOptions};
use super::{ComplexTrace, FitResult, TraceKind};
use crate::error::{Error, Result};

/// Amplitude and offset minimizing the squared error for a fixed decay
/// constant, with the RSS.
fn linear_part(u: &[f64], y: &[f64], s: f64) -> Option<(f64, f64, f64)> {
    let n = u.len() as f64;
    let e: Vec<f64> = u.iter().map(|v| (-v / s).exp()).collect();
    let (se, see) = (e.iter().sum::<f64>(), e.iter().map(|v| v * v).sum::<f64>());
    let (sy, sey) = (y.iter().sum::<f64>(), e.iter().zip(y).map(|(a, b)| a * b).sum::<f64>());
    let det = n * see - se * se;
    if !(det.abs() > 1e-14 * n * see) {
        return None;
    }
    let a = (n * sey - se * sy) / det;
    let c = (sy - a * se) / n;
    let rss = e.iter().zip(y).map(|(ei, yi)| (a * ei + c - yi).powi(2)).sum();
    Some((a, c, rss))
}

/// Fits A·e^{−t/τ} + c. Returns `tau` (s), `amplitude` (value of the
/// exponential at t = 0) and `offset`.
pub fn fit_exp_decay(trace: &ComplexTrace) -> Result<FitResult> {
    trace.expect_kind(TraceKind::Decay)?;
    let t = trace.x();
    let y = trace.real_values();
    let m = t.len();
    let (t0, span) = (t[0], t[m - 1] - t[0]);
    let u: Vec<f64> = t.iter().map(|v| (v - t0) / span).collect();
    let mean = y.iter().sum::<f64>() / m as f64;
    let y_scale = y.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    if !(y_scale > 0.0) {
        return Err(Error::NonConvergence("record is constant".into()));
    }
    let ys: Vec<f64> = y.iter().map(|v| v / y_scale).collect();

    let mut best: Option<(f64, [f64; 3])> = None;
    for k in 0..=80 {
        let s = 10f64.powf(-2.5 + 5.0 * k as f64 / 80.0);
        if let Some((a, c, rss)) = linear_part(&u, &ys, s) {
            if best.as_ref().is_none_or(|b| rss < b.0) {
                best = Some((rss, [a, s, c]));
            }
        }
    }
    let (_, p0) = best.ok_or_else(|| Error::NonConvergence("no decay found in record".into()))?;
    let scale = [p0[0].abs().max(1e-3), p0[1], 1.0];
    let residuals = |p: &[f64]| -> Vec<f64> {
        u.iter().zip(&ys).map(|(&ui, &yi)| p[0] * (-ui / p[1]).exp() + p[2] - yi).collect()
    };
    let out = minimize(residuals, &p0, &scale, &LmOptions::default())?;
    let (p, s) = (&out.params, out.sigmas());
    if !(p[1] > 0.0) {
        return Err(Error::NegativeWidth(format!("decay time {} s is not positive", p[1] * span)));
    }
    if p[0] == 0.0 {
        return Err(Error::NonConvergence("fitted decay amplitude is zero".into()));
    }
    let tau = p[1] * span;
    let lift = (t0 / tau).exp();
    let mut fit = FitResult::new((out.rss / m as f64).sqrt() * y_scale, out.iterations);
    fit.set("tau", tau, s[1] * span);
    fit.set("amplitude", p[0] * lift * y_scale, out.sigma_of(&[lift, -p[0] * lift * t0 / (span * p[1] * p[1]), 0.0]) * y_scale);
    fit.set("offset", p[2] * y_scale, s[2] * y_scale);
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(tau: f64, a: f64, c: f64, t0: f64, t1: f64, n: usize) -> ComplexTrace {
        let t: Vec<f64> = (0..n).map(|k| t0 + (t1 - t0) * k as f64 / (n - 1) as f64).collect();
        let y: Vec<f64> = t.iter().map(|v| a * (-v / tau).exp() + c).collect();
        ComplexTrace::real(&t, &y, TraceKind::Decay).unwrap()
    }

    #[test]
    fn relaxation_times() {
        for (tau, t1) in [(6.65e-3, 40e-3), (11.32e-6, 60e-6)] {
            let fit = fit_exp_decay(&record(tau, -2.0, 0.1, 0.0, t1, 120)).unwrap();
            assert!((fit.get("tau") / tau - 1.0).abs() < 1e-8);
            assert!((fit.get("amplitude") + 2.0).abs() < 1e-8);
            assert!((fit.get("offset") - 0.1).abs() < 1e-8);
        }
    }

    #[test]
    fn record_not_starting_at_zero() {
        let fit = fit_exp_decay(&record(3.0, 5.0, -1.0, 2.0, 20.0, 60)).unwrap();
        assert!((fit.get("tau") - 3.0).abs() < 1e-8);
        assert!((fit.get("amplitude") - 5.0).abs() < 1e-7);
    }

    #[test]
    fn constant_record_fails() {
        let t: Vec<f64> = (0..20).map(|k| k as f64).collect();
        let tr = ComplexTrace::real(&t, &[4.0; 20], TraceKind::Decay).unwrap();
        assert!(fit_exp_decay(&tr).is_err());
    }

    #[test]
    fn growing_record_rejected() {
        assert!(fit_exp_decay(&record(-2.0, 1.0, 0.0, 0.0, 3.0, 40)).is_err());
    }
}
