//! Reduction of time-domain echo records to an amplitude and an area.

use serde::Serialize;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EchoReduction {
    /// Signed extremum after baseline subtraction.
    pub amplitude: f64,
    /// Trapezoid integral over the window, signal units × s.
    pub area: f64,
}

impl EchoReduction {
    /// Echo enhancement: this reduction's amplitude over a reference one.
    pub fn enhancement_over(&self, reference: &EchoReduction) -> Result<f64> {
        if reference.amplitude == 0.0 {
            return invalid("reference echo amplitude is zero");
        }
        Ok(self.amplitude / reference.amplitude)
    }
}

fn check_window(t: &[f64], (a, b): (f64, f64), what: &str) -> Result<()> {
    if !(a < b) {
        return invalid(format!("{what} window must have start < end"));
    }
    if a < t[0] || b > t[t.len() - 1] {
        return invalid(format!("{what} window [{a}, {b}] lies outside the record [{}, {}]", t[0], t[t.len() - 1]));
    }
    Ok(())
}

/// Amplitude and area of an echo in `window`. When `baseline_window` is
/// given its mean is subtracted first.
pub fn echo_reduce(
    t: &[f64],
    y: &[f64],
    window: (f64, f64),
    baseline_window: Option<(f64, f64)>,
) -> Result<EchoReduction> {
    if t.len() != y.len() || t.len() < 2 {
        return invalid("echo record needs at least two samples of matching length");
    }
    if t.windows(2).any(|w| !(w[1] > w[0])) || y.iter().any(|v| !v.is_finite()) {
        return invalid("echo record must have increasing time and finite samples");
    }
    check_window(t, window, "integration")?;
    let base = match baseline_window {
        Some(bw) => {
            check_window(t, bw, "baseline")?;
            let sel: Vec<f64> = t.iter().zip(y).filter(|(ti, _)| **ti >= bw.0 && **ti <= bw.1).map(|p| *p.1).collect();
            if sel.is_empty() {
                return invalid("baseline window holds no samples");
            }
            sel.iter().sum::<f64>() / sel.len() as f64
        }
        None => 0.0,
    };
    let idx: Vec<usize> = (0..t.len()).filter(|&k| t[k] >= window.0 && t[k] <= window.1).collect();
    if idx.len() < 2 {
        return invalid("integration window holds fewer than two samples");
    }
    let amplitude = idx.iter().map(|&k| y[k] - base).max_by(|a, b| a.abs().total_cmp(&b.abs())).unwrap_or(0.0);
    let area = idx.windows(2).map(|w| 0.5 * (y[w[0]] + y[w[1]] - 2.0 * base) * (t[w[1]] - t[w[0]])).sum();
    Ok(EchoReduction { amplitude, area })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_echo(amp: f64) -> (Vec<f64>, Vec<f64>) {
        let t: Vec<f64> = (0..401).map(|k| k as f64 * 0.05e-6).collect();
        let y = t.iter().map(|v| amp * (-0.5 * ((v - 10e-6) / 1e-6).powi(2)).exp()).collect();
        (t, y)
    }

    #[test]
    fn negative_echo() {
        let (t, y) = gaussian_echo(-1.0);
        let r = echo_reduce(&t, &y, (5e-6, 15e-6), None).unwrap();
        assert!((r.amplitude + 1.0).abs() < 1e-12);
        let exact = -(2.0 * std::f64::consts::PI).sqrt() * 1e-6;
        assert!(r.area < 0.0 && ((r.area - exact) / exact).abs() < 1e-4);
    }

    #[test]
    fn enhancement_ratio() {
        let (t, pumped) = gaussian_echo(-620.0);
        let (_, thermal) = gaussian_echo(1.0);
        let a = echo_reduce(&t, &pumped, (5e-6, 15e-6), None).unwrap();
        let b = echo_reduce(&t, &thermal, (5e-6, 15e-6), None).unwrap();
        assert!((a.enhancement_over(&b).unwrap() + 620.0).abs() < 1e-9);
    }

    #[test]
    fn zero_record_and_baseline() {
        let t: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let r = echo_reduce(&t, &[0.0; 10], (1.0, 8.0), None).unwrap();
        assert_eq!((r.amplitude, r.area), (0.0, 0.0));
        let r = echo_reduce(&t, &[2.5; 10], (1.0, 8.0), Some((0.0, 2.0))).unwrap();
        assert_eq!((r.amplitude, r.area), (0.0, 0.0));
    }

    #[test]
    fn window_outside_record() {
        let t: Vec<f64> = (0..10).map(|k| k as f64).collect();
        assert!(echo_reduce(&t, &[0.0; 10], (5.0, 12.0), None).is_err());
        assert!(echo_reduce(&t, &[0.0; 10], (1.0, 2.0), Some((-1.0, 0.5))).is_err());
    }
}
