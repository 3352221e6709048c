//! Parameter extraction from measured traces.
//!
//! Every fit runs on the same least-squares engine ([`lm`]) and returns a
//! [`FitResult`] with estimates, one-sigma uncertainties from the Jacobian
//! Gram matrix and the RMS residual.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Result};

pub mod decay;
pub mod echo;
pub mod gain;
pub mod lineshape;
pub mod lm;
pub mod reflection;

pub use decay::fit_exp_decay;
pub use echo::{echo_reduce, EchoReduction};
pub use gain::{fit_gain_curve, GainFitFixed};
pub use lineshape::{fit_lineshape, LineModel};
pub use reflection::fit_reflection;

/// Minimum number of points accepted by any fit.
pub const MIN_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceKind {
    /// Complex reflection versus angular frequency.
    Reflection,
    /// Gain in dB versus angular frequency (real part only).
    GainDb,
    /// Real spectrum versus angular frequency.
    RealSpectrum,
    /// Real signal versus time in seconds.
    Decay,
}

/// A sampled trace on a strictly increasing abscissa.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexTrace {
    points: Vec<(f64, Complex64)>,
    kind: TraceKind,
}

impl ComplexTrace {
    pub fn new(points: Vec<(f64, Complex64)>, kind: TraceKind) -> Result<Self> {
        if points.len() < MIN_POINTS {
            return invalid(format!("trace needs at least {MIN_POINTS} points, got {}", points.len()));
        }
        if points.iter().any(|(x, z)| !x.is_finite() || !z.re.is_finite() || !z.im.is_finite()) {
            return invalid("trace contains non-finite values");
        }
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return invalid("trace abscissa must be strictly increasing");
        }
        Ok(Self { points, kind })
    }

    /// A real-valued trace.
    pub fn real(x: &[f64], y: &[f64], kind: TraceKind) -> Result<Self> {
        if x.len() != y.len() {
            return invalid("abscissa and values differ in length");
        }
        Self::new(x.iter().zip(y).map(|(&a, &b)| (a, Complex64::new(b, 0.0))).collect(), kind)
    }

    pub fn kind(&self) -> TraceKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn x(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.0).collect()
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.points.iter().map(|p| p.1).collect()
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1.re).collect()
    }

    pub(crate) fn expect_kind(&self, kind: TraceKind) -> Result<()> {
        if self.kind != kind {
            return invalid(format!("expected a {kind:?} trace, got {:?}", self.kind));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub params: BTreeMap<String, f64>,
    pub sigmas: BTreeMap<String, f64>,
    /// √(RSS / number of data points).
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Auxiliary values such as axis conversion factors.
    pub extras: BTreeMap<String, f64>,
}

impl FitResult {
    pub(crate) fn new(residual_norm: f64, iterations: usize) -> Self {
        Self {
            params: BTreeMap::new(),
            sigmas: BTreeMap::new(),
            residual_norm,
            converged: true,
            iterations,
            extras: BTreeMap::new(),
        }
    }

    pub(crate) fn set(&mut self, name: &str, value: f64, sigma: f64) {
        self.params.insert(name.to_string(), value);
        self.sigmas.insert(name.to_string(), sigma.abs());
    }

    /// Estimate by name; panics on an unknown name.
    pub fn get(&self, name: &str) -> f64 {
        self.params[name]
    }

    pub fn sigma(&self, name: &str) -> f64 {
        self.sigmas[name]
    }
}

/// Wraps a phase into (−π, π].
pub(crate) fn wrap_phase(p: f64) -> f64 {
    use std::f64::consts::PI;
    let mut w = p.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

pub(crate) fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Full width at half maximum of a single peak of `y` (already
/// baseline-free, peak positive) around index `peak`, by linear
/// interpolation. `None` if a crossing lies outside the data.
pub(crate) fn half_max_width(x: &[f64], y: &[f64], peak: usize) -> Option<f64> {
    let half = 0.5 * y[peak];
    let cross = |a: usize, b: usize| x[a] + (half - y[a]) / (y[b] - y[a]) * (x[b] - x[a]);
    let left = (1..=peak).rev().find(|&k| y[k - 1] <= half).map(|k| cross(k - 1, k))?;
    let right = (peak..y.len() - 1).find(|&k| y[k + 1] <= half).map(|k| cross(k, k + 1))?;
    Some(right - left)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_validation() {
        let x: Vec<f64> = (0..8).map(|k| k as f64).collect();
        assert!(ComplexTrace::real(&x, &[0.0; 8], TraceKind::Decay).is_ok());
        assert!(ComplexTrace::real(&x[..7], &[0.0; 7], TraceKind::Decay).is_err());
        let mut bad = x.clone();
        bad[3] = bad[2];
        assert!(ComplexTrace::real(&bad, &[0.0; 8], TraceKind::Decay).is_err());
        let mut nan = vec![0.0; 8];
        nan[1] = f64::NAN;
        assert!(ComplexTrace::real(&x, &nan, TraceKind::Decay).is_err());
    }

    #[test]
    fn phase_wrapping() {
        use std::f64::consts::PI;
        assert!((wrap_phase(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_phase(-0.5) + 0.5).abs() < 1e-15);
        assert!((wrap_phase(2.0 * PI + 0.1) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn width_of_triangle() {
        let x: Vec<f64> = (0..21).map(|k| k as f64).collect();
        let y: Vec<f64> = x.iter().map(|&v| (10.0 - (v - 10.0f64).abs()).max(0.0)).collect();
        assert!((half_max_width(&x, &y, 10).unwrap() - 10.0).abs() < 1e-12);
        assert!(half_max_width(&x, &x, 20).is_none());
    }
}
