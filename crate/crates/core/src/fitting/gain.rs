//! Collective-coupling fit to an amplifier gain curve.

use num_complex::Complex64;

use super::lm::{minimize, LmOptions};
use super::{ComplexTrace, FitResult, TraceKind};
use crate::error::{invalid, Error, Result};
use crate::quantities::{AngularFrequency, Rate};
use crate::response::{gain_db, ResonatorParams};
use crate::spectrum::SpinEnsemble;

/// Everything but g_ens, taken from earlier fits. The ensemble's own
/// coupling is ignored; its shape and Γ_eff are kept.
#[derive(Debug, Clone)]
pub struct GainFitFixed {
    pub resonator: ResonatorParams,
    pub ensemble: SpinEnsemble,
}

impl GainFitFixed {
    /// Coupling at which κ_s reaches κ_e + κ_i.
    pub fn threshold_coupling(&self) -> Result<Rate> {
        self.resonator.validate()?;
        let unit = self.ensemble.with_coupling(Rate(1.0))?;
        let gamma_eff = unit.effective_linewidth()?.0;
        Ok(Rate((self.resonator.total_loss() * gamma_eff / 4.0).sqrt()))
    }
}

/// Amplifier gain model with the susceptibility per unit g² precomputed.
struct GainModel {
    /// ω − ω_r + iκ̄ at each point.
    bare: Vec<Complex64>,
    /// K(ω)/g_ens² at each point.
    unit_k: Vec<Complex64>,
    kappa_e: f64,
}

impl GainModel {
    fn gain(&self, g: f64) -> impl Iterator<Item = f64> + '_ {
        let g2 = g * g;
        let ke = Complex64::new(0.0, self.kappa_e);
        self.bare.iter().zip(&self.unit_k).map(move |(b, k)| {
            let d = b + k * g2;
            if d.norm() == 0.0 {
                f64::INFINITY
            } else {
                gain_db(ke / d - 1.0)
            }
        })
    }

    fn misfit(&self, g: f64, data: &[f64]) -> f64 {
        self.gain(g).zip(data).map(|(m, y)| (m - y) * (m - y)).sum()
    }
}

/// Least-squares g_ens from a gain trace (dB versus ω) with all other
/// parameters fixed.
///
/// The coupling is searched on (0, g_th) with g_th the oscillation-threshold
/// coupling. A coarse scan that also covers (g_th, 2g_th) decides whether the
/// data lie beyond threshold; if so, or if the optimum sits on the
/// threshold, [`Error::ThresholdBoundary`] is returned.
pub fn fit_gain_curve(trace: &ComplexTrace, fixed: &GainFitFixed) -> Result<FitResult> {
    trace.expect_kind(TraceKind::GainDb)?;
    let g_th = fixed.threshold_coupling()?.0;
    if !(g_th > 0.0) || !g_th.is_finite() {
        return invalid("threshold coupling is not positive");
    }
    let res = &fixed.resonator;
    let unit = fixed.ensemble.with_coupling(Rate(1.0))?;
    let w = trace.x();
    let data = trace.real_values();
    let mut unit_k = Vec::with_capacity(w.len());
    for &o in &w {
        unit_k.push(unit.eval_k(AngularFrequency(o))?);
    }
    let model = GainModel {
        bare: w.iter().map(|o| Complex64::new(o - res.omega_r.0, res.kappa_bar())).collect(),
        unit_k,
        kappa_e: res.kappa_e.0,
    };

    let mut best = (f64::INFINITY, 0.0);
    for k in (0..200).filter(|&k| k != 100) {
        let g = k as f64 / 100.0 * g_th;
        let f = model.misfit(g, &data);
        if f < best.0 {
            best = (f, g);
        }
    }
    if !best.0.is_finite() {
        return Err(Error::NonConvergence("gain model is not finite on the search grid".into()));
    }
    if best.1 > g_th {
        return Err(Error::ThresholdBoundary { g_threshold: g_th });
    }

    let residuals = |p: &[f64]| -> Vec<f64> {
        if p[0].abs() >= g_th {
            return vec![1e150; data.len()];
        }
        model.gain(p[0]).zip(&data).map(|(m, y)| m - y).collect()
    };
    let out = minimize(residuals, &[best.1], &[1e-3 * g_th], &LmOptions::default())?;
    let g = out.params[0].abs();
    if g >= g_th * (1.0 - 1e-6) {
        return Err(Error::ThresholdBoundary { g_threshold: g_th });
    }
    let mut fit = FitResult::new((out.rss / data.len() as f64).sqrt(), out.iterations);
    fit.set("g_ens", g, out.sigmas()[0]);
    fit.extras.insert("g_threshold".into(), g_th);
    Ok(fit)
}
