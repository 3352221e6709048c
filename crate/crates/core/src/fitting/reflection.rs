//! Bare-resonator reflection fit.
//!
//! Model: a·e^{i(φ + ωτ)}·(iκ_e/(ω − ω_r + iκ̄) − 1). The frequency axis is
//! centered and scaled to the sweep span internally; an algebraic circle fit
//! supplies the starting point for the least-squares refinement.

use num_complex::Complex64;

use super::lm::{minimize, LmOptions};
use super::{half_max_width, wrap_phase, ComplexTrace, FitResult, TraceKind};
use crate::error::{Error, Result};

/// Reflection of a bare resonator seen through a cable with gain `amp`,
/// phase `phase` and delay `delay` (s).
pub fn reflection_model(
    omega: f64,
    kappa_e: f64,
    kappa_i: f64,
    omega_r: f64,
    amp: f64,
    phase: f64,
    delay: f64,
) -> Complex64 {
    let d = Complex64::new(omega - omega_r, 0.5 * (kappa_e + kappa_i));
    let core = Complex64::new(0.0, kappa_e) / d - 1.0;
    Complex64::from_polar(amp, phase + omega * delay) * core
}

fn scaled_model(x: f64, p: &[f64]) -> Complex64 {
    let [dr, ke, ki, a, ph, tau] = [p[0], p[1], p[2], p[3], p[4], p[5]];
    let d = Complex64::new(x - dr, 0.5 * (ke + ki));
    let core = Complex64::new(0.0, ke) / d - 1.0;
    Complex64::from_polar(a, ph + x * tau) * core
}

struct Circle {
    center: Complex64,
    radius: f64,
    /// RMS radial misfit.
    misfit: f64,
}

/// Algebraic (Kåsa) circle fit.
fn fit_circle(z: &[Complex64]) -> Option<Circle> {
    // minimize Σ (|p|² + D·x + E·y + F)²
    let mut a = nalgebra::Matrix3::<f64>::zeros();
    let mut b = nalgebra::Vector3::<f64>::zeros();
    let mean = z.iter().sum::<Complex64>() / z.len() as f64;
    let spread = z.iter().map(|p| (p - mean).norm()).fold(0.0, f64::max);
    if !(spread > 0.0) {
        return None;
    }
    for p in z {
        let q = (p - mean) / spread;
        let row = nalgebra::Vector3::new(q.re, q.im, 1.0);
        let rhs = -q.norm_sqr();
        a += row * row.transpose();
        b += row * rhs;
    }
    let sol = a.lu().solve(&b)?;
    let c = Complex64::new(-0.5 * sol[0], -0.5 * sol[1]);
    let r2 = c.norm_sqr() - sol[2];
    if !(r2 > 0.0) || !r2.is_finite() {
        return None;
    }
    let r = r2.sqrt();
    // absolute, not relative: a relative measure would favour the large
    // spurious circle traced by the background under a wrong delay
    let misfit =
        (z.iter().map(|p| ((p - mean) / spread - c).norm() - r).map(|e| e * e).sum::<f64>() / z.len() as f64).sqrt()
            * spread;
    Some(Circle { center: mean + c * spread, radius: r * spread, misfit })
}

fn unwrap(phases: &[f64]) -> Vec<f64> {
    use std::f64::consts::PI;
    let mut out = Vec::with_capacity(phases.len());
    let mut offset = 0.0;
    for (k, &p) in phases.iter().enumerate() {
        if k > 0 {
            let d = p - phases[k - 1];
            if d > PI {
                offset -= 2.0 * PI;
            } else if d < -PI {
                offset += 2.0 * PI;
            }
        }
        out.push(p + offset);
    }
    out
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn derotate(x: &[f64], z: &[Complex64], tau: f64) -> Vec<Complex64> {
    x.iter().zip(z).map(|(&xi, &zi)| zi * Complex64::from_polar(1.0, -xi * tau)).collect()
}

fn circle_misfit(x: &[f64], z: &[Complex64], tau: f64) -> f64 {
    fit_circle(&derotate(x, z, tau)).map_or(f64::INFINITY, |c| c.misfit)
}

/// Delay (in scaled units) that makes the trace most circular.
fn estimate_delay(x: &[f64], z: &[Complex64], edge: usize) -> f64 {
    let m = x.len();
    let ph = unwrap(&z.iter().map(|v| v.arg()).collect::<Vec<_>>());
    let left = slope(&x[..edge], &ph[..edge]);
    let right = slope(&x[m - edge..], &ph[m - edge..]);
    let guess = 0.5 * (left + right);
    let guess = if guess.is_finite() { guess } else { 0.0 };

    let span = 2.0 * std::f64::consts::PI;
    let n = 240;
    let mut best = (f64::INFINITY, guess);
    for k in 0..=n {
        let t = guess - span + 2.0 * span * k as f64 / n as f64;
        let f = circle_misfit(x, z, t);
        if f < best.0 {
            best = (f, t);
        }
    }
    // golden-section polish inside the bracketing cell
    let h = 2.0 * span / n as f64;
    let (mut a, mut b) = (best.1 - h, best.1 + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (circle_misfit(x, z, c), circle_misfit(x, z, d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = circle_misfit(x, z, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = circle_misfit(x, z, d);
        }
    }
    0.5 * (a + b)
}

/// Starting point [δ_r, κ_e, κ_i, a, φ, τ] in scaled units.
fn initial_guess(x: &[f64], z: &[Complex64]) -> Result<[f64; 6]> {
    let m = x.len();
    let mags = z.iter().map(|v| v.norm());
    let (lo, hi) = mags.fold((f64::INFINITY, 0.0f64), |(l, h), v| (l.min(v), h.max(v)));
    if !(hi - lo > 1e-6 * hi) {
        return Err(Error::NonConvergence("trace magnitude shows no dip".into()));
    }
    let edge = (m / 10).max(2);
    let tau = estimate_delay(x, z, edge);
    let zc = derotate(x, z, tau);
    let circle = fit_circle(&zc).ok_or_else(|| Error::NonConvergence("trace shows no resonance circle".into()))?;
    let edge_mean = (zc[..edge].iter().sum::<Complex64>() + zc[m - edge..].iter().sum::<Complex64>()) / (2 * edge) as f64;
    let dir = edge_mean - circle.center;
    if !(dir.norm() > 0.0) {
        return Err(Error::NonConvergence("off-resonant point is undefined".into()));
    }
    let p_inf = circle.center + dir * (circle.radius / dir.norm());
    let a = p_inf.norm();
    if !(circle.radius > 1e-9 * a) {
        return Err(Error::NonConvergence("resonance circle is degenerate".into()));
    }
    let dist: Vec<f64> = zc.iter().map(|v| (v - p_inf).norm_sqr()).collect();
    let (k_res, _) = dist
        .iter()
        .enumerate()
        .max_by(|p, q| p.1.total_cmp(q.1))
        .ok_or_else(|| Error::NonConvergence("empty trace".into()))?;
    if k_res == 0 || k_res == m - 1 {
        return Err(Error::FeatureAtEdge("resonance at the edge of the sweep".into()));
    }
    let fwhm = half_max_width(x, &dist, k_res)
        .ok_or_else(|| Error::FeatureAtEdge("resonance half-width extends past the sweep".into()))?;
    let kbar = 0.5 * fwhm;
    let s = (2.0 * circle.radius / a - 1.0).clamp(-0.98, 0.98);
    Ok([x[k_res], kbar * (1.0 + s), kbar * (1.0 - s), a, (-p_inf).arg(), tau])
}

/// Fits the bare-resonator model to a complex reflection trace.
///
/// Returns `kappa_e`, `kappa_i`, `omega_r` (rad/s), `amp_scale`,
/// `phase_offset` (rad, referred to ω = 0) and `electrical_delay` (s).
pub fn fit_reflection(trace: &ComplexTrace) -> Result<FitResult> {
    trace.expect_kind(TraceKind::Reflection)?;
    let w = trace.x();
    let z = trace.values();
    let m = w.len();
    let wc = 0.5 * (w[0] + w[m - 1]);
    let span = w[m - 1] - w[0];
    let x: Vec<f64> = w.iter().map(|v| (v - wc) / span).collect();

    let p0 = initial_guess(&x, &z)?;
    let kbar = 0.5 * (p0[1] + p0[2]);
    let scale = [kbar, kbar, kbar, p0[3], 1.0, 1.0];
    let residuals = |p: &[f64]| -> Vec<f64> {
        let mut r = Vec::with_capacity(2 * m);
        for (xi, zi) in x.iter().zip(&z) {
            let d = scaled_model(*xi, p) - zi;
            r.push(d.re);
            r.push(d.im);
        }
        r
    };
    let out = minimize(residuals, &p0, &scale, &LmOptions::default())?;
    let p = &out.params;
    let s = out.sigmas();
    if !(p[1] > 0.0) || p[2] < 0.0 {
        return Err(Error::NegativeWidth(format!(
            "kappa_e = {}, kappa_i = {} rad/s",
            p[1] * span,
            p[2] * span
        )));
    }
    let mut fit = FitResult::new((out.rss / m as f64).sqrt(), out.iterations);
    fit.set("kappa_e", p[1] * span, s[1] * span);
    fit.set("kappa_i", p[2] * span, s[2] * span);
    fit.set("omega_r", wc + p[0] * span, s[0] * span);
    fit.set("amp_scale", p[3].abs(), s[3]);
    let lever = wc / span;
    fit.set(
        "phase_offset",
        wrap_phase(p[4] - p[5] * lever + if p[3] < 0.0 { std::f64::consts::PI } else { 0.0 }),
        out.sigma_of(&[0.0, 0.0, 0.0, 0.0, 1.0, -lever]),
    );
    fit.set("electrical_delay", p[5] / span, s[5] / span);
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[allow(clippy::too_many_arguments)]
    fn synth(ke: f64, ki: f64, wr: f64, amp: f64, ph: f64, tau: f64, span_lw: f64, n: usize) -> ComplexTrace {
        let kbar = 0.5 * (ke + ki);
        let pts = (0..n)
            .map(|k| {
                let w = wr + (k as f64 / (n - 1) as f64 - 0.5) * span_lw * 2.0 * kbar;
                (w, reflection_model(w, ke, ki, wr, amp, ph, tau))
            })
            .collect();
        ComplexTrace::new(pts, TraceKind::Reflection).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn noiseless_recovery() {
        let (ke, ki, wr) = (2.0 * PI * 0.95e6, 2.0 * PI * 0.891e6, 2.0 * PI * 9.8e9);
        let t = synth(ke, ki, wr, 0.3, 1.1, 4e-9, 20.0, 401);
        let f = fit_reflection(&t).unwrap();
        assert!(rel(f.get("kappa_e"), ke) < 1e-8);
        assert!(rel(f.get("kappa_i"), ki) < 1e-8);
        assert!(rel(f.get("omega_r"), wr) < 1e-12);
        assert!(rel(f.get("amp_scale"), 0.3) < 1e-8);
        assert!(rel(f.get("electrical_delay"), 4e-9) < 1e-6);
        assert!(wrap_phase(f.get("phase_offset") - 1.1).abs() < 1e-5);
    }

    #[test]
    fn undercoupled_and_overcoupled() {
        for (ke, ki) in [(1.0, 4.0), (4.0, 1.0), (2.0, 0.05)] {
            let t = synth(ke, ki, 1000.0, 1.0, -2.0, 0.02, 12.0, 301);
            let f = fit_reflection(&t).unwrap();
            assert!(rel(f.get("kappa_e"), ke) < 1e-8, "{ke} {ki}: {:?}", f.params);
            assert!(rel(f.get("kappa_i"), ki) < 1e-7, "{ke} {ki}: {:?}", f.params);
        }
    }

    #[test]
    fn constant_trace_fails() {
        let pts = (0..50).map(|k| (k as f64, Complex64::new(-1.0, 0.0))).collect();
        let t = ComplexTrace::new(pts, TraceKind::Reflection).unwrap();
        assert!(matches!(fit_reflection(&t), Err(Error::NonConvergence(_))));
    }

    #[test]
    fn dip_at_edge_fails() {
        let (ke, ki) = (1.0, 1.2);
        let pts = (0..200)
            .map(|k| {
                let w = 1000.0 + k as f64 * 0.05;
                (w, reflection_model(w, ke, ki, 1000.0, 1.0, 0.0, 0.0))
            })
            .collect();
        let t = ComplexTrace::new(pts, TraceKind::Reflection).unwrap();
        assert!(matches!(fit_reflection(&t), Err(Error::FeatureAtEdge(_))));
    }

    #[test]
    fn invariant_under_scaling_and_rotation() {
        let t = synth(1.3, 0.9, 500.0, 1.0, 0.4, 0.01, 15.0, 301);
        let base = fit_reflection(&t).unwrap();
        let rot = Complex64::from_polar(7.5, 2.2);
        let pts = t.x().into_iter().zip(t.values()).map(|(w, z)| (w, z * rot)).collect();
        let moved = fit_reflection(&ComplexTrace::new(pts, TraceKind::Reflection).unwrap()).unwrap();
        for k in ["kappa_e", "kappa_i", "omega_r"] {
            assert!(rel(moved.get(k), base.get(k)) < 1e-9, "{k}");
        }
        assert!(rel(moved.get("amp_scale"), 7.5 * base.get("amp_scale")) < 1e-8);
    }
}
