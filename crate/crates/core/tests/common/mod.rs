//! Random parameter draws and synthetic traces shared by the integration
//! suites. The trace generators restate the forward models independently of
//! the library so that round trips test more than self-consistency.

#![allow(dead_code)]

use std::f64::consts::PI;

use maser_core::fitting::{ComplexTrace, TraceKind};
use maser_core::spectrum::{Spin, TabulatedProfile};
use maser_core::{AngularFrequency, Rate, SpinEnsemble};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

pub type TestRng = ChaCha20Rng;

pub fn rng(seed: u64) -> TestRng {
    use rand::SeedableRng;
    ChaCha20Rng::seed_from_u64(seed)
}

/// Base rate for random draws, 2π × 1 MHz.
pub const BASE: f64 = 2.0 * PI * 1e6;
/// Carrier for random draws, 2π × 9.8 GHz.
pub const CARRIER: f64 = 2.0 * PI * 9.8e9;

pub fn log_uniform(rng: &mut TestRng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

/// A rate spanning four decades around [`BASE`].
pub fn rate(rng: &mut TestRng) -> f64 {
    log_uniform(rng, 1e-2, 1e2) * BASE
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Lorentzian,
    Gaussian,
    Triple,
    Discrete,
    Tabulated,
}

pub const ALL_KINDS: [Kind; 5] = [Kind::Lorentzian, Kind::Gaussian, Kind::Triple, Kind::Discrete, Kind::Tabulated];

/// A random ensemble of the given kind, centered near `center`, and the
/// characteristic width of its spectrum.
pub fn draw_ensemble(rng: &mut TestRng, kind: Kind, center: f64) -> (SpinEnsemble, f64) {
    let g = rate(rng);
    let gamma = rate(rng);
    let ws = AngularFrequency(center);
    match kind {
        Kind::Lorentzian => {
            let width = rate(rng);
            (SpinEnsemble::lorentzian(ws, Rate(width), Rate(gamma), Rate(g)).unwrap(), width + gamma)
        }
        Kind::Gaussian => {
            let sigma = rate(rng);
            (SpinEnsemble::gaussian(ws, Rate(sigma), Rate(gamma), Rate(g)).unwrap(), sigma + gamma)
        }
        Kind::Triple => {
            let (width, split) = (rate(rng), rate(rng));
            (
                SpinEnsemble::triple_lorentzian(ws, Rate(width), Rate(split), Rate(gamma), Rate(g)).unwrap(),
                width + gamma + split,
            )
        }
        Kind::Discrete => {
            let n = rng.random_range(1..=40);
            let spread = rate(rng);
            let spins = (0..n)
                .map(|_| Spin {
                    omega: AngularFrequency(center + (rng.random::<f64>() - 0.5) * 2.0 * spread),
                    g: rate(rng) * 1e-2,
                })
                .collect();
            (SpinEnsemble::discrete(spins, Rate(gamma)).unwrap(), spread + gamma)
        }
        Kind::Tabulated => {
            let n = rng.random_range(6..=30);
            let spread = rate(rng);
            let mut pts = Vec::with_capacity(n);
            let mut mass = 0.0;
            for k in 0..n {
                let x = center + (k as f64 / (n - 1) as f64 - 0.5) * 2.0 * spread;
                let y = if k == 0 || k == n - 1 { 0.0 } else { 0.1 + rng.random::<f64>() };
                pts.push((x, y));
                mass += y;
            }
            // normalize exactly for the trapezoid rule on the uniform grid
            let dx = 2.0 * spread / (n - 1) as f64;
            for p in &mut pts {
                p.1 /= mass * dx;
            }
            let t = TabulatedProfile::new(&pts).unwrap();
            (SpinEnsemble::tabulated(t, Rate(gamma), Rate(g)).unwrap(), spread + gamma)
        }
    }
}

pub fn grid(center: f64, half: f64, n: usize) -> Vec<AngularFrequency> {
    (0..n).map(|k| AngularFrequency(center + (k as f64 / (n - 1) as f64 * 2.0 - 1.0) * half)).collect()
}

/// Noise standard deviation for a target SNR, defined as the mean power of
/// the noiseless signal over the noise variance.
pub fn noise_sigma(signal: impl Iterator<Item = f64>, snr_db: f64) -> f64 {
    let (mut s, mut n) = (0.0, 0usize);
    for v in signal {
        s += v;
        n += 1;
    }
    (s / n as f64 / 10f64.powf(snr_db / 10.0)).sqrt()
}

/// Bare resonator reflection through a cable: a·e^{i(φ+ωτ)}·(iκ_e/(ω−ω_r+iκ̄) − 1).
#[derive(Debug, Clone, Copy)]
pub struct ReflectionTruth {
    pub kappa_e: f64,
    pub kappa_i: f64,
    pub omega_r: f64,
    pub amp: f64,
    pub phase: f64,
    pub delay: f64,
}

impl ReflectionTruth {
    pub fn paper_like() -> Self {
        Self {
            kappa_e: 2.0 * PI * 0.95e6,
            kappa_i: 2.0 * PI * 0.891e6,
            omega_r: CARRIER,
            amp: 0.02,
            phase: 0.7,
            delay: 35e-9,
        }
    }

    pub fn eval(&self, w: f64) -> Complex64 {
        let kbar = 0.5 * (self.kappa_e + self.kappa_i);
        let cable = Complex64::from_polar(self.amp, self.phase + w * self.delay);
        let bare = Complex64::new(0.0, self.kappa_e) / Complex64::new(w - self.omega_r, kbar) - 1.0;
        cable * bare
    }

    /// Sweep of ±`lw` linewidths (κ̄) with `n` points and complex noise of
    /// the given SNR (`None` for a clean trace). Returns the trace and the
    /// realized noise RMS.
    pub fn trace(&self, lw: f64, n: usize, snr_db: Option<f64>, rng: &mut TestRng) -> (ComplexTrace, f64) {
        let kbar = 0.5 * (self.kappa_e + self.kappa_i);
        let ws: Vec<f64> = grid(self.omega_r, lw * kbar, n).into_iter().map(|w| w.0).collect();
        let clean: Vec<Complex64> = ws.iter().map(|&w| self.eval(w)).collect();
        let (noisy, rms) = add_complex_noise(&clean, snr_db, rng);
        (ComplexTrace::new(ws.into_iter().zip(noisy).collect(), TraceKind::Reflection).unwrap(), rms)
    }
}

pub fn add_complex_noise(clean: &[Complex64], snr_db: Option<f64>, rng: &mut TestRng) -> (Vec<Complex64>, f64) {
    let Some(snr) = snr_db else { return (clean.to_vec(), 0.0) };
    let sigma = noise_sigma(clean.iter().map(|z| z.norm_sqr()), snr);
    let d = Normal::new(0.0, sigma / 2f64.sqrt()).unwrap();
    let noise: Vec<Complex64> = clean.iter().map(|_| Complex64::new(d.sample(rng), d.sample(rng))).collect();
    let rms = (noise.iter().map(|z| z.norm_sqr()).sum::<f64>() / noise.len() as f64).sqrt();
    (clean.iter().zip(&noise).map(|(a, b)| a + b).collect(), rms)
}

pub fn add_real_noise(clean: &[f64], snr_db: Option<f64>, rng: &mut TestRng) -> (Vec<f64>, f64) {
    let Some(snr) = snr_db else { return (clean.to_vec(), 0.0) };
    let sigma = noise_sigma(clean.iter().map(|v| v * v), snr);
    let d = Normal::new(0.0, sigma).unwrap();
    let noise: Vec<f64> = clean.iter().map(|_| d.sample(rng)).collect();
    let rms = (noise.iter().map(|v| v * v).sum::<f64>() / noise.len() as f64).sqrt();
    (clean.iter().zip(&noise).map(|(a, b)| a + b).collect(), rms)
}

pub fn gaussian_line(x: f64, center: f64, sigma: f64, amp: f64) -> f64 {
    amp * (-0.5 * ((x - center) / sigma).powi(2)).exp()
}

/// Three peak-normalized Lorentzians at center − d, center, center + d.
pub fn triplet_line(x: f64, center: f64, split: f64, fwhm: [f64; 3], amp: [f64; 3]) -> f64 {
    (0..3)
        .map(|j| {
            let u = 2.0 * (x - center - (j as f64 - 1.0) * split) / fwhm[j];
            amp[j] / (1.0 + u * u)
        })
        .sum()
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
