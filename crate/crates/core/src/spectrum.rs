//! Spin frequency distributions and the spectral functions that summarize the
//! ensemble's back-action on the resonator mode.
//!
//! For a normalized distribution f(ω') and homogeneous width γ,
//!
//! ```text
//! K(ω) = g² ∫ f(ω') / (ω − ω' + iγ/2) dω'
//! C(ω) = 2π g² (f ∗ L_γ)(ω)
//! ```
//!
//! with L_γ the area-normalized Lorentzian of full width γ. The two satisfy
//! C(ω) = −2 Im K(ω) for every profile.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Cauchy, Distribution, Normal};

use crate::error::{invalid, Error, Result};
use crate::faddeeva::faddeeva;
use crate::quadrature::{integrate, QuadOptions};
use crate::quantities::{AngularFrequency, Rate};

/// K(ω) in rad/s.
pub type ComplexRate = Complex64;

const SQRT_PI_OVER_2: f64 = 1.253_314_137_315_500_3;

const TABULATED_QUAD: QuadOptions = QuadOptions { rel_tol: 1e-12, abs_tol: 0.0, max_intervals: 20_000 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spin {
    pub omega: AngularFrequency,
    /// Single-spin coupling in rad/s.
    pub g: f64,
}

/// A piecewise-linear distribution, zero outside its grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedProfile {
    omega: Vec<f64>,
    density: Vec<f64>,
    cdf: Vec<f64>,
}

impl TabulatedProfile {
    /// Builds a profile from `(ω, f(ω))` samples (rad/s, s/rad).
    ///
    /// The samples are rescaled to unit area when the trapezoid integral is
    /// within 1% of one; anything further off is rejected.
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 4 {
            return invalid(format!("tabulated profile needs at least 4 points, got {}", points.len()));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return invalid("tabulated profile frequencies must be strictly increasing");
            }
        }
        if points.iter().any(|&(w, f)| !w.is_finite() || !f.is_finite() || f < 0.0) {
            return invalid("tabulated profile values must be finite and non-negative");
        }
        let omega: Vec<f64> = points.iter().map(|p| p.0).collect();
        let raw: Vec<f64> = points.iter().map(|p| p.1).collect();
        let area = trapezoid_cumulative(&omega, &raw);
        let total = *area.last().unwrap();
        if !((total - 1.0).abs() < 0.01) {
            return invalid(format!("tabulated profile integrates to {total}, expected 1 within 1%"));
        }
        let density = raw.iter().map(|f| f / total).collect();
        let cdf = area.iter().map(|a| a / total).collect();
        Ok(Self { omega, density, cdf })
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.omega.iter().copied().zip(self.density.iter().copied())
    }

    pub fn integral(&self) -> f64 {
        *self.cdf.last().unwrap()
    }

    /// First moment ∫ω f dω, exact for the piecewise-linear interpolant.
    pub fn centroid(&self) -> f64 {
        let mut m = 0.0;
        for k in 0..self.omega.len() - 1 {
            let (a, b) = (self.omega[k], self.omega[k + 1]);
            let (fa, fb) = (self.density[k], self.density[k + 1]);
            let h = b - a;
            m += h / 6.0 * (fa * (2.0 * a + b) + fb * (a + 2.0 * b));
        }
        m / self.integral()
    }

    fn density_at(&self, x: f64) -> f64 {
        let n = self.omega.len();
        if x < self.omega[0] || x > self.omega[n - 1] {
            return 0.0;
        }
        let k = match self.omega.partition_point(|&w| w <= x) {
            0 => 0,
            i if i >= n => n - 2,
            i => i - 1,
        };
        let t = (x - self.omega[k]) / (self.omega[k + 1] - self.omega[k]);
        self.density[k] + t * (self.density[k + 1] - self.density[k])
    }

    fn span(&self) -> (f64, f64) {
        (self.omega[0], *self.omega.last().unwrap())
    }

    /// Inverse-CDF draw.
    fn inverse_cdf(&self, u: f64) -> f64 {
        let target = u * self.integral();
        let n = self.cdf.len();
        let k = self.cdf.partition_point(|&c| c < target).clamp(1, n - 1) - 1;
        let (a, h) = (self.omega[k], self.omega[k + 1] - self.omega[k]);
        let (fa, fb) = (self.density[k], self.density[k + 1]);
        let r = target - self.cdf[k];
        // solve fa·s + (fb−fa)·s²/(2h) = r for s in [0, h]
        let slope = (fb - fa) / h;
        let s = if slope.abs() < 1e-300 || (slope * r).abs() < 1e-12 * fa * fa {
            if fa > 0.0 { r / fa } else { 0.0 }
        } else {
            let disc = (fa * fa + 2.0 * slope * r).max(0.0);
            2.0 * r / (fa + disc.sqrt())
        };
        a + s.clamp(0.0, h)
    }
}

fn trapezoid_cumulative(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut acc = vec![0.0; x.len()];
    for k in 1..x.len() {
        acc[k] = acc[k - 1] + 0.5 * (y[k] + y[k - 1]) * (x[k] - x[k - 1]);
    }
    acc
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpinProfile {
    /// Lorentzian distribution with full width `width` (FWHM).
    Lorentzian { omega_s: AngularFrequency, width: Rate },
    /// Gaussian distribution with standard deviation `sigma`.
    Gaussian { omega_s: AngularFrequency, sigma: Rate },
    /// Three equal-weight Lorentzians at `omega_s + j·splitting`, j ∈ {−1, 0, 1}.
    TripleLorentzian { omega_s: AngularFrequency, width: Rate, splitting: Rate },
    Discrete { spins: Vec<Spin> },
    Tabulated(TabulatedProfile),
}

impl SpinProfile {
    pub fn is_continuous(&self) -> bool {
        !matches!(self, SpinProfile::Discrete { .. })
    }
}

/// A spin ensemble: distribution, homogeneous width γ and collective coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinEnsemble {
    profile: SpinProfile,
    gamma: Rate,
    g_ens: Rate,
}

fn check_rate(name: &str, r: Rate) -> Result<()> {
    if !r.0.is_finite() || r.0 < 0.0 {
        return invalid(format!("{name} must be finite and non-negative, got {}", r.0));
    }
    Ok(())
}

fn check_center(omega_s: AngularFrequency) -> Result<()> {
    if !omega_s.0.is_finite() {
        return invalid(format!("spin frequency must be finite, got {}", omega_s.0));
    }
    Ok(())
}

impl SpinEnsemble {
    pub fn lorentzian(omega_s: AngularFrequency, width: Rate, gamma: Rate, g_ens: Rate) -> Result<Self> {
        check_center(omega_s)?;
        check_rate("Lorentzian width", width)?;
        check_rate("gamma", gamma)?;
        check_rate("g_ens", g_ens)?;
        if width.0 + gamma.0 <= 0.0 {
            return invalid("Lorentzian ensemble needs a nonzero total width");
        }
        Ok(Self { profile: SpinProfile::Lorentzian { omega_s, width }, gamma, g_ens })
    }

    pub fn gaussian(omega_s: AngularFrequency, sigma: Rate, gamma: Rate, g_ens: Rate) -> Result<Self> {
        check_center(omega_s)?;
        check_rate("gamma", gamma)?;
        check_rate("g_ens", g_ens)?;
        if !(sigma.0 > 0.0) || !sigma.0.is_finite() {
            return invalid(format!("Gaussian sigma must be positive, got {}", sigma.0));
        }
        Ok(Self { profile: SpinProfile::Gaussian { omega_s, sigma }, gamma, g_ens })
    }

    pub fn triple_lorentzian(
        omega_s: AngularFrequency,
        width: Rate,
        splitting: Rate,
        gamma: Rate,
        g_ens: Rate,
    ) -> Result<Self> {
        check_center(omega_s)?;
        check_rate("Lorentzian width", width)?;
        check_rate("hyperfine splitting", splitting)?;
        check_rate("gamma", gamma)?;
        check_rate("g_ens", g_ens)?;
        if width.0 + gamma.0 <= 0.0 {
            return invalid("triple-Lorentzian ensemble needs a nonzero total width");
        }
        Ok(Self {
            profile: SpinProfile::TripleLorentzian { omega_s, width, splitting },
            gamma,
            g_ens,
        })
    }

    /// Explicit spins; the collective coupling is √Σ|g_j|².
    pub fn discrete(spins: Vec<Spin>, gamma: Rate) -> Result<Self> {
        check_rate("gamma", gamma)?;
        if spins.iter().any(|s| !s.omega.0.is_finite() || !s.g.is_finite()) {
            return invalid("spin frequencies and couplings must be finite");
        }
        let g_ens = Rate(spins.iter().map(|s| s.g * s.g).sum::<f64>().sqrt());
        Ok(Self { profile: SpinProfile::Discrete { spins }, gamma, g_ens })
    }

    pub fn tabulated(profile: TabulatedProfile, gamma: Rate, g_ens: Rate) -> Result<Self> {
        check_rate("gamma", gamma)?;
        check_rate("g_ens", g_ens)?;
        if !(gamma.0 > 0.0) {
            return invalid("tabulated ensemble needs a positive homogeneous width");
        }
        Ok(Self { profile: SpinProfile::Tabulated(profile), gamma, g_ens })
    }

    /// Same distribution with a different collective coupling. Discrete spins
    /// are rescaled in proportion.
    pub fn with_coupling(&self, g_ens: Rate) -> Result<Self> {
        check_rate("g_ens", g_ens)?;
        let mut out = self.clone();
        if let SpinProfile::Discrete { spins } = &mut out.profile {
            if self.g_ens.0 == 0.0 {
                if g_ens.0 == 0.0 {
                    return Ok(out);
                }
                return invalid("cannot rescale a discrete ensemble with zero coupling");
            }
            let s = g_ens.0 / self.g_ens.0;
            for spin in spins.iter_mut() {
                spin.g *= s;
            }
        }
        out.g_ens = g_ens;
        Ok(out)
    }

    pub fn profile(&self) -> &SpinProfile {
        &self.profile
    }

    pub fn gamma(&self) -> Rate {
        self.gamma
    }

    pub fn g_ens(&self) -> Rate {
        self.g_ens
    }

    /// Center frequency: the nominal line center, or the coupling-weighted
    /// centroid for discrete and tabulated ensembles.
    pub fn center(&self) -> Result<AngularFrequency> {
        match &self.profile {
            SpinProfile::Lorentzian { omega_s, .. }
            | SpinProfile::Gaussian { omega_s, .. }
            | SpinProfile::TripleLorentzian { omega_s, .. } => Ok(*omega_s),
            SpinProfile::Discrete { spins } => {
                let w: f64 = spins.iter().map(|s| s.g * s.g).sum();
                if w == 0.0 {
                    return invalid("empty discrete ensemble has no center");
                }
                let m: f64 = spins.iter().map(|s| s.g * s.g * s.omega.0).sum();
                Ok(AngularFrequency(m / w))
            }
            SpinProfile::Tabulated(t) => Ok(AngularFrequency(t.centroid())),
        }
    }

    /// K(ω)/g_ens², i.e. the susceptibility per unit collective coupling.
    /// Discrete ensembles use the relative weights |g_j|²/g_ens².
    fn unit_k(&self, omega: f64) -> Result<Complex64> {
        let half = 0.5 * self.gamma.0;
        let k = match &self.profile {
            SpinProfile::Lorentzian { omega_s, width } => lorentz_k(omega - omega_s.0, 0.5 * width.0 + half),
            SpinProfile::TripleLorentzian { omega_s, width, splitting } => {
                let hw = 0.5 * width.0 + half;
                let d = omega - omega_s.0;
                (lorentz_k(d + splitting.0, hw) + lorentz_k(d, hw) + lorentz_k(d - splitting.0, hw)) / 3.0
            }
            SpinProfile::Gaussian { omega_s, sigma } => {
                let s2 = std::f64::consts::SQRT_2 * sigma.0;
                let xi = Complex64::new((omega - omega_s.0) / s2, half / s2);
                Complex64::new(0.0, -SQRT_PI_OVER_2 / sigma.0) * faddeeva(xi)
            }
            SpinProfile::Discrete { spins } => {
                let g2 = self.g_ens.0 * self.g_ens.0;
                if g2 == 0.0 {
                    return Ok(Complex64::new(0.0, 0.0));
                }
                let mut acc = Complex64::new(0.0, 0.0);
                for s in spins {
                    acc += (s.g * s.g) * lorentz_k(omega - s.omega.0, half);
                }
                acc / g2
            }
            SpinProfile::Tabulated(t) => {
                let (a, b) = t.span();
                let breaks = breakpoints(t, omega);
                integrate(
                    |x| {
                        let f = t.density_at(x);
                        f * lorentz_k(omega - x, half)
                    },
                    a,
                    b,
                    &breaks,
                    TABULATED_QUAD,
                )?
                .value
            }
        };
        if !k.re.is_finite() || !k.im.is_finite() {
            return invalid(format!("spin susceptibility is singular at omega = {omega}"));
        }
        Ok(k)
    }

    /// C(ω)/g_ens².
    fn unit_c(&self, omega: f64) -> Result<f64> {
        let half = 0.5 * self.gamma.0;
        let c = match &self.profile {
            SpinProfile::Lorentzian { omega_s, width } => lorentz_c(omega - omega_s.0, 0.5 * width.0 + half),
            SpinProfile::TripleLorentzian { omega_s, width, splitting } => {
                let hw = 0.5 * width.0 + half;
                let d = omega - omega_s.0;
                (lorentz_c(d + splitting.0, hw) + lorentz_c(d, hw) + lorentz_c(d - splitting.0, hw)) / 3.0
            }
            SpinProfile::Gaussian { omega_s, sigma } => {
                let s2 = std::f64::consts::SQRT_2 * sigma.0;
                let xi = Complex64::new((omega - omega_s.0) / s2, half / s2);
                2.0 * PI * faddeeva(xi).re / (sigma.0 * (2.0 * PI).sqrt())
            }
            SpinProfile::Discrete { spins } => {
                let g2 = self.g_ens.0 * self.g_ens.0;
                if g2 == 0.0 {
                    return Ok(0.0);
                }
                spins.iter().map(|s| (s.g * s.g) * lorentz_c(omega - s.omega.0, half)).sum::<f64>() / g2
            }
            SpinProfile::Tabulated(t) => {
                let (a, b) = t.span();
                let breaks = breakpoints(t, omega);
                integrate(
                    |x| Complex64::new(t.density_at(x) * lorentz_c(omega - x, half), 0.0),
                    a,
                    b,
                    &breaks,
                    TABULATED_QUAD,
                )?
                .value
                .re
            }
        };
        if !c.is_finite() {
            return invalid(format!("spin spectral density is singular at omega = {omega}"));
        }
        Ok(c)
    }

    /// K(ω) in rad/s.
    pub fn eval_k(&self, omega: AngularFrequency) -> Result<ComplexRate> {
        let g2 = self.g_ens.0 * self.g_ens.0;
        if g2 == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(self.unit_k(omega.0)? * g2)
    }

    /// C(ω) in rad/s.
    pub fn eval_c(&self, omega: AngularFrequency) -> Result<Rate> {
        let g2 = self.g_ens.0 * self.g_ens.0;
        if g2 == 0.0 {
            return Ok(Rate(0.0));
        }
        Ok(Rate(self.unit_c(omega.0)? * g2))
    }

    /// Γ_eff, defined through K(ω_s) = −2i g_ens²/Γ_eff. Closed forms are used
    /// for the Lorentzian and Gaussian (γ ≪ σ) profiles.
    pub fn effective_linewidth(&self) -> Result<Rate> {
        match &self.profile {
            SpinProfile::Lorentzian { width, .. } => Ok(Rate(width.0 + self.gamma.0)),
            SpinProfile::Gaussian { sigma, .. } => Ok(Rate(2.0 * (2.0 / PI).sqrt() * sigma.0)),
            _ => {
                if let SpinProfile::Discrete { spins } = &self.profile {
                    if spins.iter().all(|s| s.g == 0.0) {
                        return Err(Error::InvalidInput("empty ensemble has no linewidth".into()));
                    }
                }
                self.linewidth_from_definition()
            }
        }
    }

    /// Γ_eff = 2/(−Im K̂(ω_s)) evaluated from the susceptibility itself,
    /// whatever the profile.
    pub fn linewidth_from_definition(&self) -> Result<Rate> {
        let center = self.center()?;
        let im = self.unit_k(center.0)?.im;
        if !(im < 0.0) {
            return invalid("susceptibility at the line center has no dissipative part");
        }
        Ok(Rate(-2.0 / im))
    }

    /// κ_s = 4 g_ens²/Γ_eff.
    pub fn kappa_s(&self) -> Result<Rate> {
        if self.g_ens.0 == 0.0 {
            return Ok(Rate(0.0));
        }
        let gamma_eff = self.effective_linewidth()?;
        if !(gamma_eff.0 > 0.0) {
            return invalid("effective linewidth is zero");
        }
        Ok(Rate(4.0 * self.g_ens.0 * self.g_ens.0 / gamma_eff.0))
    }

    /// Draws `n` spins from the distribution with equal couplings g_ens/√n.
    /// Deterministic for a given seed.
    pub fn sample_discrete(&self, n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return invalid("cannot sample an ensemble of zero spins");
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let draws: Vec<f64> = match &self.profile {
            SpinProfile::Lorentzian { omega_s, width } => {
                if width.0 == 0.0 {
                    vec![omega_s.0; n]
                } else {
                    let d = Cauchy::new(omega_s.0, 0.5 * width.0).map_err(|e| Error::InvalidInput(e.to_string()))?;
                    (0..n).map(|_| d.sample(&mut rng)).collect()
                }
            }
            SpinProfile::Gaussian { omega_s, sigma } => {
                let d = Normal::new(omega_s.0, sigma.0).map_err(|e| Error::InvalidInput(e.to_string()))?;
                (0..n).map(|_| d.sample(&mut rng)).collect()
            }
            SpinProfile::TripleLorentzian { omega_s, width, splitting } => {
                let d = if width.0 > 0.0 {
                    Some(Cauchy::new(0.0, 0.5 * width.0).map_err(|e| Error::InvalidInput(e.to_string()))?)
                } else {
                    None
                };
                (0..n)
                    .map(|_| {
                        let j = rng.random_range(-1i32..=1) as f64;
                        let x = d.map_or(0.0, |d| d.sample(&mut rng));
                        omega_s.0 + j * splitting.0 + x
                    })
                    .collect()
            }
            SpinProfile::Tabulated(t) => (0..n).map(|_| t.inverse_cdf(rng.random::<f64>())).collect(),
            SpinProfile::Discrete { .. } => return invalid("sampling requires a continuous profile"),
        };
        let g = self.g_ens.0 / (n as f64).sqrt();
        let spins = draws.into_iter().map(|w| Spin { omega: AngularFrequency(w), g }).collect();
        Ok(Self { profile: SpinProfile::Discrete { spins }, gamma: self.gamma, g_ens: self.g_ens })
    }
}

fn breakpoints(t: &TabulatedProfile, omega: f64) -> Vec<f64> {
    let mut b = t.omega.clone();
    b.push(omega);
    b
}

/// 1/(d + i·hw)
#[inline]
fn lorentz_k(d: f64, hw: f64) -> Complex64 {
    let den = d * d + hw * hw;
    Complex64::new(d / den, -hw / den)
}

/// 2·hw/(d² + hw²), equal to −2 Im lorentz_k.
#[inline]
fn lorentz_c(d: f64, hw: f64) -> f64 {
    2.0 * hw / (d * d + hw * hw)
}
