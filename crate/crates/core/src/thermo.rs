//! Thermal occupations, spin polarization and spin temperature.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::quantities::{photon_temperature, AngularFrequency, Temperature};

/// Bose–Einstein occupation 1/(exp(ħω/k_BT) − 1).
///
/// A negative temperature describes an inverted bath. Its occupation is
/// evaluated with both the frequency and the temperature sign-flipped,
/// n(ω, −|T|) = 1/(exp(ħ(−ω)/(k_B·(−|T|))) − 1), which is the same number as
/// for +|T|.
pub fn bose_occupation(omega: AngularFrequency, t: Temperature) -> Result<f64> {
    if !(omega.0 > 0.0) || !omega.0.is_finite() {
        return invalid(format!("frequency must be positive, got {}", omega.0));
    }
    if t.0 == 0.0 || !t.0.is_finite() {
        return invalid(format!("temperature must be nonzero and finite, got {}", t.0));
    }
    let (w, temp) = if t.is_inverted() { (-omega.0, t.0) } else { (omega.0, t.0) };
    let x = photon_temperature(AngularFrequency(w)) / temp;
    Ok(1.0 / x.exp_m1())
}

/// Inverse of [`bose_occupation`] for a positive temperature.
pub fn temperature_from_occupation(omega: AngularFrequency, n: f64) -> Result<Temperature> {
    if !(omega.0 > 0.0) || !omega.0.is_finite() {
        return invalid(format!("frequency must be positive, got {}", omega.0));
    }
    if !(n > 0.0) || !n.is_finite() {
        return invalid(format!("occupation must be positive, got {n}"));
    }
    Ok(Temperature(photon_temperature(omega) / (1.0 / n).ln_1p()))
}

/// Spin polarization ρ = tanh(ħω_s/(2k_B T_s)), odd in T_s.
pub fn polarization_from_temperature(omega_s: AngularFrequency, t_s: Temperature) -> Result<f64> {
    if t_s.0 == 0.0 || !t_s.0.is_finite() {
        return invalid(format!("spin temperature must be nonzero and finite, got {}", t_s.0));
    }
    Ok((photon_temperature(omega_s) / (2.0 * t_s.0)).tanh())
}

/// atanh through log1p; keeps relative accuracy both near 0 and near ±1.
fn atanh_stable(rho: f64) -> f64 {
    let a = rho.abs();
    0.5 * (2.0 * a / (1.0 - a)).ln_1p() * rho.signum()
}

/// Signed spin temperature for a polarization 0 < |ρ| < 1.
pub fn temperature_from_polarization(omega_s: AngularFrequency, rho: f64) -> Result<Temperature> {
    if !(rho.abs() < 1.0) || rho == 0.0 || !rho.is_finite() {
        return invalid(format!("polarization must satisfy 0 < |rho| < 1, got {rho}"));
    }
    Ok(Temperature(photon_temperature(omega_s) / (2.0 * atanh_stable(rho))))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpinThermoState {
    pub rho: f64,
    pub t_s: Temperature,
    pub omega_s: AngularFrequency,
}

impl SpinThermoState {
    pub fn inverted(&self) -> bool {
        self.rho < 0.0
    }
}

/// Spin state from an echo enhancement χ relative to thermal equilibrium at
/// `t0`: ρ = χ·ρ(T₀). A negative χ means the population is inverted.
pub fn spin_state_from_echo_enhancement(
    chi: f64,
    t0: Temperature,
    omega_s: AngularFrequency,
) -> Result<SpinThermoState> {
    if chi == 0.0 || !chi.is_finite() {
        return invalid(format!("echo enhancement must be nonzero and finite, got {chi}"));
    }
    if !(t0.0 > 0.0) {
        return invalid(format!("reference temperature must be positive, got {}", t0.0));
    }
    let rho = chi * polarization_from_temperature(omega_s, t0)?;
    if !(rho.abs() < 1.0) {
        return Err(crate::Error::InconsistentMeasurement(format!(
            "enhancement {chi} implies |rho| = {} >= 1",
            rho.abs()
        )));
    }
    let t_s = temperature_from_polarization(omega_s, rho)?;
    Ok(SpinThermoState { rho, t_s, omega_s })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantities::{HBAR, K_B};
    use proptest::prelude::*;

    fn ghz(f: f64) -> AngularFrequency {
        AngularFrequency::from_hz(f * 1e9)
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn room_temperature_occupation() {
        let n = bose_occupation(ghz(9.8), Temperature(294.0)).unwrap();
        assert!((n - 624.6).abs() < 0.05, "{n}");
        let t = temperature_from_occupation(ghz(9.8), n).unwrap();
        assert!(rel(t.0, 294.0) < 1e-13);
    }

    #[test]
    fn cold_limit() {
        assert!(bose_occupation(ghz(9.8), Temperature(1e-3)).unwrap() < 1e-200);
        assert!(bose_occupation(ghz(9.8), Temperature(0.0)).is_err());
    }

    #[test]
    fn inverted_bath_occupation() {
        let a = bose_occupation(ghz(9.8), Temperature(-0.43)).unwrap();
        let b = bose_occupation(ghz(9.8), Temperature(0.43)).unwrap();
        assert_eq!(a, b);
        assert!((a - 0.505).abs() < 0.002, "{a}");
    }

    #[test]
    fn half_photon_at_ten_ghz() {
        let t = temperature_from_occupation(ghz(10.0), 0.5).unwrap();
        let scale = HBAR * ghz(10.0).0 / K_B;
        assert!(rel(t.0, scale / 3f64.ln()) < 1e-14);
        assert!((t.0 - 0.437).abs() < 5e-4);
        assert!(temperature_from_occupation(ghz(10.0), 0.0).is_err());
    }

    #[test]
    fn large_n_is_linear() {
        let w = ghz(9.8);
        for n in [421.0, 1e3, 1e5] {
            let t = temperature_from_occupation(w, n).unwrap().0;
            let lin = photon_temperature(w) * n;
            // leading correction is half a photon
            assert!(((t - photon_temperature(w) * (n + 0.5)) / t).abs() < 1e-6);
            assert!(((t - lin) / t).abs() < 0.5 / n * (1.0 + 1e-3));
            if n >= 500.0 {
                assert!(((t - lin) / t).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn polarization_anchors() {
        let w = ghz(9.8);
        let rho = polarization_from_temperature(w, Temperature(294.0)).unwrap();
        assert!((rho - 8.0e-4).abs() < 0.01 * 8.0e-4, "{rho}");
        assert!(polarization_from_temperature(w, Temperature(1e-4)).unwrap() == 1.0);
        let neg = polarization_from_temperature(w, Temperature(-294.0)).unwrap();
        assert_eq!(neg, -rho);
        let t = temperature_from_polarization(w, 0.496).unwrap();
        assert!((t.0 - 0.433).abs() < 1e-3, "{}", t.0);
        assert_eq!(temperature_from_polarization(w, -0.496).unwrap().0, -t.0);
        assert!(temperature_from_polarization(w, 1.0).is_err());
        assert!(temperature_from_polarization(w, 0.0).is_err());
    }

    #[test]
    fn echo_enhancement() {
        let w = ghz(9.8);
        let s = spin_state_from_echo_enhancement(-620.0, Temperature(294.0), w).unwrap();
        assert!((s.rho + 0.496).abs() < 0.005);
        assert!(s.t_s.0 < 0.0 && s.t_s.0 > -0.5);
        assert!(s.inverted());
        let id = spin_state_from_echo_enhancement(1.0, Temperature(294.0), w).unwrap();
        assert!(rel(id.t_s.0, 294.0) < 1e-12);
        let flip = spin_state_from_echo_enhancement(-1.0, Temperature(294.0), w).unwrap();
        assert!(rel(flip.t_s.0, -294.0) < 1e-12);
        assert!(matches!(
            spin_state_from_echo_enhancement(-2000.0, Temperature(294.0), w),
            Err(crate::Error::InconsistentMeasurement(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn occupation_round_trip(e in -6.0f64..9.0, f in 1.0f64..20.0) {
            let n = 10f64.powf(e);
            let w = ghz(f);
            let t = temperature_from_occupation(w, n).unwrap();
            let back = bose_occupation(w, t).unwrap();
            prop_assert!(rel(back, n) < 1e-10);
        }

        #[test]
        fn polarization_round_trip(rho in -0.999f64..0.999) {
            prop_assume!(rho != 0.0);
            let w = ghz(9.8);
            let t = temperature_from_polarization(w, rho).unwrap();
            let back = polarization_from_temperature(w, t).unwrap();
            prop_assert!(rel(back, rho) < 1e-10);
        }

        #[test]
        fn monotone_in_temperature(t in 0.01f64..1000.0, dt in 1e-3f64..10.0) {
            let w = ghz(9.8);
            prop_assert!(bose_occupation(w, Temperature(t + dt)).unwrap() > bose_occupation(w, Temperature(t)).unwrap());
            let lo = polarization_from_temperature(w, Temperature(t)).unwrap();
            let hi = polarization_from_temperature(w, Temperature(t + dt)).unwrap();
            prop_assert!(hi < lo || lo == 1.0);
        }
    }
}
