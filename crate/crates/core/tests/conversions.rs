mod common;

use common::{log_uniform, rng};
use maser_core::quantities::{
    db_to_power_ratio, dbm_to_watt, hz_to_angular, power_ratio_to_db, watt_to_dbm, CONSTANTS, GAMMA_E, HBAR, K_B,
};
use maser_core::thermo::{
    bose_occupation, polarization_from_temperature, temperature_from_occupation, temperature_from_polarization,
};
use maser_core::{AngularFrequency, Temperature};
use rand::Rng;

const SAMPLES: usize = 1_000_000;

fn signed(r: &mut common::TestRng, lo: f64, hi: f64) -> f64 {
    let m = log_uniform(r, lo, hi);
    if r.random::<bool>() {
        m
    } else {
        -m
    }
}

#[test]
fn unit_conversions_are_mutual_inverses() {
    let mut r = rng(11);
    let mut worst = [0.0f64; 5];
    for _ in 0..SAMPLES {
        let f = signed(&mut r, 1e-3, 1e15);
        let back = hz_to_angular(f).unwrap().hz();
        worst[0] = worst[0].max(((back - f) / f).abs());

        let w = log_uniform(&mut r, 1e-25, 1e5);
        let back = dbm_to_watt(watt_to_dbm(w).unwrap()).unwrap();
        worst[1] = worst[1].max(((back - w) / w).abs());

        let dbm = signed(&mut r, 1e-3, 200.0);
        let back = watt_to_dbm(dbm_to_watt(dbm).unwrap()).unwrap();
        worst[2] = worst[2].max(((back - dbm) / dbm).abs());

        let ratio = log_uniform(&mut r, 1e-30, 1e30);
        let back = db_to_power_ratio(power_ratio_to_db(ratio).unwrap()).unwrap();
        worst[3] = worst[3].max(((back - ratio) / ratio).abs());

        let db = signed(&mut r, 1e-3, 300.0);
        let back = power_ratio_to_db(db_to_power_ratio(db).unwrap()).unwrap();
        worst[4] = worst[4].max(((back - db) / db).abs());
    }
    assert!(worst.iter().all(|w| *w <= 1e-12), "{worst:?}");
}

#[test]
fn occupation_and_polarization_are_mutual_inverses() {
    let mut r = rng(12);
    let mut worst = [0.0f64; 2];
    for _ in 0..SAMPLES {
        let w = AngularFrequency::from_hz(log_uniform(&mut r, 1e8, 1e12));
        let n = log_uniform(&mut r, 1e-6, 1e9);
        let t = temperature_from_occupation(w, n).unwrap();
        worst[0] = worst[0].max(((bose_occupation(w, t).unwrap() - n) / n).abs());

        let rho = signed(&mut r, 1e-9, 0.999);
        let ts = temperature_from_polarization(w, rho).unwrap();
        worst[1] = worst[1].max(((polarization_from_temperature(w, ts).unwrap() - rho) / rho).abs());
    }
    assert!(worst[0] < 1e-10, "{worst:?}");
    assert!(worst[1] < 1e-12, "{worst:?}");
}

#[test]
fn inverted_bath_occupation_matches_positive_temperature() {
    let mut r = rng(13);
    for _ in 0..10_000 {
        let w = AngularFrequency::from_hz(log_uniform(&mut r, 1e8, 1e12));
        let t = log_uniform(&mut r, 1e-3, 1e4);
        assert_eq!(bose_occupation(w, Temperature(-t)).unwrap(), bose_occupation(w, Temperature(t)).unwrap());
    }
}

#[test]
fn constants_are_pinned() {
    assert_eq!(HBAR.to_bits(), 1.054_571_817e-34f64.to_bits());
    assert_eq!(K_B.to_bits(), 1.380_649e-23f64.to_bits());
    assert_eq!(GAMMA_E.to_bits(), (2.0 * std::f64::consts::PI * 28.0e9f64).to_bits());
    assert_eq!(CONSTANTS.hbar.to_bits(), HBAR.to_bits());
    assert_eq!(CONSTANTS.k_b.to_bits(), K_B.to_bits());
    assert_eq!(CONSTANTS.gamma_e.to_bits(), GAMMA_E.to_bits());
}
