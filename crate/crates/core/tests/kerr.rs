use kerrgate::masterq::{
    drive_for_photon_number, driven_steady_state, kerr_curve, steady_state, AtomCavityModel, Polarization,
};
use kerrgate::params::{derive, Detunings, RateSet};
use kerrgate::response::coupled_amplitude;
use num_complex::Complex;

fn model(n: f64, pump: f64, probe: f64) -> AtomCavityModel<f64> {
    AtomCavityModel::new(RateSet::reference(), Detunings::new(probe, pump).unwrap(), n)
}

fn grid_for(m: &AtomCavityModel<f64>, pump: Polarization, targets: &[f64]) -> Vec<f64> {
    targets
        .iter()
        .map(|&t| drive_for_photon_number(m, pump, t).unwrap())
        .collect()
}

#[test]
fn reduced_layout_agrees_with_full_two_mode_model() {
    let m = model(0.9, 20.0, 20.0)
        .with_n_max(2)
        .with_drive(Polarization::Plus, Complex::new(4.0, 0.0));
    let full = steady_state(&m).unwrap();
    let small = driven_steady_state(&m).unwrap();
    let (a, b) = (full.observables, small.observables);
    assert!((a.amp_plus - b.amp_plus).norm() < 1e-9);
    assert!((a.m_plus - b.m_plus).abs() < 1e-9);
    assert!(a.m_minus.abs() < 1e-10 && b.m_minus.abs() < 1e-12);
    assert!((a.atom_excitation - b.atom_excitation).abs() < 1e-9);
    full.rho.check_physical().unwrap();
}

#[test]
fn weak_drive_tracks_response_model() {
    let m0 = derive(&RateSet::<f64>::reference(), 1.0).unwrap().m0;
    for &n in &[0.6, 1.0] {
        for &omega in &[-30.0, 0.0, 20.0, 60.0] {
            let eps = 0.5 * (m0 / 100.0).sqrt() * (75.0f64.powi(2) + omega * omega).sqrt();
            let m = model(n, omega, omega).with_drive(Polarization::Plus, Complex::new(eps, 0.0));
            let ss = driven_steady_state(&m).unwrap();
            assert!(ss.observables.m_plus <= m0 / 100.0);
            let t = ss.transmission_amplitude(&m, Polarization::Plus).unwrap();
            let expect = coupled_amplitude(omega, &m.rates, n);
            assert!((t.norm() / expect.norm() - 1.0).abs() < 0.01, "{n} {omega}");
            assert!((t.arg() - expect.arg()).abs() <= 0.01 * expect.arg().abs() + 1e-9, "{n} {omega}");
        }
    }
}

#[test]
fn plus_pump_reduces_probe_phase_magnitude() {
    let m = model(0.9, 20.0, 30.0).with_n_max(6);
    let targets: Vec<f64> = (0..=6).map(|i| 0.05 * i as f64).collect();
    let grid = grid_for(&m, Polarization::Plus, &targets);
    let curve = kerr_curve(&m, Polarization::Plus, Polarization::Plus, &grid).unwrap();
    for w in curve.windows(2) {
        assert!(w[1].phi_probe_deg.abs() < w[0].phi_probe_deg.abs());
    }
    assert!(curve[0].phi_probe_deg < 0.0);
    let reduction = 1.0 - curve[6].phi_probe_deg.abs() / curve[2].phi_probe_deg.abs();
    assert!((reduction - 0.3).abs() <= 0.15, "{reduction}");
}

#[test]
fn minus_pump_is_far_weaker() {
    let m = model(0.9, 30.0, 20.0).with_n_max(4);
    let slope = |pump: Polarization| {
        let grid = grid_for(&m, pump, &[0.0, 0.02]);
        let c = kerr_curve(&m, pump, Polarization::Plus, &grid).unwrap();
        (c[1].phi_probe_deg - c[0].phi_probe_deg) / (c[1].m_pump - c[0].m_pump)
    };
    let (sp, sm) = (slope(Polarization::Plus), slope(Polarization::Minus));
    assert!(sp.abs() >= 5.0 * sm.abs(), "{sp} {sm}");
}
