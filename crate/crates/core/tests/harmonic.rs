use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use glvortex::error::Error;
use glvortex::grid::build_grid;
use glvortex::harmonic::{
    equator_energy, equator_form, equator_instability_probe, harmonic_residual, probe_with_direction,
    solve_harmonic_theta, HarmonicOptions, HarmonicSeed, ThetaProfile,
};

#[test]
fn escaping_maps_beat_the_equator_below_seven_dimensions() {
    for n in 3..=6usize {
        let g = Arc::new(build_grid(n, 512).unwrap());
        let th = solve_harmonic_theta(n, &g, HarmonicSeed::Escaping, &HarmonicOptions::default()).unwrap();
        assert!(th.escaping);
        assert!(th.energy() < equator_energy(n).unwrap(), "N = {n}");
        assert!(th.theta[0] < 1e-2);
        assert!(th.theta.windows(2).all(|w| w[1] > w[0]), "N = {n}: not increasing");
        let (f, gg) = (th.f(), th.g());
        assert!(f.iter().zip(&gg).all(|(a, b)| (a * a + b * b - 1.0).abs() < 1e-14));
        assert!(equator_instability_probe(n, &g).unwrap() < 0.0);
    }
}

#[test]
fn equator_is_minimal_from_seven_dimensions() {
    for n in [7usize, 8] {
        let g = Arc::new(build_grid(n, 512).unwrap());
        let th = solve_harmonic_theta(n, &g, HarmonicSeed::Escaping, &HarmonicOptions::default()).unwrap();
        assert!(th.energy() >= equator_energy(n).unwrap() - 1e-3);
        assert!(equator_instability_probe(n, &g).unwrap() >= -1e-6);
    }
}

#[test]
fn equator_seed_stays_on_the_equator_energy() {
    let g = Arc::new(build_grid(4, 256).unwrap());
    let th = solve_harmonic_theta(4, &g, HarmonicSeed::Equator, &HarmonicOptions::default()).unwrap();
    assert!(th.theta.iter().all(|t| (0.0..=FRAC_PI_2).contains(t)));
    assert!(th.energy() <= equator_energy(4).unwrap() + 1e-3);
}

#[test]
fn probe_direction_certifies_the_instability() {
    let g = Arc::new(build_grid(2, 256).unwrap());
    let probe = probe_with_direction(2, &g).unwrap();
    assert!(probe.value < 0.0);
    assert_eq!(probe.direction[0], 0.0);
    assert_eq!(*probe.direction.last().unwrap(), 0.0);
    assert!(equator_form(&g, &probe.direction).unwrap() < 0.0);
}

#[test]
fn equator_residual_and_energies() {
    for n in 3..=8usize {
        let g = Arc::new(build_grid(n, 128).unwrap());
        let th = ThetaProfile::new(g.clone(), vec![FRAC_PI_2; g.len()]).unwrap();
        assert!(harmonic_residual(n, &th).unwrap() < 1e-9);
    }
    assert_eq!(equator_energy(3).unwrap(), 1.0);
    assert!((equator_energy(7).unwrap() - 0.6).abs() < 1e-15);
    assert!(matches!(equator_energy(2), Err(Error::Divergent(_))));
}
