use std::sync::{Arc, OnceLock};

use glvortex::forms::{evaluate_f, evaluate_q, hardy_margin, TestFunction};
use glvortex::grid::{build_grid, ProfilePair};
use glvortex::nonescaping::{energy_i, SolverOptions};
use glvortex::potential::PotentialSpec;
use glvortex::spectral::{find_epsilon_n, principal_at, SpectralResult};
use proptest::prelude::*;

struct Setup {
    eps: f64,
    profile: ProfilePair,
    spectral: SpectralResult,
}

/// N = 2, J = 256, ε = ε_N / 2: unstable non-escaping profile.
fn below_threshold() -> &'static Setup {
    static CELL: OnceLock<Setup> = OnceLock::new();
    CELL.get_or_init(|| {
        let spec = PotentialSpec::quadratic();
        let g = Arc::new(build_grid(2, 256).unwrap());
        let eps = 0.5 * find_epsilon_n(&spec, 2, &g, 1e-8).unwrap();
        let (profile, spectral) = principal_at(&spec, &g, eps, &SolverOptions::default()).unwrap();
        Setup { eps, profile, spectral }
    })
}

fn seven_dims() -> &'static ProfilePair {
    static CELL: OnceLock<ProfilePair> = OnceLock::new();
    CELL.get_or_init(|| {
        let spec = PotentialSpec::quadratic();
        let g = Arc::new(build_grid(7, 256).unwrap());
        principal_at(&spec, &g, 0.1, &SolverOptions::default()).unwrap().0
    })
}

/// Smooth Dirichlet function `Σ c_k r^k (1 - r)`, optionally vanishing at the origin.
fn smooth(grid: &Arc<glvortex::grid::RadialGrid>, coeffs: &[f64], at_origin: bool) -> TestFunction {
    TestFunction::from_fn(grid.clone(), |r| {
        let poly: f64 = coeffs.iter().enumerate().map(|(k, c)| c * r.powi(k as i32)).sum();
        let base = poly * (1.0 - r);
        if at_origin {
            base
        } else {
            base * r * r
        }
    })
}

fn eigenfunction(s: &Setup) -> TestFunction {
    TestFunction::new(s.profile.grid.clone(), s.spectral.eigenfunction.clone()).unwrap()
}

#[test]
fn quadratic_forms_on_the_principal_eigenfunction() {
    let spec = PotentialSpec::quadratic();
    let s = below_threshold();
    let psi = eigenfunction(s);
    let zero = TestFunction::zero(psi.grid.clone());
    let ell = s.spectral.eigenvalue;
    assert!((psi.mass() - 1.0).abs() < 1e-12);
    assert!((evaluate_f(&spec, &s.profile, s.eps, &psi).unwrap() - ell).abs() < 1e-6);
    let q = evaluate_q(&spec, &s.profile, s.eps, &zero, &psi).unwrap();
    assert!((q - ell).abs() < 1e-6);
    assert!(q < 0.0);
    assert_eq!(evaluate_q(&spec, &s.profile, s.eps, &zero, &zero).unwrap(), 0.0);
    assert_eq!(evaluate_f(&spec, &s.profile, s.eps, &zero).unwrap(), 0.0);
    // With a negative Hardy constant the margin is only informative through F itself.
    let margin = hardy_margin(&spec, &s.profile, s.eps, &psi).unwrap();
    let f = evaluate_f(&spec, &s.profile, s.eps, &psi).unwrap();
    assert!(f < 0.0);
    assert!((margin - (f + psi.hardy_mass())).abs() < 1e-9 * (1.0 + psi.hardy_mass()));
}

#[test]
fn second_variation_matches_energy_expansion() {
    // I(f, tψ) - I(f, 0) = t²/2 Q(0, ψ) + O(t⁴); the t⁴ remainder makes the
    // quotient error shrink a hundredfold from t = 1e-2 to 1e-3 until rounding.
    let spec = PotentialSpec::quadratic();
    let s = below_threshold();
    let psi = eigenfunction(s);
    let zero = TestFunction::zero(psi.grid.clone());
    let q = evaluate_q(&spec, &s.profile, s.eps, &zero, &psi).unwrap();
    let base = energy_i(&spec, &s.profile).unwrap().total;
    let quotient = |t: f64| {
        let mut pair = s.profile.clone();
        pair.g = psi.values().iter().map(|v| t * v).collect();
        2.0 * (energy_i(&spec, &pair).unwrap().total - base) / (t * t)
    };
    let d2 = (quotient(1e-2) - q).abs();
    let d3 = (quotient(1e-3) - q).abs();
    assert!(d2 < 1e-2 * q.abs(), "t = 1e-2: {d2:e}");
    assert!(d3 < d2 / 20.0 || d3 < 1e-6 * q.abs(), "t = 1e-3: {d3:e} vs {d2:e}");
}

#[test]
fn seven_dimensional_margin_is_nonnegative_for_polynomials() {
    let spec = PotentialSpec::quadratic();
    let p = seven_dims();
    for k in 1..=4 {
        let psi = TestFunction::from_fn(p.grid.clone(), |r| r * (1.0 - r * r).powi(k));
        assert!(hardy_margin(&spec, p, 0.1, &psi).unwrap() >= -1e-6);
    }
    let zero = TestFunction::zero(p.grid.clone());
    assert_eq!(hardy_margin(&spec, p, 0.1, &zero).unwrap(), 0.0);
}

#[test]
fn mismatched_epsilon_is_rejected() {
    let spec = PotentialSpec::quadratic();
    let s = below_threshold();
    let psi = eigenfunction(s);
    assert!(evaluate_f(&spec, &s.profile, 2.0 * s.eps, &psi).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn q_is_homogeneous_of_degree_two(
        a in prop::collection::vec(-2.0f64..2.0, 4),
        b in prop::collection::vec(-2.0f64..2.0, 4),
        scale in -5.0f64..5.0,
    ) {
        let spec = PotentialSpec::quadratic();
        let s = below_threshold();
        let g = &s.profile.grid;
        let (alpha, beta) = (smooth(g, &a, false), smooth(g, &b, true));
        let q = evaluate_q(&spec, &s.profile, s.eps, &alpha, &beta).unwrap();
        let qs = evaluate_q(&spec, &s.profile, s.eps, &alpha.scaled(scale), &beta.scaled(scale)).unwrap();
        let expected = scale * scale * q;
        prop_assert!((qs - expected).abs() <= 1e-10 * expected.abs().max(1e-12));
    }

    #[test]
    fn q_without_alpha_is_f(b in prop::collection::vec(-2.0f64..2.0, 5)) {
        let spec = PotentialSpec::quadratic();
        let s = below_threshold();
        let beta = smooth(&s.profile.grid, &b, true);
        let zero = TestFunction::zero(beta.grid.clone());
        let q = evaluate_q(&spec, &s.profile, s.eps, &zero, &beta).unwrap();
        let f = evaluate_f(&spec, &s.profile, s.eps, &beta).unwrap();
        prop_assert_eq!(q, f);
    }

    #[test]
    fn f_is_bounded_below_by_the_principal_eigenvalue(b in prop::collection::vec(-2.0f64..2.0, 5)) {
        let spec = PotentialSpec::quadratic();
        let s = below_threshold();
        let beta = smooth(&s.profile.grid, &b, true);
        let f = evaluate_f(&spec, &s.profile, s.eps, &beta).unwrap();
        prop_assert!(f >= s.spectral.eigenvalue * beta.mass() - 1e-8);
    }

    #[test]
    fn seven_dimensional_hardy_bound(c in prop::collection::vec(-2.0f64..2.0, 5)) {
        let spec = PotentialSpec::quadratic();
        let p = seven_dims();
        let psi = smooth(&p.grid, &c, false);
        prop_assert!(hardy_margin(&spec, p, 0.1, &psi).unwrap() >= -1e-6);
    }
}
