use std::sync::{Arc, OnceLock};

use glvortex::error::Error;
use glvortex::escaping::{
    classify_dichotomy, log_spaced, pair_residual, solve_escaping_profile, EscapeOptions, EscapeResult, Initialization,
};
use glvortex::grid::{build_grid, RadialGrid};
use glvortex::nonescaping::{energy_i, solve_nonescaping_profile, SolverOptions};
use glvortex::potential::PotentialSpec;
use glvortex::spectral::find_epsilon_n;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Setup {
    grid: Arc<RadialGrid>,
    eps_n: f64,
    escaped: EscapeResult,
}

fn setup() -> &'static Setup {
    static CELL: OnceLock<Setup> = OnceLock::new();
    CELL.get_or_init(|| {
        let spec = PotentialSpec::quadratic();
        let grid = Arc::new(build_grid(2, 256).unwrap());
        let eps_n = find_epsilon_n(&spec, 2, &grid, 1e-8).unwrap();
        let escaped = solve_escaping_profile(&spec, &grid, 0.5 * eps_n, &EscapeOptions::default()).unwrap();
        Setup { grid, eps_n, escaped }
    })
}

fn non_escaping_energy(eps: f64) -> f64 {
    let spec = PotentialSpec::quadratic();
    let base = solve_nonescaping_profile(&spec, &setup().grid, eps, &SolverOptions::default()).unwrap();
    energy_i(&spec, &base).unwrap().total
}

#[test]
fn escaped_profile_has_the_expected_shape() {
    let s = setup();
    let res = &s.escaped;
    let (f, g) = (&res.pair.f, &res.pair.g);
    let j = s.grid.cells();
    assert!(res.escaped);
    assert!(g[0] > 0.5);
    assert!(res.residual < 1e-6);
    assert_eq!(f[0], 0.0);
    for i in 1..j {
        assert!(g[i] > 0.0);
        assert!(f[i] * f[i] + g[i] * g[i] < 1.0);
        assert!(f[i + 1] > f[i]);
        assert!(g[i + 1] < g[i]);
    }
    assert!(res.energy.total < non_escaping_energy(0.5 * s.eps_n));
}

#[test]
fn initializations_reach_the_same_minimizer() {
    let spec = PotentialSpec::quadratic();
    let s = setup();
    for init in Initialization::all(11) {
        let opts = EscapeOptions { init, ..Default::default() };
        let res = solve_escaping_profile(&spec, &s.grid, 0.5 * s.eps_n, &opts).unwrap();
        let df = res.pair.f.iter().zip(&s.escaped.pair.f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let dg = res.pair.g.iter().zip(&s.escaped.pair.g).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(df < 1e-6 && dg < 1e-6, "{init:?}: {df:e} {dg:e}");
    }
}

#[test]
fn above_threshold_the_minimizer_does_not_escape() {
    let spec = PotentialSpec::quadratic();
    let s = setup();
    let eps = 2.0 * s.eps_n;
    let opts = EscapeOptions::default();
    let res = solve_escaping_profile(&spec, &s.grid, eps, &opts).unwrap();
    assert!(!res.escaped);
    let base = solve_nonescaping_profile(&spec, &s.grid, eps, &SolverOptions::default()).unwrap();
    let df = res.pair.f.iter().zip(&base.f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(df <= 10.0 * opts.tolerance);
    assert!(res.pair.g.iter().all(|v| v.abs() <= 1e-3));
}

#[test]
fn energy_gap_closes_towards_the_threshold() {
    let spec = PotentialSpec::quadratic();
    let s = setup();
    let gap = |eps: f64| {
        let res = solve_escaping_profile(&spec, &s.grid, eps, &EscapeOptions::default()).unwrap();
        assert!(res.escaped);
        non_escaping_energy(eps) - res.energy.total
    };
    let far = gap(0.5 * s.eps_n);
    let near = gap(0.99 * s.eps_n);
    assert!(near > 0.0 && near < far);
}

#[test]
fn core_height_grows_as_epsilon_shrinks() {
    let spec = PotentialSpec::quadratic();
    let s = setup();
    let heights: Vec<f64> = [0.5, 0.25, 0.125]
        .iter()
        .map(|k| {
            solve_escaping_profile(&spec, &s.grid, k * s.eps_n, &EscapeOptions::default())
                .unwrap()
                .pair
                .g[0]
        })
        .collect();
    assert!(heights.windows(2).all(|w| w[1] > w[0]), "{heights:?}");
    assert!(heights[2] < 1.0);
}

#[test]
fn reflection_leaves_the_energy_unchanged() {
    let spec = PotentialSpec::quadratic();
    let pair = &setup().escaped.pair;
    let a = energy_i(&spec, pair).unwrap();
    let b = energy_i(&spec, &pair.reflected()).unwrap();
    assert_eq!(a.total.to_bits(), b.total.to_bits());
}

#[test]
fn escaped_pair_is_a_local_minimum() {
    // Second differences of the energy along random directions supported on
    // the unknowns, normalized by the direction's weighted mass.
    let spec = PotentialSpec::quadratic();
    let s = setup();
    let pair = &s.escaped.pair;
    let j = s.grid.cells();
    let w = s.grid.quad_weights();
    let e0 = energy_i(&spec, pair).unwrap().total;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let t = 1e-4;
    for _ in 0..16 {
        let df: Vec<f64> = (0..=j).map(|i| if i == 0 || i == j { 0.0 } else { rng.random_range(-1.0..1.0) }).collect();
        let mut dg: Vec<f64> = (0..=j).map(|i| if i == j { 0.0 } else { rng.random_range(-1.0..1.0) }).collect();
        dg[0] = dg[1];
        let mass: f64 = (0..=j).map(|i| w[i] * (df[i] * df[i] + dg[i] * dg[i])).sum();
        let shifted = |s: f64| {
            let mut p = pair.clone();
            for i in 0..=j {
                p.f[i] += s * df[i];
                p.g[i] += s * dg[i];
            }
            energy_i(&spec, &p).unwrap().total
        };
        let curvature = (shifted(t) + shifted(-t) - 2.0 * e0) / (t * t * mass);
        assert!(curvature >= -1e-6, "curvature {curvature}");
    }
}

#[test]
fn residual_of_the_trivial_branch_and_boundary_checks() {
    let spec = PotentialSpec::quadratic();
    let s = setup();
    let base = solve_nonescaping_profile(&spec, &s.grid, 1.0, &SolverOptions::default()).unwrap();
    assert!(pair_residual(&spec, &base).unwrap() < 1e-10);
    let mut bad = base.clone();
    bad.g.iter_mut().for_each(|v| *v = 0.1);
    assert!(matches!(pair_residual(&spec, &bad), Err(Error::BoundaryViolation(_))));
}

#[test]
fn dichotomy_in_three_dimensions() {
    let spec = PotentialSpec::quadratic();
    let grid = Arc::new(build_grid(3, 128).unwrap());
    let eps_n = find_epsilon_n(&spec, 3, &grid, 1e-6).unwrap();
    let report = classify_dichotomy(&spec, 3, &grid, &log_spaced(eps_n / 8.0, 4.0 * eps_n, 8)).unwrap();
    assert_eq!(report.flips(), 1);
    for row in &report.rows {
        assert!(row.error.is_none());
        let gap = row.energy_gap.unwrap();
        assert_eq!(row.escaped, row.epsilon < eps_n);
        if row.escaped {
            assert!(gap > 0.0);
        } else {
            assert!(gap.abs() < 1e-8);
        }
    }
}

#[test]
fn dichotomy_preconditions() {
    let spec = PotentialSpec::quadratic();
    let g7 = Arc::new(build_grid(7, 64).unwrap());
    assert!(matches!(classify_dichotomy(&spec, 7, &g7, &[0.1]), Err(Error::Sizing(_))));
    let quartic = PotentialSpec::analytic("quartic", |t| t.powi(4), |t| 4.0 * t.powi(3), |t| 12.0 * t * t, false);
    let g2 = Arc::new(build_grid(2, 64).unwrap());
    assert!(matches!(classify_dichotomy(&quartic, 2, &g2, &[0.1]), Err(Error::Domain(_))));
}
