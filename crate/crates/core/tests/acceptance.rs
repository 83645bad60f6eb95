//! End-to-end acceptance checks. Each test prints one `criterion k: PASS|FAIL`
//! line (written straight to stderr so it shows without `--nocapture`) and
//! then asserts.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use glvortex::escaping::{log_spaced, solve_escaping_profile, EscapeOptions, Initialization};
use glvortex::field_oracle::{
    initial_state, minimize_full_energy, radial_symmetry_deviation, z_invariance_deviation, CylinderGrid, FieldInit,
    OracleOptions,
};
use glvortex::forms::{evaluate_q, TestFunction};
use glvortex::grid::{build_grid, RadialGrid};
use glvortex::harmonic::{
    equator_energy, equator_instability_probe, harmonic_residual, solve_harmonic_theta, HarmonicOptions, HarmonicSeed,
    ThetaProfile,
};
use glvortex::nonescaping::{energy_i, solve_nonescaping_profile, SolverOptions};
use glvortex::potential::PotentialSpec;
use glvortex::spectral::{
    dirichlet_lambda1, ell, find_epsilon_n, hardy_constant, locate_threshold, principal_at, DEFAULT_THRESHOLD_TOL,
};

fn report(k: usize, pass: bool, started: Instant, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!("criterion {k}: {verdict} ({:.1} s) {detail}\n", started.elapsed().as_secs_f64());
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
    assert!(pass, "criterion {k} failed: {detail}");
}

fn grid(n: usize, j: usize) -> Arc<RadialGrid> {
    Arc::new(build_grid(n, j).unwrap())
}

/// Square of the first zero of `J₀`, from the power series and bisection.
fn bessel_lambda1() -> f64 {
    let j0 = |x: f64| {
        let q = -(x * x) / 4.0;
        let (mut term, mut sum) = (1.0, 1.0);
        for k in 1..60 {
            term *= q / (k * k) as f64;
            sum += term;
        }
        sum
    };
    let (mut lo, mut hi) = (2.0, 3.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if j0(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let z = 0.5 * (lo + hi);
    z * z
}

fn quadratic() -> PotentialSpec {
    PotentialSpec::quadratic()
}

#[test]
fn criterion_1_hardy_sign_flip() {
    let t = Instant::now();
    let expected = [-1.0, -1.75, -2.0, -1.75, -1.0, 0.25, 1.25, 2.5, 4.0];
    let mismatches: Vec<String> = (2..=10usize)
        .zip(expected)
        .filter(|&(n, e)| hardy_constant(n) != e)
        .map(|(n, e)| format!("N={n}: {} != {e}", hardy_constant(n)))
        .collect();
    let signs = (2..=10).all(|n| (hardy_constant(n) < 0.0) == (n <= 6));
    report(
        1,
        mismatches.is_empty() && signs,
        t,
        format!("negative exactly for N <= 6: {signs}; value mismatches: {mismatches:?}"),
    );
}

#[test]
fn criterion_2_threshold_and_bound() {
    let t = Instant::now();
    let spec = quadratic();
    let g = grid(2, 512);
    let opts = SolverOptions::default();
    let eps_n = find_epsilon_n(&spec, 2, &g, DEFAULT_THRESHOLD_TOL).unwrap();
    let below = ell(&spec, &g, eps_n - 1e-4, &opts).unwrap();
    let above = ell(&spec, &g, eps_n + 1e-4, &opts).unwrap();
    let lambda1 = dirichlet_lambda1(2, &g).unwrap();
    let oracle = bessel_lambda1();
    let rel = (lambda1 - oracle).abs() / oracle;
    let bound = 1.0 / lambda1.sqrt();
    let pass = below < 0.0 && above > 0.0 && rel < 1e-3 && eps_n < bound;
    report(
        2,
        pass,
        t,
        format!(
            "eps_N = {eps_n:.8}, ell(-) = {below:.3e}, ell(+) = {above:.3e}, lambda1 = {lambda1:.6} vs {oracle:.6} (rel {rel:.1e}), bound {bound:.6}"
        ),
    );
}

#[test]
fn criterion_3_dichotomy_sweep() {
    let t = Instant::now();
    let spec = quadratic();
    let g = grid(2, 512);
    let opts = EscapeOptions::default();
    let eps_n = find_epsilon_n(&spec, 2, &g, DEFAULT_THRESHOLD_TOL).unwrap();
    let epsilons = log_spaced(eps_n / 8.0, 4.0 * eps_n, 12);
    let mut flags = Vec::new();
    let mut invariants = true;
    let mut ordering = true;
    for &eps in &epsilons {
        let res = solve_escaping_profile(&spec, &g, eps, &opts).unwrap();
        flags.push(res.escaped);
        if res.escaped {
            let base = solve_nonescaping_profile(&spec, &g, eps, &SolverOptions::default()).unwrap();
            ordering &= res.energy.total < energy_i(&spec, &base).unwrap().total;
            let (f, gg) = (&res.pair.f, &res.pair.g);
            for i in 1..g.cells() {
                invariants &= f[i] * f[i] + gg[i] * gg[i] < 1.0 && f[i + 1] > f[i] && gg[i + 1] < gg[i];
            }
        }
    }
    let flips = flags.windows(2).filter(|w| w[0] != w[1]).count();
    let located = epsilons.iter().zip(&flags).all(|(e, esc)| *esc == (*e < eps_n));
    let pass = flips == 1 && located && ordering && invariants;
    report(
        3,
        pass,
        t,
        format!("flips = {flips}, located at eps_N = {located}, energy order = {ordering}, invariants = {invariants}, escaped = {flags:?}"),
    );
}

#[test]
fn criterion_4_no_escape_in_seven_dimensions() {
    let t = Instant::now();
    let spec = quadratic();
    let g = grid(7, 512);
    let ells: Vec<f64> = [0.01, 0.1, 1.0, 10.0]
        .iter()
        .map(|&e| ell(&spec, &g, e, &SolverOptions::default()).unwrap())
        .collect();
    let floor = ells.iter().all(|&l| l >= 0.25 - 1e-3);
    let mut escaped = Vec::new();
    for eps in [0.05, 0.5] {
        for init in Initialization::all(42) {
            let opts = EscapeOptions { init, ..Default::default() };
            escaped.push(solve_escaping_profile(&spec, &g, eps, &opts).unwrap().escaped);
        }
    }
    let none = escaped.iter().all(|e| !e);
    report(4, floor && none, t, format!("ell = {ells:?}, escaped = {escaped:?}"));
}

#[test]
fn criterion_5_second_variation_identity() {
    let t = Instant::now();
    let spec = quadratic();
    let g = grid(2, 512);
    let eps = 0.5 * find_epsilon_n(&spec, 2, &g, DEFAULT_THRESHOLD_TOL).unwrap();
    let (profile, sp) = principal_at(&spec, &g, eps, &SolverOptions::default()).unwrap();
    let psi = TestFunction::new(g.clone(), sp.eigenfunction.clone()).unwrap();
    let q = evaluate_q(&spec, &profile, eps, &TestFunction::zero(g.clone()), &psi).unwrap();
    let diff = (q - sp.eigenvalue).abs();
    let pass = diff < 1e-6 && q < 0.0 && (psi.mass() - 1.0).abs() < 1e-12;
    report(5, pass, t, format!("Q(0, psi1) = {q:.10}, ell = {:.10}, |diff| = {diff:.1e}", sp.eigenvalue));
}

#[test]
fn criterion_6_harmonic_closed_form() {
    let t = Instant::now();
    let g = grid(2, 512);
    let th = solve_harmonic_theta(2, &g, HarmonicSeed::Escaping, &HarmonicOptions::default()).unwrap();
    let err = g
        .nodes()
        .iter()
        .zip(&th.theta)
        .map(|(r, v)| (v - 2.0 * r.atan()).abs())
        .fold(0.0, f64::max);
    let energy = th.energy();
    let mut exact: Vec<f64> = g.nodes().iter().map(|r| 2.0 * r.atan()).collect();
    *exact.last_mut().unwrap() = std::f64::consts::FRAC_PI_2;
    let residual = harmonic_residual(2, &ThetaProfile::new(g.clone(), exact).unwrap()).unwrap();
    let pass = err < 1e-3 && (energy - 1.0).abs() < 1e-3 && residual < 1e-4;
    report(6, pass, t, format!("max error {err:.1e}, J = {energy:.8}, closed-form residual {residual:.1e}"));
}

#[test]
fn criterion_7_harmonic_dichotomy() {
    let t = Instant::now();
    let opts = HarmonicOptions::default();
    let mut pass = true;
    let mut detail = Vec::new();
    for n in 3..=6usize {
        let g = grid(n, 1024);
        let energy = solve_harmonic_theta(n, &g, HarmonicSeed::Escaping, &opts).unwrap().energy();
        let equator = equator_energy(n).unwrap();
        let probe = equator_instability_probe(n, &g).unwrap();
        pass &= energy < equator && probe < 0.0;
        detail.push(format!("N={n}: J={energy:.8} < {equator:.8}, probe {probe:.3}"));
    }
    let g7 = grid(7, 1024);
    let equator7 = equator_energy(7).unwrap();
    for seed in [HarmonicSeed::Escaping, HarmonicSeed::Equator] {
        let energy = solve_harmonic_theta(7, &g7, seed, &opts).unwrap().energy();
        pass &= energy >= equator7 - 1e-3;
        detail.push(format!("N=7 {seed:?}: J={energy:.6}"));
    }
    let probe7 = equator_instability_probe(7, &g7).unwrap();
    pass &= probe7 >= -1e-6;
    detail.push(format!("N=7 probe {probe7:.3}"));
    report(7, pass, t, detail.join("; "));
}

#[test]
fn criterion_8_oracle_cross_validation() {
    let t = Instant::now();
    let spec = quadratic();
    let g = grid(2, 512);
    let eps_n = find_epsilon_n(&spec, 2, &g, DEFAULT_THRESHOLD_TOL).unwrap();
    let cyl = Arc::new(CylinderGrid::new(64, 16).unwrap());
    let opts = OracleOptions::default();
    let relax = |eps: f64| {
        let start = initial_state(&cyl, eps, FieldInit::Random { seed: 42 }, None).unwrap();
        minimize_full_energy(&spec, start, &opts).unwrap()
    };

    let low = 0.5 * eps_n;
    let escaping = solve_escaping_profile(&spec, &g, low, &EscapeOptions::default()).unwrap();
    let target_low = 2.0 * PI * escaping.energy.total;
    let s = relax(low);
    let (lo, hi) = s.third_component_range();
    let (z_dev, radial_dev) = (z_invariance_deviation(&s), radial_symmetry_deviation(&s));
    let rel_low = (s.energy - target_low).abs() / target_low;
    let pass_low = z_dev < 1e-2 && radial_dev < 2e-2 && (lo > 0.0 || hi < 0.0) && rel_low < 0.03;

    let high = 2.0 * eps_n;
    let base = solve_nonescaping_profile(&spec, &g, high, &SolverOptions::default()).unwrap();
    let target_high = 2.0 * PI * energy_i(&spec, &base).unwrap().total;
    let s2 = relax(high);
    let (lo2, hi2) = s2.third_component_range();
    let u3 = lo2.abs().max(hi2.abs());
    let rel_high = (s2.energy - target_high).abs() / target_high;
    let pass_high = u3 < 1e-3 && rel_high < 0.03;

    report(
        8,
        pass_low && pass_high,
        t,
        format!(
            "eps_N/2: z dev {z_dev:.1e}, radial dev {radial_dev:.1e}, u3 in [{lo:.4}, {hi:.4}], energy {:.5} vs {target_low:.5} ({:.2}%); 2 eps_N: max|u3| {u3:.1e}, energy {:.5} vs {target_high:.5} ({:.2}%)",
            s.energy,
            100.0 * rel_low,
            s2.energy,
            100.0 * rel_high
        ),
    );
}

#[test]
fn criterion_9_mesh_refinement() {
    let t = Instant::now();
    let spec = quadratic();
    let cells = [256usize, 512, 1024];
    let mut eps_n = Vec::new();
    let mut g0 = Vec::new();
    let mut lambda1 = Vec::new();
    // Fixed ε for the escaping branch, well inside the escaping range.
    let eps_escape = 0.16;
    for &j in &cells {
        let g = grid(2, j);
        let tol = if j > 512 { 1e-8 } else { 1e-10 };
        let opts = SolverOptions { tolerance: tol, ..Default::default() };
        eps_n.push(locate_threshold(&spec, 2, &g, 1e-10, &opts).unwrap().epsilon_n);
        let eopts = EscapeOptions { tolerance: tol.max(1e-9), ..Default::default() };
        g0.push(solve_escaping_profile(&spec, &g, eps_escape, &eopts).unwrap().pair.g[0]);
        lambda1.push(dirichlet_lambda1(2, &g).unwrap());
    }
    let ratio = |v: &[f64]| (v[0] - v[1]) / (v[1] - v[2]);
    let ratios = [ratio(&eps_n), ratio(&g0), ratio(&lambda1)];
    let pass = ratios.iter().all(|r| (3.0..=5.0).contains(r));
    report(
        9,
        pass,
        t,
        format!(
            "ratios eps_N {:.3}, g(0) {:.3}, lambda1 {:.3} (eps_N {eps_n:?}, g(0) {g0:?})",
            ratios[0], ratios[1], ratios[2]
        ),
    );
}
