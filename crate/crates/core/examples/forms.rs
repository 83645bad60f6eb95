//! Quadratic forms at the non-escaping profile: F_ε on the principal
//! eigenfunction, the full second variation Q_ε, and the Hardy margin for N = 7.

use std::sync::Arc;

use glvortex::forms::{evaluate_f, evaluate_q, hardy_margin, TestFunction};
use glvortex::grid::build_grid;
use glvortex::nonescaping::SolverOptions;
use glvortex::potential::PotentialSpec;
use glvortex::spectral::principal_at;

fn main() -> Result<(), glvortex::error::Error> {
    let spec = PotentialSpec::quadratic();
    let opts = SolverOptions::default();

    let grid = Arc::new(build_grid(2, 512)?);
    for eps in [0.1, 1.0] {
        let (profile, sp) = principal_at(&spec, &grid, eps, &opts)?;
        let psi = TestFunction::from_fn(grid.clone(), |r| grid.interpolate(&sp.eigenfunction, r));
        let alpha = TestFunction::from_fn(grid.clone(), |r| r * (1.0 - r));
        println!(
            "N = 2, eps = {eps}: ell = {:+.6}, F(psi1) = {:+.6}, Q(alpha, psi1) = {:+.6}",
            sp.eigenvalue,
            evaluate_f(&spec, &profile, eps, &psi)?,
            evaluate_q(&spec, &profile, eps, &alpha, &psi)?
        );
    }

    let grid7 = Arc::new(build_grid(7, 512)?);
    let (profile, _) = principal_at(&spec, &grid7, 0.05, &opts)?;
    for k in 1..=3 {
        let psi = TestFunction::from_fn(grid7.clone(), |r| (1.0 - r * r).powi(k));
        println!(
            "N = 7, psi = (1 - r²)^{k}: Hardy margin = {:.6}",
            hardy_margin(&spec, &profile, 0.05, &psi)?
        );
    }
    Ok(())
}
