//! Principal eigenvalue ℓ(ε) of the linearized operator across ε, and the
//! Dirichlet eigenvalue λ₁ that bounds the threshold from above.

use std::sync::Arc;

use glvortex::escaping::log_spaced;
use glvortex::grid::build_grid;
use glvortex::nonescaping::SolverOptions;
use glvortex::potential::PotentialSpec;
use glvortex::spectral::{dirichlet_lambda1, ell, hardy_constant};

fn main() -> Result<(), glvortex::error::Error> {
    let spec = PotentialSpec::quadratic();
    let opts = SolverOptions::default();
    for n in [2usize, 3, 7] {
        let grid = Arc::new(build_grid(n, 256)?);
        println!(
            "N = {n}: lambda1 = {:.6}, Hardy constant = {:.2}",
            dirichlet_lambda1(n, &grid)?,
            hardy_constant(n)
        );
        for eps in log_spaced(0.02, 2.0, 7) {
            println!("  eps = {eps:.4}  ell = {:+.6}", ell(&spec, &grid, eps, &opts)?);
        }
    }
    Ok(())
}
