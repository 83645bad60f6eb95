//! Threshold ε_N where ℓ changes sign, for N = 2 … 6, against the bound sqrt(W'(1)/λ₁).

use std::sync::Arc;

use glvortex::error::Error;
use glvortex::grid::build_grid;
use glvortex::nonescaping::SolverOptions;
use glvortex::potential::PotentialSpec;
use glvortex::spectral::{locate_threshold, DEFAULT_THRESHOLD_TOL};

fn main() -> Result<(), Error> {
    let spec = PotentialSpec::quadratic();
    let opts = SolverOptions::default();
    for n in 2..=7usize {
        let grid = Arc::new(build_grid(n, 512)?);
        match locate_threshold(&spec, n, &grid, DEFAULT_THRESHOLD_TOL, &opts) {
            Ok(t) => println!(
                "N = {n}: epsilon_N = {:.8}  lambda1 = {:.6}  bound = {:.6}",
                t.epsilon_n, t.lambda1, t.upper_bound
            ),
            Err(e @ Error::NoThreshold { .. }) => println!("N = {n}: {e}"),
            Err(e) => return Err(e),
        }
    }
    Ok(())
}
