//! Escaping/non-escaping classification on a log grid bracketing ε_N.

use std::sync::Arc;

use glvortex::escaping::{classify_dichotomy, log_spaced};
use glvortex::grid::build_grid;
use glvortex::potential::PotentialSpec;
use glvortex::spectral::find_epsilon_n;

fn main() -> Result<(), glvortex::error::Error> {
    let spec = PotentialSpec::quadratic();
    let n = 3;
    let grid = Arc::new(build_grid(n, 256)?);
    let eps_n = find_epsilon_n(&spec, n, &grid, 1e-6)?;
    let report = classify_dichotomy(&spec, n, &grid, &log_spaced(eps_n / 8.0, 4.0 * eps_n, 10))?;
    println!("N = {n}, epsilon_N = {:.6}, flips = {}", report.epsilon_n, report.flips());
    for row in &report.rows {
        println!(
            "  eps = {:.5} escaped = {:5} gap = {:?}",
            row.epsilon, row.escaped, row.energy_gap
        );
    }
    Ok(())
}
