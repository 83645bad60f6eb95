//! Escaping profile below and above the threshold in two dimensions, from each initialization.

use std::sync::Arc;

use glvortex::escaping::{solve_escaping_profile, EscapeOptions, Initialization};
use glvortex::grid::build_grid;
use glvortex::potential::PotentialSpec;
use glvortex::spectral::find_epsilon_n;

fn main() -> Result<(), glvortex::error::Error> {
    let spec = PotentialSpec::quadratic();
    let grid = Arc::new(build_grid(2, 256)?);
    let eps_n = find_epsilon_n(&spec, 2, &grid, 1e-6)?;
    println!("epsilon_2 = {eps_n:.8}");
    for eps in [0.5 * eps_n, 2.0 * eps_n] {
        for init in Initialization::all(7) {
            let opts = EscapeOptions { init, ..Default::default() };
            let res = solve_escaping_profile(&spec, &grid, eps, &opts)?;
            println!(
                "eps = {eps:.5} {init:?}: escaped = {}, g(0) = {:.8}, I = {:.10}, residual = {:.1e}",
                res.escaped, res.pair.g[0], res.energy.total, res.residual
            );
        }
    }
    Ok(())
}
