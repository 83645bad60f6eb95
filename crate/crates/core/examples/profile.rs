//! Non-escaping profile f_ε for a few ε in two dimensions, with energy and residual.

use std::sync::Arc;

use glvortex::grid::build_grid;
use glvortex::nonescaping::{energy_i, profile_residual, solve_nonescaping_profile, SolverOptions};
use glvortex::potential::PotentialSpec;

fn main() -> Result<(), glvortex::error::Error> {
    let spec = PotentialSpec::quadratic();
    let grid = Arc::new(build_grid(2, 512)?);
    let opts = SolverOptions::default();
    println!("{:>8} {:>12} {:>12} {:>12}", "eps", "f(1/2)", "I_eps", "residual");
    for eps in [0.05, 0.1, 0.3, 1.0, 10.0] {
        let pair = solve_nonescaping_profile(&spec, &grid, eps, &opts)?;
        let e = energy_i(&spec, &pair)?;
        let res = profile_residual(&spec, &pair)?;
        println!("{eps:>8} {:>12.8} {:>12.8} {res:>12.2e}", grid.interpolate(&pair.f, 0.5), e.total);
    }
    let pair = solve_nonescaping_profile(&spec, &grid, 0.1, &opts)?;
    let path = std::env::temp_dir().join("glvortex_profile.csv");
    pair.save_csv(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}
