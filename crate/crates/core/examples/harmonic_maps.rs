//! Radial harmonic maps into the hemisphere: energy of the minimizer versus
//! the equator map, and the equator's instability probe.

use std::sync::Arc;

use glvortex::grid::build_grid;
use glvortex::harmonic::{
    equator_energy, equator_instability_probe, harmonic_residual, solve_harmonic_theta, HarmonicOptions, HarmonicSeed,
};

fn main() -> Result<(), glvortex::error::Error> {
    let opts = HarmonicOptions::default();
    for n in 2..=8usize {
        let grid = Arc::new(build_grid(n, 512)?);
        let theta = solve_harmonic_theta(n, &grid, HarmonicSeed::Escaping, &opts)?;
        let equator = equator_energy(n).map(|e| format!("{e:.6}")).unwrap_or_else(|_| "inf".into());
        println!(
            "N = {n}: J = {:.6} (equator {equator}), escaping = {}, probe = {:+.4}",
            theta.energy(),
            theta.escaping,
            equator_instability_probe(n, &grid)?
        );
    }
    let grid = Arc::new(build_grid(2, 512)?);
    let theta = solve_harmonic_theta(2, &grid, HarmonicSeed::Escaping, &opts)?;
    let err = grid
        .nodes()
        .iter()
        .zip(&theta.theta)
        .map(|(r, t)| (t - 2.0 * r.atan()).abs())
        .fold(0.0, f64::max);
    println!(
        "N = 2: max |theta - 2 arctan r| = {err:.2e}, residual = {:.1e}",
        harmonic_residual(2, &theta)?
    );
    Ok(())
}
