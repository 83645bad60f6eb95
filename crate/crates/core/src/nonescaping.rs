//! Scalar vortex profile `f_ε` and the reduced energy `I_ε(f, g)`.
//!
//! The discrete energy is
//!
//! ```text
//! I_h(f, g) = ½ Σ_k c_k [(Δf_k)² + (Δg_k)²]
//!           + ½ Σ_{i≥1} w_i [(N-1) f_i² / r_i² + W(1 - f_i² - g_i²) / ε²]
//! ```
//!
//! and every residual in this crate is its gradient divided by the nodal
//! weight `w_i`, a conservative second-order discretization of
//! `-u'' - (N-1)u'/r + ...`. Newton iterates therefore land on exact
//! critical points of `I_h`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Epsilon, ProfilePair, RadialGrid};
use crate::linalg::SymTridiagonal;
use crate::potential::PotentialSpec;

/// Newton updates smaller than this (max norm) count as converged at the rounding floor.
pub(crate) const STAGNATION_STEP: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Max-norm tolerance on the nodal residual.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub gradient_f: f64,
    pub gradient_g: f64,
    pub angular: f64,
    pub potential: f64,
    pub total: f64,
}

/// Nodal residuals of the coupled profile equations; entries `0` and `J` are zero.
pub(crate) struct Residuals {
    pub f: Vec<f64>,
    pub g: Vec<f64>,
}

impl Residuals {
    pub fn max_norm(&self) -> f64 {
        self.f.iter().chain(&self.g).fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon.is_finite() && epsilon > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("epsilon must be positive and finite, got {epsilon}")))
    }
}

/// Residuals of
/// `-f'' - (N-1)f'/r + (N-1)f/r² = W'(1-f²-g²) f / ε²` and
/// `-g'' - (N-1)g'/r = W'(1-f²-g²) g / ε²` at interior nodes.
pub(crate) fn coupled_residuals(
    spec: &PotentialSpec,
    grid: &RadialGrid,
    epsilon: f64,
    f: &[f64],
    g: &[f64],
) -> Result<Residuals> {
    let j = grid.cells();
    let c = grid.couplings();
    let w = grid.quad_weights();
    let r = grid.nodes();
    let nm1 = (grid.dimension() - 1) as f64;
    let inv_e2 = 1.0 / (epsilon * epsilon);
    let mut rf = vec![0.0; j + 1];
    let mut rg = vec![0.0; j + 1];
    for i in 1..j {
        let pv = spec.eval(1.0 - f[i] * f[i] - g[i] * g[i])?;
        let lap_f = c[i - 1] * (f[i] - f[i - 1]) - c[i] * (f[i + 1] - f[i]);
        let lap_g = c[i - 1] * (g[i] - g[i - 1]) - c[i] * (g[i + 1] - g[i]);
        rf[i] = lap_f / w[i] + nm1 * f[i] / (r[i] * r[i]) - inv_e2 * pv.wp * f[i];
        rg[i] = lap_g / w[i] - inv_e2 * pv.wp * g[i];
    }
    Ok(Residuals { f: rf, g: rg })
}

/// Max interior residual of both profile equations.
pub fn profile_residual(spec: &PotentialSpec, pair: &ProfilePair) -> Result<f64> {
    let epsilon = pair.epsilon.finite()?;
    Ok(coupled_residuals(spec, &pair.grid, epsilon, &pair.f, &pair.g)?.max_norm())
}

/// Discrete reduced energy `I_ε(f, g)` split into its terms.
pub fn energy_i(spec: &PotentialSpec, pair: &ProfilePair) -> Result<EnergyBreakdown> {
    let epsilon = pair.epsilon.finite()?;
    energy_parts(spec, &pair.grid, epsilon, &pair.f, &pair.g)
}

pub(crate) fn energy_parts(
    spec: &PotentialSpec,
    grid: &RadialGrid,
    epsilon: f64,
    f: &[f64],
    g: &[f64],
) -> Result<EnergyBreakdown> {
    if grid.dimension() == 2 && f[0] != 0.0 {
        return Err(Error::Divergent(format!(
            "angular term ∫ f²/r dr diverges for N = 2 with f(0) = {}",
            f[0]
        )));
    }
    let nm1 = (grid.dimension() - 1) as f64;
    let gradient_f = 0.5 * grid.gradient_form(f, f);
    let gradient_g = 0.5 * grid.gradient_form(g, g);
    let angular = 0.5 * nm1 * grid.inverse_square_form(f, f);
    let w = grid.quad_weights();
    let mut potential = 0.0;
    for i in 1..grid.len() {
        potential += w[i] * spec.eval(1.0 - f[i] * f[i] - g[i] * g[i])?.w;
    }
    potential *= 0.5 / (epsilon * epsilon);
    Ok(EnergyBreakdown {
        gradient_f,
        gradient_g,
        angular,
        potential,
        total: gradient_f + gradient_g + angular + potential,
    })
}

/// Solve the scalar profile equation for `f_ε` with `f(0) = 0`, `f(1) = 1`.
///
/// Damped Newton from `f = r`; falls back to continuation in `ε` (halving
/// from `ε ≥ 1`) if the direct solve stalls or leaves the monotone branch.
pub fn solve_nonescaping_profile(
    spec: &PotentialSpec,
    grid: &Arc<RadialGrid>,
    epsilon: f64,
    opts: &SolverOptions,
) -> Result<ProfilePair> {
    check_epsilon(epsilon)?;
    let initial = grid.nodes().to_vec();
    match newton_scalar(spec, grid, epsilon, initial, opts) {
        Ok(f) if is_monotone_profile(&f) => {
            return ProfilePair::non_escaping(grid.clone(), f, Epsilon::Finite(epsilon))
        }
        Ok(_) => log::debug!("direct solve at eps = {epsilon} left the monotone branch"),
        Err(Error::NumericalBreakdown(msg)) => return Err(Error::NumericalBreakdown(msg)),
        Err(e) => log::debug!("direct solve at eps = {epsilon} failed: {e}"),
    }
    let f = continuation(spec, grid, epsilon, opts)?;
    ProfilePair::non_escaping(grid.clone(), f, Epsilon::Finite(epsilon))
}

/// Continuation in `ε`: start at `ε·2^k ≥ 1` and halve down to the target.
pub fn solve_by_continuation(
    spec: &PotentialSpec,
    grid: &Arc<RadialGrid>,
    epsilon: f64,
    start: f64,
    opts: &SolverOptions,
) -> Result<ProfilePair> {
    check_epsilon(epsilon)?;
    let mut f = newton_scalar(spec, grid, start, grid.nodes().to_vec(), opts)?;
    let mut e = start;
    while e > epsilon {
        e = (0.5 * e).max(epsilon);
        f = newton_scalar(spec, grid, e, f, opts)?;
    }
    ProfilePair::non_escaping(grid.clone(), f, Epsilon::Finite(epsilon))
}

fn continuation(
    spec: &PotentialSpec,
    grid: &Arc<RadialGrid>,
    epsilon: f64,
    opts: &SolverOptions,
) -> Result<Vec<f64>> {
    let mut start = epsilon;
    while start < 1.0 {
        start *= 2.0;
    }
    let pair = solve_by_continuation(spec, grid, epsilon, start, opts)?;
    if !is_monotone_profile(&pair.f) {
        return Err(Error::NumericalBreakdown(format!(
            "continuation at eps = {epsilon} produced a non-monotone profile"
        )));
    }
    Ok(pair.f)
}

fn is_monotone_profile(f: &[f64]) -> bool {
    let j = f.len() - 1;
    f.windows(2).all(|w| w[1] > w[0]) && f[1..j].iter().all(|v| *v > 0.0 && *v < 1.0)
}

/// Hessian of `I_h` in `f` at fixed `g = 0`, restricted to interior nodes.
fn scalar_hessian(spec: &PotentialSpec, grid: &RadialGrid, epsilon: f64, f: &[f64]) -> Result<SymTridiagonal> {
    let j = grid.cells();
    let c = grid.couplings();
    let w = grid.quad_weights();
    let r = grid.nodes();
    let nm1 = (grid.dimension() - 1) as f64;
    let inv_e2 = 1.0 / (epsilon * epsilon);
    let mut diag = Vec::with_capacity(j - 1);
    for i in 1..j {
        let pv = spec.eval(1.0 - f[i] * f[i])?;
        let pot = nm1 / (r[i] * r[i]) - inv_e2 * (pv.wp - 2.0 * f[i] * f[i] * pv.wpp);
        diag.push(c[i - 1] + c[i] + w[i] * pot);
    }
    let off = (1..j - 1).map(|i| -c[i]).collect();
    Ok(SymTridiagonal::new(diag, off))
}

fn newton_scalar(
    spec: &PotentialSpec,
    grid: &RadialGrid,
    epsilon: f64,
    mut f: Vec<f64>,
    opts: &SolverOptions,
) -> Result<Vec<f64>> {
    let j = grid.cells();
    let w = grid.quad_weights();
    let zeros = vec![0.0; j + 1];
    f[0] = 0.0;
    f[j] = 1.0;
    let mut res = coupled_residuals(spec, grid, epsilon, &f, &zeros)?;
    let mut norm = res.max_norm();
    let merit = |r: &Residuals| r.f.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut m = merit(&res);
    for _ in 0..opts.max_iterations {
        if !norm.is_finite() {
            return Err(Error::NumericalBreakdown(format!(
                "non-finite residual in profile solve at eps = {epsilon}"
            )));
        }
        if norm < opts.tolerance {
            return Ok(f);
        }
        let hess = scalar_hessian(spec, grid, epsilon, &f)?;
        let rhs: Vec<f64> = (1..j).map(|i| -res.f[i] * w[i]).collect();
        let step = hess.solve_shifted(0.0, &rhs)?;
        if step.iter().all(|d| d.abs() < STAGNATION_STEP) {
            // the update is below rounding: the residual sits at its floor
            log::debug!("profile solve at eps = {epsilon} stagnated at residual {norm:e}");
            return Ok(f);
        }
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let mut trial = f.clone();
            for i in 1..j {
                trial[i] = (f[i] + alpha * step[i - 1]).clamp(-1.0, 1.0);
            }
            let trial_res = coupled_residuals(spec, grid, epsilon, &trial, &zeros)?;
            let tm = merit(&trial_res);
            if tm < m || trial_res.max_norm() < opts.tolerance {
                f = trial;
                res = trial_res;
                m = tm;
                norm = res.max_norm();
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if norm < opts.tolerance {
        return Ok(f);
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iterations,
        residual: norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;

    fn grid(n: usize, j: usize) -> Arc<RadialGrid> {
        Arc::new(build_grid(n, j).unwrap())
    }

    #[test]
    fn large_epsilon_gives_linear_profile() {
        let g = grid(2, 256);
        let pair = solve_nonescaping_profile(&PotentialSpec::quadratic(), &g, 1e6, &SolverOptions::default()).unwrap();
        let err = pair.f.iter().zip(g.nodes()).map(|(f, r)| (f - r).abs()).fold(0.0, f64::max);
        assert!(err < 1e-4, "err = {err}");
        assert_eq!(pair.f[0], 0.0);
        assert_eq!(pair.f[256], 1.0);
    }

    #[test]
    fn residual_of_linear_seed_at_unit_epsilon() {
        let g = grid(2, 512);
        let pair = ProfilePair::non_escaping(g.clone(), g.nodes().to_vec(), Epsilon::Finite(1.0)).unwrap();
        let res = profile_residual(&PotentialSpec::quadratic(), &pair).unwrap();
        // f = r: the left side vanishes, leaving r (1 - r²), maximal at r = 1/√3
        let expected = g.nodes().iter().map(|r| r * (1.0 - r * r)).fold(0.0, f64::max);
        assert!((res - expected).abs() < 1e-9, "{res} vs {expected}");
        assert!(res > 0.1);
    }

    #[test]
    fn limit_marker_is_rejected() {
        let g = grid(2, 32);
        let pair = ProfilePair::non_escaping(g.clone(), g.nodes().to_vec(), Epsilon::Limit).unwrap();
        assert!(matches!(profile_residual(&PotentialSpec::quadratic(), &pair), Err(Error::Domain(_))));
        assert!(matches!(energy_i(&PotentialSpec::quadratic(), &pair), Err(Error::Domain(_))));
    }

    #[test]
    fn constant_profile_energy() {
        let g = grid(7, 512);
        let pair = ProfilePair::non_escaping(g.clone(), vec![1.0; 513], Epsilon::Finite(0.3)).unwrap();
        let e = energy_i(&PotentialSpec::quadratic(), &pair).unwrap();
        assert_eq!(e.potential, 0.0);
        assert!((e.total - 0.6).abs() < 1e-4, "{}", e.total);

        let g2 = grid(2, 64);
        let pair = ProfilePair::non_escaping(g2, vec![1.0; 65], Epsilon::Finite(0.3)).unwrap();
        assert!(matches!(energy_i(&PotentialSpec::quadratic(), &pair), Err(Error::Divergent(_))));
    }

    #[test]
    fn bad_epsilon_rejected() {
        let g = grid(2, 32);
        let spec = PotentialSpec::quadratic();
        assert!(solve_nonescaping_profile(&spec, &g, 0.0, &SolverOptions::default()).is_err());
        assert!(solve_nonescaping_profile(&spec, &g, f64::NAN, &SolverOptions::default()).is_err());
    }

    #[test]
    fn converged_profile_is_monotone_and_bounded() {
        let g = grid(3, 256);
        let spec = PotentialSpec::quadratic();
        let opts = SolverOptions::default();
        for eps in [0.05, 0.2, 1.0, 5.0] {
            let pair = solve_nonescaping_profile(&spec, &g, eps, &opts).unwrap();
            assert!(profile_residual(&spec, &pair).unwrap() < opts.tolerance);
            assert!(pair.f.windows(2).all(|w| w[1] > w[0]));
            assert!(pair.f[1..256].iter().all(|v| *v > 0.0 && *v < 1.0));
        }
    }
}
