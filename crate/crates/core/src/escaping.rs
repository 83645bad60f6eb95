//! Escaping profile `(f̃_ε, g_ε)`: minimization of the reduced energy over
//! pairs with `f(1) = 1`, `g(1) = 0`, `f(0) = 0`, and the dichotomy sweep.
//!
//! Unknowns are `f_1 … f_{J-1}` and `g_1 … g_{J-1}` with `g_0 := g_1` (the
//! natural condition at the origin, which is exact for the discrete energy
//! because node 0 carries no nodal weight). The minimizer runs
//! Barzilai-Borwein descent in an `H¹`-type metric and hands over to damped
//! Newton on the 2x2 block-tridiagonal Hessian once the dual gradient norm is
//! small.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Epsilon, ProfilePair, RadialGrid};
use crate::linalg::{solve_block_tridiagonal, solve_tridiagonal, Block};
use crate::nonescaping::{
    check_epsilon, coupled_residuals, energy_i, energy_parts, solve_nonescaping_profile, EnergyBreakdown,
    SolverOptions, STAGNATION_STEP,
};
use crate::potential::PotentialSpec;
use crate::spectral::{locate_threshold, principal_at, DEFAULT_THRESHOLD_TOL};

/// `max g` above this value counts as escaped.
pub const ESCAPE_THRESHOLD: f64 = 1e-3;
/// Allowed overshoot of `f² + g²` before an iterate is projected back.
pub const BALL_SLACK: f64 = 1e-6;

/// Starting guess for `g`; `f` always starts from `f_ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Initialization {
    /// `0.5 ψ₁ / max ψ₁` with `ψ₁` the principal eigenfunction of `L_ε`.
    EigenfunctionBump,
    /// `0.3 (1 - r)`.
    ConstantBump,
    /// Positive bump with seeded random amplitude, centre and width.
    RandomBump { seed: u64 },
}

impl Initialization {
    pub fn all(seed: u64) -> [Initialization; 3] {
        [
            Initialization::EigenfunctionBump,
            Initialization::ConstantBump,
            Initialization::RandomBump { seed },
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EscapeOptions {
    /// Max-norm tolerance on the nodal residual of both equations.
    pub tolerance: f64,
    pub max_descent_iterations: usize,
    pub max_newton_iterations: usize,
    /// Dual gradient norm below which Newton steps are attempted.
    pub newton_switch: f64,
    pub init: Initialization,
}

impl Default for EscapeOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_descent_iterations: 200_000,
            max_newton_iterations: 100,
            newton_switch: 1e-4,
            init: Initialization::EigenfunctionBump,
        }
    }
}

impl EscapeOptions {
    fn profile_options(&self) -> SolverOptions {
        SolverOptions {
            tolerance: self.tolerance,
            max_iterations: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EscapeResult {
    pub pair: ProfilePair,
    pub escaped: bool,
    pub energy: EnergyBreakdown,
    pub iterations: usize,
    pub residual: f64,
    /// Number of times an iterate was pulled back into the unit ball.
    pub projections: usize,
}

struct Problem<'a> {
    spec: &'a PotentialSpec,
    grid: &'a RadialGrid,
    epsilon: f64,
}

impl Problem<'_> {
    fn j(&self) -> usize {
        self.grid.cells()
    }

    fn energy(&self, f: &[f64], g: &[f64]) -> Result<f64> {
        Ok(energy_parts(self.spec, self.grid, self.epsilon, f, g)?.total)
    }

    /// Energy gradient on the unknowns, `(∂I/∂f_i, ∂I/∂g_i)` for `i = 1 … J-1`.
    fn gradient(&self, f: &[f64], g: &[f64]) -> Result<Vec<[f64; 2]>> {
        let res = coupled_residuals(self.spec, self.grid, self.epsilon, f, g)?;
        let w = self.grid.quad_weights();
        Ok((1..self.j()).map(|i| [w[i] * res.f[i], w[i] * res.g[i]]).collect())
    }

    fn residual(&self, f: &[f64], g: &[f64]) -> Result<f64> {
        Ok(coupled_residuals(self.spec, self.grid, self.epsilon, f, g)?.max_norm())
    }

    /// Block-tridiagonal Hessian of the discrete energy.
    fn hessian(&self, f: &[f64], g: &[f64]) -> Result<(Vec<Block>, Vec<Block>)> {
        let j = self.j();
        let c = self.grid.couplings();
        let w = self.grid.quad_weights();
        let r = self.grid.nodes();
        let nm1 = (self.grid.dimension() - 1) as f64;
        let inv_e2 = 1.0 / (self.epsilon * self.epsilon);
        let mut diag = Vec::with_capacity(j - 1);
        for i in 1..j {
            let pv = self.spec.eval(1.0 - f[i] * f[i] - g[i] * g[i])?;
            let left_g = if i > 1 { c[i - 1] } else { 0.0 };
            let ff = c[i - 1] + c[i] + w[i] * (nm1 / (r[i] * r[i]) + inv_e2 * (2.0 * f[i] * f[i] * pv.wpp - pv.wp));
            let gg = left_g + c[i] + w[i] * inv_e2 * (2.0 * g[i] * g[i] * pv.wpp - pv.wp);
            let fg = w[i] * inv_e2 * 2.0 * f[i] * g[i] * pv.wpp;
            diag.push([[ff, fg], [fg, gg]]);
        }
        let off = (1..j - 1).map(|i| [[-c[i], 0.0], [0.0, -c[i]]]).collect();
        Ok((diag, off))
    }
}

/// Symmetric positive definite metric used to precondition the descent.
struct Metric {
    f_diag: Vec<f64>,
    g_diag: Vec<f64>,
    off: Vec<f64>,
}

impl Metric {
    fn new(p: &Problem) -> Self {
        let j = p.j();
        let c = p.grid.couplings();
        let w = p.grid.quad_weights();
        let r = p.grid.nodes();
        let nm1 = (p.grid.dimension() - 1) as f64;
        let sigma = 1.0 + p.spec.wp_at_one().abs() / (p.epsilon * p.epsilon);
        let f_diag = (1..j)
            .map(|i| c[i - 1] + c[i] + w[i] * (nm1 / (r[i] * r[i]) + sigma))
            .collect();
        let g_diag = (1..j)
            .map(|i| if i > 1 { c[i - 1] } else { 0.0 } + c[i] + w[i] * sigma)
            .collect();
        let off = (1..j - 1).map(|i| -c[i]).collect();
        Self { f_diag, g_diag, off }
    }

    fn solve(&self, rhs: &[[f64; 2]]) -> Result<Vec<[f64; 2]>> {
        let rf: Vec<f64> = rhs.iter().map(|v| v[0]).collect();
        let rg: Vec<f64> = rhs.iter().map(|v| v[1]).collect();
        let xf = solve_tridiagonal(&self.off, &self.f_diag, &self.off, &rf)?;
        let xg = solve_tridiagonal(&self.off, &self.g_diag, &self.off, &rg)?;
        Ok(xf.into_iter().zip(xg).map(|(a, b)| [a, b]).collect())
    }

    fn apply(&self, x: &[[f64; 2]]) -> Vec<[f64; 2]> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let mut v = [self.f_diag[i] * x[i][0], self.g_diag[i] * x[i][1]];
                if i > 0 {
                    v[0] += self.off[i - 1] * x[i - 1][0];
                    v[1] += self.off[i - 1] * x[i - 1][1];
                }
                if i + 1 < n {
                    v[0] += self.off[i] * x[i + 1][0];
                    v[1] += self.off[i] * x[i + 1][1];
                }
                v
            })
            .collect()
    }
}

fn dot(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p[0] * q[0] + p[1] * q[1]).sum()
}

/// Apply a step to the unknowns, restore the tied origin value and project into the ball.
fn stepped(f: &[f64], g: &[f64], d: &[[f64; 2]], alpha: f64, projections: &mut usize) -> (Vec<f64>, Vec<f64>) {
    let mut nf = f.to_vec();
    let mut ng = g.to_vec();
    for (k, dk) in d.iter().enumerate() {
        let i = k + 1;
        nf[i] += alpha * dk[0];
        ng[i] += alpha * dk[1];
        let norm2 = nf[i] * nf[i] + ng[i] * ng[i];
        if norm2 > 1.0 + BALL_SLACK {
            let s = norm2.sqrt().recip();
            nf[i] *= s;
            ng[i] *= s;
            *projections += 1;
            log::debug!("projected node {i} back into the unit ball (|u|² = {norm2})");
        }
    }
    ng[0] = ng[1];
    (nf, ng)
}

fn initial_g(
    spec: &PotentialSpec,
    grid: &Arc<RadialGrid>,
    epsilon: f64,
    init: Initialization,
    opts: &SolverOptions,
) -> Result<Vec<f64>> {
    let r = grid.nodes();
    let j = grid.cells();
    let mut g: Vec<f64> = match init {
        Initialization::EigenfunctionBump => {
            let (_, s) = principal_at(spec, grid, epsilon, opts)?;
            let peak = s.eigenfunction.iter().cloned().fold(0.0, f64::max);
            s.eigenfunction.iter().map(|v| 0.5 * v / peak).collect()
        }
        Initialization::ConstantBump => r.iter().map(|r| 0.3 * (1.0 - r)).collect(),
        Initialization::RandomBump { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let amplitude = rng.random_range(0.2..0.8);
            let centre = rng.random_range(0.0..0.6);
            let width = rng.random_range(0.2..0.6);
            r.iter()
                .map(|r| amplitude * (1.0 - r) * (-((r - centre) / width).powi(2)).exp())
                .collect()
        }
    };
    g[j] = 0.0;
    g[0] = g[1];
    Ok(g)
}

/// Minimize the discrete `I_ε` from `(f_ε, g⁰)` and report the escaping profile.
pub fn solve_escaping_profile(
    spec: &PotentialSpec,
    grid: &Arc<RadialGrid>,
    epsilon: f64,
    opts: &EscapeOptions,
) -> Result<EscapeResult> {
    check_epsilon(epsilon)?;
    if !spec.strictly_convex {
        log::warn!("potential {} is not flagged strictly convex; uniqueness is not guaranteed", spec.name());
    }
    let profile_opts = opts.profile_options();
    let base = solve_nonescaping_profile(spec, grid, epsilon, &profile_opts)?;
    let g0 = initial_g(spec, grid, epsilon, opts.init, &profile_opts)?;
    let f0 = base.f.clone();
    minimize_from(spec, grid, epsilon, base, f0, g0, opts)
}

/// Same as [`solve_escaping_profile`] from an explicit starting pair.
pub fn solve_escaping_from(
    spec: &PotentialSpec,
    start: &ProfilePair,
    epsilon: f64,
    opts: &EscapeOptions,
) -> Result<EscapeResult> {
    check_epsilon(epsilon)?;
    start.check_boundary()?;
    let base = solve_nonescaping_profile(spec, &start.grid, epsilon, &opts.profile_options())?;
    let mut g = start.g.clone();
    g[0] = g[1];
    let mut f0 = start.f.clone();
    f0[0] = 0.0;
    minimize_from(spec, &start.grid, epsilon, base, f0, g, opts)
}

fn minimize_from(
    spec: &PotentialSpec,
    grid: &Arc<RadialGrid>,
    epsilon: f64,
    base: ProfilePair,
    f0: Vec<f64>,
    g0: Vec<f64>,
    opts: &EscapeOptions,
) -> Result<EscapeResult> {
    let p = Problem {
        spec,
        grid: grid.as_ref(),
        epsilon,
    };
    let metric = Metric::new(&p);
    let mut f = f0;
    let mut g = g0;
    let mut projections = 0;
    let mut energy = p.energy(&f, &g)?;
    let mut grad = p.gradient(&f, &g)?;
    let mut iterations = 0;
    let mut bb_step = 1.0;
    // Previous step and gradient, for the Barzilai-Borwein length.
    let mut prev: Option<(Vec<[f64; 2]>, Vec<[f64; 2]>)> = None;
    let mut newton_cooldown = 0usize;
    let mut newton_iterations = 0usize;
    let mut converged = false;

    while iterations < opts.max_descent_iterations {
        iterations += 1;
        if !energy.is_finite() {
            return Err(Error::NumericalBreakdown(format!("non-finite energy at eps = {epsilon}")));
        }
        let residual = p.residual(&f, &g)?;
        if residual < opts.tolerance {
            converged = true;
            break;
        }
        let precond = metric.solve(&grad)?;
        let dual = dot(&grad, &precond).max(0.0).sqrt();

        if dual < opts.newton_switch && newton_cooldown == 0 {
            match newton_step(&p, &f, &g, &grad, energy, &mut projections)? {
                NewtonOutcome::Accepted { f: nf, g: ng, energy: ne, tiny } => {
                    newton_iterations += 1;
                    f = nf;
                    g = ng;
                    energy = ne;
                    grad = p.gradient(&f, &g)?;
                    prev = None;
                    if tiny {
                        converged = true;
                        break;
                    }
                    if newton_iterations >= opts.max_newton_iterations {
                        break;
                    }
                    continue;
                }
                NewtonOutcome::Rejected => {
                    newton_cooldown = 50;
                    prev = None;
                }
            }
        }
        newton_cooldown = newton_cooldown.saturating_sub(1);

        // Barzilai-Borwein step in the metric, Armijo backtracking on the energy
        if let Some((s, y)) = &prev {
            let sy = dot(s, y);
            let sms = dot(s, &metric.apply(s));
            if sy > 0.0 && sms > 0.0 {
                bb_step = (sms / sy).clamp(1e-8, 1e8);
            }
        }
        let d: Vec<[f64; 2]> = precond.iter().map(|v| [-v[0], -v[1]]).collect();
        let slope = -dual * dual;
        let mut alpha = bb_step;
        let mut accepted = None;
        for _ in 0..60 {
            let (tf, tg) = stepped(&f, &g, &d, alpha, &mut projections);
            let te = p.energy(&tf, &tg)?;
            if te <= energy + 1e-4 * alpha * slope {
                accepted = Some((tf, tg, te));
                break;
            }
            alpha *= 0.5;
        }
        let Some((tf, tg, te)) = accepted else {
            // no measurable decrease left: round-off floor of the energy
            break;
        };
        let new_grad = p.gradient(&tf, &tg)?;
        let s: Vec<[f64; 2]> = (0..d.len())
            .map(|k| [tf[k + 1] - f[k + 1], tg[k + 1] - g[k + 1]])
            .collect();
        let y: Vec<[f64; 2]> = new_grad
            .iter()
            .zip(&grad)
            .map(|(a, b)| [a[0] - b[0], a[1] - b[1]])
            .collect();
        prev = Some((s, y));
        f = tf;
        g = tg;
        energy = te;
        grad = new_grad;
    }

    let residual = p.residual(&f, &g)?;
    if !converged && residual >= opts.tolerance {
        return Err(Error::NonConvergence { iterations, residual });
    }
    finish(spec, grid, epsilon, base, f, g, iterations, projections)
}

enum NewtonOutcome {
    Accepted {
        f: Vec<f64>,
        g: Vec<f64>,
        energy: f64,
        /// The step only moved the iterate at the rounding level.
        tiny: bool,
    },
    Rejected,
}

fn newton_step(
    p: &Problem,
    f: &[f64],
    g: &[f64],
    grad: &[[f64; 2]],
    energy: f64,
    projections: &mut usize,
) -> Result<NewtonOutcome> {
    let (diag, off) = p.hessian(f, g)?;
    let rhs: Vec<[f64; 2]> = grad.iter().map(|v| [-v[0], -v[1]]).collect();
    let d = match solve_block_tridiagonal(&off, &diag, &off, &rhs) {
        Ok(d) => d,
        Err(Error::NumericalBreakdown(_)) => return Ok(NewtonOutcome::Rejected),
        Err(e) => return Err(e),
    };
    let slope = dot(grad, &d);
    if !(slope < 0.0) {
        return Ok(NewtonOutcome::Rejected);
    }
    let step_size = d.iter().fold(0.0_f64, |m, v| m.max(v[0].abs()).max(v[1].abs()));
    let slack = 1e-14 * energy.abs().max(1.0);
    let mut alpha = 1.0;
    for _ in 0..30 {
        let mut count = 0;
        let (tf, tg) = stepped(f, g, &d, alpha, &mut count);
        let te = p.energy(&tf, &tg)?;
        if te <= energy + 1e-4 * alpha * slope + slack {
            *projections += count;
            return Ok(NewtonOutcome::Accepted {
                f: tf,
                g: tg,
                energy: te,
                tiny: alpha * step_size < STAGNATION_STEP,
            });
        }
        alpha *= 0.5;
    }
    Ok(NewtonOutcome::Rejected)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    spec: &PotentialSpec,
    grid: &Arc<RadialGrid>,
    epsilon: f64,
    base: ProfilePair,
    f: Vec<f64>,
    mut g: Vec<f64>,
    iterations: usize,
    projections: usize,
) -> Result<EscapeResult> {
    if g.iter().sum::<f64>() < 0.0 {
        g.iter_mut().for_each(|v| *v = -*v);
    }
    let max_g = g.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let escaped = max_g > ESCAPE_THRESHOLD;
    let pair = if escaped {
        ProfilePair::new(grid.clone(), f, g, Epsilon::Finite(epsilon))?
    } else {
        let drift = f.iter().zip(&base.f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        log::debug!("eps = {epsilon}: no escape (max g = {max_g:e}, |f - f_eps| = {drift:e})");
        base
    };
    let residual = profile_residual_of(spec, &pair)?;
    let energy = energy_i(spec, &pair)?;
    Ok(EscapeResult {
        pair,
        escaped,
        energy,
        iterations,
        residual,
        projections,
    })
}

fn profile_residual_of(spec: &PotentialSpec, pair: &ProfilePair) -> Result<f64> {
    let eps = pair.epsilon.finite()?;
    Ok(coupled_residuals(spec, &pair.grid, eps, &pair.f, &pair.g)?.max_norm())
}

/// Max interior residual of both coupled profile equations.
pub fn escaping_residual(spec: &PotentialSpec, result: &EscapeResult) -> Result<f64> {
    pair_residual(spec, &result.pair)
}

/// [`escaping_residual`] for a bare pair; the pair must satisfy the boundary data.
pub fn pair_residual(spec: &PotentialSpec, pair: &ProfilePair) -> Result<f64> {
    pair.check_boundary()?;
    profile_residual_of(spec, pair)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DichotomyRow {
    pub epsilon: f64,
    pub escaped: bool,
    #[serde(rename = "I_escaping")]
    pub i_escaping: Option<f64>,
    #[serde(rename = "I_nonescaping")]
    pub i_nonescaping: Option<f64>,
    pub energy_gap: Option<f64>,
    /// Within the bisection tolerance of `ε_N`; the flag is not meaningful there.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub marginal: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DichotomyReport {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "epsilon_N")]
    pub epsilon_n: f64,
    pub rows: Vec<DichotomyRow>,
}

impl DichotomyReport {
    /// Number of sign changes of the escaped column in the order of increasing `ε`.
    pub fn flips(&self) -> usize {
        let mut rows: Vec<&DichotomyRow> = self.rows.iter().filter(|r| r.error.is_none()).collect();
        rows.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
        rows.windows(2).filter(|w| w[0].escaped != w[1].escaped).count()
    }
}

/// `count` log-spaced values in `[lo, hi]`.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..count)
                .map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp())
                .collect()
        }
    }
}

/// Classify escaping versus non-escaping minimizers across `epsilons`.
pub fn classify_dichotomy(
    spec: &PotentialSpec,
    n: usize,
    grid: &Arc<RadialGrid>,
    epsilons: &[f64],
) -> Result<DichotomyReport> {
    classify_dichotomy_with(spec, n, grid, epsilons, DEFAULT_THRESHOLD_TOL, &EscapeOptions::default())
}

/// [`classify_dichotomy`] with explicit threshold tolerance and solver options.
pub fn classify_dichotomy_with(
    spec: &PotentialSpec,
    n: usize,
    grid: &Arc<RadialGrid>,
    epsilons: &[f64],
    threshold_tol: f64,
    opts: &EscapeOptions,
) -> Result<DichotomyReport> {
    if !(2..=6).contains(&n) {
        return Err(Error::Sizing(format!("dichotomy sweeps need 2 ≤ N ≤ 6, got {n}")));
    }
    if !spec.strictly_convex {
        return Err(Error::Domain(format!(
            "dichotomy classification needs a strictly convex potential, {} is not",
            spec.name()
        )));
    }
    let threshold = locate_threshold(spec, n, grid, threshold_tol, &opts.profile_options())?;
    Ok(classify_against(spec, grid, threshold.epsilon_n, epsilons, threshold_tol, opts))
}

/// Per-`ε` rows against an already located threshold; rows run in parallel.
pub fn classify_against(
    spec: &PotentialSpec,
    grid: &Arc<RadialGrid>,
    epsilon_n: f64,
    epsilons: &[f64],
    threshold_tol: f64,
    opts: &EscapeOptions,
) -> DichotomyReport {
    let rows = epsilons
        .par_iter()
        .map(|&eps| dichotomy_row(spec, grid, eps, epsilon_n, threshold_tol, opts))
        .collect();
    DichotomyReport {
        n: grid.dimension(),
        epsilon_n,
        rows,
    }
}

fn dichotomy_row(
    spec: &PotentialSpec,
    grid: &Arc<RadialGrid>,
    epsilon: f64,
    epsilon_n: f64,
    threshold_tol: f64,
    opts: &EscapeOptions,
) -> DichotomyRow {
    let marginal = (epsilon - epsilon_n).abs() < threshold_tol;
    let solved = (|| {
        let base = solve_nonescaping_profile(spec, grid, epsilon, &opts.profile_options())?;
        let i_non = energy_i(spec, &base)?.total;
        let res = solve_escaping_profile(spec, grid, epsilon, opts)?;
        Ok::<_, Error>((i_non, res))
    })();
    match solved {
        Ok((i_non, res)) => DichotomyRow {
            epsilon,
            escaped: res.escaped,
            i_escaping: res.escaped.then_some(res.energy.total),
            i_nonescaping: Some(i_non),
            energy_gap: Some(i_non - res.energy.total),
            marginal,
            error: None,
        },
        Err(e) => {
            log::warn!("dichotomy row at eps = {epsilon} failed: {e}");
            DichotomyRow {
                epsilon,
                escaped: false,
                i_escaping: None,
                i_nonescaping: None,
                energy_gap: None,
                marginal,
                error: Some(e.to_string()),
            }
        }
    }
}
