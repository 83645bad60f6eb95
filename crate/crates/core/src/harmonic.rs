//! Equivariant harmonic maps into the sphere, in the angle parametrization
//! `f = sin θ`, `g = cos θ`, with `θ(1) = π/2`.
//!
//! The discrete energy is
//! `J_h(θ) = ½ Σ c_k (Δθ_k)² + ½ (N-1) Σ_{i≥1} w_i sin²θ_i / r_i²`.
//! The origin value is held at the seed's value (`0` for the escaping seed,
//! `π/2` for the equator seed), matching the essential condition `f(0) = 0`
//! of the escaping branch.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::grid::{Epsilon, ProfilePair, RadialGrid};
use crate::linalg::{lowest_eigenpair, solve_tridiagonal, SymTridiagonal};
use crate::spectral::hardy_constant;

/// Weighted RMS of `g` above this value marks an escaping profile.
pub const ESCAPE_RMS: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HarmonicSeed {
    /// `θ⁰(r) = (π/2) r`.
    Escaping,
    /// `θ⁰ ≡ π/2`.
    Equator,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicOptions {
    /// Max-norm tolerance on the nodal gradient `∂J_h/∂θ_i / w_i`.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for HarmonicOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_iterations: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaProfile {
    pub grid: Arc<RadialGrid>,
    pub theta: Vec<f64>,
    pub escaping: bool,
    pub iterations: usize,
}

impl ThetaProfile {
    /// Wrap samples; `θ(1)` must be exactly `π/2`.
    pub fn new(grid: Arc<RadialGrid>, theta: Vec<f64>) -> Result<Self> {
        check_len(grid.len(), theta.len())?;
        if theta[grid.cells()] != FRAC_PI_2 {
            return Err(Error::BoundaryViolation(format!(
                "θ(1) = {} differs from π/2",
                theta[grid.cells()]
            )));
        }
        let escaping = weighted_rms_g(&grid, &theta) > ESCAPE_RMS;
        Ok(Self {
            grid,
            theta,
            escaping,
            iterations: 0,
        })
    }

    pub fn f(&self) -> Vec<f64> {
        self.theta.iter().map(|t| t.sin()).collect()
    }

    /// `cos θ`, evaluated as `sin(π/2 - θ)` so the equator gives exact zeros.
    pub fn g(&self) -> Vec<f64> {
        self.theta.iter().map(|t| (FRAC_PI_2 - t).sin()).collect()
    }

    pub fn pair(&self) -> Result<ProfilePair> {
        ProfilePair::new(self.grid.clone(), self.f(), self.g(), Epsilon::Limit)
    }

    pub fn energy(&self) -> f64 {
        harmonic_energy(&self.grid, &self.theta)
    }
}

fn weighted_rms_g(grid: &RadialGrid, theta: &[f64]) -> f64 {
    let w = grid.quad_weights();
    let total: f64 = w.iter().sum();
    let s: f64 = theta
        .iter()
        .zip(w)
        .map(|(t, w)| {
            let g = (FRAC_PI_2 - t).sin();
            w * g * g
        })
        .sum();
    (s / total).sqrt()
}

/// Discrete `J(θ) = ½ ∫ (θ'² + (N-1) sin²θ / r²) r^(N-1) dr`.
pub fn harmonic_energy(grid: &RadialGrid, theta: &[f64]) -> f64 {
    let nm1 = (grid.dimension() - 1) as f64;
    let s: Vec<f64> = theta.iter().map(|t| t.sin()).collect();
    0.5 * grid.gradient_form(theta, theta) + 0.5 * nm1 * grid.inverse_square_form(&s, &s)
}

/// Energy gradient on `θ_1 … θ_{J-1}`.
fn gradient(grid: &RadialGrid, theta: &[f64]) -> Vec<f64> {
    let j = grid.cells();
    let c = grid.couplings();
    let w = grid.quad_weights();
    let r = grid.nodes();
    let nm1 = (grid.dimension() - 1) as f64;
    (1..j)
        .map(|i| {
            c[i - 1] * (theta[i] - theta[i - 1]) - c[i] * (theta[i + 1] - theta[i])
                + w[i] * nm1 * 0.5 * (2.0 * theta[i]).sin() / (r[i] * r[i])
        })
        .collect()
}

fn hessian(grid: &RadialGrid, theta: &[f64]) -> SymTridiagonal {
    let j = grid.cells();
    let c = grid.couplings();
    let w = grid.quad_weights();
    let r = grid.nodes();
    let nm1 = (grid.dimension() - 1) as f64;
    let diag = (1..j)
        .map(|i| c[i - 1] + c[i] + w[i] * nm1 * (2.0 * theta[i]).cos() / (r[i] * r[i]))
        .collect();
    SymTridiagonal::new(diag, (1..j - 1).map(|i| -c[i]).collect())
}

/// Fold `θ` back into `[0, π/2]` by reflection.
fn reflect(t: f64) -> f64 {
    let mut t = t;
    for _ in 0..4 {
        if t < 0.0 {
            t = -t;
        } else if t > FRAC_PI_2 {
            t = std::f64::consts::PI - t;
        } else {
            return t;
        }
    }
    t.clamp(0.0, FRAC_PI_2)
}

/// Minimize `J_h` with `θ(1) = π/2` from the chosen seed.
///
/// Newton steps while the Hessian is positive definite, otherwise descent
/// preconditioned by the Dirichlet form; Armijo backtracking either way.
pub fn solve_harmonic_theta(
    n: usize,
    grid: &Arc<RadialGrid>,
    init: HarmonicSeed,
    opts: &HarmonicOptions,
) -> Result<ThetaProfile> {
    if n < 2 {
        return Err(Error::Sizing(format!("dimension N = {n} must be at least 2")));
    }
    if grid.dimension() != n {
        return Err(Error::Sizing(format!(
            "grid built for N = {}, requested N = {n}",
            grid.dimension()
        )));
    }
    let j = grid.cells();
    let w = grid.quad_weights();
    let mut theta: Vec<f64> = match init {
        HarmonicSeed::Escaping => grid.nodes().iter().map(|r| FRAC_PI_2 * r).collect(),
        HarmonicSeed::Equator => vec![FRAC_PI_2; j + 1],
    };
    theta[j] = FRAC_PI_2;

    let c = grid.couplings();
    let r = grid.nodes();
    let nm1 = (n - 1) as f64;
    let pre_diag: Vec<f64> = (1..j).map(|i| c[i - 1] + c[i] + w[i] * nm1 / (r[i] * r[i])).collect();
    let pre_off: Vec<f64> = (1..j - 1).map(|i| -c[i]).collect();

    let mut energy = harmonic_energy(grid, &theta);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iterations {
        let grad = gradient(grid, &theta);
        let residual = grad
            .iter()
            .enumerate()
            .map(|(k, v)| (v / w[k + 1]).abs())
            .fold(0.0, f64::max);
        if residual < opts.tolerance {
            converged = true;
            break;
        }
        iterations += 1;
        let hess = hessian(grid, &theta);
        let rhs: Vec<f64> = grad.iter().map(|v| -v).collect();
        let newton = if hess.is_positive_definite() {
            hess.solve_shifted(0.0, &rhs).ok()
        } else {
            None
        };
        let d = match newton {
            Some(d) => d,
            None => solve_tridiagonal(&pre_off, &pre_diag, &pre_off, &rhs)?,
        };
        let slope: f64 = grad.iter().zip(&d).map(|(a, b)| a * b).sum();
        let step_size = d.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let slack = 1e-14 * energy.abs().max(1.0);
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..50 {
            let mut trial = theta.clone();
            for i in 1..j {
                trial[i] = reflect(theta[i] + alpha * d[i - 1]);
            }
            let te = harmonic_energy(grid, &trial);
            if te <= energy + 1e-4 * alpha * slope + slack {
                theta = trial;
                energy = te;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted || alpha * step_size < 1e-14 {
            converged = accepted;
            break;
        }
    }
    if !converged {
        let grad = gradient(grid, &theta);
        let residual = grad
            .iter()
            .enumerate()
            .map(|(k, v)| (v / w[k + 1]).abs())
            .fold(0.0, f64::max);
        return Err(Error::NonConvergence { iterations, residual });
    }
    let mut profile = ThetaProfile::new(grid.clone(), theta)?;
    profile.iterations = iterations;
    Ok(profile)
}

/// Energy `(N-1) / (2(N-2))` of the equator map `x ↦ (x/|x|, 0)`.
pub fn equator_energy(n: usize) -> Result<f64> {
    match n {
        0 | 1 => Err(Error::Sizing(format!("dimension N = {n} must be at least 2"))),
        2 => Err(Error::Divergent("the equator map has infinite energy for N = 2".into())),
        _ => Ok((n - 1) as f64 / (2.0 * (n - 2) as f64)),
    }
}

/// Finite-difference weights for derivatives `0..=m` at `z` from nodes `x` (Fornberg).
fn fd_weights(z: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c
}

/// Max interior residual of the constrained Euler-Lagrange system
/// `-f'' - (N-1)f'/r + (N-1)f/r² = Γ f`, `-g'' - (N-1)g'/r = Γ g`,
/// `Γ = (f')² + (N-1) f²/r² + (g')²`.
///
/// Derivatives use five-point stencils; below the origin `θ` is continued
/// by odd reflection about `θ(0)`, which makes the stencils exact for the
/// symmetry of both branches and keeps the `1/r` terms second order.
pub fn harmonic_residual(n: usize, theta: &ThetaProfile) -> Result<f64> {
    let grid = &theta.grid;
    if grid.dimension() != n {
        return Err(Error::Sizing(format!(
            "profile built for N = {}, requested N = {n}",
            grid.dimension()
        )));
    }
    let j = grid.cells();
    let h = grid.spacing();
    let t = &theta.theta;
    let nm1 = (n - 1) as f64;
    let r = grid.nodes();
    let value = |k: isize| -> f64 {
        if k < 0 {
            2.0 * t[0] - t[(-k) as usize]
        } else {
            t[k as usize]
        }
    };
    let centred = fd_weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 2);
    let shifted = fd_weights(0.0, &[-3.0, -2.0, -1.0, 0.0, 1.0], 2);
    let mut worst = 0.0_f64;
    for i in 1..j {
        let (weights, first) = if i + 1 < j { (&centred, -2isize) } else { (&shifted, -3isize) };
        let (mut f1, mut f2, mut g1, mut g2) = (0.0, 0.0, 0.0, 0.0);
        for (k, wk) in weights.iter().enumerate() {
            let th = value(i as isize + first + k as isize);
            let (fv, gv) = (th.sin(), (FRAC_PI_2 - th).sin());
            f1 += wk[1] * fv;
            f2 += wk[2] * fv;
            g1 += wk[1] * gv;
            g2 += wk[2] * gv;
        }
        f1 /= h;
        g1 /= h;
        f2 /= h * h;
        g2 /= h * h;
        let f = t[i].sin();
        let g = (FRAC_PI_2 - t[i]).sin();
        let gamma = f1 * f1 + nm1 * f * f / (r[i] * r[i]) + g1 * g1;
        let rf = -f2 - nm1 * f1 / r[i] + nm1 * f / (r[i] * r[i]) - gamma * f;
        let rg = -g2 - nm1 * g1 / r[i] - gamma * g;
        worst = worst.max(rf.abs()).max(rg.abs());
    }
    Ok(worst)
}

/// `Q(0, q) = ∫ [(q')² - (N-1) q²/r²] r^(N-1) dr` for `q` with `q(0) = q(1) = 0`.
pub fn equator_form(grid: &RadialGrid, q: &[f64]) -> Result<f64> {
    check_len(grid.len(), q.len())?;
    let nm1 = (grid.dimension() - 1) as f64;
    Ok(grid.gradient_form(q, q) - nm1 * grid.inverse_square_form(q, q))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstabilityProbe {
    /// Minimum of `Q(0, q) / ∫ q² r^(N-3) dr`.
    pub value: f64,
    /// Minimizing direction, `q_0 = q_J = 0`, normalized to unit denominator.
    pub direction: Vec<f64>,
    /// The continuum infimum of the same quotient.
    pub hardy_constant: f64,
}

/// Minimize `Q(0, q) / ∫ q² r^(N-3) dr` over discrete `q` vanishing at both ends.
///
/// The quotient is bounded below by the Hardy constant `(N-2)²/4 - (N-1)`
/// and approaches it under refinement, so the returned value is negative
/// exactly when the equator map is unstable (`N ≤ 6`).
pub fn equator_instability_probe(n: usize, grid: &RadialGrid) -> Result<f64> {
    probe_with_direction(n, grid).map(|p| p.value)
}

/// [`equator_instability_probe`] together with the minimizing direction.
pub fn probe_with_direction(n: usize, grid: &RadialGrid) -> Result<InstabilityProbe> {
    if n < 2 || grid.dimension() != n {
        return Err(Error::Sizing(format!(
            "probe needs N ≥ 2 on a matching grid (N = {n}, grid N = {})",
            grid.dimension()
        )));
    }
    let j = grid.cells();
    let c = grid.couplings();
    let w = grid.quad_weights();
    let r = grid.nodes();
    let nm1 = (n - 1) as f64;
    // mass m_i = w_i / r_i², scaled to an ordinary symmetric problem
    let m: Vec<f64> = (0..=j).map(|i| if i == 0 { 0.0 } else { w[i] / (r[i] * r[i]) }).collect();
    let diag = (1..j).map(|i| (c[i - 1] + c[i]) / m[i] - nm1).collect();
    let off = (1..j - 1).map(|i| -c[i] / (m[i] * m[i + 1]).sqrt()).collect();
    let a = SymTridiagonal::new(diag, off);
    let (value, x, _) = lowest_eigenpair(&a, 500)?;
    let mut direction = vec![0.0; j + 1];
    for i in 1..j {
        direction[i] = x[i - 1] / m[i].sqrt();
    }
    Ok(InstabilityProbe {
        value,
        direction,
        hardy_constant: hardy_constant(n),
    })
}
