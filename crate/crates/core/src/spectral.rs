//! Linearized operator `L_ε = -Δ - W'(1 - f_ε²)/ε²` on radial functions,
//! its principal Dirichlet eigenpair `ℓ(ε)`, and the threshold `ε_N`.
//!
//! The operator is the discrete quadratic form
//! `F(ψ) = Σ c_k (Δψ_k)² + Σ w_i V_i ψ_i²` against the lumped mass `Σ w_i ψ_i²`,
//! with `ψ_J = 0` and the origin value tied to its neighbour (`ψ_0 = ψ_1`,
//! the natural condition left by the vanishing weight). Scaling by
//! `w_i^{1/2}` turns it into an ordinary symmetric tridiagonal matrix.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{ProfilePair, RadialGrid};
use crate::linalg::{lowest_eigenpair, SymTridiagonal};
use crate::nonescaping::{check_epsilon, solve_nonescaping_profile, SolverOptions};
use crate::potential::PotentialSpec;

/// Default bisection tolerance on `ε_N`.
pub const DEFAULT_THRESHOLD_TOL: f64 = 1e-6;
/// Lower end of the `ε_N` bracket.
pub const BRACKET_LOW: f64 = 1e-3;
const MAX_INVERSE_ITERATIONS: usize = 500;

#[derive(Debug, Clone)]
pub struct SturmLiouvilleSystem {
    pub grid: Arc<RadialGrid>,
    /// `None` for the bare Laplacian.
    pub epsilon: Option<f64>,
    /// Multiplicative potential `V_i` at every node (`-W'(1 - f_i²)/ε²`).
    pub potential: Vec<f64>,
    /// Symmetrized matrix on the unknowns `ψ_1 … ψ_{J-1}`.
    pub matrix: SymTridiagonal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralResult {
    pub eigenvalue: f64,
    /// `J + 1` nodal values, `Σ w_i ψ_i² = 1`, `ψ(0) > 0`, `ψ(1) = 0`.
    pub eigenfunction: Vec<f64>,
    pub iterations: usize,
}

impl SturmLiouvilleSystem {
    /// Assemble from nodal potential values.
    pub fn from_potential(grid: Arc<RadialGrid>, potential: Vec<f64>, epsilon: Option<f64>) -> Self {
        let j = grid.cells();
        let c = grid.couplings();
        let w = grid.quad_weights();
        let diag = (1..j)
            .map(|i| {
                let left = if i > 1 { c[i - 1] } else { 0.0 };
                (left + c[i]) / w[i] + potential[i]
            })
            .collect();
        let off = (1..j - 1).map(|i| -c[i] / (w[i] * w[i + 1]).sqrt()).collect();
        Self {
            grid,
            epsilon,
            potential,
            matrix: SymTridiagonal::new(diag, off),
        }
    }

    /// Apply the operator to nodal samples (with `u_0 := u_1`, `u_J := 0`).
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let j = self.grid.cells();
        let c = self.grid.couplings();
        let w = self.grid.quad_weights();
        let mut out = vec![0.0; j + 1];
        for i in 1..j {
            let left = if i > 1 { c[i - 1] * (u[i] - u[i - 1]) } else { 0.0 };
            let right = if i + 1 < j { c[i] * (u[i + 1] - u[i]) } else { -c[i] * u[i] };
            out[i] = (left - right) / w[i] + self.potential[i] * u[i];
        }
        out[0] = out[1];
        out
    }

    /// Weighted inner product over the unknown nodes.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        let w = self.grid.quad_weights();
        (1..self.grid.cells()).map(|i| w[i] * u[i] * v[i]).sum()
    }

    /// Relative defect `|⟨Au,v⟩ - ⟨u,Av⟩| / (|⟨Au,v⟩| + |⟨u,Av⟩|)`.
    pub fn symmetry_defect(&self, u: &[f64], v: &[f64]) -> f64 {
        let a = self.inner(&self.apply(u), v);
        let b = self.inner(u, &self.apply(v));
        let scale = a.abs() + b.abs();
        if scale == 0.0 {
            0.0
        } else {
            (a - b).abs() / scale
        }
    }
}

/// Assemble `L_ε` around a converged non-escaping profile.
pub fn assemble_linearized(spec: &PotentialSpec, profile: &ProfilePair, epsilon: f64) -> Result<SturmLiouvilleSystem> {
    check_epsilon(epsilon)?;
    let profile_eps = profile.epsilon.finite()?;
    if (profile_eps - epsilon).abs() > 1e-12 * epsilon {
        return Err(Error::EpsilonMismatch {
            profile: profile_eps,
            requested: epsilon,
        });
    }
    if !profile.is_non_escaping() {
        return Err(Error::Domain("the linearized operator needs a profile with g ≡ 0".into()));
    }
    let inv_e2 = 1.0 / (epsilon * epsilon);
    let potential = profile
        .f
        .iter()
        .map(|f| spec.eval(1.0 - f * f).map(|v| -inv_e2 * v.wp))
        .collect::<Result<Vec<_>>>()?;
    Ok(SturmLiouvilleSystem::from_potential(profile.grid.clone(), potential, Some(epsilon)))
}

/// Smallest eigenvalue and its nodeless eigenfunction.
pub fn principal_eigenpair(system: &SturmLiouvilleSystem) -> Result<SpectralResult> {
    let (eigenvalue, x, iterations) = lowest_eigenpair(&system.matrix, MAX_INVERSE_ITERATIONS)?;
    Ok(finish(system, &x, eigenvalue, iterations))
}

fn finish(system: &SturmLiouvilleSystem, x: &[f64], eigenvalue: f64, iterations: usize) -> SpectralResult {
    let j = system.grid.cells();
    let w = system.grid.quad_weights();
    let mut psi = vec![0.0; j + 1];
    for i in 1..j {
        psi[i] = x[i - 1] / w[i].sqrt();
    }
    psi[0] = psi[1];
    let norm = system.inner(&psi, &psi).sqrt();
    let sign = if psi[0] < 0.0 { -1.0 } else { 1.0 };
    psi.iter_mut().for_each(|v| *v *= sign / norm);
    SpectralResult {
        eigenvalue,
        eigenfunction: psi,
        iterations,
    }
}

/// Rayleigh quotient `F(ψ) / Σ w ψ²` of nodal samples under the system's form.
pub fn rayleigh_quotient(system: &SturmLiouvilleSystem, psi: &[f64]) -> f64 {
    let mut tied = psi.to_vec();
    tied[0] = tied[1];
    let j = system.grid.cells();
    tied[j] = 0.0;
    let w = system.grid.quad_weights();
    let form = system.grid.gradient_form(&tied, &tied)
        + (1..j).map(|i| w[i] * system.potential[i] * tied[i] * tied[i]).sum::<f64>();
    form / system.inner(&tied, &tied)
}

/// Solve the profile at `ε` and return `ℓ(ε)` with its eigenfunction.
pub fn principal_at(
    spec: &PotentialSpec,
    grid: &Arc<RadialGrid>,
    epsilon: f64,
    opts: &SolverOptions,
) -> Result<(ProfilePair, SpectralResult)> {
    let profile = solve_nonescaping_profile(spec, grid, epsilon, opts)?;
    let system = assemble_linearized(spec, &profile, epsilon)?;
    let spectral = principal_eigenpair(&system)?;
    Ok((profile, spectral))
}

/// `ℓ(ε)`.
pub fn ell(spec: &PotentialSpec, grid: &Arc<RadialGrid>, epsilon: f64, opts: &SolverOptions) -> Result<f64> {
    principal_at(spec, grid, epsilon, opts).map(|(_, s)| s.eigenvalue)
}

/// Principal Dirichlet eigenvalue of `-Δ` on the unit ball `B^N`.
pub fn dirichlet_lambda1(n: usize, grid: &Arc<RadialGrid>) -> Result<f64> {
    if grid.dimension() != n {
        return Err(Error::Sizing(format!(
            "grid built for N = {}, requested N = {n}",
            grid.dimension()
        )));
    }
    let system = SturmLiouvilleSystem::from_potential(grid.clone(), vec![0.0; grid.len()], None);
    principal_eigenpair(&system).map(|s| s.eigenvalue)
}

/// Hardy-type constant `(N-2)²/4 - (N-1)`.
pub fn hardy_constant(n: usize) -> f64 {
    let n = n as f64;
    (n - 2.0) * (n - 2.0) / 4.0 - (n - 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Threshold {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "epsilon_N")]
    pub epsilon_n: f64,
    pub lambda1: f64,
    pub upper_bound: f64,
}

/// Locate `ε_N` by bisection on the sign of `ℓ(ε)` over `[10⁻³, sqrt(W'(1)/λ₁)]`.
pub fn find_epsilon_n(spec: &PotentialSpec, n: usize, grid: &Arc<RadialGrid>, tol: f64) -> Result<f64> {
    locate_threshold(spec, n, grid, tol, &SolverOptions::default()).map(|t| t.epsilon_n)
}

/// [`find_epsilon_n`] with the bound data and explicit solver options.
pub fn locate_threshold(
    spec: &PotentialSpec,
    n: usize,
    grid: &Arc<RadialGrid>,
    tol: f64,
    opts: &SolverOptions,
) -> Result<Threshold> {
    if n >= 7 {
        return Err(Error::NoThreshold {
            n,
            hardy: hardy_constant(n),
        });
    }
    if n < 2 {
        return Err(Error::Sizing(format!("dimension N = {n} must be at least 2")));
    }
    if !(tol > 0.0) {
        return Err(Error::Config(format!("threshold tolerance must be positive, got {tol}")));
    }
    let lambda1 = dirichlet_lambda1(n, grid)?;
    let upper_bound = (spec.wp_at_one() / lambda1).sqrt();
    let mut lo = BRACKET_LOW;
    let mut hi = upper_bound;
    let ell_lo = ell(spec, grid, lo, opts)?;
    let ell_hi = ell(spec, grid, hi, opts)?;
    if !(ell_lo < 0.0 && ell_hi > 0.0) {
        return Err(Error::BracketFailure {
            lo,
            hi,
            ell_lo,
            ell_hi,
        });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if ell(spec, grid, mid, opts)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Threshold {
        n,
        epsilon_n: 0.5 * (lo + hi),
        lambda1,
        upper_bound,
    })
}
