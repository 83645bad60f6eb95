//! Quadratic forms around the non-escaping profile: `F_ε`, the second
//! variation `Q_ε` of the reduced energy, and the Hardy-type margin.
//!
//! All forms use the same cell couplings and nodal weights as the energy,
//! so `F_ε(ψ₁)` reproduces the discrete eigenvalue up to rounding.

use std::sync::Arc;

use crate::error::{check_len, Error, Result};
use crate::grid::{ProfilePair, RadialGrid};
use crate::nonescaping::check_epsilon;
use crate::potential::PotentialSpec;
use crate::spectral::hardy_constant;

/// Radial test function vanishing at `r = 1`, optionally paired with a second component.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub grid: Arc<RadialGrid>,
    values: Vec<f64>,
    second: Option<Vec<f64>>,
}

impl TestFunction {
    /// Wrap nodal samples; the last sample must be exactly zero.
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        check_len(grid.len(), values.len())?;
        check_dirichlet(&values)?;
        Ok(Self {
            grid,
            values,
            second: None,
        })
    }

    /// Sample `h` at the nodes and zero the value at `r = 1`.
    pub fn from_fn(grid: Arc<RadialGrid>, h: impl Fn(f64) -> f64) -> Self {
        let mut values: Vec<f64> = grid.nodes().iter().map(|&r| h(r)).collect();
        *values.last_mut().unwrap() = 0.0;
        Self {
            grid,
            values,
            second: None,
        }
    }

    pub fn zero(grid: Arc<RadialGrid>) -> Self {
        let values = vec![0.0; grid.len()];
        Self {
            grid,
            values,
            second: None,
        }
    }

    /// Attach a second component, as for the pair `(α, β)`.
    pub fn with_second(mut self, second: Vec<f64>) -> Result<Self> {
        check_len(self.grid.len(), second.len())?;
        check_dirichlet(&second)?;
        self.second = Some(second);
        Ok(self)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn second(&self) -> Option<&[f64]> {
        self.second.as_deref()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| s * v).collect(),
            second: self.second.as_ref().map(|b| b.iter().map(|v| s * v).collect()),
        }
    }

    /// `∫ ψ² r^(N-1) dr`.
    pub fn mass(&self) -> f64 {
        let w = self.grid.quad_weights();
        self.values.iter().zip(w).map(|(v, w)| w * v * v).sum()
    }

    /// `∫ ψ² / r² r^(N-1) dr` with zero weight at the origin.
    pub fn hardy_mass(&self) -> f64 {
        self.grid.inverse_square_form(&self.values, &self.values)
    }
}

fn check_dirichlet(values: &[f64]) -> Result<()> {
    match values.last() {
        Some(v) if *v == 0.0 => Ok(()),
        Some(v) => Err(Error::BoundaryViolation(format!("test function has value {v} at r = 1"))),
        None => Err(Error::Sizing("empty test function".into())),
    }
}

/// Nodal potential `-W'(1 - f²)/ε²` and curvature `W''(1 - f²)` of a converged profile.
fn profile_coefficients(
    spec: &PotentialSpec,
    profile: &ProfilePair,
    epsilon: f64,
    grid: &RadialGrid,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_epsilon(epsilon)?;
    let profile_eps = profile.epsilon.finite()?;
    if (profile_eps - epsilon).abs() > 1e-12 * epsilon {
        return Err(Error::EpsilonMismatch {
            profile: profile_eps,
            requested: epsilon,
        });
    }
    if profile.grid.as_ref() != grid {
        return Err(Error::Sizing("test function and profile live on different grids".into()));
    }
    if !profile.is_non_escaping() {
        return Err(Error::Domain("quadratic forms are taken around a profile with g ≡ 0".into()));
    }
    let inv_e2 = 1.0 / (epsilon * epsilon);
    let mut potential = Vec::with_capacity(profile.f.len());
    let mut curvature = Vec::with_capacity(profile.f.len());
    for f in &profile.f {
        let v = spec.eval(1.0 - f * f)?;
        potential.push(-inv_e2 * v.wp);
        curvature.push(v.wpp);
    }
    Ok((potential, curvature))
}

fn form_f(grid: &RadialGrid, potential: &[f64], psi: &[f64]) -> f64 {
    let w = grid.quad_weights();
    grid.gradient_form(psi, psi) + (1..grid.len()).map(|i| w[i] * potential[i] * psi[i] * psi[i]).sum::<f64>()
}

/// `F_ε(ψ) = ∫ (ψ')² - W'(1 - f_ε²) ψ² / ε²`.
pub fn evaluate_f(spec: &PotentialSpec, f_profile: &ProfilePair, epsilon: f64, psi: &TestFunction) -> Result<f64> {
    let (potential, _) = profile_coefficients(spec, f_profile, epsilon, &psi.grid)?;
    Ok(form_f(&psi.grid, &potential, &psi.values))
}

/// Second variation of `I_ε` at `(f_ε, 0)` in the direction `(α, β)`.
pub fn evaluate_q(
    spec: &PotentialSpec,
    f_profile: &ProfilePair,
    epsilon: f64,
    alpha: &TestFunction,
    beta: &TestFunction,
) -> Result<f64> {
    if alpha.grid != beta.grid {
        return Err(Error::Sizing("α and β live on different grids".into()));
    }
    let grid = &alpha.grid;
    let (potential, curvature) = profile_coefficients(spec, f_profile, epsilon, grid)?;
    let a = &alpha.values;
    let w = grid.quad_weights();
    let r = grid.nodes();
    let nm1 = (grid.dimension() - 1) as f64;
    let inv_e2 = 1.0 / (epsilon * epsilon);
    let f = &f_profile.f;
    let extra: f64 = (1..grid.len())
        .map(|i| w[i] * (nm1 / (r[i] * r[i]) + 2.0 * inv_e2 * curvature[i] * f[i] * f[i]) * a[i] * a[i])
        .sum();
    Ok(form_f(grid, &potential, a) + form_f(grid, &potential, &beta.values) + extra)
}

/// [`evaluate_q`] on a test function carrying both components, `(values, second)`.
pub fn evaluate_q_pair(spec: &PotentialSpec, f_profile: &ProfilePair, epsilon: f64, pair: &TestFunction) -> Result<f64> {
    let beta = match &pair.second {
        Some(b) => TestFunction {
            grid: pair.grid.clone(),
            values: b.clone(),
            second: None,
        },
        None => TestFunction::zero(pair.grid.clone()),
    };
    evaluate_q(spec, f_profile, epsilon, pair, &beta)
}

/// `F_ε(ψ) - hardy_constant(N) ∫ ψ²/r² r^(N-1) dr`.
pub fn hardy_margin(spec: &PotentialSpec, f_profile: &ProfilePair, epsilon: f64, psi: &TestFunction) -> Result<f64> {
    let value = evaluate_f(spec, f_profile, epsilon, psi)?;
    Ok(value - hardy_constant(psi.grid.dimension()) * psi.hardy_mass())
}
