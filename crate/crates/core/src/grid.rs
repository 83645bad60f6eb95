//! Uniform radial mesh on `[0, 1]`, weighted quadrature and sampled profile pairs.
//!
//! All radial integrals carry the density `r^(N-1)` and omit the surface
//! measure of the unit sphere. Nodal terms use the trapezoid rule with the
//! density evaluated at the nodes (so the weight at `r = 0` vanishes), while
//! gradient terms use cell differences weighted by the cell average of the
//! density. That pairing makes the discrete energies exact quadratic forms
//! whose gradients are the finite-difference residuals used by the solvers.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Smallest admissible number of cells.
pub const MIN_CELLS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    dimension: usize,
    cells: usize,
    nodes: Vec<f64>,
    quad_weights: Vec<f64>,
    /// `(1/h^2) * ∫_cell r^(N-1) dr`, one entry per cell.
    couplings: Vec<f64>,
}

/// Build a radial grid with `cells` uniform cells for dimension `n`.
pub fn build_grid(n: usize, cells: usize) -> Result<RadialGrid> {
    RadialGrid::new(n, cells)
}

impl RadialGrid {
    pub fn new(dimension: usize, cells: usize) -> Result<Self> {
        if dimension < 2 {
            return Err(Error::Sizing(format!("dimension N = {dimension} must be at least 2")));
        }
        if cells < MIN_CELLS {
            return Err(Error::Sizing(format!(
                "node count J = {cells} must be at least {MIN_CELLS}"
            )));
        }
        let h = 1.0 / cells as f64;
        let p = (dimension - 1) as i32;
        let nodes: Vec<f64> = (0..=cells).map(|i| i as f64 * h).collect();
        let quad_weights: Vec<f64> = nodes
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let w = h * r.powi(p);
                if i == 0 || i == cells {
                    0.5 * w
                } else {
                    w
                }
            })
            .collect();
        let nd = dimension as i32;
        let couplings = (0..cells)
            .map(|k| {
                let a = nodes[k];
                let b = nodes[k + 1];
                (b.powi(nd) - a.powi(nd)) / (dimension as f64 * h * h)
            })
            .collect();
        Ok(Self {
            dimension,
            cells,
            nodes,
            quad_weights,
            couplings,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Number of cells `J`; there are `J + 1` nodes.
    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn len(&self) -> usize {
        self.cells + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.cells as f64
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.quad_weights
    }

    /// Cell couplings `c_k`, so that `Σ c_k (u_{k+1} - u_k)^2 ≈ ∫ (u')^2 r^(N-1) dr`.
    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    /// Discrete `∫ u' v' r^(N-1) dr`.
    pub fn gradient_form(&self, u: &[f64], v: &[f64]) -> f64 {
        self.couplings
            .iter()
            .enumerate()
            .map(|(k, c)| c * (u[k + 1] - u[k]) * (v[k + 1] - v[k]))
            .sum()
    }

    /// Discrete `∫ u v / r^2 r^(N-1) dr`; the node at the origin carries no weight.
    pub fn inverse_square_form(&self, u: &[f64], v: &[f64]) -> f64 {
        (1..self.len())
            .map(|i| self.quad_weights[i] * u[i] * v[i] / (self.nodes[i] * self.nodes[i]))
            .sum()
    }

    /// Index of the node nearest to `r`.
    pub fn nearest_index(&self, r: f64) -> usize {
        ((r.clamp(0.0, 1.0) * self.cells as f64).round() as usize).min(self.cells)
    }

    /// Piecewise-linear interpolation of nodal samples at `r ∈ [0, 1]`.
    pub fn interpolate(&self, samples: &[f64], r: f64) -> f64 {
        let s = r.clamp(0.0, 1.0) * self.cells as f64;
        let k = (s.floor() as usize).min(self.cells - 1);
        let t = s - k as f64;
        (1.0 - t) * samples[k] + t * samples[k + 1]
    }
}

/// `∫_0^1 u r^(N-1) dr` by the nodal trapezoid rule.
pub fn integrate_radial(grid: &RadialGrid, samples: &[f64]) -> Result<f64> {
    check_len(grid.len(), samples.len())?;
    Ok(grid
        .quad_weights
        .iter()
        .zip(samples)
        .map(|(w, u)| w * u)
        .sum())
}

/// Nodal first derivative: central differences inside, second-order one-sided at the ends.
pub fn derivative_samples(grid: &RadialGrid, samples: &[f64]) -> Result<Vec<f64>> {
    check_len(grid.len(), samples.len())?;
    let j = grid.cells;
    let inv2h = 0.5 * j as f64;
    let u = samples;
    let mut d = vec![0.0; j + 1];
    d[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) * inv2h;
    for i in 1..j {
        d[i] = (u[i + 1] - u[i - 1]) * inv2h;
    }
    d[j] = (3.0 * u[j] - 4.0 * u[j - 1] + u[j - 2]) * inv2h;
    Ok(d)
}

/// Nodal second derivative, central inside and second-order one-sided at the ends.
pub fn second_derivative_samples(grid: &RadialGrid, samples: &[f64]) -> Result<Vec<f64>> {
    check_len(grid.len(), samples.len())?;
    let j = grid.cells;
    let inv_h2 = (j * j) as f64;
    let u = samples;
    let mut d = vec![0.0; j + 1];
    d[0] = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) * inv_h2;
    for i in 1..j {
        d[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * inv_h2;
    }
    d[j] = (2.0 * u[j] - 5.0 * u[j - 1] + 4.0 * u[j - 2] - u[j - 3]) * inv_h2;
    Ok(d)
}

/// Penalty parameter attached to a profile. Harmonic-map profiles carry `Limit`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Epsilon {
    Finite(f64),
    Limit,
}

impl Epsilon {
    pub fn finite(self) -> Result<f64> {
        match self {
            Epsilon::Finite(e) => Ok(e),
            Epsilon::Limit => Err(Error::Domain(
                "operation requires a finite epsilon, got the harmonic-map limit".into(),
            )),
        }
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Epsilon::Finite(e) => write!(f, "{e}"),
            Epsilon::Limit => f.write_str("limit"),
        }
    }
}

/// Sampled radial pair `(f, g)`; `g ≡ 0` encodes a non-escaping profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfilePair {
    pub grid: Arc<RadialGrid>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub epsilon: Epsilon,
}

impl ProfilePair {
    /// Wrap samples; checks lengths and finiteness but not the boundary data.
    pub fn new(grid: Arc<RadialGrid>, f: Vec<f64>, g: Vec<f64>, epsilon: Epsilon) -> Result<Self> {
        check_len(grid.len(), f.len())?;
        check_len(grid.len(), g.len())?;
        if let Some(i) = f.iter().chain(&g).position(|v| !v.is_finite()) {
            return Err(Error::NumericalBreakdown(format!("non-finite profile sample at index {i}")));
        }
        Ok(Self { grid, f, g, epsilon })
    }

    /// Non-escaping pair with `g ≡ 0`.
    pub fn non_escaping(grid: Arc<RadialGrid>, f: Vec<f64>, epsilon: Epsilon) -> Result<Self> {
        let g = vec![0.0; grid.len()];
        Self::new(grid, f, g, epsilon)
    }

    /// Require the boundary data `f(1) = 1`, `g(1) = 0` exactly.
    pub fn check_boundary(&self) -> Result<()> {
        let j = self.grid.cells();
        if self.f[j] != 1.0 || self.g[j] != 0.0 {
            return Err(Error::BoundaryViolation(format!(
                "expected f(1) = 1 and g(1) = 0, got f(1) = {}, g(1) = {}",
                self.f[j], self.g[j]
            )));
        }
        Ok(())
    }

    pub fn is_non_escaping(&self) -> bool {
        self.g.iter().all(|v| *v == 0.0)
    }

    pub fn max_norm_sq(&self) -> f64 {
        self.f
            .iter()
            .zip(&self.g)
            .map(|(f, g)| f * f + g * g)
            .fold(0.0, f64::max)
    }

    /// Same pair with `g` negated.
    pub fn reflected(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            f: self.f.clone(),
            g: self.g.iter().map(|v| if *v == 0.0 { 0.0 } else { -v }).collect(),
            epsilon: self.epsilon,
        }
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let r = self.grid.nodes();
        write_columns(writer, &[("r", r), ("f", &self.f), ("g", &self.g)])
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    /// Read an `r,f,g` CSV produced by [`ProfilePair::write_csv`] for dimension `n`.
    pub fn read_csv<R: Read>(reader: R, n: usize, epsilon: Epsilon) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["r", "f", "g"] {
            return Err(Error::Parse(format!("expected header r,f,g, got {headers:?}")));
        }
        let mut f = Vec::new();
        let mut g = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let parse = |k: usize| -> Result<f64> {
                rec[k]
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("{e}: {:?}", &rec[k])))
            };
            f.push(parse(1)?);
            g.push(parse(2)?);
        }
        if f.len() < 2 {
            return Err(Error::Parse("profile CSV has fewer than two rows".into()));
        }
        let grid = Arc::new(RadialGrid::new(n, f.len() - 1)?);
        Self::new(grid, f, g, epsilon)
    }
}

/// Format a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write named columns as CSV with a header row and LF endings.
pub fn write_columns<W: Write>(writer: W, columns: &[(&str, &[f64])]) -> Result<()> {
    let rows = columns.first().map_or(0, |c| c.1.len());
    for (_, c) in columns {
        check_len(rows, c.len())?;
    }
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    wtr.write_record(columns.iter().map(|c| c.0))?;
    for i in 0..rows {
        wtr.write_record(columns.iter().map(|c| fmt_f64(c.1[i])))?;
    }
    wtr.flush()?;
    Ok(())
}
