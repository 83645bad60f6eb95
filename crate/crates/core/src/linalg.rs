//! Banded solvers used by the radial Newton iterations and the eigen-solver.

use crate::error::{Error, Result};

/// Solve a tridiagonal system with the Thomas algorithm.
///
/// `sub[i]` couples row `i + 1` to column `i`, `sup[i]` couples row `i` to
/// column `i + 1`.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if sub.len() + 1 != n || sup.len() + 1 != n || rhs.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: rhs.len(),
        });
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot == 0.0 || !pivot.is_finite() {
        return Err(Error::NumericalBreakdown("zero pivot in tridiagonal solve".into()));
    }
    if n > 1 {
        c[0] = sup[0] / pivot;
    }
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - sub[i - 1] * c[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::NumericalBreakdown("zero pivot in tridiagonal solve".into()));
        }
        if i + 1 < n {
            c[i] = sup[i] / pivot;
        }
        d[i] = (rhs[i] - sub[i - 1] * d[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        debug_assert_eq!(off.len() + 1, diag.len().max(1));
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.off[i] * x[i + 1];
            }
            y[i] = s;
        }
        y
    }

    /// Interval containing the whole spectrum (Gershgorin discs).
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut radius = 0.0;
            if i > 0 {
                radius += self.off[i - 1].abs();
            }
            if i + 1 < n {
                radius += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - radius);
            hi = hi.max(self.diag[i] + radius);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `sigma` (Sturm sequence count).
    pub fn count_below(&self, sigma: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0_f64;
        for i in 0..self.len() {
            let prev = if i > 0 { self.off[i - 1] * self.off[i - 1] / q } else { 0.0 };
            q = self.diag[i] - sigma - prev;
            if q == 0.0 {
                q = -f64::EPSILON * (self.diag[i].abs() + sigma.abs() + 1.0);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Solve `(A - sigma I) x = rhs`.
    pub fn solve_shifted(&self, sigma: f64, rhs: &[f64]) -> Result<Vec<f64>> {
        let diag: Vec<f64> = self.diag.iter().map(|d| d - sigma).collect();
        solve_tridiagonal(&self.off, &diag, &self.off, rhs)
    }

    /// True when every LDL^T pivot is positive.
    pub fn is_positive_definite(&self) -> bool {
        self.count_below(0.0) == 0
    }
}

/// Smallest eigenvalue and unit eigenvector of a symmetric tridiagonal matrix.
///
/// The shift starts at the Gershgorin lower bound and is raised by Sturm
/// bisection while staying below the spectrum; inverse iteration then
/// converges in a handful of steps. The eigenvector is signed to have a
/// nonnegative component sum. Returns `(eigenvalue, vector, iterations)`.
pub fn lowest_eigenpair(a: &SymTridiagonal, max_iterations: usize) -> Result<(f64, Vec<f64>, usize)> {
    let n = a.len();
    if n == 0 {
        return Err(Error::Sizing("empty matrix has no eigenpair".into()));
    }
    let (lo, hi) = a.gershgorin();
    let scale = hi.abs().max(lo.abs()).max(1.0);
    let mut below = lo - 1e-6 * scale;
    let mut above = hi + 1e-6 * scale;
    while above - below > 1e-9 * scale {
        let mid = 0.5 * (below + above);
        if a.count_below(mid) == 0 {
            below = mid;
        } else {
            above = mid;
        }
    }
    let shift = below - 1e-9 * scale;

    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    for it in 1..=max_iterations {
        let mut y = a.solve_shifted(shift, &x)?;
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::NumericalBreakdown("inverse iteration produced a degenerate vector".into()));
        }
        let sign = if y.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        y.iter_mut().for_each(|v| *v *= sign / norm);
        let change = y.iter().zip(&x).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        x = y;
        let ax = a.mul(&x);
        let eigenvalue: f64 = x.iter().zip(&ax).map(|(p, q)| p * q).sum();
        let resid = ax
            .iter()
            .zip(&x)
            .map(|(p, q)| (p - eigenvalue * q).abs())
            .fold(0.0, f64::max);
        if change < 1e-13 || resid < 1e-13 * scale {
            return Ok((eigenvalue, x, it));
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iterations,
        residual: f64::NAN,
    })
}

/// 2x2 block, row-major.
pub type Block = [[f64; 2]; 2];

fn block_mul(a: &Block, b: &Block) -> Block {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

fn block_vec(a: &Block, x: [f64; 2]) -> [f64; 2] {
    [a[0][0] * x[0] + a[0][1] * x[1], a[1][0] * x[0] + a[1][1] * x[1]]
}

fn block_inv(a: &Block) -> Result<Block> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let scale = a[0][0].abs().max(a[1][1].abs()).max(a[0][1].abs()).max(a[1][0].abs());
    if !det.is_finite() || det.abs() <= 1e-300_f64.max(f64::EPSILON * 1e-3 * scale * scale) {
        return Err(Error::NumericalBreakdown("singular 2x2 pivot block".into()));
    }
    Ok([
        [a[1][1] / det, -a[0][1] / det],
        [-a[1][0] / det, a[0][0] / det],
    ])
}

/// Block-tridiagonal solve with 2x2 blocks (block Thomas algorithm).
///
/// `sub[i]` is the block at (i + 1, i), `sup[i]` the block at (i, i + 1).
pub fn solve_block_tridiagonal(
    sub: &[Block],
    diag: &[Block],
    sup: &[Block],
    rhs: &[[f64; 2]],
) -> Result<Vec<[f64; 2]>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if sub.len() + 1 != n || sup.len() + 1 != n || rhs.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: rhs.len(),
        });
    }
    let mut c: Vec<Block> = vec![[[0.0; 2]; 2]; n];
    let mut d: Vec<[f64; 2]> = vec![[0.0; 2]; n];
    let mut inv = block_inv(&diag[0])?;
    if n > 1 {
        c[0] = block_mul(&inv, &sup[0]);
    }
    d[0] = block_vec(&inv, rhs[0]);
    for i in 1..n {
        let lc = block_mul(&sub[i - 1], &c[i - 1]);
        let pivot = [
            [diag[i][0][0] - lc[0][0], diag[i][0][1] - lc[0][1]],
            [diag[i][1][0] - lc[1][0], diag[i][1][1] - lc[1][1]],
        ];
        inv = block_inv(&pivot)?;
        if i + 1 < n {
            c[i] = block_mul(&inv, &sup[i]);
        }
        let ld = block_vec(&sub[i - 1], d[i - 1]);
        d[i] = block_vec(&inv, [rhs[i][0] - ld[0], rhs[i][1] - ld[1]]);
    }
    for i in (0..n - 1).rev() {
        let cd = block_vec(&c[i], d[i + 1]);
        d[i] = [d[i][0] - cd[0], d[i][1] - cd[1]];
    }
    Ok(d)
}
