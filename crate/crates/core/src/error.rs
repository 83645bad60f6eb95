use thiserror::Error;

/// Errors produced by the solvers and I/O helpers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid sizing: {0}")]
    Sizing(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("epsilon mismatch: profile solved at {profile}, requested {requested}")]
    EpsilonMismatch { profile: f64, requested: f64 },

    #[error(
        "no threshold for N = {n}: the principal eigenvalue is bounded below by the Hardy constant {hardy}"
    )]
    NoThreshold { n: usize, hardy: f64 },

    #[error("bracket failure: ell({lo}) = {ell_lo}, ell({hi}) = {ell_hi} do not change sign")]
    BracketFailure {
        lo: f64,
        hi: f64,
        ell_lo: f64,
        ell_hi: f64,
    },

    #[error("boundary violation: {0}")]
    BoundaryViolation(String),

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, actual })
    }
}
