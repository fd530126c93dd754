use std::path::PathBuf;

use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point is off the manifold: {0}")]
    Domain(String),

    #[error("symbol kind does not match phase space ({expected} expected)")]
    KindMismatch { expected: &'static str },

    #[error("N = {n} is too small for mode ({m}, {k}); need N > 2 * {max}")]
    ModeTooLarge { n: usize, m: i32, k: i32, max: i32 },

    #[error("symbol degree {degree} exceeds N/2 = {limit} for N = {n}")]
    DegreeTooLarge { degree: u32, limit: usize, n: usize },

    #[error("delta = {delta:e} is outside the admissible window ({lower:e}, {upper:e}) at N = {n}")]
    Schedule { n: usize, delta: f64, lower: f64, upper: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("decomposition did not converge for {0}")]
    NoConvergence(String),

    #[error("all probe points gave degenerate fits: {skipped:?}")]
    DegenerateFit { skipped: Vec<Complex64> },

    #[error("symbol {0} is not bounded below by a positive constant")]
    NotElliptic(String),

    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("malformed matrix file: {0}")]
    Format(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
