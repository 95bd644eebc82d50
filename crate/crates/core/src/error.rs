use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare {
        row: usize,
        len: usize,
        expected: usize,
    },

    #[error("matrix must have at least one row")]
    EmptyMatrix,

    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("matrix asymmetry {asymmetry:e} exceeds the allowed 1e-12")]
    Asymmetric { asymmetry: f64 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e}, residual {residual:e})")]
    NoConvergence {
        sweeps: usize,
        off_norm: f64,
        residual: f64,
    },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error(
        "point is off the sphere: measured radius {radius}, expected {expected} (tolerance 1e-9)"
    )]
    OffSphere { radius: f64, expected: f64 },

    #[error("induced metric radicand {radicand:e} is negative beyond round-off; kernel is not positive definite")]
    NegativeRadicand { radicand: f64 },

    #[error("quadrature budget exhausted on [{lo}, {hi}] after {evals} evaluations (estimated error {error:e})")]
    QuadratureBudget {
        lo: f64,
        hi: f64,
        evals: usize,
        error: f64,
    },

    #[error("subordination integral failed on the piece split at t = {split}: {source}")]
    Subordination {
        split: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid function: {0}")]
    InvalidFunction(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn param(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::InvalidParameter {
        name,
        value,
        reason,
    }
}
