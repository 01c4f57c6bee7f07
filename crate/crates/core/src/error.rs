use thiserror::Error;

/// Errors raised anywhere in the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation failed: {0}")]
    Validation(String),

    #[error("eigenvalue on the branch cut of the principal logarithm (phase {phase:.6}); refine the loop discretization")]
    BranchCut { phase: f64 },

    #[error("discretization inadequate: {0}")]
    Discretization(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("weight formula undefined for constant weight vector {0:?}")]
    FormulaUndefined(Vec<i64>),

    #[error("loop has not converged to a geodesic: {0}")]
    NotConverged(String),

    #[error("phase increment {increment:.4} at sample {index} exceeds pi/2; resample denser")]
    Undersampled { index: usize, increment: f64 },

    #[error("kernel dimension unstable under truncation increase at twist {twist}: {small} vs {large}")]
    Truncation { twist: i64, small: usize, large: usize },

    #[error("inconsistent jump pattern in h0 at twists {twists:?}")]
    NumericalRank { twists: Vec<i64> },

    #[error("Fourier coefficients do not decay below {tol:e} beyond |k| = {degree} (tail {tail:e})")]
    Smoothness { degree: usize, tol: f64, tail: f64 },

    #[error("invalid connection: {0}")]
    InvalidConnection(String),

    #[error("quadrature residue {residue:e} exceeds tolerance")]
    Quadrature { residue: f64 },

    #[error("transport integration failed on ray {ray}: error estimate {estimate:e}")]
    Integration { ray: usize, estimate: f64 },

    #[error("complex gauge too ill-conditioned (condition number {0:e})")]
    IllConditionedGauge(f64),

    #[error("argument error: {0}")]
    Argument(String),

    #[error("refine shooting resolution: {0}")]
    Resolution(String),

    #[error("d^2 != 0 in degree {degree}")]
    BoundarySquare { degree: usize },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
