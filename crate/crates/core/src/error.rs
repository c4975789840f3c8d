use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not symmetric (asymmetry {asymmetry:.3e} exceeds {tolerance:.3e})")]
    NotSymmetric { asymmetry: f64, tolerance: f64 },

    #[error("matrix is not positive definite (non-positive pivot encountered)")]
    NotPositiveDefinite,

    #[error("matrix is singular to working precision")]
    Singular,

    #[error("eigenvalue iteration did not converge within {iterations} sweeps")]
    NoConvergence { iterations: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("could not draw a nonsingular problem after {attempts} attempts")]
    DegenerateDraw { attempts: usize },

    #[error("B cannot be split: only {found} of {needed} rows reach ker(A)")]
    NotSplittable { found: usize, needed: usize },

    #[error("augmented leading block is not positive definite")]
    AugmentNotSpd,

    #[error("Schur complement of the augmented block is singular")]
    SchurSingular,

    #[error("bordered block [[A, B2^T], [B2, 0]] is singular (B2 Z_A not invertible)")]
    BorderedSingular,

    #[error("reduced Hessian Z^T A Z is not positive definite")]
    ReducedHessianNotSpd,

    #[error("middle block B1 V B1^T is singular; K is singular")]
    MiddleSchurSingular,

    #[error("preconditioner is not positive definite (negative P-inner product)")]
    PreconditionerNotSpd,

    #[error("GMRES stagnated at iteration {iteration} with relative residual {residual:.3e}")]
    Stagnation { iteration: usize, residual: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
