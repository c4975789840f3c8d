//! Ideal block preconditioners for symmetric saddle point systems whose
//! leading block is singular.
//!
//! The systems have the form
//!
//! ```text
//! K = [ A   B1ᵀ  B2ᵀ ]
//!     [ B1  0    0   ]
//!     [ B2  0    0   ]
//! ```
//!
//! with `A` symmetric positive semidefinite of nullity `m2` and `B2` the rows of
//! `B` that reach `ker(A)`. The crate provides
//!
//! - [`problem`]: generators with controlled rank structure, `B` splitting and
//!   Matrix Market exchange,
//! - [`precond`]: the block diagonal preconditioners `P2D`, `P3D` and the block
//!   triangular `P3T`, plus the weight matrices and the operator `V`,
//! - [`inverse`]: closed-form block inverses of `K` and of its augmented form,
//! - [`krylov`]: preconditioned MINRES and GMRES with residual logs,
//! - [`spectrum`]: preconditioned spectra, clustering and verdicts against the
//!   predicted eigenvalues.

pub mod dense;
pub mod error;
pub mod fmt;
pub mod inverse;
pub mod krylov;
pub mod mtx;
pub mod precond;
pub mod problem;
pub mod spectrum;

pub use dense::{DenseMatrix, DenseVector, NullBasis};
pub use error::{Error, Result};
pub use precond::{PrecondTag, Preconditioner};
pub use problem::{Regime, RhsVector, SaddleProblem};

/// Library version.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
