use nalgebra::{Cholesky, Dyn};

use super::{asymmetry, symmetrize, DenseMatrix, DenseVector};
use crate::error::{Error, Result};

/// Relative asymmetry accepted by [`factor_spd`].
const SYMMETRY_TOL: f64 = 1e-12;

/// Cholesky factorization of a symmetric positive definite matrix.
#[derive(Clone, Debug)]
pub struct SpdFactor {
    chol: Option<Cholesky<f64, Dyn>>,
    dim: usize,
}

/// Factors `m` after checking symmetry and symmetrizing away roundoff.
///
/// Fails with [`Error::NotSymmetric`] when `‖M − Mᵀ‖_F > 1e-12 ‖M‖_F` and with
/// [`Error::NotPositiveDefinite`] when a non-positive pivot shows up.
pub fn factor_spd(m: &DenseMatrix) -> Result<SpdFactor> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "SPD factorization of a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    super::ensure_finite(m)?;
    let dim = m.nrows();
    if dim == 0 {
        return Ok(SpdFactor { chol: None, dim });
    }
    let tolerance = SYMMETRY_TOL * m.norm();
    let asym = asymmetry(m);
    if asym > tolerance {
        return Err(Error::NotSymmetric {
            asymmetry: asym,
            tolerance,
        });
    }
    let chol = Cholesky::new(symmetrize(m)).ok_or(Error::NotPositiveDefinite)?;
    if chol.l_dirty().diagonal().iter().any(|d| !(d.is_finite() && *d > 0.0)) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(SpdFactor {
        chol: Some(chol),
        dim,
    })
}

impl SpdFactor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn solve(&self, b: &DenseVector) -> DenseVector {
        assert_eq!(b.len(), self.dim, "SpdFactor::solve: length mismatch");
        match &self.chol {
            Some(c) => c.solve(b),
            None => DenseVector::zeros(0),
        }
    }

    pub fn solve_mat(&self, b: &DenseMatrix) -> DenseMatrix {
        assert_eq!(b.nrows(), self.dim, "SpdFactor::solve_mat: row mismatch");
        match &self.chol {
            Some(c) => c.solve(b),
            None => DenseMatrix::zeros(0, b.ncols()),
        }
    }

    /// Explicit inverse. Verification only.
    pub fn inverse(&self) -> DenseMatrix {
        match &self.chol {
            Some(c) => c.inverse(),
            None => DenseMatrix::zeros(0, 0),
        }
    }

    /// Reconstructs `L Lᵀ`.
    pub fn matrix(&self) -> DenseMatrix {
        match &self.chol {
            Some(c) => {
                let l = c.l();
                &l * l.transpose()
            }
            None => DenseMatrix::zeros(0, 0),
        }
    }
}
