use serde::{Deserialize, Serialize};

use crate::dense::{self, factor_spd, DenseMatrix, DenseVector, NullBasis, SpdFactor};
use crate::error::{Error, Result};
use crate::problem::SaddleProblem;

/// Which role a weight matrix plays.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightKind {
    /// `m × m` weight for augmenting with all of `B`.
    WB,
    /// `m2 × m2` weight for augmenting with `B2`.
    W,
    /// `L = B2 Z_A` after the SPD normalization of `Z_A`.
    L,
}

/// Symmetric positive definite weight together with its factorization.
#[derive(Clone, Debug)]
pub struct WeightMatrix {
    pub kind: WeightKind,
    pub value: DenseMatrix,
    factor: SpdFactor,
}

impl WeightMatrix {
    pub fn new(kind: WeightKind, value: DenseMatrix) -> Result<Self> {
        let factor = factor_spd(&value)?;
        Ok(WeightMatrix {
            kind,
            value: dense::symmetrize(&value),
            factor,
        })
    }

    pub fn identity(kind: WeightKind, size: usize) -> Self {
        Self::new(kind, DenseMatrix::identity(size, size)).expect("identity is SPD")
    }

    pub fn diagonal(kind: WeightKind, values: &[f64]) -> Result<Self> {
        Self::new(
            kind,
            DenseMatrix::from_diagonal(&DenseVector::from_column_slice(values)),
        )
    }

    pub fn size(&self) -> usize {
        self.value.nrows()
    }

    pub fn factor(&self) -> &SpdFactor {
        &self.factor
    }
}

/// `Ã = A + Rᵀ W⁻¹ R` for augmentation rows `R` (either `B2` or all of `B`).
#[derive(Clone, Debug)]
pub struct AugmentedBlock {
    pub value: DenseMatrix,
    factor: SpdFactor,
}

impl AugmentedBlock {
    /// Fails with [`Error::AugmentNotSpd`] when `Ã` is not positive definite,
    /// i.e. when the augmentation rows do not cover `ker(A)`.
    pub fn new(a: &DenseMatrix, rows: &DenseMatrix, weight: &WeightMatrix) -> Result<Self> {
        if rows.nrows() != weight.size() || rows.ncols() != a.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "augmenting {:?} with rows {:?} and weight {:?}",
                a.shape(),
                rows.shape(),
                weight.value.shape()
            )));
        }
        let winv_rows = weight.factor().solve_mat(rows);
        let value = dense::symmetrize(&(a + rows.transpose() * winv_rows));
        let factor = factor_spd(&value).map_err(|e| match e {
            Error::NotPositiveDefinite => Error::AugmentNotSpd,
            other => other,
        })?;
        Ok(AugmentedBlock { value, factor })
    }

    pub fn factor(&self) -> &SpdFactor {
        &self.factor
    }

    pub fn solve_mat(&self, rhs: &DenseMatrix) -> DenseMatrix {
        self.factor.solve_mat(rhs)
    }
}

/// The weight `L` and the kernel basis of `A` it was built from.
#[derive(Clone, Debug)]
pub struct NullAWeight {
    pub weight: WeightMatrix,
    /// `Z_A' = Z_A (B2 Z_A)ᵀ`, so that `B2 Z_A' = L`.
    pub basis: DenseMatrix,
}

impl NullAWeight {
    pub fn l(&self) -> &DenseMatrix {
        &self.weight.value
    }
}

/// Relative cutoff below which `B2 Z_A` counts as singular.
const BORDERED_TOL: f64 = 1e-12;

/// Builds `L` from a kernel basis of `A`, replacing `Z_A` by
/// `Z_A (B2 Z_A)ᵀ` so that `L = (B2 Z_A)(B2 Z_A)ᵀ` is SPD.
pub fn build_weight_l(p: &SaddleProblem, za: &NullBasis) -> Result<NullAWeight> {
    let m2 = p.m2();
    if za.basis.nrows() != p.n() || za.dim() != m2 {
        return Err(Error::DimensionMismatch(format!(
            "kernel basis {:?} for n = {}, m2 = {m2}",
            za.basis.shape(),
            p.n()
        )));
    }
    let g = &p.b2 * &za.basis;
    let s = dense::singular_values(&g);
    if let (Some(&hi), Some(&lo)) = (s.first(), s.last()) {
        if !(lo > BORDERED_TOL * hi.max(p.b2.norm())) {
            return Err(Error::BorderedSingular);
        }
    }
    let basis = &za.basis * g.transpose();
    let l = dense::symmetrize(&(&g * g.transpose()));
    let weight = WeightMatrix::new(WeightKind::L, l).map_err(|_| Error::BorderedSingular)?;
    Ok(NullAWeight { weight, basis })
}
