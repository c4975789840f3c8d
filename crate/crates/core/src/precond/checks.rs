//! Residuals of the structural identities the preconditioners rely on.

use serde::Serialize;

use super::weight::{AugmentedBlock, WeightMatrix};
use crate::dense::{self, range_basis, rank, DenseMatrix, Projector};
use crate::error::{Error, Result};
use crate::problem::SaddleProblem;

/// `‖B (A + Bᵀ W_B⁻¹ B)⁻¹ Bᵀ − W_B‖_F / ‖W_B‖_F`.
///
/// `W_B` only needs to be invertible, so everything goes through LU.
pub fn schur_identity_residual(a: &DenseMatrix, b: &DenseMatrix, wb: &DenseMatrix) -> Result<f64> {
    if wb.nrows() != b.nrows() || !wb.is_square() || b.ncols() != a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "A {:?}, B {:?}, W_B {:?}",
            a.shape(),
            b.shape(),
            wb.shape()
        )));
    }
    let winv_b = dense::solve_lu(wb, b)?;
    let aug = a + b.transpose() * winv_b;
    let x = dense::solve_lu(&aug, &b.transpose())?;
    Ok((b * x - wb).norm() / wb.norm())
}

/// `‖A Ã_W⁻¹ B2ᵀ‖_F / (‖A‖_F ‖B2‖_F)`: `Ã_W⁻¹ B2ᵀ` is a null matrix of `A`.
pub fn null_matrix_residual(p: &SaddleProblem, w: &WeightMatrix) -> Result<f64> {
    let aug = AugmentedBlock::new(&p.a, &p.b2, w)?;
    let x = aug.solve_mat(&p.b2.transpose());
    let scale = p.a.norm() * p.b2.norm();
    Ok(if scale > 0.0 { (&p.a * x).norm() / scale } else { 0.0 })
}

/// `P_A = A Ã_W⁻¹` with `range(A)` as range witness and `B2ᵀ` as kernel witness.
pub fn pa_projector(p: &SaddleProblem, w: &WeightMatrix, rank_tol: f64) -> Result<Projector> {
    let aug = AugmentedBlock::new(&p.a, &p.b2, w)?;
    // Ã_W symmetric, so A Ã_W⁻¹ = (Ã_W⁻¹ A)ᵀ
    let matrix = aug.solve_mat(&p.a).transpose();
    Ok(Projector {
        matrix,
        range_witness: range_basis(&p.a, rank_tol),
        kernel_witness: p.b2.transpose(),
    })
}

/// `‖A V − A Ã_W⁻¹‖_F / ‖A Ã_W⁻¹‖_F`.
pub fn av_residual(p: &SaddleProblem, v: &DenseMatrix, w: &WeightMatrix) -> Result<f64> {
    let aug = AugmentedBlock::new(&p.a, &p.b2, w)?;
    let pa = aug.solve_mat(&p.a).transpose();
    Ok((&p.a * v - &pa).norm() / pa.norm().max(f64::MIN_POSITIVE))
}

/// Ranks and overlaps of the projectors behind the eigenvector counts.
#[derive(Clone, Debug, Serialize)]
pub struct ProjectorRanks {
    /// `rank(V B1ᵀ (B1 V B1ᵀ)⁻¹ B1)`, expected `m1`.
    pub v_projector_rank: usize,
    /// `rank((I − P1) + 2 P2)` with `P1 = Ã_W⁻¹ A`, `P2 = Ã_W⁻¹ B1ᵀ S_B⁻¹ B1`,
    /// expected `m1 + m2`.
    pub combined_rank: usize,
    /// `‖(I − P1) Ã_W⁻¹ B1ᵀ‖_F / ‖Ã_W⁻¹ B1ᵀ‖_F`, zero when `range(P2) ⊆ range(P1)`.
    pub range_inclusion: f64,
}

pub fn projector_ranks(
    p: &SaddleProblem,
    v: &DenseMatrix,
    w: &WeightMatrix,
    rank_tol: f64,
) -> Result<ProjectorRanks> {
    let n = p.n();
    let eye = DenseMatrix::identity(n, n);

    let sv = dense::symmetrize(&(&p.b1 * v * p.b1.transpose()));
    let sv_f = dense::factor_spd(&sv).map_err(|_| Error::MiddleSchurSingular)?;
    let pv = v * p.b1.transpose() * sv_f.solve_mat(&p.b1);

    let aug = AugmentedBlock::new(&p.a, &p.b2, w)?;
    let ainv_b1t = aug.solve_mat(&p.b1.transpose());
    let sb = dense::symmetrize(&(&p.b1 * &ainv_b1t));
    let sb_f = dense::factor_spd(&sb).map_err(|_| Error::SchurSingular)?;
    let p1 = aug.solve_mat(&p.a);
    let p2 = &ainv_b1t * sb_f.solve_mat(&p.b1);
    let combined = (&eye - &p1) + p2 * 2.0;

    let incl = (&eye - &p1) * &ainv_b1t;
    let denom = ainv_b1t.norm();
    Ok(ProjectorRanks {
        v_projector_rank: rank(&pv, rank_tol),
        combined_rank: rank(&combined, rank_tol),
        range_inclusion: if denom > 0.0 { incl.norm() / denom } else { 0.0 },
    })
}
