use serde::{Deserialize, Serialize};

use super::weight::{build_weight_l, AugmentedBlock};
use crate::dense::{self, factor_spd, nullspace, DenseMatrix};
use crate::error::{Error, Result};
use crate::problem::SaddleProblem;

/// How `V = Z_B2 (Z_B2ᵀ A Z_B2)⁻¹ Z_B2ᵀ` is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VMode {
    /// Directly from a kernel basis of `B2`.
    NullB2,
    /// As `Ã⁻¹ (I − B2ᵀ L⁻¹ Z_Aᵀ)` from a kernel basis of `A`.
    AugSolve,
}

/// Dense `n × n` evaluation of `V`.
#[derive(Clone, Debug)]
pub struct VOperator {
    pub mode: VMode,
    pub value: DenseMatrix,
}

/// Evaluates `V` exactly (densely) in the requested mode.
pub fn build_v(p: &SaddleProblem, mode: VMode, rank_tol: f64) -> Result<VOperator> {
    let value = match mode {
        VMode::NullB2 => v_null_b2(p, rank_tol)?,
        VMode::AugSolve => v_aug_solve(p, rank_tol)?,
    };
    Ok(VOperator { mode, value })
}

fn v_null_b2(p: &SaddleProblem, rank_tol: f64) -> Result<DenseMatrix> {
    let zb = nullspace(&p.b2, rank_tol);
    if zb.dim() != p.n() - p.m2().min(p.n()) {
        // B2 rank deficient: the bordered block cannot be invertible
        return Err(Error::BorderedSingular);
    }
    let z = &zb.basis;
    let reduced = dense::symmetrize(&(z.transpose() * &p.a * z));
    let f = factor_spd(&reduced).map_err(|_| Error::ReducedHessianNotSpd)?;
    Ok(dense::symmetrize(&(z * f.solve_mat(&z.transpose()))))
}

fn v_aug_solve(p: &SaddleProblem, rank_tol: f64) -> Result<DenseMatrix> {
    let za = nullspace(&p.a, rank_tol);
    if za.dim() != p.m2() {
        return Err(Error::DimensionMismatch(format!(
            "nullity(A) = {} but m2 = {}",
            za.dim(),
            p.m2()
        )));
    }
    let nw = build_weight_l(p, &za)?;
    let aug = AugmentedBlock::new(&p.a, &p.b2, &nw.weight)?;
    let linv_zt = nw.weight.factor().solve_mat(&nw.basis.transpose());
    let n = p.n();
    let rhs = DenseMatrix::identity(n, n) - p.b2.transpose() * linv_zt;
    Ok(aug.solve_mat(&rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{rel_diff, DEFAULT_RANK_TOL};
    use crate::problem::{generate, GenerateOptions, Regime};

    #[test]
    fn identity_leading_block_gives_orthoprojector() {
        let a = DenseMatrix::identity(4, 4);
        let b2 = DenseMatrix::from_row_slice(2, 4, &[1.0, 2.0, 0.0, 1.0, 0.0, 1.0, -1.0, 3.0]);
        let p = SaddleProblem::new(a, DenseMatrix::zeros(0, 4), b2, Regime::General, 0).unwrap();
        let v = build_v(&p, VMode::NullB2, DEFAULT_RANK_TOL).unwrap();
        let zb = nullspace(&p.b2, DEFAULT_RANK_TOL).basis;
        assert!(rel_diff(&v.value, &(&zb * zb.transpose())) < 1e-13);
    }

    #[test]
    fn empty_b2_gives_inverse_of_a() {
        let a = DenseMatrix::identity(3, 3) * 2.0;
        let p = SaddleProblem::new(
            a,
            DenseMatrix::zeros(0, 3),
            DenseMatrix::zeros(0, 3),
            Regime::General,
            0,
        )
        .unwrap();
        for mode in [VMode::NullB2, VMode::AugSolve] {
            let v = build_v(&p, mode, DEFAULT_RANK_TOL).unwrap();
            assert!(rel_diff(&v.value, &(DenseMatrix::identity(3, 3) * 0.5)) < 1e-14);
        }
    }

    #[test]
    fn modes_agree_and_v_is_a_generalized_inverse() {
        let p = generate(20, 3, 4, Regime::General, 2, &GenerateOptions::default()).unwrap();
        let v1 = build_v(&p, VMode::NullB2, DEFAULT_RANK_TOL).unwrap().value;
        let v2 = build_v(&p, VMode::AugSolve, DEFAULT_RANK_TOL).unwrap().value;
        assert!(rel_diff(&v2, &v1) <= 1e-9);
        // V A V = V and Vᵀ = V
        assert!(rel_diff(&(&v1 * &p.a * &v1), &v1) <= 1e-9);
        assert!(rel_diff(&v2.transpose(), &v2) <= 1e-9);
    }

    #[test]
    fn reduced_hessian_must_be_spd() {
        // ker(B2) = span(e1) and A vanishes there
        let a = DenseMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]);
        let b2 = DenseMatrix::from_row_slice(1, 2, &[0.0, 1.0]);
        let p = SaddleProblem::new(a, DenseMatrix::zeros(0, 2), b2, Regime::General, 0).unwrap();
        assert!(matches!(
            build_v(&p, VMode::NullB2, DEFAULT_RANK_TOL),
            Err(Error::ReducedHessianNotSpd)
        ));
    }
}
