//! The three preconditioners and the pieces they are built from.
//!
//! | tag   | shape            | inverse applied                                   |
//! |-------|------------------|---------------------------------------------------|
//! | `P2D` | block diagonal   | `diag(A + Bᵀ W_B⁻¹ B, W_B)⁻¹`                     |
//! | `P3D` | block diagonal   | `diag(Ã_W, S_B / 2, W)⁻¹`, `S_B = B1 Ã_W⁻¹ B1ᵀ`   |
//! | `P3T` | block triangular | `[[V, 0, Z_A L⁻¹], [0, (B1 V B1ᵀ)⁻¹, 0], [L⁻¹ Z_Aᵀ, 0, 0]]` |
//!
//! Preconditioners keep factorizations only. Explicit matrices are available
//! through [`Preconditioner::explicit_inverse`] for verification.

pub mod checks;
mod v;
mod weight;

pub use v::{build_v, VMode, VOperator};
pub use weight::{build_weight_l, AugmentedBlock, NullAWeight, WeightKind, WeightMatrix};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dense::{self, factor_spd, nullspace, DenseMatrix, DenseVector, SpdFactor};
use crate::error::{Error, Result};
use crate::problem::SaddleProblem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrecondTag {
    P2D,
    P3D,
    P3T,
    Identity,
}

impl PrecondTag {
    pub fn as_str(self) -> &'static str {
        match self {
            PrecondTag::P2D => "p2d",
            PrecondTag::P3D => "p3d",
            PrecondTag::P3T => "p3t",
            PrecondTag::Identity => "identity",
        }
    }
}

impl fmt::Display for PrecondTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PrecondTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "p2d" => Ok(PrecondTag::P2D),
            "p3d" => Ok(PrecondTag::P3D),
            "p3t" => Ok(PrecondTag::P3T),
            "identity" => Ok(PrecondTag::Identity),
            other => Err(Error::InvalidConfig(format!("unknown preconditioner {other:?}"))),
        }
    }
}

/// Diagonal block `scale · M` stored as the factorization of `M`.
#[derive(Clone, Debug)]
struct DiagBlock {
    factor: SpdFactor,
    scale: f64,
}

#[derive(Clone, Debug)]
enum Applied {
    BlockDiagonal(Vec<DiagBlock>),
    Triangular {
        v: DenseMatrix,
        /// (1,3) block of the inverse, `n × m2`.
        upper: DenseMatrix,
        /// (3,1) block of the inverse, `m2 × n`.
        lower: DenseMatrix,
        middle: SpdFactor,
    },
    Identity,
}

/// A preconditioner that can apply its inverse to block vectors.
#[derive(Clone, Debug)]
pub struct Preconditioner {
    tag: PrecondTag,
    sizes: Vec<usize>,
    applied: Applied,
    schur_scale: Option<f64>,
    non_ideal: bool,
}

impl Preconditioner {
    pub fn identity(dim: usize) -> Self {
        Preconditioner {
            tag: PrecondTag::Identity,
            sizes: vec![dim],
            applied: Applied::Identity,
            schur_scale: None,
            non_ideal: false,
        }
    }

    pub fn tag(&self) -> PrecondTag {
        self.tag
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn dim(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Scaling of the `S_B` block for `P3D` (1/2 for the ideal variant).
    pub fn schur_scale(&self) -> Option<f64> {
        self.schur_scale
    }

    /// Set when the problem violates the rank assumptions under which this
    /// preconditioner is ideal; it still applies, just without the
    /// eigenvalue guarantee.
    pub fn is_non_ideal(&self) -> bool {
        self.non_ideal
    }

    /// Whether the represented matrix is symmetric positive definite.
    pub fn is_spd(&self) -> bool {
        !matches!(self.applied, Applied::Triangular { .. })
    }

    pub fn apply_inverse(&self, r: &DenseVector) -> DenseVector {
        assert_eq!(r.len(), self.dim(), "apply_inverse: length mismatch");
        match &self.applied {
            Applied::Identity => r.clone(),
            Applied::BlockDiagonal(blocks) => {
                let mut z = DenseVector::zeros(r.len());
                let mut off = 0;
                for (blk, &len) in blocks.iter().zip(&self.sizes) {
                    let part = blk.factor.solve(&r.rows(off, len).into_owned()) / blk.scale;
                    z.rows_mut(off, len).copy_from(&part);
                    off += len;
                }
                z
            }
            Applied::Triangular {
                v,
                upper,
                lower,
                middle,
            } => {
                let (n, m1, m2) = (self.sizes[0], self.sizes[1], self.sizes[2]);
                let r0 = r.rows(0, n);
                let r1 = r.rows(n, m1).into_owned();
                let r2 = r.rows(n + m1, m2);
                let mut z = DenseVector::zeros(r.len());
                z.rows_mut(0, n).copy_from(&(v * r0 + upper * r2));
                z.rows_mut(n, m1).copy_from(&middle.solve(&r1));
                z.rows_mut(n + m1, m2).copy_from(&(lower * r0));
                z
            }
        }
    }

    /// Applies the inverse to every column of `m`.
    pub fn apply_inverse_mat(&self, m: &DenseMatrix) -> DenseMatrix {
        assert_eq!(m.nrows(), self.dim(), "apply_inverse_mat: row mismatch");
        match &self.applied {
            Applied::Identity => m.clone(),
            Applied::BlockDiagonal(blocks) => {
                let mut z = DenseMatrix::zeros(m.nrows(), m.ncols());
                let mut off = 0;
                for (blk, &len) in blocks.iter().zip(&self.sizes) {
                    let part = blk.factor.solve_mat(&m.rows(off, len).into_owned()) / blk.scale;
                    z.rows_mut(off, len).copy_from(&part);
                    off += len;
                }
                z
            }
            Applied::Triangular {
                v,
                upper,
                lower,
                middle,
            } => {
                let (n, m1, m2) = (self.sizes[0], self.sizes[1], self.sizes[2]);
                let r0 = m.rows(0, n);
                let r1 = m.rows(n, m1).into_owned();
                let r2 = m.rows(n + m1, m2);
                let mut z = DenseMatrix::zeros(m.nrows(), m.ncols());
                z.rows_mut(0, n).copy_from(&(v * r0 + upper * r2));
                z.rows_mut(n, m1).copy_from(&middle.solve_mat(&r1));
                z.rows_mut(n + m1, m2).copy_from(&(lower * r0));
                z
            }
        }
    }

    /// Dense `P⁻¹`. Verification only.
    pub fn explicit_inverse(&self) -> DenseMatrix {
        match &self.applied {
            Applied::Identity => DenseMatrix::identity(self.dim(), self.dim()),
            Applied::BlockDiagonal(blocks) => {
                let invs: Vec<DenseMatrix> = blocks
                    .iter()
                    .map(|b| b.factor.inverse() / b.scale)
                    .collect();
                dense::block_diag(&invs.iter().collect::<Vec<_>>())
            }
            Applied::Triangular {
                v,
                upper,
                lower,
                middle,
            } => {
                let (n, m1, m2) = (self.sizes[0], self.sizes[1], self.sizes[2]);
                let grid = vec![
                    vec![v.clone(), DenseMatrix::zeros(n, m1), upper.clone()],
                    vec![DenseMatrix::zeros(m1, n), middle.inverse(), DenseMatrix::zeros(m1, m2)],
                    vec![lower.clone(), DenseMatrix::zeros(m2, m1), DenseMatrix::zeros(m2, m2)],
                ];
                dense::assemble_grid(&grid, &self.sizes)
            }
        }
    }

    /// Dense `P` for the block diagonal variants. Verification only.
    pub fn explicit(&self) -> Option<DenseMatrix> {
        match &self.applied {
            Applied::Identity => Some(DenseMatrix::identity(self.dim(), self.dim())),
            Applied::BlockDiagonal(blocks) => {
                let mats: Vec<DenseMatrix> =
                    blocks.iter().map(|b| b.factor.matrix() * b.scale).collect();
                Some(dense::block_diag(&mats.iter().collect::<Vec<_>>()))
            }
            Applied::Triangular { .. } => None,
        }
    }
}

/// `P2D = diag(A + Bᵀ W_B⁻¹ B, W_B)` with `B = [B1; B2]`.
///
/// Ideal only when `nullity(A) = m`; otherwise the result is flagged
/// [`Preconditioner::is_non_ideal`].
pub fn build_p2d(p: &SaddleProblem, wb: &WeightMatrix) -> Result<Preconditioner> {
    let b = p.b();
    if wb.size() != p.m() {
        return Err(Error::DimensionMismatch(format!(
            "W_B is {}x{}, expected m = {}",
            wb.size(),
            wb.size(),
            p.m()
        )));
    }
    let aug = AugmentedBlock::new(&p.a, &b, wb)?;
    Ok(Preconditioner {
        tag: PrecondTag::P2D,
        sizes: vec![p.n(), p.m()],
        applied: Applied::BlockDiagonal(vec![
            DiagBlock {
                factor: aug.factor().clone(),
                scale: 1.0,
            },
            DiagBlock {
                factor: wb.factor().clone(),
                scale: 1.0,
            },
        ]),
        schur_scale: None,
        non_ideal: p.m1() > 0,
    })
}

/// `P3D = diag(Ã_W, S_B / 2, W)`.
pub fn build_p3d(p: &SaddleProblem, w: &WeightMatrix) -> Result<Preconditioner> {
    build_p3d_scaled(p, w, 0.5)
}

/// `P3D` with the `S_B` block scaled by `scale` instead of 1/2.
pub fn build_p3d_scaled(p: &SaddleProblem, w: &WeightMatrix, scale: f64) -> Result<Preconditioner> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "Schur block scaling must be positive, got {scale}"
        )));
    }
    if w.size() != p.m2() {
        return Err(Error::DimensionMismatch(format!(
            "W is {}x{}, expected m2 = {}",
            w.size(),
            w.size(),
            p.m2()
        )));
    }
    let aug = AugmentedBlock::new(&p.a, &p.b2, w)?;
    let sb = dense::symmetrize(&(&p.b1 * aug.solve_mat(&p.b1.transpose())));
    let sb_factor = factor_spd(&sb).map_err(|_| Error::SchurSingular)?;

    let non_ideal = p.m1() > 0 && {
        let za = nullspace(&p.a, dense::DEFAULT_RANK_TOL);
        (&p.b1 * &za.basis).norm() > 1e-8 * p.b1.norm()
    };

    Ok(Preconditioner {
        tag: PrecondTag::P3D,
        sizes: vec![p.n(), p.m1(), p.m2()],
        applied: Applied::BlockDiagonal(vec![
            DiagBlock {
                factor: aug.factor().clone(),
                scale: 1.0,
            },
            DiagBlock {
                factor: sb_factor,
                scale,
            },
            DiagBlock {
                factor: w.factor().clone(),
                scale: 1.0,
            },
        ]),
        schur_scale: Some(scale),
        non_ideal,
    })
}

/// Source of the (1,3)/(3,1) blocks of `P3T⁻¹`.
#[derive(Clone, Copy, Debug)]
pub enum P3tCorner<'a> {
    /// `Z_A L⁻¹` and `L⁻¹ Z_Aᵀ`.
    NullA(&'a NullAWeight),
    /// `(I − V A) B2ᵀ (B2 B2ᵀ)⁻¹` and `(B2 B2ᵀ)⁻¹ B2 (I − A V)`.
    NullB2,
}

/// Block triangular `P3T` applied through its explicit inverse.
pub fn build_p3t(p: &SaddleProblem, v: &VOperator, corner: P3tCorner<'_>) -> Result<Preconditioner> {
    let n = p.n();
    if v.value.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "V is {:?}, expected {n}x{n}",
            v.value.shape()
        )));
    }
    let vmat = &v.value;
    let middle_mat = dense::symmetrize(&(&p.b1 * vmat * p.b1.transpose()));
    let middle = factor_spd(&middle_mat).map_err(|_| Error::MiddleSchurSingular)?;

    let (upper, lower) = match corner {
        P3tCorner::NullA(nw) => {
            let lower = nw.weight.factor().solve_mat(&nw.basis.transpose());
            (lower.transpose(), lower)
        }
        P3tCorner::NullB2 => {
            let gram = dense::symmetrize(&(&p.b2 * p.b2.transpose()));
            let g = factor_spd(&gram).map_err(|_| Error::BorderedSingular)?;
            let eye = DenseMatrix::identity(n, n);
            let upper = (&eye - vmat * &p.a) * g.solve_mat(&p.b2).transpose();
            let lower = g.solve_mat(&p.b2) * (&eye - &p.a * vmat);
            (upper, lower)
        }
    };

    Ok(Preconditioner {
        tag: PrecondTag::P3T,
        sizes: vec![n, p.m1(), p.m2()],
        applied: Applied::Triangular {
            v: vmat.clone(),
            upper,
            lower,
            middle,
        },
        schur_scale: None,
        non_ideal: false,
    })
}

/// Builds `tag` for `p` with identity weights, `V` from a kernel basis of
/// `B2`, and the null-A corner blocks of `P3T`.
pub fn build_default(p: &SaddleProblem, tag: PrecondTag, rank_tol: f64) -> Result<Preconditioner> {
    match tag {
        PrecondTag::P2D => build_p2d(p, &WeightMatrix::identity(WeightKind::WB, p.m())),
        PrecondTag::P3D => build_p3d(p, &WeightMatrix::identity(WeightKind::W, p.m2())),
        PrecondTag::P3T => {
            let za = nullspace(&p.a, rank_tol);
            if za.dim() != p.m2() {
                return Err(Error::DimensionMismatch(format!(
                    "nullity(A) = {} but m2 = {}",
                    za.dim(),
                    p.m2()
                )));
            }
            let nw = build_weight_l(p, &za)?;
            let v = build_v(p, VMode::NullB2, rank_tol)?;
            build_p3t(p, &v, P3tCorner::NullA(&nw))
        }
        PrecondTag::Identity => Ok(Preconditioner::identity(p.dim())),
    }
}
