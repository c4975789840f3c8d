//! Closed-form block inverses of 2×2 and 3×3 saddle point matrices.
//!
//! Every formula returns a [`BlockInverse`] so the grids can be compared
//! with each other and with a dense LU inverse.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::dense::{self, factor_spd, DenseMatrix, NullBasis, SpdFactor};
use crate::error::{Error, Result};
use crate::fmt::{ser_f64, Sig17};
use crate::mtx;
use crate::precond::{AugmentedBlock, NullAWeight, WeightMatrix};
use crate::problem::{assemble_k, SaddleProblem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Dense LU inverse of the assembled matrix.
    Direct,
    /// 2×2 formula with an invertible leading block.
    PosDefA,
    /// 2×2 formula with a kernel basis of the constraint block.
    NullspaceZ,
    /// 3×3 formula built from a kernel basis of `B2`.
    NullB2,
    /// 3×3 formula built from a kernel basis of `A`, additive leading block.
    NullA,
    /// Same, multiplicative leading block.
    NullAMult,
    /// Explicit inverse of the `B2`-augmented matrix `K(W)`.
    AugShift,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Direct => "direct",
            Provenance::PosDefA => "pos-def-a",
            Provenance::NullspaceZ => "nullspace-z",
            Provenance::NullB2 => "null-b2",
            Provenance::NullA => "null-a",
            Provenance::NullAMult => "null-a-mult",
            Provenance::AugShift => "aug-shift",
        }
    }
}

#[derive(Clone, Debug)]
pub struct BlockInverse {
    pub grid: Vec<Vec<DenseMatrix>>,
    pub sizes: Vec<usize>,
    pub provenance: Provenance,
}

impl BlockInverse {
    fn new(grid: Vec<Vec<DenseMatrix>>, sizes: Vec<usize>, provenance: Provenance) -> Self {
        debug_assert_eq!(grid.len(), sizes.len());
        BlockInverse {
            grid,
            sizes,
            provenance,
        }
    }

    pub fn block(&self, i: usize, j: usize) -> &DenseMatrix {
        &self.grid[i][j]
    }

    pub fn dim(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn assemble(&self) -> DenseMatrix {
        dense::assemble_grid(&self.grid, &self.sizes)
    }

    /// `max_ij ‖G_ij − G_jiᵀ‖_F / ‖G‖_F`.
    pub fn symmetry_residual(&self) -> f64 {
        let total = self.assemble().norm().max(f64::MIN_POSITIVE);
        let k = self.sizes.len();
        let mut worst = 0.0f64;
        for i in 0..k {
            for j in i..k {
                let d = (&self.grid[i][j] - self.grid[j][i].transpose()).norm();
                worst = worst.max(d / total);
            }
        }
        worst
    }

    /// `(‖G K − I‖_F, ‖K G − I‖_F)`, both divided by `√dim`.
    pub fn product_residuals(&self, k: &DenseMatrix) -> (f64, f64) {
        let g = self.assemble();
        let d = g.nrows();
        let eye = DenseMatrix::identity(d, d);
        let scale = (d.max(1) as f64).sqrt();
        ((&g * k - &eye).norm() / scale, (k * &g - &eye).norm() / scale)
    }

    /// `max_ij ‖G_ij − H_ij‖_F / ‖H‖_F` against a reference grid.
    pub fn blockwise_diff(&self, reference: &BlockInverse) -> f64 {
        assert_eq!(self.sizes, reference.sizes, "grids have different partitions");
        let total = reference.assemble().norm().max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for (row, ref_row) in self.grid.iter().zip(&reference.grid) {
            for (b, r) in row.iter().zip(ref_row) {
                worst = worst.max((b - r).norm() / total);
            }
        }
        worst
    }

    /// Writes every block as `<stem>_<i><j>.mtx` (1-based) and a JSON
    /// manifest `<stem>.json`. Returns the written paths, manifest last.
    pub fn export(&self, dir: impl AsRef<Path>, stem: &str, residuals: &[(&str, f64)]) -> Result<Vec<PathBuf>> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let mut files = Vec::new();
        let mut names = Vec::new();
        for (i, row) in self.grid.iter().enumerate() {
            for (j, b) in row.iter().enumerate() {
                let name = format!("{stem}_{}{}.mtx", i + 1, j + 1);
                let path = dir.join(&name);
                mtx::write_array_file(&path, b)?;
                files.push(path);
                names.push(name);
            }
        }
        let manifest = ExportManifest {
            provenance: self.provenance,
            sizes: &self.sizes,
            blocks: names,
            residuals: residuals
                .iter()
                .map(|&(name, value)| NamedResidual {
                    name: name.to_string(),
                    value: Sig17(value),
                })
                .collect(),
        };
        let path = dir.join(format!("{stem}.json"));
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(&path, text)?;
        files.push(path);
        Ok(files)
    }
}

#[derive(Serialize)]
struct ExportManifest<'a> {
    provenance: Provenance,
    sizes: &'a [usize],
    blocks: Vec<String>,
    residuals: Vec<NamedResidual>,
}

#[derive(Serialize)]
struct NamedResidual {
    name: String,
    value: Sig17,
}

/// Residual bound used when comparing inverse grids: `1e-8 · κ₂(K)`.
pub fn condition_tolerance(k: &DenseMatrix) -> f64 {
    1e-8 * dense::cond2(k)
}

/// Intermediate matrices shared by the 3×3 formulas.
#[derive(Clone, Debug)]
pub struct ScratchTerms {
    pub v: DenseMatrix,
    /// `B1 V B1ᵀ`
    pub s_v: DenseMatrix,
    /// `A + B2ᵀ W⁻¹ B2`
    pub aug_w: DenseMatrix,
    /// `B1 Ã_W⁻¹ B1ᵀ`
    pub s_b: DenseMatrix,
    /// `Ã_W⁻¹ − Ã_W⁻¹ B1ᵀ S_B⁻¹ B1 Ã_W⁻¹`
    pub a_hat: DenseMatrix,
    /// `B2 Â B2ᵀ`
    pub s_bar: DenseMatrix,
}

pub fn scratch_terms(p: &SaddleProblem, v: &DenseMatrix, w: &WeightMatrix) -> Result<ScratchTerms> {
    let s_v = dense::symmetrize(&(&p.b1 * v * p.b1.transpose()));
    factor_spd(&s_v).map_err(|_| Error::SchurSingular)?;
    let aug = AugmentedBlock::new(&p.a, &p.b2, w)?;
    let (s_b, a_hat) = schur_and_hat(&aug, &p.b1)?;
    let s_bar = dense::symmetrize(&(&p.b2 * &a_hat * p.b2.transpose()));
    Ok(ScratchTerms {
        v: v.clone(),
        s_v,
        aug_w: aug.value,
        s_b,
        a_hat,
        s_bar,
    })
}

fn schur_and_hat(aug: &AugmentedBlock, b1: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    let n = aug.value.nrows();
    let ainv = aug.factor().inverse();
    let ainv_b1t = aug.solve_mat(&b1.transpose());
    let s_b = dense::symmetrize(&(b1 * &ainv_b1t));
    let sb_f = factor_spd(&s_b).map_err(|_| Error::SchurSingular)?;
    let a_hat = if n == 0 {
        ainv
    } else {
        dense::symmetrize(&(&ainv - &ainv_b1t * sb_f.solve_mat(&ainv_b1t.transpose())))
    };
    Ok((s_b, a_hat))
}

fn check_2x2(acal: &DenseMatrix, bcal: &DenseMatrix) -> Result<()> {
    if !acal.is_square() || bcal.ncols() != acal.nrows() || bcal.nrows() > acal.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "leading block {:?}, constraint block {:?}",
            acal.shape(),
            bcal.shape()
        )));
    }
    Ok(())
}

fn gram_factor(b: &DenseMatrix) -> Result<SpdFactor> {
    factor_spd(&dense::symmetrize(&(b * b.transpose()))).map_err(|_| Error::BorderedSingular)
}

/// `[[𝒜⁻¹ − 𝒜⁻¹ℬᵀS⁻¹ℬ𝒜⁻¹, 𝒜⁻¹ℬᵀS⁻¹], [S⁻¹ℬ𝒜⁻¹, −S⁻¹]]` with `S = ℬ𝒜⁻¹ℬᵀ`.
pub fn inv2_posdef(acal: &DenseMatrix, bcal: &DenseMatrix) -> Result<BlockInverse> {
    check_2x2(acal, bcal)?;
    let af = factor_spd(acal)?;
    let ainv = af.inverse();
    let ainv_bt = af.solve_mat(&bcal.transpose());
    let s = dense::symmetrize(&(bcal * &ainv_bt));
    let sf = factor_spd(&s).map_err(|_| Error::SchurSingular)?;
    let sinv = sf.inverse();
    let upper = &ainv_bt * &sinv;
    let lead = &ainv - &upper * ainv_bt.transpose();
    let grid = vec![
        vec![lead, upper.clone()],
        vec![upper.transpose(), -sinv],
    ];
    Ok(BlockInverse::new(
        grid,
        vec![acal.nrows(), bcal.nrows()],
        Provenance::PosDefA,
    ))
}

/// `V_ℬ = Z (Zᵀ𝒜Z)⁻¹ Zᵀ`.
fn reduced_inverse(acal: &DenseMatrix, z: &DenseMatrix) -> Result<DenseMatrix> {
    let reduced = dense::symmetrize(&(z.transpose() * acal * z));
    let f = factor_spd(&reduced).map_err(|_| Error::ReducedHessianNotSpd)?;
    Ok(dense::symmetrize(&(z * f.solve_mat(&z.transpose()))))
}

/// 2×2 inverse through a kernel basis `Z` of `ℬ`; `𝒜` may be singular.
pub fn inv2_nullspace(acal: &DenseMatrix, bcal: &DenseMatrix, z: &NullBasis) -> Result<BlockInverse> {
    check_2x2(acal, bcal)?;
    let n = acal.nrows();
    if z.basis.nrows() != n || z.dim() + bcal.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "kernel basis {:?} for constraint block {:?}",
            z.basis.shape(),
            bcal.shape()
        )));
    }
    let vb = reduced_inverse(acal, &z.basis)?;
    let g = gram_factor(bcal)?;
    let eye = DenseMatrix::identity(n, n);
    // (ℬℬᵀ)⁻¹ℬ
    let gb = g.solve_mat(bcal);
    let upper = (&eye - &vb * acal) * gb.transpose();
    let lower = &gb * (&eye - acal * &vb);
    let corner = -(&gb * (acal - acal * &vb * acal) * gb.transpose());
    let grid = vec![vec![vb, upper], vec![lower, corner]];
    Ok(BlockInverse::new(grid, vec![n, bcal.nrows()], Provenance::NullspaceZ))
}

/// Dense LU inverse of `K`, partitioned as `(n, m1, m2)`.
pub fn direct_inverse(p: &SaddleProblem) -> Result<BlockInverse> {
    let kinv = dense::inverse(&assemble_k(p))?;
    Ok(split_grid(&kinv, &p.sizes(), Provenance::Direct))
}

fn split_grid(m: &DenseMatrix, sizes: &[usize], provenance: Provenance) -> BlockInverse {
    let k = sizes.len();
    let grid = (0..k)
        .map(|i| (0..k).map(|j| dense::block(m, sizes, i, j)).collect())
        .collect();
    BlockInverse::new(grid, sizes.to_vec(), provenance)
}

/// Which variant of the null-`B2` formula to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NullB2Form {
    /// All six blocks `X1 … X6`; valid whenever `[[A, B2ᵀ], [B2, 0]]` is invertible.
    Full,
    /// `X5 = X6 = 0` and `X3 = (B2B2ᵀ)⁻¹B2(I − AV)`; needs `B1` rows in `range(A)`.
    Simplified,
}

/// Null-`B2` formula, simplified form for minimally independent problems
/// and full form otherwise.
pub fn inv3_null_b2(p: &SaddleProblem, zb2: &NullBasis) -> Result<BlockInverse> {
    let form = match p.regime {
        crate::problem::Regime::General => NullB2Form::Full,
        _ => NullB2Form::Simplified,
    };
    inv3_null_b2_form(p, zb2, form)
}

pub fn inv3_null_b2_form(p: &SaddleProblem, zb2: &NullBasis, form: NullB2Form) -> Result<BlockInverse> {
    let (n, m1, m2) = (p.n(), p.m1(), p.m2());
    if zb2.basis.nrows() != n || zb2.dim() + m2 != n {
        return Err(Error::DimensionMismatch(format!(
            "kernel basis of B2 is {:?}, expected {n}x{}",
            zb2.basis.shape(),
            n.saturating_sub(m2)
        )));
    }
    let a = &p.a;
    let b1 = &p.b1;
    let b1t = b1.transpose();
    let b2 = &p.b2;
    let v = reduced_inverse(a, &zb2.basis)?;
    let s_v = dense::symmetrize(&(b1 * &v * &b1t));
    let sv_f = factor_spd(&s_v).map_err(|_| Error::SchurSingular)?;
    let sv_inv = sv_f.inverse();
    let g = gram_factor(b2)?;
    let eye = DenseMatrix::identity(n, n);

    let av = a * &v;
    // S_V⁻¹ B1 V
    let x2 = sv_f.solve_mat(&(b1 * &v));
    let x1 = &v - &v * &b1t * &x2;
    let x4 = -&sv_inv;
    // (B2B2ᵀ)⁻¹B2
    let gb = g.solve_mat(b2);

    let (x3, x5, x6) = match form {
        NullB2Form::Full => {
            let t = &b1t * &sv_inv * b1;
            let x3 = &gb * (&eye - &av + &av * &t * &v - &t * &v);
            let x5 = &gb * (&eye - &av) * &b1t * &sv_inv;
            let middle = a + &t - &av * a - &av * &t - &t * &v * a + &av * &t * &v * a;
            let x6 = -(&gb * middle * gb.transpose());
            (x3, x5, x6)
        }
        NullB2Form::Simplified => (
            &gb * (&eye - &av),
            DenseMatrix::zeros(m2, m1),
            DenseMatrix::zeros(m2, m2),
        ),
    };

    let grid = vec![
        vec![x1, x2.transpose(), x3.transpose()],
        vec![x2, x4, x5.transpose()],
        vec![x3, x5, x6],
    ];
    Ok(BlockInverse::new(grid, vec![n, m1, m2], Provenance::NullB2))
}

/// Explicit inverse of `K(W)`, the matrix `K` with `A` replaced by
/// `Ã_W = A + B2ᵀ W⁻¹ B2`. Valid whenever `Ã_W` is invertible.
pub fn inv3_augmented(p: &SaddleProblem, w: &WeightMatrix) -> Result<BlockInverse> {
    let (n, m1, m2) = (p.n(), p.m1(), p.m2());
    let aug = AugmentedBlock::new(&p.a, &p.b2, w)?;
    let (s_b, a_hat) = schur_and_hat(&aug, &p.b1)?;
    let sb_inv = factor_spd(&s_b).map_err(|_| Error::SchurSingular)?.inverse();
    let s_bar = dense::symmetrize(&(&p.b2 * &a_hat * p.b2.transpose()));
    let sbar_inv = factor_spd(&s_bar).map_err(|_| Error::BorderedSingular)?.inverse();
    let ainv = aug.factor().inverse();
    let b1t = p.b1.transpose();
    let b2t = p.b2.transpose();
    let eye = DenseMatrix::identity(n, n);

    // Ã_W⁻¹ B1ᵀ S_B⁻¹
    let c = &ainv * &b1t * &sb_inv;
    let hb = &a_hat * &b2t * &sbar_inv;

    let g11 = &a_hat - &hb * &p.b2 * &a_hat;
    let g12 = (&eye - &hb * &p.b2) * &c;
    let g13 = hb.clone();
    let g21 = &sb_inv * &p.b1 * &ainv * (&eye - &b2t * &sbar_inv * &p.b2 * &a_hat);
    let g22 = -&sb_inv - &sb_inv * &p.b1 * &ainv * &b2t * &sbar_inv * &p.b2 * &c;
    let g23 = &sb_inv * &p.b1 * &ainv * &b2t * &sbar_inv;
    let g31 = &sbar_inv * &p.b2 * &a_hat;
    let g32 = &sbar_inv * &p.b2 * &c;
    let g33 = -sbar_inv;

    let grid = vec![vec![g11, g12, g13], vec![g21, g22, g23], vec![g31, g32, g33]];
    Ok(BlockInverse::new(grid, vec![n, m1, m2], Provenance::AugShift))
}

/// `‖K(W)⁻¹ − (K⁻¹ − diag(0, 0, W⁻¹))‖_F / ‖K⁻¹‖_F` from two dense inversions.
pub fn aug_shift_check(p: &SaddleProblem, w: &WeightMatrix) -> Result<f64> {
    let m2 = p.m2();
    if w.size() != m2 {
        return Err(Error::DimensionMismatch(format!(
            "W is {}x{}, expected m2 = {m2}",
            w.size(),
            w.size()
        )));
    }
    let k = assemble_k(p);
    let kinv = dense::inverse(&k)?;
    let mut kw = k;
    let shift = p.b2.transpose() * w.factor().solve_mat(&p.b2);
    let n = p.n();
    let mut lead = kw.view_mut((0, 0), (n, n));
    lead += &shift;
    let kw_inv = dense::inverse(&kw)?;
    let mut expected = kinv.clone();
    let d = expected.nrows();
    let mut corner = expected.view_mut((d - m2, d - m2), (m2, m2));
    corner -= w.factor().inverse();
    Ok((kw_inv - expected).norm() / kinv.norm().max(f64::MIN_POSITIVE))
}

/// Both null-`A` grids and the gap between their leading blocks.
#[derive(Clone, Debug)]
pub struct NullAInverse {
    pub additive: BlockInverse,
    pub multiplicative: BlockInverse,
    /// `‖additive₁₁ − multiplicative₁₁‖_F / ‖additive₁₁‖_F`
    pub leading_gap: f64,
}

/// Null-`A` formula with `Ã = A + B2ᵀ L⁻¹ B2`; requires `ker(A) ⊆ ker(B1)`.
pub fn inv3_null_a(p: &SaddleProblem, nw: &NullAWeight) -> Result<NullAInverse> {
    let (n, m1, m2) = (p.n(), p.m1(), p.m2());
    let za = &nw.basis;
    if za.shape() != (n, m2) || nw.weight.size() != m2 {
        return Err(Error::DimensionMismatch(format!(
            "kernel basis {:?} and L {}x{} for n = {n}, m2 = {m2}",
            za.shape(),
            nw.weight.size(),
            nw.weight.size()
        )));
    }
    let leak = (&p.b1 * za).norm();
    if leak > 1e-8 * p.b1.norm() * za.norm() {
        return Err(Error::InvalidConfig(format!(
            "null-A formula needs B1 Z_A = 0, got ‖B1 Z_A‖ = {leak:e}"
        )));
    }

    let aug = AugmentedBlock::new(&p.a, &p.b2, &nw.weight)?;
    let (s_b, a_hat) = schur_and_hat(&aug, &p.b1)?;
    let sb_f = factor_spd(&s_b).map_err(|_| Error::SchurSingular)?;
    let sb_inv = sb_f.inverse();
    let l = nw.weight.factor();
    // L⁻¹ Z_Aᵀ
    let lower = l.solve_mat(&za.transpose());
    let upper = lower.transpose();

    let ainv_b1t = aug.solve_mat(&p.b1.transpose());
    let g12 = &ainv_b1t * &sb_inv;
    let g21 = g12.transpose();
    let add11 = &a_hat - za * &lower;

    let eye = DenseMatrix::identity(n, n);
    let left = &eye - &ainv_b1t * sb_f.solve_mat(&p.b1);
    let right = &eye - p.b2.transpose() * &lower;
    let mult11 = left * aug.factor().inverse() * right;

    let leading_gap = (&add11 - &mult11).norm() / add11.norm().max(f64::MIN_POSITIVE);
    let grid = |lead: DenseMatrix| {
        vec![
            vec![lead, g12.clone(), upper.clone()],
            vec![g21.clone(), -sb_inv.clone(), DenseMatrix::zeros(m1, m2)],
            vec![lower.clone(), DenseMatrix::zeros(m2, m1), DenseMatrix::zeros(m2, m2)],
        ]
    };
    let sizes = vec![n, m1, m2];
    Ok(NullAInverse {
        additive: BlockInverse::new(grid(add11), sizes.clone(), Provenance::NullA),
        multiplicative: BlockInverse::new(grid(mult11), sizes, Provenance::NullAMult),
        leading_gap,
    })
}

/// Residuals of one inverse grid against `K` and the dense inverse.
#[derive(Clone, Debug, Serialize)]
pub struct InverseReport {
    pub provenance: Provenance,
    #[serde(serialize_with = "ser_f64")]
    pub left_residual: f64,
    #[serde(serialize_with = "ser_f64")]
    pub right_residual: f64,
    #[serde(serialize_with = "ser_f64")]
    pub symmetry: f64,
    #[serde(serialize_with = "ser_f64")]
    pub vs_direct: f64,
}

impl InverseReport {
    pub fn new(inv: &BlockInverse, k: &DenseMatrix, direct: &BlockInverse) -> Self {
        let (left_residual, right_residual) = inv.product_residuals(k);
        InverseReport {
            provenance: inv.provenance,
            left_residual,
            right_residual,
            symmetry: inv.symmetry_residual(),
            vs_direct: inv.blockwise_diff(direct),
        }
    }

    pub fn worst(&self) -> f64 {
        self.left_residual
            .max(self.right_residual)
            .max(self.vs_direct)
    }
}
