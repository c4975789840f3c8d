//! Dense matrix utilities shared by every other module.
//!
//! Matrices are plain [`nalgebra::DMatrix<f64>`] values. This module adds the
//! handful of operations the saddle point machinery needs on top of them:
//! checked construction, SPD factorizations, SVD-based rank and kernel
//! computation, a general eigenvalue routine and projector verification.

mod eig;
mod factor;
mod nullspace;
mod projector;

pub use eig::eig_general;
pub use factor::{factor_spd, SpdFactor};
pub use nullspace::{nullspace, range_basis, NullBasis};
pub use projector::{verify_projector, Projector, ProjectorReport};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type DenseMatrix = DMatrix<f64>;
pub type DenseVector = DVector<f64>;

/// Default relative singular-value cutoff for rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Builds a matrix from row-major entries, rejecting wrong lengths and
/// non-finite values.
pub fn from_row_major(rows: usize, cols: usize, entries: &[f64]) -> Result<DenseMatrix> {
    if entries.len() != rows * cols {
        return Err(Error::DimensionMismatch(format!(
            "{} entries for a {rows}x{cols} matrix",
            entries.len()
        )));
    }
    let m = DenseMatrix::from_row_slice(rows, cols, entries);
    ensure_finite(&m)?;
    Ok(m)
}

pub fn ensure_finite(m: &DenseMatrix) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// `‖M − Mᵀ‖_F`; `+∞` for non-square input.
pub fn asymmetry(m: &DenseMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    (m - m.transpose()).norm()
}

pub fn symmetrize(m: &DenseMatrix) -> DenseMatrix {
    (m + m.transpose()) * 0.5
}

/// Singular values in descending order. Empty matrices have none.
pub fn singular_values(m: &DenseMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Spectral norm.
pub fn norm2(m: &DenseMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// 2-norm condition number, `+∞` when the matrix is (numerically) singular.
pub fn cond2(m: &DenseMatrix) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

/// Number of singular values above `tol · σ_max`.
pub fn rank(m: &DenseMatrix, tol: f64) -> usize {
    let s = singular_values(m);
    let Some(&smax) = s.first() else { return 0 };
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > tol * smax).count()
}

/// Dense inverse via partial-pivot LU.
pub fn inverse(m: &DenseMatrix) -> Result<DenseMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "cannot invert a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 {
        return Ok(DenseMatrix::zeros(0, 0));
    }
    let inv = m.clone().lu().try_inverse().ok_or(Error::Singular)?;
    ensure_finite(&inv).map_err(|_| Error::Singular)?;
    Ok(inv)
}

/// Solves `M X = RHS` with partial-pivot LU.
pub fn solve_lu(m: &DenseMatrix, rhs: &DenseMatrix) -> Result<DenseMatrix> {
    if m.nrows() != rhs.nrows() || !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "solve with {}x{} matrix and {} right-hand-side rows",
            m.nrows(),
            m.ncols(),
            rhs.nrows()
        )));
    }
    if m.nrows() == 0 {
        return Ok(DenseMatrix::zeros(0, rhs.ncols()));
    }
    let x = m.clone().lu().solve(rhs).ok_or(Error::Singular)?;
    ensure_finite(&x).map_err(|_| Error::Singular)?;
    Ok(x)
}

/// Stacks matrices with equal column counts on top of each other.
pub fn vstack(parts: &[&DenseMatrix]) -> DenseMatrix {
    let cols = parts.first().map_or(0, |p| p.ncols());
    let rows = parts.iter().map(|p| p.nrows()).sum();
    let mut out = DenseMatrix::zeros(rows, cols);
    let mut r = 0;
    for p in parts {
        assert_eq!(p.ncols(), cols, "vstack: column mismatch");
        out.view_mut((r, 0), (p.nrows(), cols)).copy_from(*p);
        r += p.nrows();
    }
    out
}

/// Assembles a square block grid. `grid[i][j]` must be `sizes[i] × sizes[j]`.
pub fn assemble_grid(grid: &[Vec<DenseMatrix>], sizes: &[usize]) -> DenseMatrix {
    let total: usize = sizes.iter().sum();
    let mut out = DenseMatrix::zeros(total, total);
    let offsets = block_offsets(sizes);
    for (i, row) in grid.iter().enumerate() {
        for (j, blk) in row.iter().enumerate() {
            assert_eq!(blk.shape(), (sizes[i], sizes[j]), "block ({i},{j}) has wrong shape");
            out.view_mut((offsets[i], offsets[j]), (sizes[i], sizes[j]))
                .copy_from(blk);
        }
    }
    out
}

/// Extracts block `(i, j)` of a matrix partitioned by `sizes`.
pub fn block(m: &DenseMatrix, sizes: &[usize], i: usize, j: usize) -> DenseMatrix {
    let offsets = block_offsets(sizes);
    m.view((offsets[i], offsets[j]), (sizes[i], sizes[j])).into_owned()
}

pub fn block_diag(blocks: &[&DenseMatrix]) -> DenseMatrix {
    let sizes: Vec<usize> = blocks.iter().map(|b| b.nrows()).collect();
    let grid: Vec<Vec<DenseMatrix>> = (0..blocks.len())
        .map(|i| {
            (0..blocks.len())
                .map(|j| {
                    if i == j {
                        blocks[i].clone()
                    } else {
                        DenseMatrix::zeros(sizes[i], sizes[j])
                    }
                })
                .collect()
        })
        .collect();
    assemble_grid(&grid, &sizes)
}

pub(crate) fn block_offsets(sizes: &[usize]) -> Vec<usize> {
    let mut acc = 0;
    sizes
        .iter()
        .map(|s| {
            let o = acc;
            acc += s;
            o
        })
        .collect()
}

/// Relative Frobenius distance `‖X − Y‖_F / max(‖Y‖_F, tiny)`.
pub fn rel_diff(x: &DenseMatrix, y: &DenseMatrix) -> f64 {
    let denom = y.norm().max(f64::MIN_POSITIVE);
    (x - y).norm() / denom
}
