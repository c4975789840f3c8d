use nalgebra::SVD;

use super::DenseMatrix;

/// Orthonormal basis of `ker(M)` together with the matrix it annihilates.
#[derive(Clone, Debug)]
pub struct NullBasis {
    pub source: DenseMatrix,
    pub basis: DenseMatrix,
    /// Relative singular-value cutoff used to decide the kernel.
    pub tolerance: f64,
}

impl NullBasis {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// `‖M · basis‖_F`.
    pub fn residual(&self) -> f64 {
        (&self.source * &self.basis).norm()
    }

    /// Checks both basis invariants: annihilation within the cutoff and
    /// orthonormal columns within 1e-12.
    pub fn is_valid(&self) -> bool {
        let k = self.dim();
        let bound = self.tolerance * self.source.norm() * (k as f64).sqrt();
        let gram = self.basis.transpose() * &self.basis;
        let orth = (gram - DenseMatrix::identity(k, k)).norm();
        self.residual() <= bound.max(f64::MIN_POSITIVE) && orth <= 1e-12
    }
}

/// Full right-singular basis of `m` with descending singular values, padded
/// so that wide matrices still yield all `cols` right singular vectors.
fn full_right_svd(m: &DenseMatrix) -> (Vec<f64>, DenseMatrix) {
    let (r, c) = m.shape();
    let padded = if r < c {
        let mut p = DenseMatrix::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = SVD::new(padded, false, true);
    let v = svd.v_t.expect("requested V").transpose();
    let s: Vec<f64> = svd.singular_values.iter().copied().collect();
    // SVD::new sorts descending; keep the pairing explicit anyway.
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let s_sorted = order.iter().map(|&i| s[i]).collect();
    let v_sorted = v.select_columns(order.iter());
    (s_sorted, v_sorted)
}

/// Orthonormal kernel basis of `m`: right singular vectors whose singular
/// value is at most `tol · σ_max`. A zero matrix has the whole space as its
/// kernel; a full-rank one yields an empty (`cols × 0`) basis.
pub fn nullspace(m: &DenseMatrix, tol: f64) -> NullBasis {
    assert!(tol > 0.0, "nullspace tolerance must be positive");
    let c = m.ncols();
    if c == 0 {
        return NullBasis {
            source: m.clone(),
            basis: DenseMatrix::zeros(0, 0),
            tolerance: tol,
        };
    }
    let (s, v) = full_right_svd(m);
    let smax = s.first().copied().unwrap_or(0.0);
    let cutoff = tol * smax;
    let cols: Vec<usize> = (0..c).filter(|&i| s[i] <= cutoff).collect();
    NullBasis {
        source: m.clone(),
        basis: v.select_columns(cols.iter()),
        tolerance: tol,
    }
}

/// Orthonormal basis of `range(m)` from the left singular vectors above
/// `tol · σ_max`.
pub fn range_basis(m: &DenseMatrix, tol: f64) -> DenseMatrix {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return DenseMatrix::zeros(r, 0);
    }
    let svd = SVD::new(m.clone(), true, false);
    let u = svd.u.expect("requested U");
    let s = &svd.singular_values;
    let smax = s.iter().copied().fold(0.0, f64::max);
    let cols: Vec<usize> = (0..s.len()).filter(|&i| smax > 0.0 && s[i] > tol * smax).collect();
    u.select_columns(cols.iter())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::DEFAULT_RANK_TOL;

    #[test]
    fn zero_matrix_kernel_is_everything() {
        let nb = nullspace(&DenseMatrix::zeros(2, 2), DEFAULT_RANK_TOL);
        assert_eq!(nb.dim(), 2);
        let gram = nb.basis.transpose() * &nb.basis;
        assert!((gram - DenseMatrix::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn coordinate_kernel() {
        let m = DenseMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let nb = nullspace(&m, DEFAULT_RANK_TOL);
        assert_eq!(nb.dim(), 1);
        assert!(nb.basis[(0, 0)].abs() < 1e-15);
        assert!((nb.basis[(1, 0)].abs() - 1.0).abs() < 1e-15);
        assert!(nb.is_valid());
    }

    #[test]
    fn wide_matrix_kernel() {
        // one row in R^3 leaves a 2-dimensional kernel
        let m = DenseMatrix::from_row_slice(1, 3, &[1.0, 2.0, 2.0]);
        let nb = nullspace(&m, DEFAULT_RANK_TOL);
        assert_eq!(nb.dim(), 2);
        assert!(nb.residual() < 1e-14);
        assert!(nb.is_valid());
    }

    #[test]
    fn full_rank_yields_empty_basis() {
        let nb = nullspace(&DenseMatrix::identity(3, 3), DEFAULT_RANK_TOL);
        assert_eq!(nb.basis.shape(), (3, 0));
        assert!(nb.is_valid());
    }

    #[test]
    fn empty_row_matrix_kernel_is_identity() {
        let nb = nullspace(&DenseMatrix::zeros(0, 3), DEFAULT_RANK_TOL);
        assert_eq!(nb.dim(), 3);
    }

    #[test]
    fn range_of_rank_one() {
        let m = DenseMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let r = range_basis(&m, DEFAULT_RANK_TOL);
        assert_eq!(r.ncols(), 1);
        assert!((r[(0, 0)].abs() - 0.5f64.sqrt()).abs() < 1e-14);
    }
}
