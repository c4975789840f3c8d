use serde::Serialize;

use super::{rank, DenseMatrix};

/// A claimed projector with witnesses for its range and kernel.
#[derive(Clone, Debug)]
pub struct Projector {
    pub matrix: DenseMatrix,
    /// Columns that `matrix` should leave unchanged.
    pub range_witness: DenseMatrix,
    /// Columns that `matrix` should send to zero.
    pub kernel_witness: DenseMatrix,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProjectorReport {
    /// `‖P² − P‖_F / ‖P‖_F`
    pub idempotence: f64,
    pub rank: usize,
    /// `‖P R − R‖_F / ‖R‖_F`
    pub range_residual: f64,
    /// `‖P N‖_F / (‖P‖_F ‖N‖_F)`
    pub kernel_residual: f64,
    pub passed: bool,
}

pub fn verify_projector(p: &Projector, tol: f64) -> ProjectorReport {
    let m = &p.matrix;
    assert!(m.is_square(), "projector must be square");
    let pn = m.norm().max(f64::MIN_POSITIVE);
    let idempotence = (m * m - m).norm() / pn;

    let range_residual = if p.range_witness.ncols() == 0 {
        0.0
    } else {
        (m * &p.range_witness - &p.range_witness).norm() / p.range_witness.norm().max(f64::MIN_POSITIVE)
    };
    let kernel_residual = if p.kernel_witness.ncols() == 0 {
        0.0
    } else {
        (m * &p.kernel_witness).norm() / (pn * p.kernel_witness.norm().max(f64::MIN_POSITIVE))
    };

    ProjectorReport {
        idempotence,
        rank: rank(m, tol),
        range_residual,
        kernel_residual,
        passed: idempotence <= tol && range_residual <= tol && kernel_residual <= tol,
    }
}
