#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut a = (m + m.transpose()) * 0.5;
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off.sqrt() <= 1e-15 * a.norm() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() < f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut e: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    e.sort_by(f64::total_cmp);
    e
}

/// Eigenvalues of `P⁻¹K` for symmetric `K` and SPD `P`, from the symmetric
/// matrix `L⁻¹ K L⁻ᵀ` with `P = L Lᵀ`.
pub fn pencil_eigenvalues(k: &DMatrix<f64>, p: &DMatrix<f64>) -> Vec<f64> {
    let l = p.clone().cholesky().expect("P is SPD").l();
    let linv = l.try_inverse().expect("L invertible");
    jacobi_eigenvalues(&(&linv * k * linv.transpose()))
}

/// Counts of `eigs` within `tol` of each target.
pub fn counts_near(eigs: &[f64], targets: &[f64], tol: f64) -> Vec<usize> {
    targets
        .iter()
        .map(|t| eigs.iter().filter(|e| (*e - t).abs() <= tol).count())
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ 0x5eed)
}

pub fn uniform(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

pub fn random_spd(size: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = uniform(size, size, rng);
    &g * g.transpose() + DMatrix::identity(size, size) * (size as f64 * 0.1)
}

/// Nonsymmetric, comfortably invertible: eigenvalues in a disk around 2.
pub fn random_nonsymmetric(size: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    uniform(size, size, rng) / (size as f64).sqrt() + DMatrix::identity(size, size) * 2.0
}

pub fn lu_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.clone().lu().try_inverse().expect("invertible")
}

pub fn cond2(m: &DMatrix<f64>) -> f64 {
    let s = m.clone().singular_values();
    s.max() / s.min()
}
