mod common;

use common::*;
use nalgebra::DMatrix;
use saddleprec::dense::{eig_general, nullspace, DEFAULT_RANK_TOL};
use saddleprec::precond::{build_p2d, build_p3d_scaled, WeightKind, WeightMatrix};
use saddleprec::problem::{assemble_k, generate, GenerateOptions};
use saddleprec::spectrum::{eigenvector_families_p2d, preconditioned_spectrum, SpectrumOptions};
use saddleprec::{inverse, Regime};

#[test]
fn jacobi_oracle_on_known_spectra() {
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, -1.0, 2.0]));
    assert_eq!(jacobi_eigenvalues(&d), vec![-1.0, 2.0, 3.0]);
    // [[2, 1], [1, 2]] has eigenvalues 1 and 3
    let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
    let e = jacobi_eigenvalues(&m);
    assert!((e[0] - 1.0).abs() < 1e-15 && (e[1] - 3.0).abs() < 1e-15);
    let mut r = rng(1);
    let s = random_spd(12, &mut r);
    let e = jacobi_eigenvalues(&s);
    assert!((e.iter().sum::<f64>() - s.trace()).abs() < 1e-12);
    assert!(e[0] > 0.0);
}

#[test]
fn eigensolver_matches_jacobi_on_symmetric_matrices() {
    for seed in 0..10 {
        let mut r = rng(seed);
        let g = uniform(25, 25, &mut r);
        let s = &g + g.transpose();
        let want = jacobi_eigenvalues(&s);
        let mut got: Vec<f64> = eig_general(&s)
            .unwrap()
            .iter()
            .map(|z| {
                assert!(z.im.abs() < 1e-10);
                z.re
            })
            .collect();
        got.sort_by(f64::total_cmp);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-11 * s.norm(), "{a} vs {b}");
        }
    }
}

#[test]
fn p2d_spectrum_with_general_weights_matches_oracle() {
    for seed in 0..5 {
        let p = generate(30, 0, 6, Regime::MaxRankDeficient, seed, &GenerateOptions::default()).unwrap();
        let mut r = rng(seed);
        let wb = WeightMatrix::new(WeightKind::WB, random_spd(6, &mut r)).unwrap();
        let pre = build_p2d(&p, &wb).unwrap();
        let k = assemble_k(&p);
        let eigs = pencil_eigenvalues(&k, &pre.explicit().unwrap());
        assert_eq!(counts_near(&eigs, &[-1.0, 1.0], 1e-8), vec![6, 30]);
        let rep = preconditioned_spectrum(&k, &pre, &SpectrumOptions::default()).unwrap();
        assert_eq!(rep.verdict.as_str(), "pass");
    }
}

#[test]
fn rescaled_p3d_clusters_match_oracle() {
    for seed in 0..5 {
        let p = generate(30, 4, 3, Regime::MinimallyIndependent, seed, &GenerateOptions::default()).unwrap();
        let w = WeightMatrix::identity(WeightKind::W, 3);
        let k = assemble_k(&p);
        for s in [0.25, 1.0, 2.0] {
            let pre = build_p3d_scaled(&p, &w, s).unwrap();
            let rep = preconditioned_spectrum(&k, &pre, &SpectrumOptions::default()).unwrap();
            let oracle = pencil_eigenvalues(&k, &pre.explicit().unwrap());
            let centers: Vec<f64> = rep.clusters.iter().map(|c| c.center.re).collect();
            let counts = counts_near(&oracle, &centers, 1e-6);
            let lib: Vec<usize> = rep.clusters.iter().map(|c| c.count).collect();
            assert_eq!(counts, lib, "s = {s}");
            assert_eq!(rep.verdict.as_str(), "unpredicted");
        }
    }
}

#[test]
fn direct_inverse_matches_lu_oracle() {
    let p = generate(25, 3, 4, Regime::General, 4, &GenerateOptions::default()).unwrap();
    let direct = inverse::direct_inverse(&p).unwrap().assemble();
    let oracle = lu_inverse(&assemble_k(&p));
    assert!((direct - &oracle).norm() <= 1e-12 * oracle.norm());
}

#[test]
fn p2d_eigenvector_families() {
    for seed in 0..5 {
        let p = generate(40, 0, 12, Regime::MaxRankDeficient, seed, &GenerateOptions::default()).unwrap();
        let mut r = rng(seed);
        let wb = WeightMatrix::new(WeightKind::WB, random_spd(12, &mut r)).unwrap();
        let rep = eigenvector_families_p2d(&p, &wb, seed, DEFAULT_RANK_TOL).unwrap();
        assert!(rep.passed, "{:?}", rep.checks);
        let minus = rep.checks.iter().filter(|c| c.lambda == -1.0 && !c.control).count();
        assert_eq!(minus, nullspace(&p.a, DEFAULT_RANK_TOL).dim());
        let control = rep.checks.iter().find(|c| c.control).unwrap();
        assert!(control.residual > 1e-6);
    }
}
