//! Spectra of preconditioned operators and verdicts against the predicted
//! eigenvalues.
//!
//! `P⁻¹K` is assembled densely, its eigenvalues are grouped into clusters
//! (single linkage at `cluster_tol · ρ`, `ρ` the spectral radius) and each
//! predicted `(value, multiplicity)` must be matched by a cluster with exactly
//! that many members. The geometric multiplicity `dim ker(P⁻¹K − λI)` is
//! checked as well.

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::dense::{self, eig_general, nullspace, DenseMatrix, DenseVector};
use crate::error::{Error, Result};
use crate::fmt::{ser_complex, ser_complex_vec, ser_f64, Sig17};
use crate::precond::{build_p3d_scaled, PrecondTag, Preconditioner, WeightMatrix};
use crate::problem::{assemble_k, SaddleProblem};

/// `(1 + √5) / 2`.
pub const GOLDEN: f64 = 1.618_033_988_749_895;

#[derive(Clone, Copy, Debug)]
pub struct SpectrumOptions {
    /// Cluster and matching tolerance relative to the spectral radius.
    pub cluster_tol: f64,
    /// Relative singular-value cutoff for geometric multiplicities.
    pub rank_tol: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            cluster_tol: 1e-6,
            rank_tol: dense::DEFAULT_RANK_TOL,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Cluster {
    #[serde(serialize_with = "ser_complex")]
    pub center: Complex64,
    #[serde(serialize_with = "ser_f64")]
    pub radius: f64,
    pub count: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Prediction {
    #[serde(serialize_with = "ser_f64")]
    pub value: f64,
    pub mult: usize,
}

/// Outcome of one prediction.
#[derive(Clone, Debug, Serialize)]
pub struct PredictionCheck {
    #[serde(serialize_with = "ser_f64")]
    pub value: f64,
    pub mult: usize,
    /// Members of the matching cluster, 0 if none matched.
    pub cluster_count: usize,
    /// `dim ker(P⁻¹K − value·I)` at the rank tolerance.
    pub geometric: usize,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The preconditioner is not ideal for this problem; nothing asserted.
    NotIdeal,
    /// No prediction exists (identity, rescaled `P3D`).
    Unpredicted,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::NotIdeal => "not-ideal",
            Verdict::Unpredicted => "unpredicted",
        }
    }

    /// Only an explicit failure counts against a run.
    pub fn is_failure(self) -> bool {
        self == Verdict::Fail
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub preconditioner: PrecondTag,
    #[serde(rename = "eigs", serialize_with = "ser_complex_vec")]
    pub eigenvalues: Vec<Complex64>,
    pub clusters: Vec<Cluster>,
    pub predicted: Vec<Prediction>,
    pub checks: Vec<PredictionCheck>,
    pub verdict: Verdict,
    /// `max |Im λ| / ρ`.
    #[serde(serialize_with = "ser_f64")]
    pub residual_max_imag: f64,
    #[serde(serialize_with = "ser_f64")]
    pub spectral_radius: f64,
}

impl SpectrumReport {
    pub fn cluster_total(&self) -> usize {
        self.clusters.iter().map(|c| c.count).sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Predicted eigenvalues of `P⁻¹K`, `None` when the preconditioner carries no
/// guarantee. Zero multiplicities are dropped.
pub fn predictions(p: &Preconditioner) -> Option<Vec<Prediction>> {
    if p.is_non_ideal() {
        return None;
    }
    let s = p.sizes();
    let table = match p.tag() {
        PrecondTag::P2D => vec![(1.0, s[0]), (-1.0, s[1])],
        PrecondTag::P3D => {
            if p.schur_scale() != Some(0.5) && s[1] > 0 {
                return None;
            }
            let (n, m1, m2) = (s[0], s[1], s[2]);
            vec![(-1.0, m1 + m2), (1.0, n - m1), (2.0, m1)]
        }
        PrecondTag::P3T => {
            let (n, m1, m2) = (s[0], s[1], s[2]);
            vec![(1.0, n - m1 + m2), (GOLDEN, m1), (1.0 - GOLDEN, m1)]
        }
        PrecondTag::Identity => return None,
    };
    Some(
        table
            .into_iter()
            .filter(|&(_, mult)| mult > 0)
            .map(|(value, mult)| Prediction { value, mult })
            .collect(),
    )
}

/// Single-linkage clusters of `eigs` at absolute distance `tol`, ordered by
/// center (real part, then imaginary part).
pub fn cluster(eigs: &[Complex64], tol: f64) -> Vec<Cluster> {
    let n = eigs.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (eigs[i] - eigs[j]).norm() <= tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(eigs[i]);
    }
    let mut clusters: Vec<Cluster> = groups
        .into_iter()
        .map(|g| {
            let center = g.iter().sum::<Complex64>() / g.len() as f64;
            let radius = g.iter().map(|z| (z - center).norm()).fold(0.0, f64::max);
            Cluster {
                center,
                radius,
                count: g.len(),
            }
        })
        .collect();
    clusters.sort_by(|a, b| {
        a.center
            .re
            .total_cmp(&b.center.re)
            .then(a.center.im.total_cmp(&b.center.im))
    });
    clusters
}

/// `dim ker(M − λI)`: singular values of `M − λI` at or below
/// `rank_tol · max(‖M‖₂, |λ|)`.
pub fn geometric_multiplicity(m: &DenseMatrix, lambda: f64, rank_tol: f64) -> usize {
    let dim = m.nrows();
    let cutoff = rank_tol * dense::norm2(m).max(lambda.abs());
    let shifted = m - DenseMatrix::identity(dim, dim) * lambda;
    dense::singular_values(&shifted)
        .iter()
        .filter(|&&s| s <= cutoff)
        .count()
}

/// Eigenvalues of `M` sorted by real part, then imaginary part.
fn sorted_eigs(m: &DenseMatrix) -> Result<Vec<Complex64>> {
    let mut e = eig_general(m)?;
    e.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(e)
}

fn spectral_radius(eigs: &[Complex64]) -> f64 {
    eigs.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Spectrum of `P⁻¹K` and its verdict against [`predictions`].
pub fn preconditioned_spectrum(
    k: &DenseMatrix,
    p: &Preconditioner,
    opts: &SpectrumOptions,
) -> Result<SpectrumReport> {
    if k.shape() != (p.dim(), p.dim()) {
        return Err(Error::DimensionMismatch(format!(
            "K is {:?}, preconditioner has dimension {}",
            k.shape(),
            p.dim()
        )));
    }
    let m = p.apply_inverse_mat(k);
    let eigenvalues = sorted_eigs(&m)?;
    let rho = spectral_radius(&eigenvalues);
    let scale = if rho > 0.0 { rho } else { 1.0 };
    let clusters = cluster(&eigenvalues, opts.cluster_tol * scale);
    let residual_max_imag = eigenvalues.iter().map(|z| z.im.abs()).fold(0.0, f64::max) / scale;

    let (predicted, checks, verdict) = match predictions(p) {
        None if p.is_non_ideal() => (Vec::new(), Vec::new(), Verdict::NotIdeal),
        None => (Vec::new(), Vec::new(), Verdict::Unpredicted),
        Some(pred) => {
            let checks: Vec<PredictionCheck> = pred
                .iter()
                .map(|pr| {
                    let target = Complex64::new(pr.value, 0.0);
                    let cluster_count = clusters
                        .iter()
                        .find(|c| (c.center - target).norm() <= opts.cluster_tol * scale)
                        .map_or(0, |c| c.count);
                    let geometric = geometric_multiplicity(&m, pr.value, opts.rank_tol);
                    PredictionCheck {
                        value: pr.value,
                        mult: pr.mult,
                        cluster_count,
                        geometric,
                        pass: cluster_count == pr.mult && geometric == pr.mult,
                    }
                })
                .collect();
            let all = checks.iter().all(|c| c.pass)
                && clusters.len() == pred.len()
                && clusters.iter().map(|c| c.count).sum::<usize>() == m.nrows();
            (pred, checks, if all { Verdict::Pass } else { Verdict::Fail })
        }
    };

    Ok(SpectrumReport {
        preconditioner: p.tag(),
        eigenvalues,
        clusters,
        predicted,
        checks,
        verdict,
        residual_max_imag,
        spectral_radius: rho,
    })
}

/// Assembles `K` for `problem` and calls [`preconditioned_spectrum`].
pub fn problem_spectrum(
    problem: &SaddleProblem,
    p: &Preconditioner,
    opts: &SpectrumOptions,
) -> Result<SpectrumReport> {
    preconditioned_spectrum(&assemble_k(problem), p, opts)
}

/// One eigenvector test `K v = λ P2D v` with `v = [x; ±W_B⁻¹ B x]`.
#[derive(Clone, Debug, Serialize)]
pub struct FamilyCheck {
    pub sample: String,
    #[serde(serialize_with = "ser_f64")]
    pub lambda: f64,
    /// In-family samples must pass; controls are expected to fail.
    pub control: bool,
    #[serde(serialize_with = "ser_f64")]
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyReport {
    pub checks: Vec<FamilyCheck>,
    pub passed: bool,
}

pub const FAMILY_TOL: f64 = 1e-9;

/// `‖K v − λ P2D v‖ / (‖K‖_F ‖v‖)` for `v = [x; sign · W_B⁻¹ B x]`,
/// `λ = sign`.
pub fn family_residual(problem: &SaddleProblem, wb: &WeightMatrix, x: &DenseVector, sign: f64) -> Result<f64> {
    let n = problem.n();
    let b = problem.b();
    if x.len() != n || wb.size() != b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "x has length {}, W_B is {}x{}, B is {:?}",
            x.len(),
            wb.size(),
            wb.size(),
            b.shape()
        )));
    }
    let winv = dense::inverse(&wb.value)?;
    let y = &winv * (&b * x) * sign;
    let mut v = DenseVector::zeros(n + b.nrows());
    v.rows_mut(0, n).copy_from(x);
    v.rows_mut(n, b.nrows()).copy_from(&y);

    let k = assemble_k(problem);
    let aug = &problem.a + b.transpose() * &winv * &b;
    let p = dense::block_diag(&[&aug, &wb.value]);
    let r = &k * &v - &p * &v * sign;
    Ok(r.norm() / (k.norm() * v.norm()))
}

/// Checks both eigenvector families of `P2D⁻¹K` on a maximally rank
/// deficient problem: `λ = 1` on `e₁` and a random `x`, `λ = −1` on each
/// kernel vector of `A`, plus a random `x ∉ ker(A)` in the `λ = −1` family as
/// a negative control.
pub fn eigenvector_families_p2d(
    problem: &SaddleProblem,
    wb: &WeightMatrix,
    seed: u64,
    rank_tol: f64,
) -> Result<FamilyReport> {
    if problem.m1() != 0 {
        return Err(Error::InvalidConfig(
            "eigenvector families need a maximally rank deficient problem (m1 = 0)".into(),
        ));
    }
    let n = problem.n();
    let mut state = seed ^ 0x9e37_79b9_7f4a_7c15;
    let random = DenseVector::from_fn(n, |_, _| {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    });
    let mut checks = Vec::new();
    let mut push = |sample: String, x: &DenseVector, sign: f64, control: bool| -> Result<()> {
        checks.push(FamilyCheck {
            sample,
            lambda: sign,
            control,
            residual: family_residual(problem, wb, x, sign)?,
        });
        Ok(())
    };
    let mut e1 = DenseVector::zeros(n);
    e1[0] = 1.0;
    push("e1".into(), &e1, 1.0, false)?;
    push("random".into(), &random, 1.0, false)?;
    let za = nullspace(&problem.a, rank_tol);
    for j in 0..za.dim() {
        push(format!("z_a[{j}]"), &za.basis.column(j).into_owned(), -1.0, false)?;
    }
    // strip the kernel component so the control is certainly outside ker(A)
    let outside = &random - &za.basis * (za.basis.transpose() * &random);
    push("random-outside-kernel".into(), &outside, -1.0, true)?;

    let passed = checks
        .iter()
        .all(|c| if c.control { c.residual > 1e3 * FAMILY_TOL } else { c.residual <= FAMILY_TOL });
    Ok(FamilyReport { checks, passed })
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingPoint {
    #[serde(serialize_with = "ser_f64")]
    pub scale: f64,
    pub clusters: usize,
    pub centers: Vec<[Sig17; 2]>,
}

/// Number of eigenvalue clusters of `P3D(s)⁻¹K` for each scaling `s` of the
/// `S_B` block.
pub fn scaling_sweep_p3d(
    problem: &SaddleProblem,
    w: &WeightMatrix,
    scalings: &[f64],
    opts: &SpectrumOptions,
) -> Result<Vec<ScalingPoint>> {
    let k = assemble_k(problem);
    scalings
        .iter()
        .map(|&s| {
            let p = build_p3d_scaled(problem, w, s)?;
            let rep = preconditioned_spectrum(&k, &p, opts)?;
            Ok(ScalingPoint {
                scale: s,
                clusters: rep.clusters.len(),
                centers: rep
                    .clusters
                    .iter()
                    .map(|c| [Sig17(c.center.re), Sig17(c.center.im)])
                    .collect(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::DEFAULT_RANK_TOL;
    use crate::precond::{build_default, WeightKind};
    use crate::problem::{generate, GenerateOptions, Regime};

    fn gen(n: usize, m1: usize, m2: usize, regime: Regime, seed: u64) -> SaddleProblem {
        generate(n, m1, m2, regime, seed, &GenerateOptions::default()).unwrap()
    }

    fn counts(rep: &SpectrumReport) -> Vec<(f64, usize)> {
        rep.clusters.iter().map(|c| (c.center.re, c.count)).collect()
    }

    #[test]
    fn clustering_groups_chains() {
        let z = |re: f64| Complex64::new(re, 0.0);
        let c = cluster(&[z(0.0), z(1.0), z(0.5e-6), z(1e-6), z(1.0 + 2e-6)], 0.6e-6);
        assert_eq!(c.len(), 3);
        assert_eq!(c[0].count, 3);
        assert!((c[0].center.re - 0.5e-6).abs() < 1e-15);
        assert!((c[0].radius - 0.5e-6).abs() < 1e-15);
        assert!(cluster(&[], 1.0).is_empty());
    }

    #[test]
    fn geometric_multiplicity_of_jordan_block() {
        let j = DenseMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(geometric_multiplicity(&j, 1.0, 1e-10), 2);
        assert_eq!(geometric_multiplicity(&j, 2.0, 1e-10), 0);
    }

    #[test]
    fn p2d_max_rd() {
        let p = gen(40, 0, 12, Regime::MaxRankDeficient, 1);
        let rep = problem_spectrum(&p, &build_default(&p, PrecondTag::P2D, DEFAULT_RANK_TOL).unwrap(),
            &SpectrumOptions::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass, "{:?}", rep.checks);
        assert_eq!(counts(&rep).iter().map(|c| c.1).collect::<Vec<_>>(), vec![12, 40]);
        assert!(rep.residual_max_imag <= 1e-8);
    }

    #[test]
    fn p3d_min_indep() {
        let p = gen(40, 6, 4, Regime::MinimallyIndependent, 2);
        let rep = problem_spectrum(&p, &build_default(&p, PrecondTag::P3D, DEFAULT_RANK_TOL).unwrap(),
            &SpectrumOptions::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass, "{:?}", rep.checks);
        assert_eq!(counts(&rep).iter().map(|c| c.1).collect::<Vec<_>>(), vec![10, 34, 6]);
        assert!(rep.residual_max_imag <= 1e-8);
    }

    #[test]
    fn p3t_general() {
        let p = gen(40, 6, 4, Regime::General, 3);
        let rep = problem_spectrum(&p, &build_default(&p, PrecondTag::P3T, DEFAULT_RANK_TOL).unwrap(),
            &SpectrumOptions::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass, "{:?}", rep.checks);
        let c = counts(&rep);
        assert_eq!(c.iter().map(|c| c.1).collect::<Vec<_>>(), vec![6, 38, 6]);
        assert!((c[0].0 - (1.0 - GOLDEN)).abs() < 1e-9);
        assert!((c[2].0 - GOLDEN).abs() < 1e-9);
    }

    #[test]
    fn p3t_without_b1_is_a_single_cluster() {
        let p = gen(20, 0, 5, Regime::MaxRankDeficient, 4);
        let rep = problem_spectrum(&p, &build_default(&p, PrecondTag::P3T, DEFAULT_RANK_TOL).unwrap(),
            &SpectrumOptions::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        assert_eq!(rep.clusters.len(), 1);
        assert_eq!(rep.clusters[0].count, 25);
    }

    #[test]
    fn p2d_with_b1_is_not_ideal() {
        let p = gen(30, 4, 3, Regime::MinimallyIndependent, 5);
        let rep = problem_spectrum(&p, &build_default(&p, PrecondTag::P2D, DEFAULT_RANK_TOL).unwrap(),
            &SpectrumOptions::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::NotIdeal);
        assert!(rep.predicted.is_empty());
        assert_eq!(rep.cluster_total(), 37);
        assert!(rep.clusters.len() > 2);
    }

    #[test]
    fn wrong_prediction_fails() {
        let p = gen(20, 0, 4, Regime::MaxRankDeficient, 6);
        let id = Preconditioner::identity(p.dim());
        let rep = problem_spectrum(&p, &id, &SpectrumOptions::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Unpredicted);
        // cluster tolerance below the eigenvalue error splits the clusters
        let pre = build_default(&p, PrecondTag::P2D, DEFAULT_RANK_TOL).unwrap();
        let opts = SpectrumOptions { cluster_tol: 1e-300, ..Default::default() };
        let rep = problem_spectrum(&p, &pre, &opts).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);
    }

    #[test]
    fn families() {
        let p = gen(30, 0, 6, Regime::MaxRankDeficient, 7);
        let wb = WeightMatrix::diagonal(WeightKind::WB, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let rep = eigenvector_families_p2d(&p, &wb, 1, DEFAULT_RANK_TOL).unwrap();
        assert!(rep.passed, "{:?}", rep.checks);
        assert_eq!(rep.checks.len(), 2 + 6 + 1);
        let control = rep.checks.last().unwrap();
        assert!(control.control && control.residual > 1e-3);
    }

    #[test]
    fn families_need_max_rd() {
        let p = gen(30, 2, 3, Regime::General, 7);
        let wb = WeightMatrix::identity(WeightKind::WB, 5);
        assert!(eigenvector_families_p2d(&p, &wb, 1, DEFAULT_RANK_TOL).is_err());
    }

    #[test]
    fn sweep_counts() {
        let p = gen(30, 4, 3, Regime::MinimallyIndependent, 8);
        let w = WeightMatrix::identity(WeightKind::W, 3);
        let pts = scaling_sweep_p3d(&p, &w, &[0.25, 0.5, 1.0, 2.0], &SpectrumOptions::default()).unwrap();
        let c: Vec<usize> = pts.iter().map(|p| p.clusters).collect();
        assert_eq!(c, vec![4, 3, 4, 4]);
    }

    #[test]
    fn sweep_without_b1_has_two_clusters() {
        let p = gen(20, 0, 4, Regime::MaxRankDeficient, 9);
        let w = WeightMatrix::identity(WeightKind::W, 4);
        let pts = scaling_sweep_p3d(&p, &w, &[0.25, 0.5, 2.0], &SpectrumOptions::default()).unwrap();
        assert!(pts.iter().all(|p| p.clusters == 2));
    }

    #[test]
    fn json_layout() {
        let p = gen(10, 0, 2, Regime::MaxRankDeficient, 10);
        let rep = problem_spectrum(&p, &build_default(&p, PrecondTag::P2D, DEFAULT_RANK_TOL).unwrap(),
            &SpectrumOptions::default()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&rep.to_json().unwrap()).unwrap();
        assert_eq!(v["eigs"].as_array().unwrap().len(), 12);
        assert_eq!(v["eigs"][0].as_array().unwrap().len(), 2);
        assert_eq!(v["verdict"], "pass");
        assert_eq!(v["predicted"][1]["mult"], 2);
        assert_eq!(v["clusters"][1]["count"], 10);
    }
}
