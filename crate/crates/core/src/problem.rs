//! Saddle point problems with controlled rank structure.
//!
//! [`generate`] manufactures `(A, B1, B2)` so that `A` is symmetric positive
//! semidefinite with nullity exactly `m2`, `B2 Z_A` is invertible by
//! construction, and `B1` is placed according to the requested [`Regime`].
//! [`split_b`] recovers such a partition from an unsplit `B`.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dense::{self, nullspace, singular_values, DenseMatrix, DenseVector};
use crate::error::{Error, Result};
use crate::mtx;

/// Structural regime of a problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// `nullity(A) = m`, so `m1 = 0`.
    #[serde(rename = "max-rd")]
    MaxRankDeficient,
    /// Rows of `B1` lie in `range(A)`.
    #[serde(rename = "min-indep")]
    MinimallyIndependent,
    /// `B1` unrestricted; only `[[A, B2ᵀ], [B2, 0]]` is required invertible.
    #[serde(rename = "general")]
    General,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::MaxRankDeficient => "max-rd",
            Regime::MinimallyIndependent => "min-indep",
            Regime::General => "general",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max-rd" => Ok(Regime::MaxRankDeficient),
            "min-indep" => Ok(Regime::MinimallyIndependent),
            "general" => Ok(Regime::General),
            other => Err(Error::InvalidConfig(format!("unknown regime {other:?}"))),
        }
    }
}

/// The blocks `A` (n×n), `B1` (m1×n), `B2` (m2×n) of
///
/// ```text
/// K = [ A   B1ᵀ  B2ᵀ ]
///     [ B1  0    0   ]
///     [ B2  0    0   ]
/// ```
#[derive(Clone, Debug)]
pub struct SaddleProblem {
    pub a: DenseMatrix,
    pub b1: DenseMatrix,
    pub b2: DenseMatrix,
    pub regime: Regime,
    pub seed: u64,
}

impl SaddleProblem {
    /// Wraps existing blocks after shape and finiteness checks. Structural
    /// invariants are not verified here; see [`SaddleProblem::check`].
    pub fn new(
        a: DenseMatrix,
        b1: DenseMatrix,
        b2: DenseMatrix,
        regime: Regime,
        seed: u64,
    ) -> Result<Self> {
        let n = a.nrows();
        if !a.is_square() || b1.ncols() != n || b2.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "A {:?}, B1 {:?}, B2 {:?}",
                a.shape(),
                b1.shape(),
                b2.shape()
            )));
        }
        if regime == Regime::MaxRankDeficient && b1.nrows() != 0 {
            return Err(Error::InvalidConfig(
                "max-rd problems must have m1 = 0".into(),
            ));
        }
        for m in [&a, &b1, &b2] {
            dense::ensure_finite(m)?;
        }
        Ok(SaddleProblem {
            a,
            b1,
            b2,
            regime,
            seed,
        })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn m1(&self) -> usize {
        self.b1.nrows()
    }

    pub fn m2(&self) -> usize {
        self.b2.nrows()
    }

    pub fn m(&self) -> usize {
        self.m1() + self.m2()
    }

    /// Dimension of `K`.
    pub fn dim(&self) -> usize {
        self.n() + self.m()
    }

    /// Block sizes `[n, m1, m2]`.
    pub fn sizes(&self) -> [usize; 3] {
        [self.n(), self.m1(), self.m2()]
    }

    /// `B = [B1; B2]`.
    pub fn b(&self) -> DenseMatrix {
        dense::vstack(&[&self.b1, &self.b2])
    }

    /// Evaluates every structural invariant at rank tolerance `tol`.
    pub fn check(&self, tol: f64) -> ProblemCheck {
        let a_norm = dense::norm2(&self.a).max(f64::MIN_POSITIVE);
        let a_min_eig = self
            .a
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let za = nullspace(&self.a, tol);
        let k = assemble_k(self);
        let sk = singular_values(&k);
        let sb = singular_values(&bordered(self));
        let rel_min = |s: &[f64]| match (s.first(), s.last()) {
            (Some(&hi), Some(&lo)) if hi > 0.0 => lo / hi,
            _ => 0.0,
        };
        let b1_norm = self.b1.norm();
        let b1_za = if b1_norm > 0.0 {
            (&self.b1 * &za.basis).norm() / b1_norm
        } else {
            0.0
        };
        ProblemCheck {
            symmetric_a: dense::asymmetry(&self.a) <= 1e-12 * self.a.norm().max(1.0),
            a_min_eig_rel: if a_min_eig.is_finite() { a_min_eig / a_norm } else { 0.0 },
            nullity_a: za.dim(),
            m2: self.m2(),
            k_sigma_min_rel: rel_min(&sk),
            bordered_sigma_min_rel: rel_min(&sb),
            b1_za_rel: b1_za,
            regime: self.regime,
            m1: self.m1(),
        }
    }
}

/// Numerical evaluation of the [`SaddleProblem`] invariants.
#[derive(Clone, Debug, Serialize)]
pub struct ProblemCheck {
    pub symmetric_a: bool,
    /// `λ_min(A) / ‖A‖₂`
    pub a_min_eig_rel: f64,
    pub nullity_a: usize,
    pub m2: usize,
    pub m1: usize,
    /// `σ_min(K) / σ_max(K)`
    pub k_sigma_min_rel: f64,
    /// `σ_min / σ_max` of `[[A, B2ᵀ], [B2, 0]]`
    pub bordered_sigma_min_rel: f64,
    /// `‖B1 Z_A‖_F / ‖B1‖_F`
    pub b1_za_rel: f64,
    pub regime: Regime,
}

impl ProblemCheck {
    pub fn satisfied(&self) -> bool {
        let regime_ok = match self.regime {
            Regime::MaxRankDeficient => self.m1 == 0,
            Regime::MinimallyIndependent => self.b1_za_rel <= 1e-10,
            Regime::General => true,
        };
        self.symmetric_a
            && self.a_min_eig_rel >= -1e-10
            && self.nullity_a == self.m2
            && self.k_sigma_min_rel > 1e-8
            && self.bordered_sigma_min_rel > 1e-8
            && regime_ok
    }
}

/// Knobs for [`generate`].
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GenerateOptions {
    /// Ratio between the largest and smallest nonzero eigenvalue of `A`.
    pub cond_a: f64,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        GenerateOptions { cond_a: 1e4 }
    }
}

const MAX_DRAWS: usize = 10;

fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    // fill row by row so the draw order does not depend on storage layout
    let mut m = DenseMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = rng.sample(StandardNormal);
        }
    }
    m
}

/// Haar-distributed orthogonal matrix from the QR factorization of a
/// Gaussian matrix, with the signs of `R`'s diagonal folded into `Q`.
fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    if n == 0 {
        return DenseMatrix::zeros(0, 0);
    }
    let qr = gaussian(n, n, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Draws a problem with `nullity(A) = m2` in the requested regime.
///
/// `A = Q diag(d, 0) Qᵀ` with `d` geometrically spaced over `[1, cond_a]`;
/// `B2 = R Z_Aᵀ + S (I − Z_A Z_Aᵀ)` with `R` invertible; `B1 = C A` for
/// [`Regime::MinimallyIndependent`] and Gaussian for [`Regime::General`].
/// Draws that fail the nonsingularity checks are repeated up to 10 times.
pub fn generate(
    n: usize,
    m1: usize,
    m2: usize,
    regime: Regime,
    seed: u64,
    opts: &GenerateOptions,
) -> Result<SaddleProblem> {
    if n == 0 {
        return Err(Error::InvalidConfig("n must be positive".into()));
    }
    if m1 + m2 > n {
        return Err(Error::InvalidConfig(format!(
            "m1 + m2 = {} exceeds n = {n}",
            m1 + m2
        )));
    }
    if regime == Regime::MaxRankDeficient && m1 != 0 {
        return Err(Error::InvalidConfig("max-rd requires m1 = 0".into()));
    }
    if !(opts.cond_a.is_finite() && opts.cond_a >= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "cond_a must be a finite value >= 1, got {}",
            opts.cond_a
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_DRAWS {
        let p = draw(n, m1, m2, regime, seed, opts, &mut rng);
        if p.check(dense::DEFAULT_RANK_TOL).satisfied() {
            return Ok(p);
        }
    }
    Err(Error::DegenerateDraw {
        attempts: MAX_DRAWS,
    })
}

fn draw(
    n: usize,
    m1: usize,
    m2: usize,
    regime: Regime,
    seed: u64,
    opts: &GenerateOptions,
    rng: &mut ChaCha8Rng,
) -> SaddleProblem {
    let r = n - m2;
    let q = random_orthogonal(n, rng);
    let qr = q.columns(0, r).into_owned();
    let za = q.columns(r, m2).into_owned();

    let d = DenseVector::from_fn(r, |i, _| {
        if r == 1 {
            1.0
        } else {
            opts.cond_a.powf(i as f64 / (r - 1) as f64)
        }
    });
    let scaled = DMatrix::from_fn(n, r, |i, j| qr[(i, j)] * d[j]);
    let a = dense::symmetrize(&(scaled * qr.transpose()));

    let rot = random_orthogonal(m2, rng);
    let stretch = DenseVector::from_fn(m2, |_, _| rng.random_range(1.0..2.0));
    let rmat = rot * DenseMatrix::from_diagonal(&stretch);
    let s = gaussian(m2, n, rng);
    let complement = DenseMatrix::identity(n, n) - &za * za.transpose();
    let b2 = rmat * za.transpose() + s * complement;

    let b1 = match regime {
        Regime::MaxRankDeficient => DenseMatrix::zeros(0, n),
        Regime::MinimallyIndependent => gaussian(m1, n, rng) * &a,
        Regime::General => gaussian(m1, n, rng),
    };

    SaddleProblem {
        a,
        b1,
        b2,
        regime,
        seed,
    }
}

/// Assembles the full `(n+m1+m2)²` saddle point matrix.
pub fn assemble_k(p: &SaddleProblem) -> DenseMatrix {
    let [n, m1, m2] = p.sizes();
    let dim = n + m1 + m2;
    let mut k = DenseMatrix::zeros(dim, dim);
    k.view_mut((0, 0), (n, n)).copy_from(&p.a);
    k.view_mut((n, 0), (m1, n)).copy_from(&p.b1);
    k.view_mut((0, n), (n, m1)).copy_from(&p.b1.transpose());
    k.view_mut((n + m1, 0), (m2, n)).copy_from(&p.b2);
    k.view_mut((0, n + m1), (n, m2)).copy_from(&p.b2.transpose());
    k
}

/// `[[A, B2ᵀ], [B2, 0]]`.
pub fn bordered(p: &SaddleProblem) -> DenseMatrix {
    let [n, _, m2] = p.sizes();
    let mut k = DenseMatrix::zeros(n + m2, n + m2);
    k.view_mut((0, 0), (n, n)).copy_from(&p.a);
    k.view_mut((n, 0), (m2, n)).copy_from(&p.b2);
    k.view_mut((0, n), (n, m2)).copy_from(&p.b2.transpose());
    k
}

/// Result of [`split_b`].
#[derive(Clone, Debug)]
pub struct Split {
    pub b1: DenseMatrix,
    pub b2: DenseMatrix,
    /// Row `i` of `[B1; B2]` is row `permutation[i]` of the input `B`.
    pub permutation: Vec<usize>,
}

/// Picks `nullity(A)` rows of `B` whose projections onto `ker(A)` are
/// linearly independent, by column-pivoted Gram–Schmidt on `Z_Aᵀ Bᵀ`.
///
/// Pivot rows become `B2` and the rest `B1`; both keep their original
/// relative order, so splitting an already split `[B1; B2]` is the identity.
pub fn split_b(a: &DenseMatrix, b: &DenseMatrix, tol: f64) -> Result<Split> {
    if !a.is_square() || b.ncols() != a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "A {:?} and B {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let za = nullspace(a, tol);
    let needed = za.dim();
    let m = b.nrows();
    let mut cols = za.basis.transpose() * b.transpose();
    let thresh = tol * b.norm().max(f64::MIN_POSITIVE);

    let mut chosen: Vec<usize> = Vec::with_capacity(needed);
    for k in 0..needed {
        let best = (0..m)
            .filter(|j| !chosen.contains(j))
            .map(|j| (j, cols.column(j).norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1));
        let Some((piv, norm)) = best.filter(|&(_, nrm)| nrm > thresh) else {
            return Err(Error::NotSplittable { found: k, needed });
        };
        chosen.push(piv);
        let q = cols.column(piv) / norm;
        for j in 0..m {
            if chosen.contains(&j) {
                continue;
            }
            // two passes keep the residual columns orthogonal to q
            for _ in 0..2 {
                let c = q.dot(&cols.column(j));
                cols.column_mut(j).axpy(-c, &q, 1.0);
            }
        }
    }

    chosen.sort_unstable();
    let rest: Vec<usize> = (0..m).filter(|j| !chosen.contains(j)).collect();
    let b1 = b.select_rows(rest.iter());
    let b2 = b.select_rows(chosen.iter());
    let permutation = rest.into_iter().chain(chosen).collect();
    Ok(Split { b1, b2, permutation })
}

/// Right-hand side `[f; g1; g2]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RhsVector {
    pub f: DenseVector,
    pub g1: DenseVector,
    pub g2: DenseVector,
}

impl RhsVector {
    /// Gaussian right-hand side drawn from a stream independent of the
    /// problem generator's.
    pub fn random(p: &SaddleProblem, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        let [n, m1, m2] = p.sizes();
        let mut draw = |len: usize| DenseVector::from_fn(len, |_, _| rng.sample(StandardNormal));
        RhsVector {
            f: draw(n),
            g1: draw(m1),
            g2: draw(m2),
        }
    }

    pub fn to_vector(&self) -> DenseVector {
        let mut v = DenseVector::zeros(self.f.len() + self.g1.len() + self.g2.len());
        v.rows_mut(0, self.f.len()).copy_from(&self.f);
        v.rows_mut(self.f.len(), self.g1.len()).copy_from(&self.g1);
        v.rows_mut(self.f.len() + self.g1.len(), self.g2.len())
            .copy_from(&self.g2);
        v
    }

    pub fn from_vector(sizes: [usize; 3], v: &DenseVector) -> Result<Self> {
        let [n, m1, m2] = sizes;
        if v.len() != n + m1 + m2 {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} for blocks {sizes:?}",
                v.len()
            )));
        }
        Ok(RhsVector {
            f: v.rows(0, n).into_owned(),
            g1: v.rows(n, m1).into_owned(),
            g2: v.rows(n + m1, m2).into_owned(),
        })
    }
}

/// Contents of `manifest.json` next to the block files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemManifest {
    pub n: usize,
    pub m1: usize,
    pub m2: usize,
    pub regime: Regime,
    pub seed: u64,
}

pub const MANIFEST_FILE: &str = "manifest.json";
pub const BLOCK_FILES: [&str; 3] = ["A.mtx", "B1.mtx", "B2.mtx"];

/// Writes `A.mtx`, `B1.mtx`, `B2.mtx` and `manifest.json` into `dir`.
pub fn save(p: &SaddleProblem, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    for (name, m) in BLOCK_FILES.iter().zip([&p.a, &p.b1, &p.b2]) {
        mtx::write_array_file(dir.join(name), m)?;
    }
    let manifest = ProblemManifest {
        n: p.n(),
        m1: p.m1(),
        m2: p.m2(),
        regime: p.regime,
        seed: p.seed,
    };
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    fs::write(dir.join(MANIFEST_FILE), json)?;
    Ok(())
}

/// Reads a problem written by [`save`].
pub fn load(dir: impl AsRef<Path>) -> Result<SaddleProblem> {
    let dir = dir.as_ref();
    let manifest: ProblemManifest =
        serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST_FILE))?)?;
    let a = mtx::read_file(dir.join(BLOCK_FILES[0]))?;
    let b1 = mtx::read_file(dir.join(BLOCK_FILES[1]))?;
    let b2 = mtx::read_file(dir.join(BLOCK_FILES[2]))?;
    let p = SaddleProblem::new(a, b1, b2, manifest.regime, manifest.seed)?;
    if p.sizes() != [manifest.n, manifest.m1, manifest.m2] {
        return Err(Error::DimensionMismatch(format!(
            "manifest says {:?}, files have {:?}",
            [manifest.n, manifest.m1, manifest.m2],
            p.sizes()
        )));
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::DEFAULT_RANK_TOL;

    fn gen(n: usize, m1: usize, m2: usize, regime: Regime, seed: u64) -> SaddleProblem {
        generate(n, m1, m2, regime, seed, &GenerateOptions::default()).unwrap()
    }

    #[test]
    fn smallest_instance() {
        let p = gen(1, 0, 1, Regime::MaxRankDeficient, 3);
        assert_eq!(p.a[(0, 0)], 0.0);
        let b = p.b2[(0, 0)];
        assert!(b.abs() > 0.5);
        let k = assemble_k(&p);
        assert_eq!(k, DenseMatrix::from_row_slice(2, 2, &[0.0, b, b, 0.0]));
    }

    #[test]
    fn min_indep_seed_seven() {
        let p = gen(4, 1, 1, Regime::MinimallyIndependent, 7);
        let za = nullspace(&p.a, DEFAULT_RANK_TOL);
        assert_eq!(za.dim(), 1);
        assert!((&p.b1 * &za.basis).norm() <= 1e-10 * p.b1.norm());
        assert!((&p.b2 * &za.basis)[(0, 0)].abs() > 1e-3);
        assert!(p.check(DEFAULT_RANK_TOL).satisfied());
    }

    #[test]
    fn general_seed_seven() {
        let p = gen(4, 1, 1, Regime::General, 7);
        let za = nullspace(&p.a, DEFAULT_RANK_TOL);
        assert!((&p.b1 * &za.basis).norm() > 1e-3);
        let s = singular_values(&assemble_k(&p));
        assert!(s.last().unwrap() / s[0] > 1e-8);
    }

    #[test]
    fn invalid_requests() {
        let o = GenerateOptions::default();
        assert!(matches!(
            generate(3, 2, 2, Regime::General, 0, &o),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            generate(5, 1, 2, Regime::MaxRankDeficient, 0, &o),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            generate(0, 0, 0, Regime::General, 0, &o),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn assembled_k_is_symmetric() {
        let p = gen(12, 3, 2, Regime::General, 11);
        let k = assemble_k(&p);
        assert_eq!(k, k.transpose());
        assert_eq!(k.nrows(), 17);
    }

    #[test]
    fn generation_is_deterministic() {
        let p = gen(10, 2, 3, Regime::MinimallyIndependent, 42);
        let q = gen(10, 2, 3, Regime::MinimallyIndependent, 42);
        assert_eq!(p.a, q.a);
        assert_eq!(p.b1, q.b1);
        assert_eq!(p.b2, q.b2);
        let r = gen(10, 2, 3, Regime::MinimallyIndependent, 43);
        assert_ne!(p.a, r.a);
    }

    #[test]
    fn split_coordinate_case() {
        let a = DenseMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let b = DenseMatrix::identity(2, 2);
        let s = split_b(&a, &b, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(s.b2, DenseMatrix::from_row_slice(1, 2, &[0.0, 1.0]));
        assert_eq!(s.b1, DenseMatrix::from_row_slice(1, 2, &[1.0, 0.0]));
        assert_eq!(s.permutation, vec![0, 1]);
    }

    #[test]
    fn split_rejects_row_in_range() {
        let a = DenseMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let b = DenseMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        assert!(matches!(
            split_b(&a, &b, DEFAULT_RANK_TOL),
            Err(Error::NotSplittable { found: 0, needed: 1 })
        ));
    }

    #[test]
    fn split_recovers_shuffled_min_indep() {
        let p = gen(20, 4, 3, Regime::MinimallyIndependent, 5);
        let b = p.b();
        let order = [5, 0, 6, 2, 1, 4, 3];
        let shuffled = b.select_rows(order.iter());
        let s = split_b(&p.a, &shuffled, DEFAULT_RANK_TOL).unwrap();
        let za = nullspace(&p.a, DEFAULT_RANK_TOL);
        assert_eq!(s.b2.nrows(), 3);
        assert!((&s.b1 * &za.basis).norm() <= 1e-10 * s.b1.norm());
        // the B2 rows of the generator sit at original indices 4, 5, 6
        let mut picked: Vec<usize> = s.permutation[4..].iter().map(|&i| order[i]).collect();
        picked.sort_unstable();
        assert_eq!(picked, vec![4, 5, 6]);
    }

    #[test]
    fn split_is_idempotent() {
        let p = gen(15, 3, 4, Regime::General, 9);
        let s = split_b(&p.a, &p.b(), DEFAULT_RANK_TOL).unwrap();
        let again = split_b(&p.a, &dense::vstack(&[&s.b1, &s.b2]), DEFAULT_RANK_TOL).unwrap();
        assert_eq!(again.permutation, (0..7).collect::<Vec<_>>());
        assert_eq!(again.b1, s.b1);
        assert_eq!(again.b2, s.b2);
    }

    #[test]
    fn rhs_layout() {
        let p = gen(6, 2, 1, Regime::General, 1);
        let r = RhsVector::random(&p, 4);
        let v = r.to_vector();
        assert_eq!(v.len(), 9);
        assert_eq!(RhsVector::from_vector(p.sizes(), &v).unwrap(), r);
        assert!(RhsVector::from_vector([1, 1, 1], &v).is_err());
    }

    #[test]
    fn save_load_round_trip() {
        let p = gen(8, 2, 2, Regime::MinimallyIndependent, 21);
        let dir = tempfile::tempdir().unwrap();
        save(&p, dir.path()).unwrap();
        let q = load(dir.path()).unwrap();
        assert_eq!(p.a, q.a);
        assert_eq!(p.b1, q.b1);
        assert_eq!(p.b2, q.b2);
        assert_eq!(q.regime, Regime::MinimallyIndependent);
        assert_eq!(q.seed, 21);
    }

    #[test]
    fn regime_names() {
        for r in [Regime::MaxRankDeficient, Regime::MinimallyIndependent, Regime::General] {
            assert_eq!(r.as_str().parse::<Regime>().unwrap(), r);
            assert_eq!(serde_json::to_string(&r).unwrap(), format!("\"{r}\""));
        }
        assert!("maxrd".parse::<Regime>().is_err());
    }
}
