//! Preconditioned MINRES and full GMRES with per-iteration residual logs.
//!
//! Both solvers start from `x = 0` and test convergence on the true
//! residual `‖b − K x‖ ≤ tol · ‖b‖` after every iteration.

use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dense::{DenseMatrix, DenseVector};
use crate::error::{Error, Result};
use crate::fmt::sig17;
use crate::precond::{PrecondTag, Preconditioner};

/// Anything that can multiply a vector.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &DenseVector) -> DenseVector;
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &DenseVector) -> DenseVector {
        self * x
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Minres,
    Gmres,
}

impl Solver {
    pub fn as_str(self) -> &'static str {
        match self {
            Solver::Minres => "minres",
            Solver::Gmres => "gmres",
        }
    }

    /// MINRES for SPD preconditioners, GMRES otherwise.
    pub fn for_preconditioner(p: &Preconditioner) -> Self {
        if p.is_spd() {
            Solver::Minres
        } else {
            Solver::Gmres
        }
    }
}

impl FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minres" => Ok(Solver::Minres),
            "gmres" => Ok(Solver::Gmres),
            other => Err(Error::InvalidConfig(format!("unknown solver {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IterRecord {
    pub iter: usize,
    /// Residual norm tracked by the recurrence (preconditioned norm).
    pub precond_resid: f64,
    /// `‖b − K x‖₂` recomputed from the iterate.
    pub true_resid: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveLog {
    pub solver: Solver,
    pub preconditioner: PrecondTag,
    pub iterations: usize,
    pub converged: bool,
    pub rhs_norm: f64,
    /// Starts with the iteration-0 record.
    pub history: Vec<IterRecord>,
}

impl SolveLog {
    fn new(solver: Solver, preconditioner: PrecondTag, rhs_norm: f64) -> Self {
        SolveLog {
            solver,
            preconditioner,
            iterations: 0,
            converged: false,
            rhs_norm,
            history: Vec::new(),
        }
    }

    pub fn final_true_resid(&self) -> f64 {
        self.history.last().map_or(0.0, |r| r.true_resid)
    }

    /// Final true residual divided by `‖b‖`.
    pub fn relative_resid(&self) -> f64 {
        if self.rhs_norm > 0.0 {
            self.final_true_resid() / self.rhs_norm
        } else {
            0.0
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "iter,precond_resid,true_resid")?;
        for r in &self.history {
            writeln!(w, "{},{},{}", r.iter, sig17(r.precond_resid), sig17(r.true_resid))?;
        }
        w.flush()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub tol: f64,
    pub maxit: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-10,
            maxit: 500,
        }
    }
}

fn check_dims<K: LinearOperator>(k: &K, p: &Preconditioner, b: &DenseVector) -> Result<()> {
    if k.dim() != b.len() || p.dim() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "operator {}, preconditioner {}, rhs {}",
            k.dim(),
            p.dim(),
            b.len()
        )));
    }
    Ok(())
}

/// Runs the solver matching the preconditioner.
pub fn solve<K: LinearOperator>(
    k: &K,
    p: &Preconditioner,
    b: &DenseVector,
    opts: &SolveOptions,
) -> Result<(DenseVector, SolveLog)> {
    match Solver::for_preconditioner(p) {
        Solver::Minres => minres(k, p, b, opts),
        Solver::Gmres => gmres(k, p, b, opts),
    }
}

/// Preconditioned MINRES for symmetric `K` and SPD `P`.
pub fn minres<K: LinearOperator>(
    k: &K,
    p: &Preconditioner,
    b: &DenseVector,
    opts: &SolveOptions,
) -> Result<(DenseVector, SolveLog)> {
    check_dims(k, p, b)?;
    if !p.is_spd() {
        return Err(Error::PreconditionerNotSpd);
    }
    let n = b.len();
    let bnorm = b.norm();
    let mut log = SolveLog::new(Solver::Minres, p.tag(), bnorm);
    let mut x = DenseVector::zeros(n);

    let mut r1 = b.clone();
    let mut y = p.apply_inverse(&r1);
    let beta1_sq = r1.dot(&y);
    if beta1_sq < 0.0 {
        return Err(Error::PreconditionerNotSpd);
    }
    let beta1 = beta1_sq.sqrt();
    log.history.push(IterRecord {
        iter: 0,
        precond_resid: beta1,
        true_resid: bnorm,
    });
    if bnorm == 0.0 || beta1 == 0.0 {
        log.converged = true;
        return Ok((x, log));
    }

    let mut r2 = r1.clone();
    let (mut oldb, mut beta) = (0.0, beta1);
    let (mut dbar, mut epsln) = (0.0, 0.0);
    let mut phibar = beta1;
    let (mut cs, mut sn) = (-1.0, 0.0);
    let mut w = DenseVector::zeros(n);
    let mut w2 = DenseVector::zeros(n);

    for itn in 1..=opts.maxit {
        let v = &y / beta;
        y = k.apply(&v);
        if itn >= 2 {
            y -= &r1 * (beta / oldb);
        }
        let alfa = v.dot(&y);
        y -= &r2 * (alfa / beta);
        r1 = std::mem::replace(&mut r2, y.clone());
        y = p.apply_inverse(&r2);
        oldb = beta;
        let beta_sq = r2.dot(&y);
        if beta_sq < 0.0 {
            return Err(Error::PreconditionerNotSpd);
        }
        beta = beta_sq.sqrt();

        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;

        let w1 = std::mem::replace(&mut w2, w.clone());
        w = (&v - &w1 * oldeps - &w2 * delta) / gamma;
        x += &w * phi;

        let true_resid = (b - k.apply(&x)).norm();
        log.iterations = itn;
        log.history.push(IterRecord {
            iter: itn,
            precond_resid: phibar.abs(),
            true_resid,
        });
        if true_resid <= opts.tol * bnorm {
            log.converged = true;
            break;
        }
        // Krylov space exhausted
        if beta <= f64::EPSILON * beta1 {
            break;
        }
    }
    Ok((x, log))
}

/// Full (unrestarted) GMRES with `P⁻¹` applied on the left.
pub fn gmres<K: LinearOperator>(
    k: &K,
    p: &Preconditioner,
    b: &DenseVector,
    opts: &SolveOptions,
) -> Result<(DenseVector, SolveLog)> {
    check_dims(k, p, b)?;
    let n = b.len();
    let bnorm = b.norm();
    let mut log = SolveLog::new(Solver::Gmres, p.tag(), bnorm);
    let mut x = DenseVector::zeros(n);

    let r0 = p.apply_inverse(b);
    let beta = r0.norm();
    log.history.push(IterRecord {
        iter: 0,
        precond_resid: beta,
        true_resid: bnorm,
    });
    if bnorm == 0.0 || beta == 0.0 {
        log.converged = true;
        return Ok((x, log));
    }

    let maxit = opts.maxit.min(n);
    let mut basis: Vec<DenseVector> = vec![r0 / beta];
    // Hessenberg columns after rotation, stored as the upper triangle R
    let mut r = DenseMatrix::zeros(maxit + 1, maxit);
    let mut g = DenseVector::zeros(maxit + 1);
    g[0] = beta;
    let mut rotations: Vec<(f64, f64)> = Vec::with_capacity(maxit);

    for j in 0..maxit {
        let mut w = p.apply_inverse(&k.apply(&basis[j]));
        let wnorm0 = w.norm();
        let mut h = DenseVector::zeros(j + 2);
        // modified Gram-Schmidt plus one reorthogonalization pass
        for _ in 0..2 {
            for (i, q) in basis.iter().enumerate() {
                let c = q.dot(&w);
                h[i] += c;
                w -= q * c;
            }
        }
        let hnext = w.norm();
        h[j + 1] = hnext;

        for (i, &(c, s)) in rotations.iter().enumerate() {
            let (a, bb) = (h[i], h[i + 1]);
            h[i] = c * a + s * bb;
            h[i + 1] = -s * a + c * bb;
        }
        let denom = h[j].hypot(h[j + 1]);
        let (c, s) = if denom == 0.0 { (1.0, 0.0) } else { (h[j] / denom, h[j + 1] / denom) };
        h[j] = denom;
        h[j + 1] = 0.0;
        rotations.push((c, s));
        g[j + 1] = -s * g[j];
        g[j] *= c;
        for i in 0..=j {
            r[(i, j)] = h[i];
        }

        // x = V y with R y = g
        let mut yv = DenseVector::zeros(j + 1);
        for i in (0..=j).rev() {
            let mut acc = g[i];
            for l in i + 1..=j {
                acc -= r[(i, l)] * yv[l];
            }
            yv[i] = if r[(i, i)] != 0.0 { acc / r[(i, i)] } else { 0.0 };
        }
        x.fill(0.0);
        for (i, q) in basis.iter().enumerate() {
            x += q * yv[i];
        }

        let true_resid = (b - k.apply(&x)).norm();
        log.iterations = j + 1;
        log.history.push(IterRecord {
            iter: j + 1,
            precond_resid: g[j + 1].abs(),
            true_resid,
        });
        if true_resid <= opts.tol * bnorm {
            log.converged = true;
            break;
        }
        if hnext <= 1e-14 * wnorm0.max(f64::MIN_POSITIVE) {
            return Err(Error::Stagnation {
                iteration: j + 1,
                residual: true_resid / bnorm,
            });
        }
        basis.push(w / hnext);
    }
    Ok((x, log))
}
