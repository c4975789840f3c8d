use std::fs::File;
use std::io::BufWriter;

use rayon::prelude::*;
use saddleprec::dense::{self, nullspace};
use saddleprec::fmt::{sig17, Sig17};
use saddleprec::inverse::{self, BlockInverse, NullB2Form};
use saddleprec::krylov::{self, SolveLog, SolveOptions, Solver};
use saddleprec::precond::{self, build_weight_l, WeightKind};
use saddleprec::problem::{self, assemble_k, split_b};
use saddleprec::spectrum::{self, SpectrumOptions, SpectrumReport, Verdict};
use saddleprec::{mtx, DenseMatrix, PrecondTag, Preconditioner, Regime, RhsVector, SaddleProblem};
use serde::Serialize;
use std::path::Path;

use crate::cli::{GenerateArgs, ProblemArgs, PrecondArgs, SolveArgs, SpectrumArgs, SplitArgs, SweepArgs, VerifyArgs};
use crate::config::{
    ensure_dir, load_problem, problem_label, problem_source, CliError, ProblemSource, CliResult, WeightSpec,
    EXIT_NO_CONVERGENCE, EXIT_VERIFICATION,
};
use crate::manifest::{write_manifest, write_text, TaskStatus};

/// Echo of the options a run used.
#[derive(Serialize)]
struct RunConfig<'a> {
    problem: ProblemSource,
    #[serde(skip_serializing_if = "Option::is_none")]
    precond: Option<&'a [PrecondTag]>,
    weight: &'a WeightSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    solver: Option<Solver>,
    #[serde(skip_serializing_if = "Option::is_none")]
    solve_tol: Option<Sig17>,
    #[serde(skip_serializing_if = "Option::is_none")]
    maxit: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cluster_tol: Option<Sig17>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scalings: Option<Vec<Sig17>>,
    rank_tol: Sig17,
}

impl<'a> RunConfig<'a> {
    fn new(args: &ProblemArgs, weight: &'a WeightSpec) -> Self {
        RunConfig {
            problem: problem_source(args),
            precond: None,
            weight,
            solver: None,
            solve_tol: None,
            maxit: None,
            cluster_tol: None,
            scalings: None,
            rank_tol: Sig17(args.rank_tol),
        }
    }
}

#[derive(Serialize)]
struct SplitConfig<'a> {
    a: &'a Path,
    b: &'a Path,
    seed: u64,
    rank_tol: Sig17,
}

pub const THREADS_ENV: &str = "SADDLEPREC_THREADS";

/// Thread pool sized by `SADDLEPREC_THREADS` (default 1).
pub fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| CliError::config(format!("{THREADS_ENV} must be a positive integer, got {s:?}")))?,
        Err(_) => 1,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::config(e.to_string()))
}

fn build_precond(
    p: &SaddleProblem,
    tag: PrecondTag,
    weight: &WeightSpec,
    rank_tol: f64,
) -> CliResult<Preconditioner> {
    Ok(match tag {
        PrecondTag::P2D => precond::build_p2d(p, &weight.resolve(WeightKind::WB, p.m())?)?,
        PrecondTag::P3D => precond::build_p3d(p, &weight.resolve(WeightKind::W, p.m2())?)?,
        PrecondTag::P3T | PrecondTag::Identity => precond::build_default(p, tag, rank_tol)?,
    })
}

fn check_tags(args: &PrecondArgs) -> CliResult<()> {
    if args.precond.is_empty() {
        return Err(CliError::config("no preconditioner selected"));
    }
    for (i, t) in args.precond.iter().enumerate() {
        if args.precond[..i].contains(t) {
            return Err(CliError::config(format!("preconditioner {t} given twice")));
        }
    }
    Ok(())
}

pub fn generate(args: &GenerateArgs) -> CliResult<()> {
    if args.problem.problem.is_some() {
        return Err(CliError::config("generate does not take --problem"));
    }
    let p = load_problem(&args.problem)?;
    ensure_dir(&args.out.output)?;
    problem::save(&p, &args.out.output)?;
    println!(
        "wrote {} (n={}, m1={}, m2={}, regime={}, seed={})",
        args.out.output.display(),
        p.n(),
        p.m1(),
        p.m2(),
        p.regime,
        p.seed
    );
    Ok(())
}

pub fn split(args: &SplitArgs) -> CliResult<()> {
    let a = mtx::read_file(&args.a).map_err(|e| CliError::config(format!("{}: {e}", args.a.display())))?;
    let b = mtx::read_file(&args.b).map_err(|e| CliError::config(format!("{}: {e}", args.b.display())))?;
    let s = split_b(&a, &b, args.rank_tol)?;
    let za = nullspace(&a, args.rank_tol);
    let regime = if s.b1.nrows() == 0 {
        Regime::MaxRankDeficient
    } else if (&s.b1 * &za.basis).norm() <= 1e-10 * s.b1.norm() {
        Regime::MinimallyIndependent
    } else {
        Regime::General
    };
    let p = SaddleProblem::new(a, s.b1, s.b2, regime, args.seed)?;
    ensure_dir(&args.out.output)?;
    problem::save(&p, &args.out.output)?;
    #[derive(Serialize)]
    struct Info<'a> {
        m1: usize,
        m2: usize,
        regime: Regime,
        permutation: &'a [usize],
    }
    let info = Info {
        m1: p.m1(),
        m2: p.m2(),
        regime,
        permutation: &s.permutation,
    };
    let file = write_text(&args.out.output, "split.json", &serde_json::to_string_pretty(&info)?)?;
    write_manifest(
        &args.out.output,
        "split",
        &SplitConfig {
            a: &args.a,
            b: &args.b,
            seed: args.seed,
            rank_tol: Sig17(args.rank_tol),
        },
        vec![TaskStatus {
            name: "split".into(),
            status: "ok".into(),
        }],
        &[
            file,
            problem::BLOCK_FILES[0].into(),
            problem::BLOCK_FILES[1].into(),
            problem::BLOCK_FILES[2].into(),
            problem::MANIFEST_FILE.into(),
        ],
    )?;
    println!("split B into m1={} and m2={} rows, regime {regime}", p.m1(), p.m2());
    Ok(())
}

pub fn spectrum(args: &SpectrumArgs) -> CliResult<()> {
    check_tags(&args.precond)?;
    let weight = WeightSpec::parse(&args.precond.weight)?;
    if !(args.cluster_tol > 0.0) {
        return Err(CliError::config("--cluster-tol must be positive"));
    }
    let p = load_problem(&args.problem)?;
    let opts = SpectrumOptions {
        cluster_tol: args.cluster_tol,
        rank_tol: args.problem.rank_tol,
    };
    let pool = thread_pool()?;
    let k = assemble_k(&p);
    let reports: Vec<CliResult<SpectrumReport>> = pool.install(|| {
        args.precond.precond
            .par_iter()
            .map(|&tag| {
                let pre = build_precond(&p, tag, &weight, args.problem.rank_tol)?;
                Ok(spectrum::preconditioned_spectrum(&k, &pre, &opts)?)
            })
            .collect()
    });

    let out = &args.out.output;
    ensure_dir(out)?;
    let mut files = Vec::new();
    let mut tasks = Vec::new();
    let mut failed = false;
    for (tag, rep) in args.precond.precond.iter().zip(reports) {
        let rep = rep?;
        files.push(write_text(out, &format!("spectrum_{tag}.json"), &rep.to_json()?)?);
        let counts: Vec<String> = rep
            .clusters
            .iter()
            .map(|c| format!("{:.10}:x{}", c.center.re, c.count))
            .collect();
        println!("{tag}: verdict {} clusters {{{}}}", rep.verdict, counts.join(", "));
        match rep.verdict {
            Verdict::NotIdeal => {
                eprintln!("warning: {tag} is not ideal for this problem; spectrum recorded without a verdict")
            }
            Verdict::Fail => failed = true,
            _ => {}
        }
        tasks.push(TaskStatus {
            name: format!("spectrum_{tag}"),
            status: rep.verdict.to_string(),
        });
    }
    let config = RunConfig {
        precond: Some(&args.precond.precond),
        cluster_tol: Some(Sig17(args.cluster_tol)),
        ..RunConfig::new(&args.problem, &weight)
    };
    write_manifest(out, "spectrum", &config, tasks, &files)?;
    if failed {
        return Err(CliError::new(EXIT_VERIFICATION, "spectrum verdict failed"));
    }
    Ok(())
}

pub fn solve(args: &SolveArgs) -> CliResult<()> {
    check_tags(&args.precond)?;
    let weight = WeightSpec::parse(&args.precond.weight)?;
    if !(args.solve_tol > 0.0) || args.maxit == 0 {
        return Err(CliError::config("--solve-tol and --maxit must be positive"));
    }
    let p = load_problem(&args.problem)?;
    let k = assemble_k(&p);
    let rhs = RhsVector::random(&p, p.seed).to_vector();
    let opts = SolveOptions {
        tol: args.solve_tol,
        maxit: args.maxit,
    };
    let pool = thread_pool()?;
    let logs: Vec<CliResult<SolveLog>> = pool.install(|| {
        args.precond.precond
            .par_iter()
            .map(|&tag| {
                let pre = build_precond(&p, tag, &weight, args.problem.rank_tol)?;
                let solver = args.solver.unwrap_or_else(|| Solver::for_preconditioner(&pre));
                let (_, log) = match solver {
                    Solver::Minres => krylov::minres(&k, &pre, &rhs, &opts)?,
                    Solver::Gmres => krylov::gmres(&k, &pre, &rhs, &opts)?,
                };
                Ok(log)
            })
            .collect()
    });

    let out = &args.out.output;
    ensure_dir(out)?;
    let label = problem_label(&p);
    let mut files = Vec::new();
    let mut tasks = Vec::new();
    let mut summary = String::from("problem,precond,solver,iters,converged,rel_resid\n");
    let mut stalled = Vec::new();
    println!("{:<28} {:<9} {:<7} {:>6} {:>10}", "problem", "precond", "solver", "iters", "rel_resid");
    for (tag, log) in args.precond.precond.iter().zip(logs) {
        let log = log?;
        let name = format!("solve_{tag}.csv");
        log.write_csv(BufWriter::new(File::create(out.join(&name))?))?;
        files.push(name);
        summary.push_str(&format!(
            "{label},{tag},{},{},{},{}\n",
            log.solver.as_str(),
            log.iterations,
            log.converged,
            sig17(log.relative_resid())
        ));
        println!(
            "{label:<28} {:<9} {:<7} {:>6} {:>10.3e}",
            tag.as_str(),
            log.solver.as_str(),
            log.iterations,
            log.relative_resid()
        );
        if !log.converged {
            stalled.push(tag.to_string());
        }
        tasks.push(TaskStatus {
            name: format!("solve_{tag}"),
            status: if log.converged { "converged".into() } else { "not-converged".into() },
        });
    }
    files.push(write_text(out, "summary.csv", &summary)?);
    let config = RunConfig {
        precond: Some(&args.precond.precond),
        solver: args.solver,
        solve_tol: Some(Sig17(args.solve_tol)),
        maxit: Some(args.maxit),
        ..RunConfig::new(&args.problem, &weight)
    };
    write_manifest(out, "solve", &config, tasks, &files)?;
    if !stalled.is_empty() {
        return Err(CliError::new(
            EXIT_NO_CONVERGENCE,
            format!("no convergence within {} iterations: {}", args.maxit, stalled.join(", ")),
        ));
    }
    Ok(())
}

#[derive(Serialize)]
struct Row {
    name: String,
    value: Sig17,
    tol: Sig17,
    pass: bool,
}

#[derive(Default)]
struct Table {
    rows: Vec<Row>,
    skipped: Vec<String>,
}

impl Table {
    fn push(&mut self, name: impl Into<String>, value: f64, tol: f64) {
        self.rows.push(Row {
            name: name.into(),
            value: Sig17(value),
            tol: Sig17(tol),
            pass: value <= tol,
        });
    }

    fn push_inverse(&mut self, stem: &str, inv: &BlockInverse, k: &DenseMatrix, direct: &BlockInverse, cond_tol: f64) {
        let (left, right) = inv.product_residuals(k);
        self.push(format!("{stem}/left"), left, RESIDUAL_TOL);
        self.push(format!("{stem}/right"), right, RESIDUAL_TOL);
        self.push(format!("{stem}/vs-direct"), inv.blockwise_diff(direct), cond_tol);
    }
}

const RESIDUAL_TOL: f64 = 1e-8;
const AUG_SHIFT_TOL: f64 = 1e-9;

fn augmented_k(p: &SaddleProblem, w: &precond::WeightMatrix) -> DenseMatrix {
    let mut k = assemble_k(p);
    let n = p.n();
    let shift = p.b2.transpose() * w.factor().solve_mat(&p.b2);
    let mut lead = k.view_mut((0, 0), (n, n));
    lead += &shift;
    k
}

pub fn verify_inverse(args: &VerifyArgs) -> CliResult<()> {
    let weight = WeightSpec::parse(&args.weight)?;
    let p = load_problem(&args.problem)?;
    let w = weight.resolve(WeightKind::W, p.m2())?;
    let rank_tol = args.problem.rank_tol;

    let k = assemble_k(&p);
    let direct = inverse::direct_inverse(&p)?;
    let cond_tol = inverse::condition_tolerance(&k);
    let kinv_norm = direct.assemble().norm();
    let mut t = Table::default();

    let b1_za = {
        let za = nullspace(&p.a, rank_tol);
        if p.m1() == 0 { 0.0 } else { (&p.b1 * &za.basis).norm() / p.b1.norm() }
    };
    let b1_in_range = b1_za <= 1e-8;

    if b1_in_range {
        for (i, j) in [(1, 2), (2, 2), (2, 1)] {
            t.push(
                format!("direct/zero-block-{}{}", i + 1, j + 1),
                direct.block(i, j).norm() / kinv_norm,
                RESIDUAL_TOL,
            );
        }
    } else {
        t.skipped.push("zero blocks of K^-1: B1 reaches ker(A)".into());
    }

    let zb2 = nullspace(&p.b2, rank_tol);
    let null_b2 = inverse::inv3_null_b2(&p, &zb2)?;
    t.push_inverse("null-b2", &null_b2, &k, &direct, cond_tol);
    let full = inverse::inv3_null_b2_form(&p, &zb2, NullB2Form::Full)?;
    t.push_inverse("null-b2-full", &full, &k, &direct, cond_tol);

    t.push("aug-shift", inverse::aug_shift_check(&p, &w)?, AUG_SHIFT_TOL);
    let kw = augmented_k(&p, &w);
    let aug = inverse::inv3_augmented(&p, &w)?;
    let kw_inv = dense::inverse(&kw)?;
    let sizes = p.sizes();
    let aug_direct = BlockInverse {
        grid: (0..3)
            .map(|i| (0..3).map(|j| dense::block(&kw_inv, &sizes, i, j)).collect())
            .collect(),
        sizes: sizes.to_vec(),
        provenance: inverse::Provenance::Direct,
    };
    t.push_inverse("augmented", &aug, &kw, &aug_direct, inverse::condition_tolerance(&kw));

    if b1_in_range {
        let za = nullspace(&p.a, rank_tol);
        let nw = build_weight_l(&p, &za)?;
        let na = inverse::inv3_null_a(&p, &nw)?;
        t.push_inverse("null-a", &na.additive, &k, &direct, cond_tol);
        t.push_inverse("null-a-mult", &na.multiplicative, &k, &direct, cond_tol);
        t.push("null-a/leading-gap", na.leading_gap, RESIDUAL_TOL);
        t.push("null-a/vs-null-b2", na.additive.blockwise_diff(&null_b2), cond_tol);
    } else {
        t.skipped.push(format!(
            "null-A formulas: need B1 Z_A = 0, got relative {:.3e}",
            b1_za
        ));
    }

    let out = &args.out.output;
    ensure_dir(out)?;
    for r in &t.rows {
        println!("{:<28} {:>12.3e} <= {:>9.1e}  {}", r.name, r.value.0, r.tol.0, if r.pass { "ok" } else { "FAIL" });
    }
    for s in &t.skipped {
        println!("skipped: {s}");
    }
    let passed = t.rows.iter().all(|r| r.pass);
    #[derive(Serialize)]
    struct Report<'a> {
        problem: String,
        cond_tol: Sig17,
        rows: &'a [Row],
        skipped: &'a [String],
        passed: bool,
    }
    let report = Report {
        problem: problem_label(&p),
        cond_tol: Sig17(cond_tol),
        rows: &t.rows,
        skipped: &t.skipped,
        passed,
    };
    let file = write_text(out, "verify_inverse.json", &serde_json::to_string_pretty(&report)?)?;
    let config = RunConfig::new(&args.problem, &weight);
    write_manifest(
        out,
        "verify-inverse",
        &config,
        vec![TaskStatus {
            name: "verify_inverse".into(),
            status: if passed { "pass".into() } else { "fail".into() },
        }],
        &[file],
    )?;
    if !passed {
        return Err(CliError::new(EXIT_VERIFICATION, "inverse residuals exceed tolerance"));
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepRow {
    scale: Sig17,
    clusters: usize,
    expected: Option<usize>,
    centers: Vec<[Sig17; 2]>,
}

pub fn sweep_scaling(args: &SweepArgs) -> CliResult<()> {
    let weight = WeightSpec::parse(&args.weight)?;
    if args.scalings.is_empty() || args.scalings.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(CliError::config("--scalings must be positive numbers"));
    }
    let p = load_problem(&args.problem)?;
    let w = weight.resolve(WeightKind::W, p.m2())?;
    let opts = SpectrumOptions {
        cluster_tol: args.cluster_tol,
        rank_tol: args.problem.rank_tol,
    };
    let ideal = !precond::build_p3d(&p, &w)?.is_non_ideal();
    let pool = thread_pool()?;
    let points: Vec<CliResult<spectrum::ScalingPoint>> = pool.install(|| {
        args.scalings
            .par_iter()
            .map(|&s| {
                let mut pts = spectrum::scaling_sweep_p3d(&p, &w, &[s], &opts)?;
                Ok(pts.remove(0))
            })
            .collect()
    });
    let mut rows = Vec::new();
    let mut failed = false;
    for pt in points {
        let pt = pt?;
        let expected = ideal.then(|| match (p.m1(), pt.scale == 0.5) {
            (0, _) => 2,
            (_, true) => 3,
            (_, false) => 4,
        });
        let ok = expected.is_none_or(|e| e == pt.clusters);
        failed |= !ok;
        println!(
            "s = {:<8} clusters {:>3}{}",
            pt.scale,
            pt.clusters,
            expected.map_or(String::new(), |e| format!("  expected {e}{}", if ok { "" } else { "  FAIL" }))
        );
        rows.push(SweepRow {
            scale: Sig17(pt.scale),
            clusters: pt.clusters,
            expected,
            centers: pt.centers,
        });
    }
    if !ideal {
        eprintln!("warning: P3D is not ideal for this problem; counts recorded without expectations");
    }
    let out = &args.out.output;
    ensure_dir(out)?;
    #[derive(Serialize)]
    struct Report {
        problem: String,
        points: Vec<SweepRow>,
        passed: bool,
    }
    let report = Report {
        problem: problem_label(&p),
        points: rows,
        passed: !failed,
    };
    let file = write_text(out, "sweep_scaling.json", &serde_json::to_string_pretty(&report)?)?;
    let config = RunConfig {
        scalings: Some(args.scalings.iter().map(|&s| Sig17(s)).collect()),
        cluster_tol: Some(Sig17(args.cluster_tol)),
        ..RunConfig::new(&args.problem, &weight)
    };
    write_manifest(
        out,
        "sweep-scaling",
        &config,
        vec![TaskStatus {
            name: "sweep_scaling".into(),
            status: if failed { "fail".into() } else { "pass".into() },
        }],
        &[file],
    )?;
    if failed {
        return Err(CliError::new(EXIT_VERIFICATION, "cluster counts differ from expectation"));
    }
    Ok(())
}
