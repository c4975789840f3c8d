use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use saddleprec::krylov::Solver;
use saddleprec::{PrecondTag, Regime};

#[derive(Debug, Parser)]
#[command(name = "saddleprec", version, about = "Block preconditioner workbench for singular saddle point systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a problem and write A.mtx, B1.mtx, B2.mtx and manifest.json.
    Generate(GenerateArgs),
    /// Split an unsplit B into B1 and B2 and write the problem.
    Split(SplitArgs),
    /// Spectra of the preconditioned operators, one JSON report per preconditioner.
    Spectrum(SpectrumArgs),
    /// Preconditioned MINRES/GMRES with CSV residual logs.
    Solve(SolveArgs),
    /// Residual table for the closed-form inverse formulas.
    VerifyInverse(VerifyArgs),
    /// Cluster counts of P3D for several scalings of its Schur block.
    SweepScaling(SweepArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// Directory with A.mtx, B1.mtx, B2.mtx and manifest.json; overrides generation.
    #[arg(long)]
    pub problem: Option<PathBuf>,
    #[arg(long, default_value_t = 40)]
    pub n: usize,
    #[arg(long, default_value_t = 6)]
    pub m1: usize,
    #[arg(long, default_value_t = 4)]
    pub m2: usize,
    #[arg(long, default_value = "min-indep", value_parser = parse_regime)]
    pub regime: Regime,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Ratio of the largest to smallest nonzero eigenvalue of A.
    #[arg(long, default_value_t = 1e4)]
    pub cond_a: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub rank_tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(short = 'o', long = "output", default_value = ".")]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct PrecondArgs {
    /// Preconditioners to run, comma separated or repeated.
    #[arg(long, value_delimiter = ',', default_value = "p2d,p3d,p3t", value_parser = parse_tag)]
    pub precond: Vec<PrecondTag>,
    /// identity | diag:<v1,v2,...> | file:<path.mtx>
    #[arg(long, default_value = "identity")]
    pub weight: String,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Matrix Market file with A.
    #[arg(long)]
    pub a: PathBuf,
    /// Matrix Market file with the unsplit B.
    #[arg(long)]
    pub b: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    pub rank_tol: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub precond: PrecondArgs,
    #[arg(long, default_value_t = 1e-6)]
    pub cluster_tol: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub precond: PrecondArgs,
    /// Forces a solver; by default MINRES for SPD preconditioners, GMRES otherwise.
    #[arg(long, value_parser = parse_solver)]
    pub solver: Option<Solver>,
    #[arg(long, default_value_t = 1e-10)]
    pub solve_tol: f64,
    #[arg(long, default_value_t = 500)]
    pub maxit: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// W for the augmented forms (identity | diag:<...> | file:<path>).
    #[arg(long, default_value = "identity")]
    pub weight: String,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,1,2")]
    pub scalings: Vec<f64>,
    #[arg(long, default_value = "identity")]
    pub weight: String,
    #[arg(long, default_value_t = 1e-6)]
    pub cluster_tol: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

fn parse_regime(s: &str) -> Result<Regime, String> {
    s.parse().map_err(|e: saddleprec::Error| e.to_string())
}

fn parse_tag(s: &str) -> Result<PrecondTag, String> {
    s.parse().map_err(|e: saddleprec::Error| e.to_string())
}

fn parse_solver(s: &str) -> Result<Solver, String> {
    s.parse().map_err(|e: saddleprec::Error| e.to_string())
}
