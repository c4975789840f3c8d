use std::fmt;
use std::path::{Path, PathBuf};

use saddleprec::precond::{WeightKind, WeightMatrix};
use saddleprec::problem::{self, GenerateOptions};
use saddleprec::{mtx, Error, SaddleProblem};
use serde::Serialize;

use crate::cli::ProblemArgs;

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_GENERATION: u8 = 3;
pub const EXIT_VERIFICATION: u8 = 4;
pub const EXIT_NO_CONVERGENCE: u8 = 5;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(EXIT_CONFIG, message)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::DegenerateDraw { .. } => EXIT_GENERATION,
            Error::Stagnation { .. } => EXIT_NO_CONVERGENCE,
            Error::NoConvergence { .. } => EXIT_VERIFICATION,
            _ => EXIT_CONFIG,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::config(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::config(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Weight matrix description from `--weight`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "value")]
pub enum WeightSpec {
    Identity,
    Diag(#[serde(serialize_with = "saddleprec::fmt::ser_f64_vec")] Vec<f64>),
    File(PathBuf),
}

impl WeightSpec {
    pub fn parse(s: &str) -> CliResult<Self> {
        if s == "identity" {
            return Ok(WeightSpec::Identity);
        }
        if let Some(rest) = s.strip_prefix("diag:") {
            let values = rest
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::config(format!("bad --weight {s:?}: {e}")))?;
            return Ok(WeightSpec::Diag(values));
        }
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(WeightSpec::File(PathBuf::from(path)));
        }
        Err(CliError::config(format!(
            "bad --weight {s:?}: expected identity, diag:<values> or file:<path>"
        )))
    }

    /// The weight as a `size × size` SPD matrix.
    pub fn resolve(&self, kind: WeightKind, size: usize) -> CliResult<WeightMatrix> {
        let w = match self {
            WeightSpec::Identity => return Ok(WeightMatrix::identity(kind, size)),
            WeightSpec::Diag(values) => {
                if values.len() != size {
                    return Err(CliError::config(format!(
                        "--weight has {} diagonal entries, {kind:?} needs {size}",
                        values.len()
                    )));
                }
                WeightMatrix::diagonal(kind, values)
            }
            WeightSpec::File(path) => {
                let m = mtx::read_file(path)?;
                if m.shape() != (size, size) {
                    return Err(CliError::config(format!(
                        "{} is {}x{}, {kind:?} needs {size}x{size}",
                        path.display(),
                        m.nrows(),
                        m.ncols()
                    )));
                }
                WeightMatrix::new(kind, m)
            }
        };
        w.map_err(|e| CliError::config(format!("weight {kind:?}: {e}")))
    }
}

/// Where the problem came from.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "lowercase", tag = "source")]
pub enum ProblemSource {
    Generated {
        n: usize,
        m1: usize,
        m2: usize,
        regime: saddleprec::Regime,
        seed: u64,
        #[serde(serialize_with = "saddleprec::fmt::ser_f64")]
        cond_a: f64,
    },
    Loaded {
        path: PathBuf,
    },
}

pub fn problem_source(args: &ProblemArgs) -> ProblemSource {
    match &args.problem {
        Some(path) => ProblemSource::Loaded { path: path.clone() },
        None => ProblemSource::Generated {
            n: args.n,
            m1: args.m1,
            m2: args.m2,
            regime: args.regime,
            seed: args.seed,
            cond_a: args.cond_a,
        },
    }
}

pub fn load_problem(args: &ProblemArgs) -> CliResult<SaddleProblem> {
    if !(args.rank_tol > 0.0 && args.rank_tol < 1.0) {
        return Err(CliError::config(format!("--rank-tol must lie in (0, 1), got {}", args.rank_tol)));
    }
    match &args.problem {
        Some(dir) => problem::load(dir).map_err(|e| CliError::config(format!("{}: {e}", dir.display()))),
        None => Ok(problem::generate(
            args.n,
            args.m1,
            args.m2,
            args.regime,
            args.seed,
            &GenerateOptions { cond_a: args.cond_a },
        )?),
    }
}

/// Short label for summaries: `<regime>-n<n>-m<m1>-<m2>-s<seed>`.
pub fn problem_label(p: &SaddleProblem) -> String {
    format!("{}-n{}-m{}-{}-s{}", p.regime, p.n(), p.m1(), p.m2(), p.seed)
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::config(format!("{}: {e}", dir.display())))
}
