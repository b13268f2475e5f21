//! `eigenshape` command-line front end. Exit codes: 0 ok, 1 inequality
//! violations, 2 usage or input error, 3 numerical failure.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use eigenshape::Error;

pub mod commands;
pub mod output;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATIONS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: msg.into(),
        }
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_NUMERIC,
            message: msg.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::SolverNoConvergence(_) | Error::ResolutionTooCoarse { .. } => EXIT_NUMERIC,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "eigenshape",
    version,
    about = "Dirichlet eigenvalues and shape optimization for convex domains"
)]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// `key=value` file with defaults for any long flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Store wall time in manifests (makes them differ between runs).
    #[arg(long, global = true)]
    pub record_time: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Geometry, spectrum and inequality certificates for one body.
    Eval(EvalArgs),
    /// Run the seeded inequality suite and write a CSV of certificates.
    Check(CheckArgs),
    /// Minimize an eigenvalue problem and write the run artifacts.
    Optimize(OptimizeArgs),
    /// Tabulate J_k(c) over a grid of perimeter bounds.
    JkCurve(JkCurveArgs),
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Body JSON (`{"type":"polygon","vertices":[[x,y],...]}`).
    pub body: Option<PathBuf>,
    /// Closed-form body instead of a file: ball, cube or rectangle.
    #[arg(long)]
    pub analytic: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub side: Option<f64>,
    /// Comma separated side lengths.
    #[arg(long, value_delimiter = ',')]
    pub sides: Option<Vec<f64>>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub resolution: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// geometry, spectral or all.
    #[arg(long)]
    pub suite: Option<String>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub spectral_samples: Option<usize>,
    #[arg(long)]
    pub resolution: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    /// Ik, Jk, Mk, Pk, Hk, Lk, Nk or Tk.
    #[arg(long)]
    pub problem: Option<String>,
    /// measure, perimeter, moment or a product like perimeter*moment.
    #[arg(long)]
    pub functional: Option<String>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub c: Option<f64>,
    /// Largest number of components for union problems.
    #[arg(long)]
    pub components: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[command(flatten)]
    pub tuning: Tuning,
}

#[derive(Args, Debug)]
pub struct JkCurveArgs {
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub cmin: Option<f64>,
    #[arg(long)]
    pub cmax: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Explicit comma separated grid; overrides cmin/cmax/steps.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    #[arg(long)]
    pub components: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub tuning: Tuning,
}

/// Optimizer knobs shared by `optimize` and `jk-curve`.
#[derive(Args, Debug, Default)]
pub struct Tuning {
    #[arg(long)]
    pub modes: Option<usize>,
    #[arg(long)]
    pub max_evaluations: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub search_resolution: Option<f64>,
    #[arg(long)]
    pub final_resolution: Option<f64>,
}

/// Flag, then config file, then default. Every resolved value is kept for
/// the manifest.
pub struct Settings {
    file: BTreeMap<String, String>,
    pub snapshot: BTreeMap<String, String>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<(Self, Option<(PathBuf, Vec<u8>)>), CliError> {
        let Some(path) = path else {
            return Ok((
                Self {
                    file: BTreeMap::new(),
                    snapshot: BTreeMap::new(),
                },
                None,
            ));
        };
        let bytes = fs::read(path)
            .map_err(|e| CliError::input(format!("cannot read config {}: {e}", path.display())))?;
        let text = String::from_utf8(bytes.clone())
            .map_err(|_| CliError::input("config file is not UTF-8"))?;
        Ok((
            Self {
                file: parse_config(&text)?,
                snapshot: BTreeMap::new(),
            },
            Some((path.into(), bytes)),
        ))
    }

    pub fn get<T: FromStr + Display>(
        &mut self,
        key: &str,
        flag: Option<T>,
        default: T,
    ) -> Result<T, CliError> {
        let v = match (flag, self.file.get(key)) {
            (Some(v), _) => v,
            (None, Some(s)) => s
                .parse()
                .map_err(|_| CliError::input(format!("config: bad value {s:?} for {key}")))?,
            (None, None) => default,
        };
        self.snapshot.insert(key.into(), v.to_string());
        Ok(v)
    }

    pub fn get_opt<T: FromStr + Display>(
        &mut self,
        key: &str,
        flag: Option<T>,
    ) -> Result<Option<T>, CliError> {
        let v = match (flag, self.file.get(key)) {
            (Some(v), _) => Some(v),
            (None, Some(s)) => Some(
                s.parse()
                    .map_err(|_| CliError::input(format!("config: bad value {s:?} for {key}")))?,
            ),
            (None, None) => None,
        };
        if let Some(v) = &v {
            self.snapshot.insert(key.into(), v.to_string());
        }
        Ok(v)
    }
}

const CONFIG_KEYS: &[&str] = &[
    "seed",
    "threads",
    "k",
    "resolution",
    "suite",
    "samples",
    "spectral-samples",
    "problem",
    "functional",
    "c",
    "components",
    "modes",
    "max-evaluations",
    "restarts",
    "search-resolution",
    "final-resolution",
    "cmin",
    "cmax",
    "steps",
    "dim",
    "radius",
    "side",
];

/// `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::input(format!("config line {}: expected key=value", n + 1)))?;
        let key = k.trim().replace('_', "-");
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(CliError::input(format!(
                "config line {}: unknown key {key}",
                n + 1
            )));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

/// Parse `args` and run; returns the process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match commands::dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
