//! Batch front-end: reads a JSON experiment config, runs one verification
//! suite or experiment and writes a plot-ready report.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;
use thiserror::Error;

pub mod commands;
pub mod config;
pub mod report;

#[derive(Debug, Parser)]
#[command(
    name = "couplage",
    version,
    about = "Simplex couplings, influence coefficients and reconstruction experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact and Monte Carlo mismatch of the simplex coupling on random pairs.
    CouplingVerify(CommonArgs),
    /// Influence coefficients of a process and the summability conditions.
    Influence(CommonArgs),
    /// Reconstruction from innovations started at past horizons.
    Reconstruct(CommonArgs),
    /// Priming-set calibration, block accuracy and successive approximation.
    Prime(CommonArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::CouplingVerify(_) => "coupling-verify",
            Command::Influence(_) => "influence",
            Command::Reconstruct(_) => "reconstruct",
            Command::Prime(_) => "prime",
        }
    }

    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::CouplingVerify(a)
            | Command::Influence(a)
            | Command::Reconstruct(a)
            | Command::Prime(a) => a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Master seed; overrides a `seed` field of the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report path.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads; the report does not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),

    #[error("command {0} is stochastic and needs a seed")]
    MissingSeed(&'static str),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("thread pool: {0}")]
    ThreadPool(String),

    #[error(transparent)]
    Core(#[from] couplage_core::Error),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Config(_) => "INVALID_CONFIG",
            CliError::MissingSeed(_) => "MISSING_SEED",
            CliError::Io { .. } => "IO_ERROR",
            CliError::ThreadPool(_) => "THREAD_POOL",
            CliError::Core(e) => e.code(),
        }
    }

    /// The object printed on standard error.
    pub fn to_json(&self) -> Value {
        serde_json::json!({ "error": self.code(), "message": self.to_string() })
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// A rendered report and the verdict of the invariants it exercised.
#[derive(Debug, Clone)]
pub struct Report {
    /// Files to write, in order.
    pub files: Vec<(PathBuf, String)>,
    pub passed: bool,
    /// Offending rows or checks, reported on failure.
    pub offending: Vec<Value>,
}

/// Runs one command and writes its report files.
pub fn execute(cmd: &Command) -> Result<Report> {
    let args = cmd.args();
    let raw = std::fs::read_to_string(&args.config).map_err(|source| CliError::Io {
        path: args.config.clone(),
        source,
    })?;
    let report = match args.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| CliError::ThreadPool(e.to_string()))?
            .install(|| run(cmd, &raw)),
        None => run(cmd, &raw),
    }?;
    for (path, text) in &report.files {
        write_file(path, text)?;
    }
    Ok(report)
}

/// Runs one command on the config text without touching the filesystem.
pub fn run(cmd: &Command, config_text: &str) -> Result<Report> {
    let args = cmd.args();
    let env = config::Envelope::parse(config_text, cmd.name(), args.seed)?;
    match cmd {
        Command::CouplingVerify(_) => commands::coupling::run(&env, args),
        Command::Influence(_) => commands::influence::run(&env, args),
        Command::Reconstruct(_) => commands::reconstruct::run(&env, args),
        Command::Prime(_) => commands::prime::run(&env, args),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// `<out>.<suffix>`, keeping the full original file name.
pub fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".");
    name.push(suffix);
    out.with_file_name(name)
}
