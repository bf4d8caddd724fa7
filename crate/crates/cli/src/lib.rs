//! Reproducible experiments over the lattice φ⁴ toolkit.
//!
//! Every command reads an [`ExperimentConfig`], dispatches its grid points to a
//! worker pool and writes CSV curves plus a `result.json` record that embeds
//! the resolved config. Re-running that record reproduces the outputs byte for
//! byte.

// `!(x > 0.0)` deliberately rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
mod counterterm;
mod critical;
mod output;
mod spectrum;
mod vqe;

use std::path::{Path, PathBuf};

pub use config::ExperimentConfig;
use config::Requirements;
pub use vqe::Verdict;

/// Tag written into every result record; bumped on any format change.
pub const SCHEMA: &str = "phi4-result/1";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("cannot write output: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) | CliError::Output(_) => 2,
        }
    }
}

impl From<phi4_core::Error> for CliError {
    fn from(e: phi4_core::Error) -> Self {
        CliError::Numerical(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Spectrum,
    Counterterm,
    Critical,
    Vqe,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Counterterm => "counterterm",
            Command::Critical => "critical",
            Command::Vqe => "vqe",
        }
    }

    fn requirements(self) -> Requirements {
        match self {
            Command::Vqe => Requirements {
                parity: true,
                encoding: true,
                vqe: true,
            },
            _ => Requirements::default(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides `output_dir` of the config.
    pub out: Option<PathBuf>,
    /// Overrides `seed` of the config.
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    /// Human-readable summary for the terminal.
    pub summary: String,
    /// Per-point benchmark verdicts (`vqe` only).
    pub verdicts: Vec<Verdict>,
}

pub fn run(command: Command, config_text: &str, options: &RunOptions) -> Result<Report, CliError> {
    let mut config = ExperimentConfig::from_json(config_text)?;
    if let Some(seed) = options.seed {
        config.seed = seed;
    }
    config.validate(command.requirements(), Some(config_text))?;
    let out_dir = options
        .out
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    config.output_dir = None;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Validation(format!("--threads: {e}")))?;
    let outcome = pool.install(|| match command {
        Command::Spectrum => spectrum::run(&config),
        Command::Counterterm => counterterm::run(&config),
        Command::Critical => critical::run(&config),
        Command::Vqe => vqe::run(&config),
    })?;

    std::fs::create_dir_all(&out_dir).map_err(|e| CliError::Output(format!("{}: {e}", out_dir.display())))?;
    let mut files = Vec::new();
    for table in &outcome.tables {
        files.push(table.write(&out_dir)?);
    }
    files.push(output::write_record(&out_dir, command.name(), &config, outcome.points)?);
    Ok(Report {
        out_dir,
        files,
        summary: outcome.summary,
        verdicts: outcome.verdicts,
    })
}

/// Reads a config file and runs `command` on it.
pub fn run_file(command: Command, path: &Path, options: &RunOptions) -> Result<Report, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    run(command, &text, options)
}

/// Everything a command produces before it is written out.
struct Outcome {
    tables: Vec<output::Table>,
    points: serde_json::Value,
    summary: String,
    verdicts: Vec<Verdict>,
}
