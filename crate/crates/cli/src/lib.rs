//! Command-line runner for the canonical experiments.

// `!(x > 0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;

use std::fs;
use std::path::PathBuf;

use cgmem::experiments::{run_experiment, Experiment, ExperimentOutput};

use config::{parse_config_with, CliConfig, ConfigErrors};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration:\n{0}")]
    Config(#[from] ConfigErrors),
    #[error("cannot read {}: {source}", path.display())]
    ReadConfig { path: PathBuf, source: std::io::Error },
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Runtime(#[from] cgmem::Error),
}

impl CliError {
    /// 2 for configuration problems, 3 for everything that fails at run time.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::ReadConfig { .. } => 2,
            CliError::Io { .. } | CliError::Runtime(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) | CliError::ReadConfig { .. } => "configuration",
            CliError::Io { .. } => "io",
            CliError::Runtime(_) => "runtime",
        }
    }
}

/// Command-line inputs after argument parsing.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub experiment: Experiment,
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub overrides: Vec<String>,
}

pub struct Outcome {
    pub config: CliConfig,
    pub output: ExperimentOutput,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    /// 0 when no criterion failed, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        u8::from(!self.output.passed())
    }
}

pub fn load_config(inv: &Invocation) -> Result<CliConfig, CliError> {
    let text = fs::read_to_string(&inv.config).map_err(|source| CliError::ReadConfig { path: inv.config.clone(), source })?;
    let mut overrides = inv.overrides.clone();
    if let Some(seed) = inv.seed {
        overrides.push(format!("initial.seed={seed}"));
    }
    let mut config = parse_config_with(&text, &overrides)?;
    if let Some(out) = &inv.out {
        config.output.dir = out.clone();
    }
    Ok(config)
}

/// Configuration-time warnings about violated smallness conditions.
pub fn warnings(config: &CliConfig) -> Vec<String> {
    let Ok(problem) = config.run.problem() else {
        return Vec::new();
    };
    let mut out = Vec::new();
    if !problem.smallness.assk {
        out.push(
            "boundary kernel violates k_G(0) <= 4/(1 - omega): decay and tail criteria are recorded as out of hypothesis"
                .to_string(),
        );
    }
    if !problem.smallness.assk2 {
        out.push("boundary kernel violates k_G(0) < 2/(1 - nu)".to_string());
    }
    out
}

/// Runs the experiment and writes its files into `config.output.dir`.
pub fn execute(experiment: Experiment, config: CliConfig) -> Result<Outcome, CliError> {
    let output = run_experiment(experiment, &config.run, &config.experiment)?;
    let files = output::write_outputs(&config.output.dir, &config, &output)?;
    Ok(Outcome { config, output, files })
}
