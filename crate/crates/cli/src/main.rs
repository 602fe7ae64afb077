use std::path::PathBuf;
use std::process::ExitCode;

use cgmem::experiments::{Experiment, Status};
use cgmem_cli::{execute, load_config, warnings, Invocation};
use clap::Parser;

/// Runs one canonical experiment and writes series.csv, summary.json and manifest.txt.
///
/// Exit status: 0 all criteria pass, 1 a criterion failed, 2 configuration error,
/// 3 runtime or solver error.
#[derive(Debug, Parser)]
#[command(name = "cgmem", version)]
struct Cli {
    /// decay, cde, weak-lipschitz, split, dirac-limit or oracle.
    experiment: Experiment,
    /// Configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, replacing `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed of the initial data, replacing `initial.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// `section.key=value`, applied after the file; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let inv = Invocation {
        experiment: cli.experiment,
        config: cli.config,
        out: cli.out,
        seed: cli.seed,
        overrides: cli.overrides,
    };
    let result = load_config(&inv).and_then(|config| {
        for w in warnings(&config) {
            eprintln!("warning: {w}");
        }
        execute(inv.experiment, config)
    });
    match result {
        Ok(outcome) => {
            for c in &outcome.output.criteria {
                let verdict = match c.status {
                    Status::Pass => "pass",
                    Status::Fail => "FAIL",
                    Status::OutOfHypothesis => "out of hypothesis",
                };
                println!("criterion {} {}: {verdict} ({})", c.id, c.name, c.detail);
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(outcome.exit_code())
        }
        Err(e) => {
            let diagnostic = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{diagnostic}");
            ExitCode::from(e.exit_code())
        }
    }
}
