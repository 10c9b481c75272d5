use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fsplab::config::{Command, RunConfig};
use fsplab::run::{execute, RunError};

/// Degenerate diffusion laboratory: solve, walk, certify, validate.
#[derive(Debug, Parser)]
#[command(name = "fsplab", version)]
struct Cli {
    /// TOML run configuration; defaults are used when omitted.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Master seed (overrides `seed`).
    #[arg(short, long)]
    seed: Option<u64>,
    /// Command to run (overrides `command`).
    #[arg(long, value_enum)]
    command: Option<Command>,
}

fn run(cli: Cli) -> Result<i32, RunError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?
            .map_err(|e| RunError::Parse(format!("{}: {e}", path.display())))?,
        None => RunConfig::default(),
    };
    if let Some(o) = cli.output {
        cfg.output_dir = o;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(c) = cli.command {
        cfg.command = Some(c);
    }
    let outcome = execute(&cfg)?;
    // a closed stdout (e.g. piped into `head`) must not turn a finished run into a failure
    let mut out = std::io::stdout().lock();
    let _ = write!(out, "{}", outcome.summary);
    let _ = writeln!(out, "artifacts: {}", outcome.output_dir.display());
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("fsplab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
