//! Experiment driver for the monotone block solvers.

mod commands;
mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use commands::{Settings, Status};
use config::{ConfigError, ExperimentConfig, Method};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "monoblock", version, about = "Monotone block Jacobi / Gauss-Seidel reaction-diffusion solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// March a model and write CSV snapshots plus a JSON report.
    Solve(Common),
    /// Per-level iteration counts of Jacobi against Gauss-Seidel.
    Compare(Common),
    /// Run every structural, ordering and oracle check.
    Verify(Common),
    /// Manufactured-solution convergence study.
    Convergence(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: Option<Method>,
    #[arg(long)]
    delta: Option<f64>,
    /// Leave wall-clock times out of the reports.
    #[arg(long)]
    no_timing: bool,
}

const EXIT_SOLVER: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_VERIFY: u8 = 3;

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return EXIT_CONFIG;
    }
    match err.downcast_ref::<monoblock::Error>() {
        Some(monoblock::Error::InvalidMesh(_) | monoblock::Error::InvalidParameter(_)) => EXIT_CONFIG,
        _ => EXIT_SOLVER,
    }
}

fn init_threads() -> Result<(), ConfigError> {
    let Ok(raw) = std::env::var("MONOBLOCK_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| ConfigError::Invalid(format!("MONOBLOCK_THREADS must be a count, got {raw:?}")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| ConfigError::Invalid(format!("thread pool: {e}")))?;
    }
    Ok(())
}

type Handler = fn(&ExperimentConfig, &Settings) -> anyhow::Result<Status>;

fn run(cli: Cli) -> anyhow::Result<Status> {
    init_threads()?;
    let (cmd, args): (Handler, Common) = match cli.command {
        Command::Solve(a) => (commands::solve, a),
        Command::Compare(a) => (commands::compare, a),
        Command::Verify(a) => (commands::verify, a),
        Command::Convergence(a) => (commands::convergence, a),
    };
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(m) = args.method {
        cfg.method = m;
    }
    if let Some(d) = args.delta {
        cfg.delta = d;
    }
    let out = args.out.or_else(|| cfg.output.dir.clone().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"));
    cmd(&cfg, &Settings { out: &out, timing: !args.no_timing })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(Status::Passed) => ExitCode::SUCCESS,
        Ok(Status::Failed) => ExitCode::from(EXIT_VERIFY),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
