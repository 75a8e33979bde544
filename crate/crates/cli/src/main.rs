mod commands;
mod error;
mod scenario;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Ctx;
use error::CliError;
use scenario::Scenario;

/// Elliptic lattices, difference-equation expansions and their convergence.
#[derive(Parser)]
#[command(name = "elliptic", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Number of terms (or lattice half-width), overriding params.n.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Suppress summaries on standard error.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Write the lattice as CSV.
    Lattice,
    /// Solve the equation and write the solution as JSON.
    Solve,
    /// Run the invariant checks and write a pass/fail report.
    Verify,
    /// Write empirical and predicted convergence rates over a grid as CSV.
    Ratemap,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Validation("--config PATH is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let scenario = Scenario::parse(&text)?;
    let ctx = Ctx { n: cli.n, quiet: cli.quiet };

    let mut out: Box<dyn Write> = match cli.out.as_ref().or(scenario.params.out.as_ref()) {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    };
    let result = match cli.command {
        Command::Lattice => commands::run_lattice(&scenario, &ctx, &mut out),
        Command::Solve => commands::run_solve(&scenario, &ctx, &mut out),
        Command::Verify => commands::run_verify(&scenario, &ctx, &mut out),
        Command::Ratemap => commands::run_ratemap(&scenario, &ctx, &mut out),
    };
    out.flush()?;
    result
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(if cli.quiet { "off" } else { "warn" }))
        .init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
