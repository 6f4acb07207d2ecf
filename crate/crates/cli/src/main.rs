use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod exit;
mod settings;
mod svg;

use exit::CliError;
use settings::{load_config, CliConfig, Shared};

const EXIT_CODES: &str = "Exit status:
  0  all checks passed
  1  at least one check failed
  2  usage, input or output error
  3  numerical error";

/// Verify improved log-Sobolev and hypercontractivity bounds for the
/// n-qubit depolarizing semigroup.
#[derive(Parser)]
#[command(name = "qhyper", version, after_help = EXIT_CODES)]
struct Cli {
    /// TOML file with default values for any shared flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the inequality checks on an operator file.
    Verify(Shared),
    /// Fuzz the lemma and theorem checks on seeded random instances.
    Fuzz(Shared),
    /// Write the alpha curve and the pure-state mixture comparison tables.
    Figure1(Shared),
    /// Solve the exponent ODE and compare with the weak and standard schedules.
    Exponent(Shared),
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let file = match &cli.config {
        Some(path) => load_config(path)?,
        None => Shared::default(),
    };
    let (flags, cmd): (Shared, fn(&CliConfig) -> Result<u8, CliError>) = match cli.command {
        Command::Verify(s) => (s, commands::verify),
        Command::Fuzz(s) => (s, commands::fuzz),
        Command::Figure1(s) => (s, commands::figure1),
        Command::Exponent(s) => (s, commands::exponent),
    };
    let cfg = CliConfig::resolve(flags.merged(file))?;
    cmd(&cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
