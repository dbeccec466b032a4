use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sampled_sde_cli::config::{Purpose, RunConfig, Settings};
use sampled_sde_cli::{commands, Result};

/// Sampled-data SDE simulator with small noise.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    /// `key = value` file; command-line flags take precedence over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one ensemble and write its time series and summary.
    Simulate(Settings),
    /// Print the max/min error table over initial conditions and noise sizes.
    Table(Settings),
    /// Fit the convergence order of an error functional along an eps ladder.
    Rates(Settings),
    /// Probe the standing assumptions of a model.
    Check(Settings),
}

fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(path) => Settings::load_config(path)?,
        None => Settings::default(),
    };
    let (flags, purpose) = match cli.command {
        Command::Simulate(s) => (s, Purpose::Simulate),
        Command::Table(s) => (s, Purpose::Table),
        Command::Rates(s) => (s, Purpose::Rates),
        Command::Check(s) => (s, Purpose::Check),
    };
    let cfg = RunConfig::resolve(flags.overlay(file), purpose)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match purpose {
        Purpose::Simulate => commands::simulate(&cfg, &mut out).map(drop),
        Purpose::Table => commands::table(&cfg, &mut out).map(drop),
        Purpose::Rates => commands::rates(&cfg, &mut out).map(drop),
        Purpose::Check => commands::check(&cfg, &mut out).map(drop),
    }?;
    let _ = out.flush();
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
