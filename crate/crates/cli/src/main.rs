use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sglab_cli::{execute, Command, ExperimentConfig};

/// Sine-Gordon 2-soliton experiments.
#[derive(Parser)]
#[command(name = "sglab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(clap::Args)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Worker threads for sweeps (default: all cores).
    #[arg(long)]
    threads: Option<usize>,

    /// Print the effective configuration and exit.
    #[arg(long)]
    show_config: bool,

    /// `key=value` overrides applied after the file.
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Sub {
    /// Closed-form identity suite.
    Identities(Common),
    /// Perturbed 2-soliton stability sweep.
    Stability(Common),
    /// Nondegeneracy integral scan.
    Nondegeneracy(Common),
    /// Descent/ascent round trips and permutability.
    Roundtrip(Common),
    /// Trajectory export.
    Evolve(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Sub::Identities(c) => (Command::Identities, c),
        Sub::Stability(c) => (Command::Stability, c),
        Sub::Nondegeneracy(c) => (Command::Nondegeneracy, c),
        Sub::Roundtrip(c) => (Command::Roundtrip, c),
        Sub::Evolve(c) => (Command::Evolve, c),
    };
    match run(command, common) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command, common: Common) -> anyhow::Result<bool> {
    let cfg = ExperimentConfig::load(command, common.config.as_deref(), &common.overrides)?;
    if common.show_config {
        for (k, v) in cfg.entries() {
            println!("{k} = {v}");
        }
        return Ok(true);
    }
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let report = execute(&cfg)?;
    for line in &report.notes {
        eprintln!("{line}");
    }
    eprintln!("{}: {}", command.name(), if report.passed { "all thresholds pass" } else { "thresholds FAILED" });
    Ok(report.passed)
}
