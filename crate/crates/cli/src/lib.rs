//! Reproducible experiment driver for the sglab sine-Gordon library: configuration,
//! seeded perturbations, CSV reports and the subcommand runners.

pub mod config;
pub mod error;
pub mod perturb;
pub mod report;
pub mod runners;

pub use config::{Command, ExperimentConfig};
pub use error::{CliError, Result};
pub use report::Report;

/// Runs `cfg` and writes its CSV to the configured output. Returns the report.
pub fn execute(cfg: &ExperimentConfig) -> Result<Report> {
    let report = runners::run(cfg)?;
    if cfg.command() != Command::Evolve {
        report.save(cfg.text("output"))?;
    }
    Ok(report)
}
