//! Subcommand implementations.

pub mod export;
pub mod identities;
pub mod nondegeneracy;
pub mod roundtrip;
pub mod stability;

pub use export::run_evolve;
pub use identities::run_identities;
pub use nondegeneracy::run_nondegeneracy_scan;
pub use roundtrip::run_roundtrip;
pub use stability::run_stability;

use crate::config::{Command, ExperimentConfig};
use crate::error::Result;
use crate::report::Report;

/// Runs the subcommand of `cfg`. Every subcommand except `evolve` returns its CSV unwritten.
pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    match cfg.command() {
        Command::Identities => run_identities(cfg),
        Command::Stability => run_stability(cfg),
        Command::Nondegeneracy => run_nondegeneracy_scan(cfg),
        Command::Roundtrip => run_roundtrip(cfg),
        Command::Evolve => run_evolve(cfg),
    }
}
