//! Batch driver for the WaveHoltz solver: structured configs, single and
//! multi-frequency runs, sweeps, verification suites and refinement studies.

pub mod commands;
pub mod config;
pub mod metric;
pub mod output;
pub mod verify;

pub use config::{ConfigError, Resolved, RunConfig};
pub use metric::waveguide_metric;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] emwaveholtz::Error),
    #[error("{what} did not converge; artifacts written to {dir}")]
    NotConverged { what: String, dir: String },
    #[error("verification failed: {0}")]
    CheckFailed(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for bad input, 3 for non-convergence or a failed check, 4 otherwise.
    pub fn exit_code(&self) -> i32 {
        use emwaveholtz::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::Config(_) | E::Domain(_) | E::Unsupported(_) | E::SizeGuard { .. } | E::Resonance { .. }) => 2,
            CliError::Core(E::NotPositiveDefinite { .. }) => 3,
            CliError::NotConverged { .. } | CliError::CheckFailed(_) => 3,
            CliError::Core(_) | CliError::Io(_) => 4,
        }
    }
}
