//! Experiment plumbing around the `vqrl-core` kernels: JSON experiment
//! configs with locked-in defaults, deterministic CSV/JSON artifacts, and
//! the command implementations behind the `vqrl` binary.
//!
//! The split of responsibilities is strict: everything numeric (simulation,
//! gradients, environments, training) lives in `vqrl-core`; this crate only
//! resolves configuration, moves bytes to and from disk, and formats output
//! tables. All artifacts are deterministic functions of the config and seed.

pub mod artifacts;
pub mod config;
pub mod runner;

use std::io;

/// Errors surfaced by the runner, split by exit code: configuration and
/// compatibility problems exit 1, everything that failed while running
/// exits 2.
#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("{0}")]
    Validation(String),
    #[error("cannot {action} '{path}': {source}")]
    Io {
        action: &'static str,
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{0}")]
    Runtime(String),
}

impl LabError {
    /// Process exit code this error maps to.
    pub fn exit_code(&self) -> u8 {
        match self {
            LabError::Validation(_) => 1,
            _ => 2,
        }
    }

    pub(crate) fn io(action: &'static str, path: &std::path::Path, source: io::Error) -> Self {
        LabError::Io { action, path: path.display().to_string(), source }
    }
}
