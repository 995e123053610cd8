//! Error taxonomy with stable process exit codes.
//!
//! The CLI maps every failure to one of a few documented codes so scripts
//! can tell usage problems from unreadable files, malformed files, model
//! violations, and tripped resource guards.

use crate::regression::AnalysisError;
use mnb_core::adversary::AdversaryError;
use mnb_core::opf::GridError;
use mnb_core::regret::ExperimentError;
use std::path::PathBuf;

/// Exit code for CLI usage errors (owned by clap).
pub const EXIT_USAGE: i32 = 2;
/// Exit code for filesystem problems.
pub const EXIT_IO: i32 = 3;
/// Exit code for malformed input files.
pub const EXIT_FORMAT: i32 = 4;
/// Exit code for model/config invariant violations.
pub const EXIT_VALIDATION: i32 = 5;
/// Exit code for the experiment step-budget guard.
pub const EXIT_BUDGET: i32 = 6;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("{0}")]
    Validation(String),
}

impl LabError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    pub fn format(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Self::Format { path: path.into(), line, message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Io { .. } => EXIT_IO,
            Self::Format { .. } => EXIT_FORMAT,
            Self::Experiment(ExperimentError::StepBudgetExceeded { .. }) => EXIT_BUDGET,
            _ => EXIT_VALIDATION,
        }
    }
}
