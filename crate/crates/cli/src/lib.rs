//! File formats and command-line front end for `costkit-core`.
//!
//! [`document`] defines the versioned JSON document that carries a structure
//! between commands, [`export`] writes geometry for other tools, and
//! [`commands`] implements the `costkit` binary on top of both.

pub mod commands;
pub mod document;
pub mod export;

use costkit_core::continuum::ContinuumError;
use costkit_core::cost::CostError;
use costkit_core::editing::{EditError, ParseLogError};
use costkit_core::generators::GeneratorError;
use costkit_core::rigidity::RigidityError;

pub use commands::{run, Cli};
pub use document::{load, save, CostDocument, DocError, Structure};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Doc(#[from] DocError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Edit(#[from] EditError),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Rigidity(#[from] RigidityError),
    #[error(transparent)]
    Continuum(#[from] ContinuumError),
    #[error(transparent)]
    ParseLog(#[from] ParseLogError),
    #[error("{0}")]
    Usage(String),
}
