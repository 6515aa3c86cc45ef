//! Batch front end: run configuration, artifact files and profile
//! comparison around [`pnstencil_core`].

pub mod artifacts;
pub mod compare;
pub mod config;
pub mod run;

use std::io;
use std::path::PathBuf;

use pnstencil_core::pn::PnError;
use pnstencil_core::problems::ProblemError;
use pnstencil_core::solver::SolverError;
use pnstencil_core::stencil::StencilError;
use thiserror::Error;

pub use artifacts::{FieldFile, Profile, SolveLog};
pub use compare::{compare_profiles, Metrics};
pub use config::{EquationChoice, ProblemSource, RunConfig};
pub use run::{run, RunSummary};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Equations(#[from] PnError),
    #[error("stencil compilation failed: {0}")]
    Stencil(#[from] StencilError),
    #[error("solver: {0}")]
    Solver(#[from] SolverError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {msg}", path.display())]
    Format { path: PathBuf, msg: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Problem(_) | CliError::Equations(_) => EXIT_CONFIG,
            CliError::Format { .. } => EXIT_CONFIG,
            CliError::Stencil(_) | CliError::Solver(_) | CliError::Io { .. } => EXIT_INTERNAL,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}
