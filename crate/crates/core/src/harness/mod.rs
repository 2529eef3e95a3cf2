//! Error norms, convergence studies, run configuration and CSV output.

mod config;
mod convergence;
mod error;
mod snapshots;

pub use config::{parse_list, Config, ConfigFile};
pub use convergence::{convergence_study, fit_slope, scenario_oracle, ConvergenceReport, ConvergenceRow};
pub use error::{cdf_sup_distance, error_vs_oracle, mc_cross_check, ErrorReport, McComparison};
pub use snapshots::{default_snapshot_times, emit_snapshots, read_snapshot, SnapshotTable};

use std::path::PathBuf;

use thiserror::Error;

use crate::model::ModelError;
use crate::montecarlo::McError;
use crate::solver::SolverError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_INSTABILITY: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("model validation failed: {0}")]
    Validation(#[from] ModelError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{}{source}", dx.map(|d| format!("run with dx = {d} failed: ")).unwrap_or_default())]
    Solver { source: SolverError, dx: Option<f64> },
    #[error("run with dx = {dx} is unstable: {source}")]
    UnstableRun { dx: f64, source: SolverError },
    #[error("Monte Carlo failed: {0}")]
    MonteCarlo(#[from] McError),
    #[error("I/O error on {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl HarnessError {
    /// Wraps a solver error, singling out instabilities of a study row.
    pub fn from_solver(source: SolverError, dx: Option<f64>) -> Self {
        match (source, dx) {
            (SolverError::Model(e), _) => HarnessError::Validation(e),
            (source @ SolverError::Instability { .. }, Some(dx)) => HarnessError::UnstableRun { dx, source },
            (source, dx) => HarnessError::Solver { source, dx },
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }

    /// Process exit code: 2 for invalid input, 3 for instability, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::UnstableRun { .. } => EXIT_INSTABILITY,
            HarnessError::Solver { source: SolverError::Instability { .. }, .. } => EXIT_INSTABILITY,
            HarnessError::Io { .. } => EXIT_IO,
            _ => EXIT_VALIDATION,
        }
    }
}

impl From<SolverError> for HarnessError {
    fn from(e: SolverError) -> Self {
        HarnessError::from_solver(e, None)
    }
}
