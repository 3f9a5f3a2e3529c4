//! Quasi-static solution drivers: Newton-Raphson under load-factor control
//! and dissipation-based path following through snap-backs.

mod analysis;
mod linear;
mod newton;
mod path;
mod settings;
#[cfg(test)]
pub(crate) mod testing;
mod trace;

pub use analysis::{default_switch_threshold, run_analysis, AnalysisFailure};
pub use linear::{BandOrdering, BandedLu};
pub use newton::{newton_solve, Linearization, NewtonOutcome};
pub use path::{Drive, PathFollower, SolverState, StepOutcome};
pub use settings::{ControlMode, ConvergenceSettings, MonitorStop, StepControl};
pub use trace::{Monitor, MonitorKind, SolverTrace, TraceRow, TraceWriter};

use crate::fem::FemError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("nonconvergence: {0}")]
    NonConvergence(String),
    #[error("singular system matrix (pivot at unknown {0})")]
    Singular(usize),
    #[error("no dissipative solution for the requested increment")]
    NoDissipation,
    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Fem(#[from] FemError),
}
