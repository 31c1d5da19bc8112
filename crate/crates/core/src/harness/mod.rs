//! Experiment orchestration: config files, sweep/point execution, and
//! persistent, resumable, hash-verified artifacts.

pub mod binfmt;
pub mod config;
pub mod export;
pub mod manifest;
pub mod run;

pub use config::ExperimentConfig;
pub use manifest::{FileDigest, PointRecord, PointStatus, RunManifest, SweepSummary};
pub use run::{
    export_tables, persist_point, point_dir_name, run_point, run_sweep, run_sweep_with,
    PointArtifacts, PointEvent, SweepOutcome,
};

use std::path::PathBuf;

use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::engine::EngineError;
use crate::model::ModelError;
use crate::observables::ObservableError;
use crate::quench::QuenchError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed artifact: {reason}")]
    Format { path: PathBuf, reason: String },
    #[error("point {parameter} = {value} failed: {reason}")]
    Point {
        parameter: String,
        value: f64,
        reason: String,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Quench(#[from] QuenchError),
    #[error(transparent)]
    Observable(#[from] ObservableError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

impl HarnessError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// True when the failure traces back to the propagation engine.
    pub fn is_engine_failure(&self) -> bool {
        match self {
            HarnessError::Engine(_) => true,
            HarnessError::Observable(ObservableError::Instance { .. }) => true,
            HarnessError::Observable(ObservableError::Engine(_)) => true,
            HarnessError::Quench(QuenchError::Engine(_)) => true,
            _ => false,
        }
    }
}
