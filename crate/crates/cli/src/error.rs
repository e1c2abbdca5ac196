use std::path::PathBuf;

use thiserror::Error;
use trickle_core::metrics::MetricsError;
use trickle_core::model::ModelError;
use trickle_core::redundancy::RedundancyError;
use trickle_core::simulator::SimulationError;
use trickle_core::topology::TopologyError;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("solver did not converge for {label}: residual {residual:.3e} after {iterations} iterations")]
    NonConvergence {
        label: String,
        residual: f64,
        iterations: usize,
    },
    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::NonConvergence { .. } => EXIT_NONCONVERGENCE,
            CliError::File { .. } | CliError::Io(_) => EXIT_IO,
        }
    }

    pub fn file(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        CliError::File {
            path: path.into(),
            message: err.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<TopologyError> for CliError {
    fn from(e: TopologyError) -> Self {
        match e {
            TopologyError::Io(_) | TopologyError::Parse(_) => CliError::Io(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<RedundancyError> for CliError {
    fn from(e: RedundancyError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Io(_) | ModelError::Json(_) | ModelError::Csv(_) => {
                CliError::Io(e.to_string())
            }
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<SimulationError> for CliError {
    fn from(e: SimulationError) -> Self {
        match e {
            SimulationError::Io(_) | SimulationError::Json(_) | SimulationError::Csv(_) => {
                CliError::Io(e.to_string())
            }
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::Io(_) | MetricsError::Csv(_) => CliError::Io(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
