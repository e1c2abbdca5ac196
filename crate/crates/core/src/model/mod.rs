//! Analytical model of per-node transmission probabilities in steady-state
//! Trickle with per-node redundancy constants.
//!
//! Node `i` with `y_i < K_i` neighbors always transmits. Otherwise it
//! transmits when its instant is among the first `K_i` (`P_F`) or when it
//! comes later but fewer than `K_i` of the earlier neighbors actually
//! transmitted (`P_LO`). Because `P_LO` depends on the neighbors' own
//! probabilities, the `N` equations are solved jointly as a fixed point.

mod distribution;
mod last_opportunity;
mod solver;

use thiserror::Error;

pub use distribution::{yt_pmf, yt_pmf_at, TimingModel, YtDistribution, MAX_DEGREE, MEAN_INSTANT};
pub use last_opportunity::{
    gamma_exact, p_first, p_last_opportunity, subset_cdf_average, subset_cdf_table, MAX_ENUMERATION,
};
pub use solver::{
    expected_message_count, solve_fixed_point, update_map, ModelSolution, NodeSolution,
    SolverConfig, UpdateMap,
};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("node degree {degree} exceeds the supported maximum of {max}")]
    DegreeTooLarge { degree: usize, max: usize },
    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("invalid arguments: {0}")]
    InvalidArguments(String),
    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite probability at node {node} after {iteration} iterations")]
    NonFinite { iteration: usize, node: usize },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
