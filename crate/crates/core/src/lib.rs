//! Transmission-load fairness in steady-state Trickle networks.
//!
//! * [`topology`]: grid and random unit-disk topologies, JSON persistence.
//! * [`redundancy`]: fixed or neighbor-count-driven redundancy constants.
//! * [`model`]: the per-node fixed-point probability model.
//! * [`simulator`]: discrete-event steady-state Trickle, used as an oracle.
//! * [`metrics`]: fairness statistics and model/simulation comparison.

pub mod metrics;
pub mod model;
pub mod redundancy;
pub mod simulator;
pub mod topology;

pub use metrics::{compare, fairness, Comparison, FairnessReport, Source};
pub use model::{solve_fixed_point, ModelSolution, SolverConfig, TimingModel};
pub use redundancy::{assign_k, calculate_k, KAssignment, Policy};
pub use simulator::{run_steady_state, SimulationResult, TrickleParams};
pub use topology::{generate_grid, generate_random_udg, load_topology, save_topology, Topology};
