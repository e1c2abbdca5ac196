use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use trickle_core::model::{SolverConfig, TimingModel};
use trickle_core::redundancy::{Policy, DEFAULT_OFFSET, DEFAULT_STEP};
use trickle_core::simulator::{CounterRule, TrickleParams};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "trickle",
    version,
    about = "Per-node Trickle transmission probabilities: model, simulator, fairness"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a topology file.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Solve the analytical model on a topology.
    Solve(SolveArgs),
    /// Run the discrete-event Trickle simulator.
    Simulate(SimulateArgs),
    /// Compare a model solution with a simulation result.
    Compare(CompareArgs),
    /// Regenerate every output for one of the built-in scenarios.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Subcommand)]
pub enum GenKind {
    /// Rectangular lattice with unit-disk connectivity.
    Grid {
        #[arg(long, default_value_t = 7)]
        rows: usize,
        #[arg(long, default_value_t = 7)]
        cols: usize,
        #[arg(long, default_value_t = 1.0)]
        spacing: f64,
        /// Radio range; defaults to √2 (8-neighborhood at unit spacing).
        #[arg(long, default_value_t = std::f64::consts::SQRT_2)]
        range: f64,
        /// Output file; standard output if omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Nodes placed uniformly in a square with unit-disk connectivity.
    Random {
        #[arg(long, default_value_t = 49)]
        n: usize,
        #[arg(long)]
        side: f64,
        #[arg(long)]
        range: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
#[group(skip)]
pub struct PolicyArgs {
    /// Same redundancy constant on every node.
    #[arg(
        long,
        value_name = "K",
        required_unless_present = "heuristic",
        conflicts_with = "heuristic"
    )]
    pub fixed_k: Option<u32>,
    /// Per-node K = ceil((degree - offset) / step), at least 1.
    #[arg(long)]
    pub heuristic: bool,
    #[arg(long, requires = "heuristic", help = format!("Heuristic step [default: {DEFAULT_STEP}]"))]
    pub step: Option<u32>,
    #[arg(long, requires = "heuristic", help = format!("Heuristic offset [default: {DEFAULT_OFFSET}]"))]
    pub offset: Option<u32>,
}

impl PolicyArgs {
    pub fn policy(&self) -> Result<Policy, CliError> {
        match self.fixed_k {
            Some(_) if self.step.is_some() || self.offset.is_some() => Err(CliError::Usage(
                "--step and --offset apply only with --heuristic".into(),
            )),
            Some(k) => Ok(Policy::Fixed { k }),
            None => Ok(Policy::Heuristic {
                step: self.step.unwrap_or(DEFAULT_STEP),
                offset: self.offset.unwrap_or(DEFAULT_OFFSET),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TimingArg {
    /// Neighbor-count law evaluated at the mean transmission instant.
    MeanInstant,
    /// Neighbor-count law averaged over the transmission instant.
    Marginal,
}

impl From<TimingArg> for TimingModel {
    fn from(t: TimingArg) -> Self {
        match t {
            TimingArg::MeanInstant => TimingModel::MeanInstant,
            TimingArg::Marginal => TimingModel::Marginal,
        }
    }
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value = "mean-instant")]
    pub timing: TimingArg,
    #[arg(long, default_value_t = 1e-10)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1.0)]
    pub damping: f64,
    /// Starting probability for nodes that are not forced to transmit.
    #[arg(long, default_value_t = 0.5)]
    pub init: f64,
}

impl SolverArgs {
    pub fn config(&self) -> SolverConfig {
        SolverConfig {
            tolerance: self.tolerance,
            max_iterations: self.max_iter,
            damping: self.damping,
            init: self.init,
            timing: self.timing.into(),
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CounterArg {
    DistinctSenders,
    EveryMessage,
}

impl From<CounterArg> for CounterRule {
    fn from(c: CounterArg) -> Self {
        match c {
            CounterArg::DistinctSenders => CounterRule::DistinctSenders,
            CounterArg::EveryMessage => CounterRule::EveryMessage,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulatorArgs {
    /// Measured steady-state intervals per run.
    #[arg(long, default_value_t = 10)]
    pub intervals: usize,
    #[arg(long, default_value_t = 30)]
    pub runs: usize,
    /// Steady-state interval length in seconds.
    #[arg(long, default_value_t = 16.0)]
    pub interval_length: f64,
    /// Intervals discarded before counting.
    #[arg(long, default_value_t = 2)]
    pub warmup: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "distinct-senders")]
    pub counter: CounterArg,
}

impl SimulatorArgs {
    pub fn params(&self) -> TrickleParams {
        TrickleParams {
            interval_length: self.interval_length,
            measured_intervals: self.intervals,
            warmup_intervals: self.warmup,
            runs: self.runs,
            base_seed: self.seed,
            counter: self.counter.into(),
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Topology file (JSON).
    #[arg(long)]
    pub topo: PathBuf,
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Solution file (JSON); a CSV and a manifest are written alongside.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Topology file (JSON).
    #[arg(long)]
    pub topo: PathBuf,
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[command(flatten)]
    pub sim: SimulatorArgs,
    /// Result file (JSON); a CSV and a manifest are written alongside.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub sim: PathBuf,
    /// Comparison CSV.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TableArg {
    #[value(name = "1")]
    Grid,
    #[value(name = "2")]
    Random,
    #[value(name = "3")]
    Heuristic,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// 1: grid, fixed K 1..6. 2: bundled random topology, fixed K 1..6.
    /// 3: grid, heuristic K with offsets 2 and 0.
    #[arg(long, value_enum)]
    pub table: TableArg,
    #[arg(long)]
    pub out: PathBuf,
    /// Write into a non-empty output directory.
    #[arg(long)]
    pub force: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub sim: SimulatorArgs,
}
