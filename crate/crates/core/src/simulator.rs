//! Discrete-event simulation of steady-state Trickle with unsynchronized
//! intervals.
//!
//! Every node runs fixed-length intervals of `I` seconds starting at its own
//! phase offset, drawn uniformly from `[0, I)`. In each interval it picks an
//! instant uniformly in `[I/2, I)` and transmits there if it has heard fewer
//! than `K_i` messages since the interval began. Delivery to all neighbors
//! is instantaneous and lossless, and every message counts as consistent.
//!
//! Randomness: node `i` in run `r` draws from its own ChaCha8 stream, seeded
//! with `base_seed` and selected with stream id `(r << 32) | i`. The phase is
//! the first draw, followed by one instant per interval, so results do not
//! depend on event interleaving or on how runs are scheduled across threads.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::redundancy::{KAssignment, Policy};
use crate::topology::Topology;

/// Two-sided 95% normal quantile.
const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error("invalid simulation parameters: {0}")]
    InvalidParams(String),
    #[error("K assignment has {got} entries for {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// What increments a node's counter `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CounterRule {
    /// Every received message. A neighbor whose interval is shifted against
    /// ours can land two instants inside one of our intervals, so with this
    /// rule `y_i < K_i` does not guarantee a transmission.
    EveryMessage,
    /// The first message from each neighbor within the interval. Each
    /// neighbor contributes at most once, so `y_i < K_i` always transmits.
    #[default]
    DistinctSenders,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrickleParams {
    /// Steady-state interval `I = I_min · 2^I_max`, seconds.
    pub interval_length: f64,
    pub measured_intervals: usize,
    /// Intervals per node discarded before counting starts.
    pub warmup_intervals: usize,
    pub runs: usize,
    pub base_seed: u64,
    #[serde(default)]
    pub counter: CounterRule,
}

impl Default for TrickleParams {
    fn default() -> Self {
        Self {
            interval_length: 16.0,
            measured_intervals: 10,
            warmup_intervals: 2,
            runs: 30,
            base_seed: 1,
            counter: CounterRule::default(),
        }
    }
}

impl TrickleParams {
    pub fn validate(&self) -> Result<(), SimulationError> {
        if !(self.interval_length.is_finite() && self.interval_length > 0.0) {
            return Err(SimulationError::InvalidParams(format!(
                "interval_length must be positive, got {}",
                self.interval_length
            )));
        }
        if self.measured_intervals == 0 {
            return Err(SimulationError::InvalidParams(
                "measured_intervals must be at least 1".into(),
            ));
        }
        if self.runs == 0 {
            return Err(SimulationError::InvalidParams(
                "runs must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Intervals each node executes: warmup, measured, and one trailing
    /// interval so that neighbors are still active until every node's last
    /// measured interval has ended.
    fn total_intervals(&self) -> usize {
        self.warmup_intervals + self.measured_intervals + 1
    }

    fn is_measured(&self, interval: usize) -> bool {
        interval >= self.warmup_intervals
            && interval < self.warmup_intervals + self.measured_intervals
    }
}

/// One transmit-or-suppress decision, reported to observers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub node: usize,
    pub interval: usize,
    pub interval_start: f64,
    pub time: f64,
    /// Messages received since the node's interval began.
    pub heard: u32,
    pub k: u32,
    pub transmitted: bool,
    pub measured: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum EventKind {
    IntervalStart,
    Fire,
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    node: usize,
    kind: EventKind,
    interval: usize,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    // Reversed so that BinaryHeap pops the earliest event; ties go to the
    // lower node id.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.node.cmp(&self.node))
            .then_with(|| other.kind.cmp(&self.kind))
    }
}

fn node_rng(base_seed: u64, run: usize, node: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(((run as u64) << 32) | node as u64);
    rng
}

fn check_inputs(
    topology: &Topology,
    k: &KAssignment,
    params: &TrickleParams,
) -> Result<(), SimulationError> {
    params.validate()?;
    if k.len() != topology.len() {
        return Err(SimulationError::LengthMismatch {
            expected: topology.len(),
            got: k.len(),
        });
    }
    if k.k.contains(&0) {
        return Err(SimulationError::InvalidParams(
            "redundancy constants must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Executes run number `run` and returns the per-node transmission counts
/// over the measured intervals. `observer` sees every decision in time order.
pub fn run_once(
    topology: &Topology,
    k: &KAssignment,
    params: &TrickleParams,
    run: usize,
    mut observer: impl FnMut(&Decision),
) -> Result<Vec<u32>, SimulationError> {
    check_inputs(topology, k, params)?;
    Ok(simulate_run(topology, k, params, run, &mut observer))
}

fn simulate_run(
    topology: &Topology,
    k: &KAssignment,
    params: &TrickleParams,
    run: usize,
    observer: &mut dyn FnMut(&Decision),
) -> Vec<u32> {
    let n = topology.len();
    let len = params.interval_length;
    let total = params.total_intervals();

    let mut rngs: Vec<ChaCha8Rng> = (0..n).map(|i| node_rng(params.base_seed, run, i)).collect();
    let phases: Vec<f64> = rngs.iter_mut().map(|r| r.random_range(0.0..len)).collect();
    let mut heard = vec![0u32; n];
    let mut counts = vec![0u32; n];
    // (receiver, sender) pairs already counted in the receiver's interval.
    let distinct = params.counter == CounterRule::DistinctSenders;
    let mut last_heard: Vec<Vec<usize>> = if distinct {
        (0..n)
            .map(|i| vec![usize::MAX; topology.degree(i)])
            .collect()
    } else {
        Vec::new()
    };
    let mut interval_of = vec![0usize; n];

    let mut queue = BinaryHeap::with_capacity(2 * n);
    for (node, &phase) in phases.iter().enumerate() {
        queue.push(Event {
            time: phase,
            node,
            kind: EventKind::IntervalStart,
            interval: 0,
        });
    }

    while let Some(ev) = queue.pop() {
        match ev.kind {
            EventKind::IntervalStart => {
                heard[ev.node] = 0;
                interval_of[ev.node] = ev.interval;
                let start = phases[ev.node] + ev.interval as f64 * len;
                let fire = start + rngs[ev.node].random_range(len / 2.0..len);
                queue.push(Event {
                    time: fire,
                    node: ev.node,
                    kind: EventKind::Fire,
                    interval: ev.interval,
                });
                if ev.interval + 1 < total {
                    queue.push(Event {
                        time: phases[ev.node] + (ev.interval + 1) as f64 * len,
                        node: ev.node,
                        kind: EventKind::IntervalStart,
                        interval: ev.interval + 1,
                    });
                }
            }
            EventKind::Fire => {
                let kk = k.get(ev.node);
                let transmitted = heard[ev.node] < kk;
                let measured = params.is_measured(ev.interval);
                observer(&Decision {
                    node: ev.node,
                    interval: ev.interval,
                    interval_start: phases[ev.node] + ev.interval as f64 * len,
                    time: ev.time,
                    heard: heard[ev.node],
                    k: kk,
                    transmitted,
                    measured,
                });
                if transmitted {
                    if measured {
                        counts[ev.node] += 1;
                    }
                    for &j in topology.neighbors(ev.node) {
                        if distinct {
                            let slot = topology
                                .neighbors(j)
                                .binary_search(&ev.node)
                                .expect("symmetric");
                            if last_heard[j][slot] == interval_of[j] {
                                continue;
                            }
                            last_heard[j][slot] = interval_of[j];
                        }
                        heard[j] += 1;
                    }
                }
            }
        }
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    /// Half-width of the 95% confidence interval; `None` with a single run.
    pub ci95: Option<f64>,
}

/// Mean of the per-run frequencies `count / measured_intervals`, with a
/// normal-approximation 95% interval across runs.
pub fn estimate_from_counts(counts_per_run: &[u32], measured_intervals: usize) -> Estimate {
    let runs = counts_per_run.len();
    let freqs: Vec<f64> = counts_per_run
        .iter()
        .map(|&c| c as f64 / measured_intervals as f64)
        .collect();
    let mean = freqs.iter().sum::<f64>() / runs as f64;
    let ci95 = (runs >= 2).then(|| {
        let var = freqs.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
        Z_95 * (var / runs as f64).sqrt()
    });
    Estimate { mean, ci95 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeEstimate {
    pub id: usize,
    pub mean_p: f64,
    pub ci95: Option<f64>,
    pub counts_per_run: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub params: TrickleParams,
    pub policy: Policy,
    pub per_node: Vec<NodeEstimate>,
}

impl SimulationResult {
    pub fn mean_p(&self) -> Vec<f64> {
        self.per_node.iter().map(|n| n.mean_p).collect()
    }

    pub fn len(&self) -> usize {
        self.per_node.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_node.is_empty()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), SimulationError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["id", "mean_p", "ci95"])?;
        for n in &self.per_node {
            let ci = n.ci95.map(|c| c.to_string()).unwrap_or_default();
            w.write_record([n.id.to_string(), n.mean_p.to_string(), ci])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<(), SimulationError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self, SimulationError> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Recomputes per-node estimates from the stored counts.
pub fn estimate_probabilities(result: &SimulationResult) -> Vec<Estimate> {
    result
        .per_node
        .iter()
        .map(|n| estimate_from_counts(&n.counts_per_run, result.params.measured_intervals))
        .collect()
}

/// Runs `params.runs` independent repetitions (in parallel) and aggregates
/// per-node transmission frequencies.
pub fn run_steady_state(
    topology: &Topology,
    k: &KAssignment,
    params: &TrickleParams,
) -> Result<SimulationResult, SimulationError> {
    check_inputs(topology, k, params)?;
    let per_run: Vec<Vec<u32>> = (0..params.runs)
        .into_par_iter()
        .map(|run| simulate_run(topology, k, params, run, &mut |_| {}))
        .collect();
    let per_node = (0..topology.len())
        .map(|id| {
            let counts: Vec<u32> = per_run.iter().map(|c| c[id]).collect();
            let est = estimate_from_counts(&counts, params.measured_intervals);
            NodeEstimate {
                id,
                mean_p: est.mean,
                ci95: est.ci95,
                counts_per_run: counts,
            }
        })
        .collect();
    Ok(SimulationResult {
        params: *params,
        policy: k.policy,
        per_node,
    })
}
