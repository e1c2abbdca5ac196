//! The coupled per-node system `P_TX[i] = P_F[i] + P_LO[i]` and its
//! fixed-point solution.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::distribution::{TimingModel, YtDistribution, MAX_DEGREE};
use super::last_opportunity::last_opportunity_unchecked;
use super::ModelError;
use crate::redundancy::{KAssignment, Policy};
use crate::topology::Topology;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Stop once `max_i |F_i(p) − p_i|` drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Mixing weight α in `p ← (1 − α)·p + α·F(p)`.
    pub damping: f64,
    /// Damping used once the residual stalls.
    pub fallback_damping: f64,
    /// Consecutive non-decreasing residuals that trigger the fallback.
    pub stall_window: usize,
    /// Starting probability for nodes with `y_i ≥ K_i`.
    pub init: f64,
    pub timing: TimingModel,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 10_000,
            damping: 1.0,
            fallback_damping: 0.5,
            stall_window: 10,
            init: 0.5,
            timing: TimingModel::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidArguments(msg));
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return bad(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            ));
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1".into());
        }
        for (name, a) in [
            ("damping", self.damping),
            ("fallback_damping", self.fallback_damping),
        ] {
            if !(a > 0.0 && a <= 1.0) {
                return bad(format!("{name} must lie in (0, 1], got {a}"));
            }
        }
        if !(0.0..=1.0).contains(&self.init) {
            return bad(format!("init must lie in [0, 1], got {}", self.init));
        }
        Ok(())
    }
}

/// The update map `F` for one topology and K assignment, with the `Y_T`
/// distributions precomputed per distinct degree.
#[derive(Debug, Clone)]
pub struct UpdateMap<'a> {
    topology: &'a Topology,
    k: &'a KAssignment,
    dists: Vec<Option<YtDistribution>>,
}

impl<'a> UpdateMap<'a> {
    pub fn new(
        topology: &'a Topology,
        k: &'a KAssignment,
        timing: TimingModel,
    ) -> Result<Self, ModelError> {
        if k.len() != topology.len() {
            return Err(ModelError::LengthMismatch {
                expected: topology.len(),
                got: k.len(),
            });
        }
        if let Some(node) = k.k.iter().position(|&k| k == 0) {
            return Err(ModelError::InvalidArguments(format!(
                "node {node} has K = 0"
            )));
        }
        let max_degree = topology.max_degree();
        if max_degree > MAX_DEGREE {
            return Err(ModelError::DegreeTooLarge {
                degree: max_degree,
                max: MAX_DEGREE,
            });
        }
        let mut dists = vec![None; max_degree + 1];
        for y in topology.degrees() {
            if dists[y].is_none() {
                dists[y] = Some(YtDistribution::new(y, timing)?);
            }
        }
        Ok(Self { topology, k, dists })
    }

    pub fn len(&self) -> usize {
        self.topology.len()
    }

    pub fn is_empty(&self) -> bool {
        self.topology.is_empty()
    }

    /// Whether node `i` transmits unconditionally (`y_i < K_i`).
    pub fn is_forced(&self, node: usize) -> bool {
        self.topology.degree(node) < self.k.get(node) as usize
    }

    /// `(P_F[i], P_LO[i])` under neighbor probabilities taken from `current`.
    /// Forced nodes report `(1, 0)`.
    fn node_terms(&self, node: usize, current: &[f64]) -> (f64, f64) {
        if self.is_forced(node) {
            return (1.0, 0.0);
        }
        let k = self.k.get(node) as usize;
        let dist = self.dists[self.topology.degree(node)]
            .as_ref()
            .expect("degree cached");
        let probs: Vec<f64> = self
            .topology
            .neighbors(node)
            .iter()
            .map(|&j| current[j])
            .collect();
        let first = dist.cdf_below(k);
        let last = last_opportunity_unchecked(dist, k, &probs);
        (first, last)
    }

    fn check_input(&self, current: &[f64]) -> Result<(), ModelError> {
        if current.len() != self.len() {
            return Err(ModelError::LengthMismatch {
                expected: self.len(),
                got: current.len(),
            });
        }
        match current.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            Some(&p) => Err(ModelError::InvalidProbability(p)),
            None => Ok(()),
        }
    }

    /// Per-node `(P_F, P_LO)`.
    pub fn terms(&self, current: &[f64]) -> Result<Vec<(f64, f64)>, ModelError> {
        self.check_input(current)?;
        Ok((0..self.len())
            .into_par_iter()
            .map(|i| self.node_terms(i, current))
            .collect())
    }

    /// `F(current)`, clamped to `[0, 1]`.
    pub fn apply(&self, current: &[f64]) -> Result<Vec<f64>, ModelError> {
        Ok(self
            .terms(current)?
            .into_iter()
            .map(|(f, l)| (f + l).clamp(0.0, 1.0))
            .collect())
    }
}

/// One application of the update map.
pub fn update_map(
    topology: &Topology,
    k: &KAssignment,
    current: &[f64],
    timing: TimingModel,
) -> Result<Vec<f64>, ModelError> {
    UpdateMap::new(topology, k, timing)?.apply(current)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSolution {
    pub id: usize,
    pub degree: usize,
    pub k: u32,
    pub p_tx: f64,
    pub p_f: f64,
    pub p_lo: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSolution {
    pub policy: Policy,
    pub timing: TimingModel,
    pub nodes: Vec<NodeSolution>,
    pub iterations: usize,
    /// `max_i |F_i(p) − p_i|` at the returned point.
    pub residual: f64,
    pub converged: bool,
    /// Damping in effect when the iteration stopped.
    pub damping: f64,
}

impl ModelSolution {
    pub fn p_tx(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.p_tx).collect()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), ModelError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["id", "degree", "k", "p_tx", "p_f", "p_lo"])?;
        for n in &self.nodes {
            w.write_record([
                n.id.to_string(),
                n.degree.to_string(),
                n.k.to_string(),
                n.p_tx.to_string(),
                n.p_f.to_string(),
                n.p_lo.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Expected number of messages per interval across the network, `Σ P_TX[i]`.
pub fn expected_message_count(solution: &ModelSolution) -> f64 {
    solution.nodes.iter().map(|n| n.p_tx).sum()
}

/// An iteration counts as progress only if it shrinks the residual by at
/// least this fraction. An undamped iteration can creep toward a stable
/// oscillation with ever smaller decreases that never stall outright.
const MIN_RELATIVE_DECREASE: f64 = 1e-3;

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Damped Jacobi iteration on `p = F(p)`.
///
/// The damping starts at `config.damping` and drops to
/// `config.fallback_damping` once the residual has failed to decrease
/// (by more than 0.1%) for `config.stall_window` consecutive iterations.
/// Hitting `max_iterations` yields a solution with `converged == false`.
pub fn solve_fixed_point(
    topology: &Topology,
    k: &KAssignment,
    config: &SolverConfig,
) -> Result<ModelSolution, ModelError> {
    config.validate()?;
    let map = UpdateMap::new(topology, k, config.timing)?;
    let n = map.len();

    let mut p: Vec<f64> = (0..n)
        .map(|i| if map.is_forced(i) { 1.0 } else { config.init })
        .collect();
    let mut alpha = config.damping;
    let mut previous = f64::INFINITY;
    let mut stalled = 0;
    let mut iterations = 0;
    let mut converged = false;

    let mut image = map.apply(&p)?;
    let mut residual = max_abs_diff(&image, &p);
    loop {
        if let Some(node) = image.iter().position(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite {
                iteration: iterations,
                node,
            });
        }
        if residual < config.tolerance {
            converged = true;
            break;
        }
        if iterations >= config.max_iterations {
            break;
        }
        if residual > previous * (1.0 - MIN_RELATIVE_DECREASE) {
            stalled += 1;
        } else {
            stalled = 0;
        }
        if stalled >= config.stall_window && alpha > config.fallback_damping {
            alpha = config.fallback_damping;
            stalled = 0;
        }
        previous = residual;

        for (pi, fi) in p.iter_mut().zip(&image) {
            *pi = ((1.0 - alpha) * *pi + alpha * fi).clamp(0.0, 1.0);
        }
        iterations += 1;
        image = map.apply(&p)?;
        residual = max_abs_diff(&image, &p);
    }

    let terms = map.terms(&p)?;
    let nodes = (0..n)
        .map(|i| NodeSolution {
            id: i,
            degree: topology.degree(i),
            k: k.get(i),
            p_tx: p[i],
            p_f: terms[i].0,
            p_lo: terms[i].1,
        })
        .collect();
    Ok(ModelSolution {
        policy: k.policy,
        timing: config.timing,
        nodes,
        iterations,
        residual,
        converged,
        damping: alpha,
    })
}
