//! Fairness statistics over per-node transmission probabilities and
//! model-versus-simulation comparison.
//!
//! `variance` is the population variance (divide by `N`). The sample
//! variance (divide by `N − 1`) is reported alongside as `sample_variance`.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ModelSolution;
use crate::simulator::SimulationResult;
use crate::topology::Topology;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("no probabilities given")]
    Empty,
    #[error("probability {value} at node {node} is outside [0, 1]")]
    OutOfRange { node: usize, value: f64 },
    #[error("model has {model} nodes but simulation has {simulation}")]
    LengthMismatch { model: usize, simulation: usize },
    #[error("expected {expected} probabilities, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("topology has nodes without positions")]
    MissingPositions,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Model,
    Simulation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    pub source: Source,
    pub nodes: usize,
    pub max_p: f64,
    pub min_p: f64,
    pub mean_p: f64,
    pub variance: f64,
    pub sample_variance: Option<f64>,
    pub message_count: f64,
}

impl fmt::Display for FairnessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let src = match self.source {
            Source::Model => "model",
            Source::Simulation => "simulation",
        };
        writeln!(f, "{src} ({} nodes)", self.nodes)?;
        writeln!(f, "  max probability   {:>10.3}", self.max_p)?;
        writeln!(f, "  min probability   {:>10.3}", self.min_p)?;
        writeln!(f, "  mean probability  {:>10.4}", self.mean_p)?;
        writeln!(f, "  variance          {:>10.5}", self.variance)?;
        if let Some(s) = self.sample_variance {
            writeln!(f, "  sample variance   {s:>10.5}")?;
        }
        write!(f, "  message count     {:>10.3}", self.message_count)
    }
}

pub fn fairness(probabilities: &[f64], source: Source) -> Result<FairnessReport, MetricsError> {
    if probabilities.is_empty() {
        return Err(MetricsError::Empty);
    }
    if let Some((node, &value)) = probabilities
        .iter()
        .enumerate()
        .find(|(_, p)| !(0.0..=1.0).contains(*p))
    {
        return Err(MetricsError::OutOfRange { node, value });
    }
    // Welford's running mean and sum of squared deviations.
    let (mut mean, mut m2) = (0.0, 0.0);
    let (mut max_p, mut min_p) = (f64::NEG_INFINITY, f64::INFINITY);
    for (i, &p) in probabilities.iter().enumerate() {
        let delta = p - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (p - mean);
        max_p = max_p.max(p);
        min_p = min_p.min(p);
    }
    let n = probabilities.len();
    Ok(FairnessReport {
        source,
        nodes: n,
        max_p,
        min_p,
        mean_p: mean.clamp(min_p, max_p),
        variance: (m2 / n as f64).max(0.0),
        sample_variance: (n > 1).then(|| (m2 / (n - 1) as f64).max(0.0)),
        message_count: probabilities.iter().sum(),
    })
}

/// Mean probability per degree class, keyed by degree.
pub fn degree_class_means(topology: &Topology, probabilities: &[f64]) -> BTreeMap<usize, f64> {
    let mut acc: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for (i, &p) in probabilities.iter().enumerate() {
        let e = acc.entry(topology.degree(i)).or_default();
        e.0 += p;
        e.1 += 1;
    }
    acc.into_iter()
        .map(|(d, (s, c))| (d, s / c as f64))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub id: usize,
    pub degree: usize,
    pub k: u32,
    pub p_model: f64,
    pub p_sim: f64,
    pub abs_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    pub model: FairnessReport,
    pub simulation: FairnessReport,
    pub max_abs_diff: f64,
}

impl Comparison {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), MetricsError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["id", "degree", "k", "p_model", "p_sim", "abs_diff"])?;
        for r in &self.rows {
            w.write_record([
                r.id.to_string(),
                r.degree.to_string(),
                r.k.to_string(),
                r.p_model.to_string(),
                r.p_sim.to_string(),
                r.abs_diff.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Per-node model and simulated probabilities side by side.
pub fn compare(
    model: &ModelSolution,
    simulation: &SimulationResult,
) -> Result<Comparison, MetricsError> {
    if model.len() != simulation.len() {
        return Err(MetricsError::LengthMismatch {
            model: model.len(),
            simulation: simulation.len(),
        });
    }
    let rows: Vec<ComparisonRow> = model
        .nodes
        .iter()
        .zip(&simulation.per_node)
        .map(|(m, s)| ComparisonRow {
            id: m.id,
            degree: m.degree,
            k: m.k,
            p_model: m.p_tx,
            p_sim: s.mean_p,
            abs_diff: (m.p_tx - s.mean_p).abs(),
        })
        .collect();
    let max_abs_diff = rows.iter().map(|r| r.abs_diff).fold(0.0, f64::max);
    Ok(Comparison {
        model: fairness(&model.p_tx(), Source::Model)?,
        simulation: fairness(&simulation.mean_p(), Source::Simulation)?,
        rows,
        max_abs_diff,
    })
}

/// Writes `x,y,p` rows, one per node, for surface plotting.
pub fn export_surface(
    topology: &Topology,
    probabilities: &[f64],
    path: impl AsRef<Path>,
) -> Result<(), MetricsError> {
    let file = std::fs::File::create(path)?;
    write_surface(topology, probabilities, file)
}

pub fn write_surface<W: Write>(
    topology: &Topology,
    probabilities: &[f64],
    out: W,
) -> Result<(), MetricsError> {
    if !topology.has_positions() {
        return Err(MetricsError::MissingPositions);
    }
    if probabilities.len() != topology.len() {
        return Err(MetricsError::SizeMismatch {
            expected: topology.len(),
            got: probabilities.len(),
        });
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y", "p"])?;
    for (node, p) in topology.nodes().iter().zip(probabilities) {
        let pos = node.position.expect("checked above");
        w.write_record([pos.x.to_string(), pos.y.to_string(), p.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
