//! Network topologies: node placement, unit-disk adjacency and the JSON
//! file format used by the CLI.
//!
//! A [`Topology`] is either geometric (positions plus a radio range, edges
//! derived from distance) or explicit (an edge list, positions optional).
//! Both forms expose the same neighbor lists and degrees.

use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative slack on `R²` when testing `d² ≤ R²`, so that a range of `√2`
/// on an integer lattice still picks up the diagonals.
pub const RANGE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("duplicate node id {0}")]
    DuplicateId(usize),
    #[error("node ids must be contiguous from 0; missing id {0}")]
    NonContiguousIds(usize),
    #[error("edge [{0}, {1}] references an unknown node")]
    UnknownNode(usize, usize),
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("node {0} has no position but a range was given")]
    MissingPosition(usize),
    #[error("exactly one of `range` and `edges` must be set")]
    AmbiguousAdjacency,
    #[error("failed to parse topology file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    fn distance_squared(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: usize,
    pub position: Option<Point>,
}

/// Undirected, irreflexive graph over nodes `0..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    nodes: Vec<Node>,
    range: Option<f64>,
    neighbors: Vec<Vec<usize>>,
}

/// Returns true when two points are within `range` under the tolerance rule.
pub fn in_range(a: &Point, b: &Point, range: f64) -> bool {
    a.distance_squared(b) <= range * range * (1.0 + RANGE_TOLERANCE)
}

impl Topology {
    /// Builds a unit-disk graph over positioned nodes.
    pub fn from_range(points: Vec<Point>, range: f64) -> Result<Self, TopologyError> {
        if points.is_empty() {
            return Err(TopologyError::InvalidParameter(
                "topology needs at least one node".into(),
            ));
        }
        if !(range.is_finite() && range > 0.0) {
            return Err(TopologyError::InvalidParameter(format!(
                "range must be positive, got {range}"
            )));
        }
        let n = points.len();
        let mut neighbors = vec![Vec::new(); n];
        for i in 0..n {
            for j in (i + 1)..n {
                if in_range(&points[i], &points[j], range) {
                    neighbors[i].push(j);
                    neighbors[j].push(i);
                }
            }
        }
        let nodes = points
            .into_iter()
            .enumerate()
            .map(|(id, p)| Node {
                id,
                position: Some(p),
            })
            .collect();
        Ok(Self {
            nodes,
            range: Some(range),
            neighbors,
        })
    }

    /// Builds a topology from an explicit edge list. Edges are unordered;
    /// `[a, b]` and `[b, a]` describe the same link and duplicates collapse.
    pub fn from_edges(
        positions: Vec<Option<Point>>,
        edges: &[(usize, usize)],
    ) -> Result<Self, TopologyError> {
        if positions.is_empty() {
            return Err(TopologyError::InvalidParameter(
                "topology needs at least one node".into(),
            ));
        }
        let n = positions.len();
        let mut sets = vec![BTreeSet::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(TopologyError::UnknownNode(a, b));
            }
            if a == b {
                return Err(TopologyError::SelfLoop(a));
            }
            sets[a].insert(b);
            sets[b].insert(a);
        }
        let nodes = positions
            .into_iter()
            .enumerate()
            .map(|(id, position)| Node { id, position })
            .collect();
        let neighbors = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        Ok(Self {
            nodes,
            range: None,
            neighbors,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn range(&self) -> Option<f64> {
        self.range
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.neighbors[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.neighbors[node].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.neighbors.iter().map(Vec::len).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn mean_degree(&self) -> f64 {
        let total: usize = self.neighbors.iter().map(Vec::len).sum();
        total as f64 / self.len() as f64
    }

    /// Unordered edges as `(low, high)` pairs in ascending order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, ns) in self.neighbors.iter().enumerate() {
            out.extend(ns.iter().filter(|&&j| j > i).map(|&j| (i, j)));
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_positions(&self) -> bool {
        self.nodes.iter().all(|n| n.position.is_some())
    }

    pub fn position(&self, node: usize) -> Option<Point> {
        self.nodes[node].position
    }

    pub fn to_json(&self) -> Result<String, TopologyError> {
        let file = TopologyFile::from(self);
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self, TopologyError> {
        let file: TopologyFile = serde_json::from_str(text)?;
        file.into_topology()
    }
}

/// Nodes on a `rows × cols` lattice at `(r·spacing, c·spacing)`, row-major ids.
pub fn generate_grid(
    rows: usize,
    cols: usize,
    spacing: f64,
    range: f64,
) -> Result<Topology, TopologyError> {
    if rows == 0 || cols == 0 {
        return Err(TopologyError::InvalidParameter(format!(
            "grid dimensions must be positive, got {rows}x{cols}"
        )));
    }
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(TopologyError::InvalidParameter(format!(
            "spacing must be positive, got {spacing}"
        )));
    }
    let points = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| Point::new(r as f64 * spacing, c as f64 * spacing)))
        .collect();
    Topology::from_range(points, range)
}

/// `n` nodes drawn i.i.d. uniformly in `[0, side]²`, joined by unit-disk edges.
/// The placement is a pure function of the arguments.
pub fn generate_random_udg(
    n: usize,
    side: f64,
    range: f64,
    seed: u64,
) -> Result<Topology, TopologyError> {
    if n == 0 {
        return Err(TopologyError::InvalidParameter(
            "node count must be positive".into(),
        ));
    }
    if !(side.is_finite() && side > 0.0) {
        return Err(TopologyError::InvalidParameter(format!(
            "side must be positive, got {side}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| {
            let x = rng.random_range(0.0..=side);
            let y = rng.random_range(0.0..=side);
            Point::new(x, y)
        })
        .collect();
    Topology::from_range(points, range)
}

/// Parameters of the bundled 49-node random topology (mean degree 3.918).
pub const BUNDLED_RANDOM_PARAMS: (usize, f64, f64, u64) = (49, 6.0, 1.081, 1);

const BUNDLED_RANDOM_JSON: &str = include_str!("../data/random49.json");

/// The bundled 49-node random unit-disk topology, as shipped in
/// `data/random49.json`.
pub fn bundled_random_topology() -> Topology {
    Topology::from_json(BUNDLED_RANDOM_JSON).expect("bundled topology is valid")
}

pub fn load_topology(path: impl AsRef<Path>) -> Result<Topology, TopologyError> {
    let text = fs::read_to_string(path)?;
    Topology::from_json(&text)
}

pub fn save_topology(topology: &Topology, path: impl AsRef<Path>) -> Result<(), TopologyError> {
    let mut text = topology.to_json()?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct NodeRecord {
    id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    y: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TopologyFile {
    nodes: Vec<NodeRecord>,
    #[serde(default)]
    range: Option<f64>,
    #[serde(default)]
    edges: Option<Vec<[usize; 2]>>,
}

impl From<&Topology> for TopologyFile {
    fn from(t: &Topology) -> Self {
        let nodes = t
            .nodes
            .iter()
            .map(|n| NodeRecord {
                id: n.id,
                x: n.position.map(|p| p.x),
                y: n.position.map(|p| p.y),
            })
            .collect();
        let edges = match t.range {
            Some(_) => None,
            None => Some(t.edges().into_iter().map(|(a, b)| [a, b]).collect()),
        };
        TopologyFile {
            nodes,
            range: t.range,
            edges,
        }
    }
}

impl TopologyFile {
    fn into_topology(self) -> Result<Topology, TopologyError> {
        let n = self.nodes.len();
        let mut seen = HashSet::with_capacity(n);
        let mut positions = vec![None; n];
        for rec in &self.nodes {
            if !seen.insert(rec.id) {
                return Err(TopologyError::DuplicateId(rec.id));
            }
            if rec.id >= n {
                // With N records and no duplicates, an id ≥ N implies a gap.
                let missing = (0..n)
                    .find(|i| !self.nodes.iter().any(|r| r.id == *i))
                    .unwrap_or(0);
                return Err(TopologyError::NonContiguousIds(missing));
            }
            positions[rec.id] = match (rec.x, rec.y) {
                (Some(x), Some(y)) => Some(Point::new(x, y)),
                _ => None,
            };
        }
        match (self.range, self.edges) {
            (Some(range), None) => {
                let points = positions
                    .into_iter()
                    .enumerate()
                    .map(|(i, p)| p.ok_or(TopologyError::MissingPosition(i)))
                    .collect::<Result<Vec<_>, _>>()?;
                Topology::from_range(points, range)
            }
            (None, Some(edges)) => {
                let pairs: Vec<_> = edges.into_iter().map(|[a, b]| (a, b)).collect();
                Topology::from_edges(positions, &pairs)
            }
            _ => Err(TopologyError::AmbiguousAdjacency),
        }
    }
}
