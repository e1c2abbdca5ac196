//! Redundancy constants: one network-wide `K`, or a per-node value derived
//! locally from the neighbor count.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::topology::Topology;

pub const DEFAULT_STEP: u32 = 3;
pub const DEFAULT_OFFSET: u32 = 0;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RedundancyError {
    #[error("redundancy step must be at least 1")]
    ZeroStep,
    #[error("fixed redundancy constant must be at least 1")]
    ZeroK,
}

/// How per-node redundancy constants are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Policy {
    Fixed { k: u32 },
    Heuristic { step: u32, offset: u32 },
}

impl Default for Policy {
    fn default() -> Self {
        Policy::Heuristic {
            step: DEFAULT_STEP,
            offset: DEFAULT_OFFSET,
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::Fixed { k } => write!(f, "fixed K={k}"),
            Policy::Heuristic { step, offset } => {
                write!(f, "heuristic step={step} offset={offset}")
            }
        }
    }
}

/// Local redundancy constant for a node with `num_neighbors` neighbors:
/// `1` up to `offset` neighbors, then one more for every `step` neighbors.
pub fn calculate_k(num_neighbors: usize, step: u32, offset: u32) -> Result<u32, RedundancyError> {
    if step == 0 {
        return Err(RedundancyError::ZeroStep);
    }
    let offset = offset as usize;
    if num_neighbors <= offset {
        return Ok(1);
    }
    let k = (num_neighbors - offset).div_ceil(step as usize);
    Ok(k.max(1) as u32)
}

/// Per-node redundancy constants, indexed by node id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KAssignment {
    pub k: Vec<u32>,
    pub policy: Policy,
}

impl KAssignment {
    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    pub fn get(&self, node: usize) -> u32 {
        self.k[node]
    }

    /// The set of distinct constants in use.
    pub fn distinct(&self) -> BTreeSet<u32> {
        self.k.iter().copied().collect()
    }
}

pub fn assign_k(topology: &Topology, policy: Policy) -> Result<KAssignment, RedundancyError> {
    let k = match policy {
        Policy::Fixed { k: 0 } => return Err(RedundancyError::ZeroK),
        Policy::Fixed { k } => vec![k; topology.len()],
        Policy::Heuristic { step, offset } => topology
            .degrees()
            .into_iter()
            .map(|y| calculate_k(y, step, offset))
            .collect::<Result<_, _>>()?,
    };
    Ok(KAssignment { k, policy })
}
