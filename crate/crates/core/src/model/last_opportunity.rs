//! First-slot and last-opportunity transmission terms.
//!
//! When a node's instant falls after `n` neighbor instants, which `n`
//! neighbors came first is uniform over all `C(y, n)` subsets `B`; the node
//! still transmits if fewer than `K` of the neighbors in `B` transmitted.
//! Neighbors are treated as independent transmitters, so the count over `B`
//! is Poisson-binomial.

use super::distribution::{binomial, YtDistribution};
use super::ModelError;

/// Largest set accepted by the enumeration in [`gamma_exact`].
pub const MAX_ENUMERATION: usize = 24;

fn check_probs(probs: &[f64]) -> Result<(), ModelError> {
    match probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        Some(&p) => Err(ModelError::InvalidProbability(p)),
        None => Ok(()),
    }
}

/// Probability that exactly `j` of the independent events with
/// probabilities `probs` occur, by enumerating every subset.
pub fn gamma_exact(j: usize, probs: &[f64]) -> Result<f64, ModelError> {
    check_probs(probs)?;
    let n = probs.len();
    if j > n {
        return Err(ModelError::InvalidArguments(format!(
            "j={j} exceeds set size {n}"
        )));
    }
    if n > MAX_ENUMERATION {
        return Err(ModelError::InvalidArguments(format!(
            "enumeration over {n} events exceeds the limit of {MAX_ENUMERATION}"
        )));
    }
    let mut total = 0.0;
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != j {
            continue;
        }
        total += probs
            .iter()
            .enumerate()
            .map(|(l, &p)| if mask & (1 << l) != 0 { p } else { 1.0 - p })
            .product::<f64>();
    }
    Ok(total)
}

/// For every subset size `n = 0..=y`, the average over all `n`-subsets `B`
/// of `P(fewer than k members of B transmit)`.
///
/// Dynamic program over neighbors with state (members placed in `B`,
/// transmitters among them); transmitter counts `≥ k` are dropped since they
/// never contribute. `O(y² · k)`.
pub fn subset_cdf_table(neighbor_probs: &[f64], k: usize) -> Vec<f64> {
    let y = neighbor_probs.len();
    if k == 0 {
        return vec![0.0; y + 1];
    }
    // weight[m][t]: sum over subsets of size m of P(exactly t transmit).
    let mut weight = vec![vec![0.0; k]; y + 1];
    weight[0][0] = 1.0;
    for (processed, &p) in neighbor_probs.iter().enumerate() {
        for m in (1..=processed + 1).rev() {
            for t in (0..k).rev() {
                let silent = weight[m - 1][t] * (1.0 - p);
                let sent = if t > 0 { weight[m - 1][t - 1] * p } else { 0.0 };
                weight[m][t] += silent + sent;
            }
        }
    }
    weight
        .iter()
        .enumerate()
        .map(|(m, row)| (row.iter().sum::<f64>() / binomial(y, m)).clamp(0.0, 1.0))
        .collect()
}

/// Average over all `n`-subsets of the neighbors of the probability that at
/// most `k − 1` members transmit.
pub fn subset_cdf_average(neighbor_probs: &[f64], n: usize, k: usize) -> Result<f64, ModelError> {
    check_probs(neighbor_probs)?;
    let y = neighbor_probs.len();
    if k == 0 || k > n || n > y {
        return Err(ModelError::InvalidArguments(format!(
            "need 1 <= k <= n <= y, got k={k} n={n} y={y}"
        )));
    }
    Ok(subset_cdf_table(neighbor_probs, k)[n])
}

/// `P_F`: the node draws one of the first `k` instants.
pub fn p_first(dist: &YtDistribution, k: usize) -> f64 {
    dist.cdf_below(k)
}

/// `P_LO`: the node's instant comes after `n ≥ k` neighbor instants and
/// fewer than `k` of those neighbors transmitted.
pub fn p_last_opportunity(
    dist: &YtDistribution,
    k: usize,
    neighbor_probs: &[f64],
) -> Result<f64, ModelError> {
    check_probs(neighbor_probs)?;
    let y = neighbor_probs.len();
    if y != dist.y {
        return Err(ModelError::InvalidArguments(format!(
            "distribution is for {} neighbors but {y} probabilities were given",
            dist.y
        )));
    }
    if k == 0 || k > y {
        return Err(ModelError::InvalidArguments(format!(
            "need 1 <= k <= y, got k={k} y={y}"
        )));
    }
    Ok(last_opportunity_unchecked(dist, k, neighbor_probs))
}

pub(crate) fn last_opportunity_unchecked(
    dist: &YtDistribution,
    k: usize,
    neighbor_probs: &[f64],
) -> f64 {
    let table = subset_cdf_table(neighbor_probs, k);
    (k..=dist.y).map(|n| dist.pmf[n] * table[n]).sum()
}
