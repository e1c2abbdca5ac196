//! Distribution of `Y_T`, the number of neighbor transmission instants that
//! precede a node's own instant `T` within its interval.
//!
//! Neighbor instants fall uniformly over the node's interval (intervals are
//! not synchronized), so conditioned on `T = u·I` the count is
//! `Binomial(y, u)`. What remains is how `u` enters:
//!
//! * [`TimingModel::Marginal`] integrates `u` over its law, uniform on
//!   `[1/2, 1)`. With `∫₀ˣ C(y,n)uⁿ(1−u)^{y−n} du = P(Bin(y+1, x) ≥ n+1)/(y+1)`
//!   this collapses to the dyadic closed form
//!   `P(Y_T = n) = 2/(y+1) · 2^{−(y+1)} · Σ_{m≤n} C(y+1, m)`.
//! * [`TimingModel::MeanInstant`] evaluates the binomial at the mean
//!   instant `u = 3/4`, i.e. `Binomial(y, 3/4)`.

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Largest neighbor count accepted by the model.
pub const MAX_DEGREE: usize = 64;

/// Position of the mean transmission instant inside an interval.
pub const MEAN_INSTANT: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimingModel {
    /// `T/I` integrated over uniform `[1/2, 1)`.
    Marginal,
    /// `T/I` fixed at its mean, 3/4.
    #[default]
    MeanInstant,
}

/// `P(Y_T = n)` for `n = 0..=y`.
#[derive(Debug, Clone, PartialEq)]
pub struct YtDistribution {
    pub y: usize,
    pub pmf: Vec<f64>,
}

impl YtDistribution {
    pub fn new(y: usize, timing: TimingModel) -> Result<Self, ModelError> {
        match timing {
            TimingModel::Marginal => yt_pmf(y),
            TimingModel::MeanInstant => yt_pmf_at(y, MEAN_INSTANT),
        }
    }

    /// `P(Y_T < k)`.
    pub fn cdf_below(&self, k: usize) -> f64 {
        if k > self.y {
            return 1.0;
        }
        self.pmf.iter().take(k).sum::<f64>().min(1.0)
    }
}

/// Row `0..=n` of Pascal's triangle, built by the multiplicative recurrence.
pub(crate) fn binomial_row(n: usize) -> Vec<f64> {
    let mut row = Vec::with_capacity(n + 1);
    let mut c = 1.0_f64;
    row.push(c);
    for m in 0..n {
        c = c * (n - m) as f64 / (m + 1) as f64;
        row.push(c.round());
    }
    row
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0_f64;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c.round()
}

fn check_degree(y: usize) -> Result<(), ModelError> {
    if y > MAX_DEGREE {
        return Err(ModelError::DegreeTooLarge {
            degree: y,
            max: MAX_DEGREE,
        });
    }
    Ok(())
}

/// Marginal law of `Y_T` with `T` uniform on `[I/2, I)`.
pub fn yt_pmf(y: usize) -> Result<YtDistribution, ModelError> {
    check_degree(y)?;
    let row = binomial_row(y + 1);
    // 2^{-(y+1)} is exact in binary floating point.
    let scale = 2.0 / (y + 1) as f64 * 0.5_f64.powi(y as i32 + 1);
    let mut acc = 0.0;
    let pmf = row[..=y]
        .iter()
        .map(|c| {
            acc += c;
            acc * scale
        })
        .collect();
    Ok(YtDistribution { y, pmf })
}

/// `Binomial(y, u)`: the conditional law of `Y_T` given `T = u·I`.
pub fn yt_pmf_at(y: usize, u: f64) -> Result<YtDistribution, ModelError> {
    check_degree(y)?;
    if !(0.0..=1.0).contains(&u) {
        return Err(ModelError::InvalidProbability(u));
    }
    let row = binomial_row(y);
    let pmf = row
        .iter()
        .enumerate()
        .map(|(n, c)| c * u.powi(n as i32) * (1.0 - u).powi((y - n) as i32))
        .collect();
    Ok(YtDistribution { y, pmf })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn small_degrees() {
        assert_eq!(yt_pmf(0).unwrap().pmf, vec![1.0]);
        assert_eq!(yt_pmf(1).unwrap().pmf, vec![0.25, 0.75]);
        let p = yt_pmf(2).unwrap().pmf;
        assert_abs_diff_eq!(p[0], 1.0 / 12.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p[2], 7.0 / 12.0, epsilon = 1e-15);
    }

    #[test]
    fn mean_instant_is_binomial() {
        let p = yt_pmf_at(2, 0.75).unwrap().pmf;
        assert_eq!(p, vec![0.0625, 0.375, 0.5625]);
        let d = YtDistribution::new(3, TimingModel::MeanInstant).unwrap();
        assert_abs_diff_eq!(d.pmf.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn cdf_below() {
        let d = yt_pmf(2).unwrap();
        assert_abs_diff_eq!(d.cdf_below(2), 5.0 / 12.0, epsilon = 1e-15);
        assert_eq!(d.cdf_below(3), 1.0);
        assert_eq!(d.cdf_below(10), 1.0);
    }

    #[test]
    fn degree_cap() {
        assert!(yt_pmf(MAX_DEGREE).is_ok());
        assert!(matches!(
            yt_pmf(MAX_DEGREE + 1),
            Err(ModelError::DegreeTooLarge { .. })
        ));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial_row(4), vec![1.0, 4.0, 6.0, 4.0, 1.0]);
        assert_eq!(binomial(10, 3), 120.0);
        assert_eq!(binomial(3, 5), 0.0);
        let c = binomial(64, 32);
        assert!((c / 1_832_624_140_942_590_534_f64 - 1.0).abs() < 1e-14);
    }
}
