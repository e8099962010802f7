//! Permutation tests of `I(X; Y) > 0` and chain-rule decompositions of mutual
//! information over feature subsets.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::{estimate_mutual_information, EstimateReport, ForestConfig};
use crate::io::LabeledDataset;
use crate::rng::{derive_seed, stream, Domain};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationTestResult {
    pub observed: f64,
    pub null_values: Vec<f64>,
    pub p_value: f64,
}

impl PermutationTestResult {
    /// `(1 + #{null >= observed}) / (R + 1)`.
    pub fn from_parts(observed: f64, null_values: Vec<f64>) -> Self {
        let exceed = null_values.iter().filter(|&&v| v >= observed).count();
        let p_value = (1 + exceed) as f64 / (null_values.len() + 1) as f64;
        Self {
            observed,
            null_values,
            p_value,
        }
    }
}

/// Permutation test with an arbitrary mutual information estimator.
///
/// `estimate(data, seed)` is called once on the data with `seed`, then once
/// per replicate `r` on a copy whose labels were shuffled by the stream
/// `(seed, r)`, with a fit seed derived from `(seed, r)`.
pub fn permutation_test_with<F>(
    data: &LabeledDataset,
    n_reps: usize,
    seed: u64,
    estimate: F,
) -> Result<PermutationTestResult>
where
    F: Fn(&LabeledDataset, u64) -> Result<f64> + Sync,
{
    if n_reps == 0 {
        return Err(Error::Config(
            "permutation test needs at least one replicate".into(),
        ));
    }
    let labels = data.require_labels()?;
    let observed = estimate(data, seed)?;
    let null_values = (0..n_reps as u64)
        .into_par_iter()
        .map(|r| {
            let mut permuted = labels.to_vec();
            permuted.shuffle(&mut stream(seed, Domain::PermuteLabels, r));
            let shuffled = data.with_labels(permuted)?;
            estimate(&shuffled, derive_seed(seed, Domain::PermuteFit, r))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(PermutationTestResult::from_parts(observed, null_values))
}

/// Permutation test of the forest mutual information estimate.
pub fn permutation_test(
    data: &LabeledDataset,
    config: &ForestConfig,
    n_reps: usize,
    seed: u64,
) -> Result<PermutationTestResult> {
    permutation_test_with(data, n_reps, seed, |d, s| {
        Ok(estimate_mutual_information(d, config, s)?.mi)
    })
}

/// One line of a chain-rule decomposition `I(Y; X) = I(Y; X_in) + I(Y; X_out | X_in)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionRow {
    pub in_features: Vec<String>,
    pub i_in: f64,
    /// `i_total - i_in`.
    pub i_cond: f64,
    pub i_total: f64,
    /// Label entropy used to normalize the three values.
    pub h_y: f64,
}

impl DecompositionRow {
    /// `(i_in, i_cond, i_total)` divided by the label entropy.
    pub fn normalized(&self) -> (f64, f64, f64) {
        if self.h_y > 0.0 {
            (
                self.i_in / self.h_y,
                self.i_cond / self.h_y,
                self.i_total / self.h_y,
            )
        } else {
            (0.0, 0.0, 0.0)
        }
    }
}

/// Decomposition with an arbitrary estimator, called as `estimate(data, seed)`
/// once on all features and once per non-empty subset.
pub fn mi_decomposition_with<S, F>(
    data: &LabeledDataset,
    subsets: &[Vec<S>],
    seed: u64,
    estimate: F,
) -> Result<Vec<DecompositionRow>>
where
    S: AsRef<str>,
    F: Fn(&LabeledDataset, u64) -> Result<EstimateReport>,
{
    let columns = subsets
        .iter()
        .map(|s| data.feature_indices(s))
        .collect::<Result<Vec<_>>>()?;
    let total = estimate(data, seed)?;
    subsets
        .iter()
        .zip(columns)
        .map(|(subset, cols)| {
            let i_in = if cols.is_empty() {
                0.0
            } else {
                estimate(&data.select_features(&cols)?, seed)?.mi
            };
            Ok(DecompositionRow {
                in_features: subset.iter().map(|s| s.as_ref().to_string()).collect(),
                i_in,
                i_cond: total.mi - i_in,
                i_total: total.mi,
                h_y: total.h_y,
            })
        })
        .collect()
}

/// Estimates `I(Y; X)` once on every feature and `I(Y; X_in)` on each subset,
/// and reports the conditional term as their difference. An empty subset has
/// `i_in = 0`. Rows come back in the order of `subsets`.
pub fn mi_decomposition<S: AsRef<str>>(
    data: &LabeledDataset,
    subsets: &[Vec<S>],
    config: &ForestConfig,
    seed: u64,
) -> Result<Vec<DecompositionRow>> {
    mi_decomposition_with(data, subsets, seed, |d, s| {
        estimate_mutual_information(d, config, s)
    })
}
