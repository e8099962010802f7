use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::LabeledDataset;
use crate::tree::TreePartition;

/// Per-leaf class probabilities of one tree, with the voting count of each leaf.
///
/// Stored as a row-major `n_leaves × n_classes` table. Leaves that received no
/// votes keep a zero row until [`TreePosterior::fill_empty`] replaces it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreePosterior {
    probs: Vec<f64>,
    leaf_sizes: Vec<usize>,
    n_classes: usize,
}

impl TreePosterior {
    /// Empirical frequencies from a row-major `n_leaves × n_classes` vote table.
    pub fn from_counts(counts: &[usize], n_classes: usize) -> Result<Self> {
        if n_classes == 0 || !counts.len().is_multiple_of(n_classes) {
            return Err(Error::Input(format!(
                "vote table of length {} does not split into {n_classes} classes",
                counts.len()
            )));
        }
        let mut probs = vec![0.0; counts.len()];
        let leaf_sizes: Vec<usize> = counts.chunks(n_classes).map(|r| r.iter().sum()).collect();
        for (leaf, (row, out)) in counts
            .chunks(n_classes)
            .zip(probs.chunks_mut(n_classes))
            .enumerate()
        {
            let size = leaf_sizes[leaf];
            if size > 0 {
                for (o, &c) in out.iter_mut().zip(row) {
                    *o = c as f64 / size as f64;
                }
            }
        }
        Ok(Self {
            probs,
            leaf_sizes,
            n_classes,
        })
    }

    /// Routes each voting row through `tree` and tallies its label.
    pub fn from_votes(
        tree: &TreePartition,
        data: &LabeledDataset,
        vote_rows: &[usize],
    ) -> Result<Self> {
        let labels = data.require_labels()?;
        let k = data.n_classes();
        let mut counts = vec![0usize; tree.n_leaves() * k];
        for &r in vote_rows {
            let leaf = tree.leaf_unchecked(data.row(r));
            counts[leaf * k + labels[r]] += 1;
        }
        Self::from_counts(&counts, k)
    }

    pub fn n_leaves(&self) -> usize {
        self.leaf_sizes.len()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    #[inline]
    pub fn row(&self, leaf: usize) -> &[f64] {
        &self.probs[leaf * self.n_classes..(leaf + 1) * self.n_classes]
    }

    pub fn leaf_sizes(&self) -> &[usize] {
        &self.leaf_sizes
    }

    /// True for leaves that received no voting rows.
    pub fn is_empty_leaf(&self, leaf: usize) -> bool {
        self.leaf_sizes[leaf] == 0
    }

    /// Replaces the rows of vote-less leaves with `fallback`.
    pub fn fill_empty(&mut self, fallback: &[f64]) {
        let k = self.n_classes;
        for leaf in 0..self.leaf_sizes.len() {
            if self.leaf_sizes[leaf] == 0 {
                self.probs[leaf * k..(leaf + 1) * k].copy_from_slice(fallback);
            }
        }
    }
}

/// Replaces every zero probability in a non-empty leaf with `1 / (kappa · N)`,
/// `N` being the leaf's voting count, then renormalizes the row. Empty leaves
/// are left untouched.
pub fn finite_sample_correct(posterior: &TreePosterior, kappa: f64) -> Result<TreePosterior> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::Config(format!(
            "kappa must be a positive number, got {kappa}"
        )));
    }
    let mut out = posterior.clone();
    let k = out.n_classes;
    for (leaf, row) in out.probs.chunks_mut(k).enumerate() {
        let size = out.leaf_sizes[leaf];
        if size == 0 {
            continue;
        }
        let fill = 1.0 / (kappa * size as f64);
        for p in row.iter_mut() {
            if *p == 0.0 {
                *p = fill;
            }
        }
        let total: f64 = row.iter().sum();
        for p in row.iter_mut() {
            *p /= total;
        }
    }
    Ok(out)
}
