//! Honest forests with finite-sample-corrected posteriors, and plug-in
//! estimates of conditional entropy and mutual information built on them.
//!
//! Each tree learns its partition from one subset of rows (the partition set)
//! and fills its leaves with class frequencies from a disjoint subset (the
//! voting set). Zero frequencies are lifted to `1 / (kappa · N)` and rows are
//! renormalized. Conditional entropy is estimated by averaging the entropy of
//! the forest posterior over held-out evaluation rows.

mod config;
mod entropy;
mod posterior;
mod report;

pub use config::{EvalMode, ForestConfig, SplitSizes};
pub(crate) use entropy::entropy_of_counts;
pub use entropy::{empirical_entropy, entropy};
pub use posterior::{finite_sample_correct, TreePosterior};
pub use report::{fmt_num, forest_config_record, EstimateReport};

use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::LabeledDataset;
use crate::rng::{stream, Domain};
use crate::tree::TreePartition;

/// One fitted tree with its voting posterior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HonestTree {
    pub partition: TreePartition,
    pub posterior: TreePosterior,
    /// Evaluation rows drawn for this tree (tree-level evaluation only).
    eval_rows: Vec<usize>,
    /// Mean over non-empty leaves of the max-norm change made by the correction.
    mean_correction: f64,
}

impl HonestTree {
    pub fn eval_rows(&self) -> &[usize] {
        &self.eval_rows
    }

    pub fn mean_correction(&self) -> f64 {
        self.mean_correction
    }

    #[inline]
    fn posterior_at(&self, x: &[f64]) -> &[f64] {
        self.posterior.row(self.partition.leaf_unchecked(x))
    }
}

/// A fitted forest. Immutable and shareable across threads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyForest {
    trees: Vec<HonestTree>,
    config: ForestConfig,
    seed: u64,
    n_rows: usize,
    n_features: usize,
    label_names: Vec<String>,
    /// Shared evaluation rows (forest-level evaluation only).
    holdout: Vec<usize>,
    /// Plug-in label entropy over every labeled training row.
    h_y: f64,
}

/// Rows on which conditional entropy is evaluated.
#[derive(Debug, Clone, Copy)]
pub enum EvalSource<'a> {
    /// The evaluation rows drawn at fit time, per the configured mode. Takes
    /// the dataset the forest was fitted on.
    HeldOut(&'a LabeledDataset),
    /// External rows, labeled or not, scored with the whole-forest posterior.
    Rows(&'a LabeledDataset),
}

const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Persisted {
    format: String,
    version: u32,
    forest: UncertaintyForest,
}

impl UncertaintyForest {
    /// Fits `config.n_trees` trees on `data`. Tree `b` draws all of its
    /// randomness from a stream keyed by `(seed, b)`, so the result does not
    /// depend on the number of worker threads.
    pub fn fit(data: &LabeledDataset, config: &ForestConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let labels = data.require_labels()?;
        let n = data.n_rows();
        let k = data.n_classes();
        let present = data.class_counts()?.iter().filter(|&&c| c > 0).count();
        if present < 2 {
            return Err(Error::Fit(format!(
                "need at least 2 classes present, found {present}"
            )));
        }
        let sizes = config.split_sizes(n)?;
        let pool_size = n - sizes.eval;
        let s = config
            .subsample_size
            .unwrap_or(sizes.partition + sizes.vote);
        if s > pool_size {
            return Err(Error::Config(format!(
                "subsample_size {s} exceeds the {pool_size} rows outside the evaluation set"
            )));
        }
        let (n_part, n_vote) = if config.honest {
            config.honest_split(s, sizes)?
        } else {
            (s, s)
        };

        let holdout = match config.eval_mode {
            EvalMode::ForestLevel => {
                let mut rows: Vec<usize> = (0..n).collect();
                rows.shuffle(&mut stream(seed, Domain::Holdout, 0));
                let mut held = rows[..sizes.eval].to_vec();
                held.sort_unstable();
                held
            }
            EvalMode::TreeLevel => Vec::new(),
        };
        let pool: Vec<usize> = match config.eval_mode {
            EvalMode::ForestLevel => {
                let mut mask = vec![false; n];
                holdout.iter().for_each(|&r| mask[r] = true);
                (0..n).filter(|&r| !mask[r]).collect()
            }
            EvalMode::TreeLevel => (0..n).collect(),
        };

        let trees = (0..config.n_trees)
            .into_par_iter()
            .map(|b| {
                let mut rng = stream(seed, Domain::Tree, b as u64);
                let mut rows = pool.clone();
                rows.shuffle(&mut rng);
                let (eval_rows, rest) = match config.eval_mode {
                    EvalMode::TreeLevel => {
                        let (e, r) = rows.split_at(sizes.eval);
                        (e.to_vec(), r)
                    }
                    EvalMode::ForestLevel => (Vec::new(), &rows[..]),
                };
                let sub = &rest[..s];
                let (part_rows, vote_rows) = if config.honest {
                    sub.split_at(n_part)
                } else {
                    (sub, sub)
                };
                debug_assert_eq!(vote_rows.len(), n_vote);
                let tree_seed: u64 = rng.random();
                let partition = TreePartition::fit(data, part_rows, &config.tree, tree_seed)?;
                let raw = TreePosterior::from_votes(&partition, data, vote_rows)?;
                let (mut posterior, mean_correction) = if config.correction {
                    let corrected = finite_sample_correct(&raw, config.kappa)?;
                    let delta = mean_max_change(&raw, &corrected);
                    (corrected, delta)
                } else {
                    (raw, 0.0)
                };
                let mut votes = vec![0usize; k];
                vote_rows.iter().for_each(|&r| votes[labels[r]] += 1);
                let marginal: Vec<f64> = votes
                    .iter()
                    .map(|&c| c as f64 / vote_rows.len() as f64)
                    .collect();
                posterior.fill_empty(&marginal);
                Ok(HonestTree {
                    partition,
                    posterior,
                    eval_rows,
                    mean_correction,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(Self {
            trees,
            config: config.clone(),
            seed,
            n_rows: n,
            n_features: data.n_features(),
            label_names: data.label_names().to_vec(),
            holdout,
            h_y: entropy_of_counts(&data.class_counts()?),
        })
    }

    pub fn trees(&self) -> &[HonestTree] {
        &self.trees
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_classes(&self) -> usize {
        self.label_names.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Shared evaluation rows (empty under tree-level evaluation).
    pub fn holdout(&self) -> &[usize] {
        &self.holdout
    }

    /// Plug-in entropy of the training labels.
    pub fn h_y(&self) -> f64 {
        self.h_y
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_features {
            return Err(Error::Input(format!(
                "point has {} features, forest was fitted on {}",
                x.len(),
                self.n_features
            )));
        }
        Ok(())
    }

    fn posterior_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let mut p = vec![0.0; self.n_classes()];
        for tree in &self.trees {
            for (acc, &v) in p.iter_mut().zip(tree.posterior_at(x)) {
                *acc += v;
            }
        }
        let b = self.trees.len() as f64;
        p.iter_mut().for_each(|v| *v /= b);
        p
    }

    /// Forest posterior: the mean of the per-tree leaf posteriors at `x`.
    pub fn posterior(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        Ok(self.posterior_unchecked(x))
    }

    /// Entropy of the forest posterior at `x`.
    pub fn conditional_entropy_at(&self, x: &[f64]) -> Result<f64> {
        Ok(entropy(&self.posterior(x)?))
    }

    /// Conditional entropy averaged over evaluation rows, packaged with the
    /// label entropy and their difference.
    pub fn estimate_conditional_entropy(&self, source: EvalSource<'_>) -> Result<EstimateReport> {
        let mut per_tree_values = Vec::new();
        let h_cond = match source {
            EvalSource::HeldOut(data) => {
                if data.n_rows() != self.n_rows || data.n_features() != self.n_features {
                    return Err(Error::Input(
                        "held-out evaluation needs the dataset the forest was fitted on".into(),
                    ));
                }
                match self.config.eval_mode {
                    EvalMode::TreeLevel => {
                        let (h, per_tree) = self.tree_level_entropy(data)?;
                        per_tree_values = per_tree;
                        h
                    }
                    EvalMode::ForestLevel => self.forest_level_entropy(data, &self.holdout)?,
                }
            }
            EvalSource::Rows(ds) => {
                if ds.n_features() != self.n_features {
                    return Err(Error::Input(format!(
                        "evaluation rows have {} features, forest was fitted on {}",
                        ds.n_features(),
                        self.n_features
                    )));
                }
                let rows: Vec<usize> = (0..ds.n_rows()).collect();
                self.forest_level_entropy(ds, &rows)?
            }
        };
        let name = if self.config.honest || self.config.correction {
            "uf"
        } else {
            "cart"
        };
        let mut report = EstimateReport::new(
            name,
            self.n_rows,
            self.n_features,
            self.h_y,
            h_cond,
            self.seed,
        );
        report.per_tree_values = per_tree_values;
        report.forest_config = Some(self.config.clone());
        report.label_names = self.label_names.clone();
        Ok(report)
    }

    fn forest_level_entropy(&self, data: &LabeledDataset, rows: &[usize]) -> Result<f64> {
        if rows.is_empty() {
            return Err(Error::Input("empty evaluation set".into()));
        }
        let values: Vec<f64> = rows
            .par_iter()
            .map(|&r| entropy(&self.posterior_unchecked(data.row(r))))
            .collect();
        Ok(values.iter().sum::<f64>() / values.len() as f64)
    }

    /// Each row's posterior is the mean over the trees that held it out; the
    /// estimate is the row-average entropy of those posteriors. Also returns
    /// the single-tree estimates (each tree on its own rows, own posterior).
    fn tree_level_entropy(&self, data: &LabeledDataset) -> Result<(f64, Vec<f64>)> {
        let k = self.n_classes();
        let leaves: Vec<Vec<usize>> = self
            .trees
            .par_iter()
            .map(|t| {
                t.eval_rows
                    .iter()
                    .map(|&r| t.partition.leaf_unchecked(data.row(r)))
                    .collect()
            })
            .collect();
        let mut sums = vec![0.0; self.n_rows * k];
        let mut hits = vec![0u32; self.n_rows];
        let mut per_tree = Vec::with_capacity(self.trees.len());
        for (tree, tree_leaves) in self.trees.iter().zip(&leaves) {
            let mut h = 0.0;
            for (&r, &leaf) in tree.eval_rows.iter().zip(tree_leaves) {
                let row = tree.posterior.row(leaf);
                h += entropy(row);
                for (acc, &v) in sums[r * k..(r + 1) * k].iter_mut().zip(row) {
                    *acc += v;
                }
                hits[r] += 1;
            }
            if !tree.eval_rows.is_empty() {
                per_tree.push(h / tree.eval_rows.len() as f64);
            }
        }
        let mut total = 0.0;
        let mut count = 0usize;
        for r in 0..self.n_rows {
            if hits[r] == 0 {
                continue;
            }
            let m = f64::from(hits[r]);
            let p: Vec<f64> = sums[r * k..(r + 1) * k].iter().map(|v| v / m).collect();
            total += entropy(&p);
            count += 1;
        }
        if count == 0 {
            return Err(Error::Input("empty evaluation set".into()));
        }
        Ok((total / count as f64, per_tree))
    }

    /// Writes the forest as a versioned JSON document.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        let doc = Persisted {
            format: "uforest".into(),
            version: FORMAT_VERSION,
            forest: self.clone(),
        };
        serde_json::to_writer(&mut out, &doc).map_err(|e| Error::Data(e.to_string()))?;
        out.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let doc: Persisted = serde_json::from_reader(BufReader::new(file))
            .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        if doc.format != "uforest" || doc.version != FORMAT_VERSION {
            return Err(Error::Data(format!(
                "{}: unsupported forest format {} v{}",
                path.display(),
                doc.format,
                doc.version
            )));
        }
        Ok(doc.forest)
    }
}

fn mean_max_change(raw: &TreePosterior, corrected: &TreePosterior) -> f64 {
    let mut total = 0.0;
    let mut leaves = 0usize;
    for leaf in 0..raw.n_leaves() {
        if raw.is_empty_leaf(leaf) {
            continue;
        }
        let change = raw
            .row(leaf)
            .iter()
            .zip(corrected.row(leaf))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        total += change;
        leaves += 1;
    }
    if leaves == 0 {
        0.0
    } else {
        total / leaves as f64
    }
}

/// Fits a forest and estimates `H(Y)`, `H(Y | X)` and their difference on its
/// held-out rows.
pub fn estimate_mutual_information(
    data: &LabeledDataset,
    config: &ForestConfig,
    seed: u64,
) -> Result<EstimateReport> {
    let forest = UncertaintyForest::fit(data, config, seed)?;
    forest.estimate_conditional_entropy(EvalSource::HeldOut(data))
}
