//! Axis-aligned CART partitions of feature space.
//!
//! A tree is grown greedily from a partition set. At every node a fresh random
//! subset of candidate features is drawn; for each candidate the node's rows
//! are sorted and every gap between adjacent distinct values is scored by the
//! summed child impurity. Ties go to the lowest feature index, then the
//! smallest threshold. A node splits only when the best candidate strictly
//! lowers impurity and leaves at least `min_leaf_size` rows on each side.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::LabeledDataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Impurity {
    Gini,
    Entropy,
}

impl Impurity {
    /// Node size times node impurity, from class counts.
    #[inline]
    fn weighted(self, counts: &[usize], n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let nf = n as f64;
        match self {
            Impurity::Gini => {
                let sq: usize = counts.iter().map(|&c| c * c).sum();
                nf - sq as f64 / nf
            }
            Impurity::Entropy => {
                let s: f64 = counts
                    .iter()
                    .filter(|&&c| c > 0)
                    .map(|&c| c as f64 * (c as f64).ln())
                    .sum();
                nf * nf.ln() - s
            }
        }
    }
}

impl fmt::Display for Impurity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Impurity::Gini => "gini",
            Impurity::Entropy => "entropy",
        })
    }
}

impl FromStr for Impurity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gini" => Ok(Impurity::Gini),
            "entropy" => Ok(Impurity::Entropy),
            other => Err(Error::Config(format!("unknown impurity '{other}'"))),
        }
    }
}

/// Where a split threshold sits inside the gap between two adjacent sorted values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThresholdRule {
    /// Halfway between the two values.
    Midpoint,
    /// At the lower value. Routing then depends only on the order of
    /// feature values, so any strictly increasing transform of a feature
    /// leaves every leaf assignment unchanged.
    LowerValue,
}

impl fmt::Display for ThresholdRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ThresholdRule::Midpoint => "midpoint",
            ThresholdRule::LowerValue => "lower",
        })
    }
}

impl FromStr for ThresholdRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "midpoint" => Ok(ThresholdRule::Midpoint),
            "lower" => Ok(ThresholdRule::LowerValue),
            other => Err(Error::Config(format!("unknown threshold rule '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// Minimum number of partition-set rows in every leaf (`k`).
    pub min_leaf_size: usize,
    /// Maximum depth; `None` grows until no admissible split remains.
    pub max_depth: Option<usize>,
    /// Features drawn per node; `None` means `ceil(sqrt(d))`.
    pub n_candidate_features: Option<usize>,
    pub impurity: Impurity,
    pub threshold_rule: ThresholdRule,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            min_leaf_size: 1,
            max_depth: None,
            n_candidate_features: None,
            impurity: Impurity::Gini,
            threshold_rule: ThresholdRule::Midpoint,
        }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<()> {
        if self.min_leaf_size == 0 {
            return Err(Error::Config("min_leaf_size must be >= 1".into()));
        }
        if self.max_depth == Some(0) {
            return Err(Error::Config("max_depth must be >= 1 when set".into()));
        }
        if self.n_candidate_features == Some(0) {
            return Err(Error::Config("n_candidate_features must be >= 1".into()));
        }
        Ok(())
    }

    /// Number of candidate features used at each node for `d` total features.
    pub fn candidates_for(&self, d: usize) -> Result<usize> {
        match self.n_candidate_features {
            Some(m) if m > d => Err(Error::Config(format!(
                "n_candidate_features = {m} exceeds the {d} available features"
            ))),
            Some(m) => Ok(m),
            None => Ok(((d as f64).sqrt().ceil() as usize).clamp(1, d)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        leaf: usize,
    },
}

/// A fitted partition. Node 0 is the root; leaves are numbered `0..n_leaves`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreePartition {
    nodes: Vec<Node>,
    n_leaves: usize,
    depth: usize,
    n_features: usize,
}

struct BestSplit {
    score: f64,
    feature: usize,
    lo: f64,
    hi: f64,
}

impl TreePartition {
    /// Fits a tree on `rows` of `data`. Deterministic given `seed`.
    pub fn fit(
        data: &LabeledDataset,
        rows: &[usize],
        params: &TreeParams,
        seed: u64,
    ) -> Result<Self> {
        params.validate()?;
        let labels = data.require_labels()?;
        if rows.is_empty() {
            return Err(Error::Fit("empty partition set".into()));
        }
        let d = data.n_features();
        let n_cand = params.candidates_for(d)?;
        let n_classes = data.n_classes();
        let k = params.min_leaf_size;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        let mut idx = rows.to_vec();
        let mut nodes: Vec<Node> = vec![Node::Leaf { leaf: usize::MAX }];
        let mut n_leaves = 0;
        let mut max_depth_seen = 0;
        let mut stack = vec![(0usize, 0usize, idx.len(), 0usize)];
        let mut counts = vec![0usize; n_classes];
        let mut left = vec![0usize; n_classes];
        let mut buf: Vec<(f64, usize)> = Vec::with_capacity(idx.len());

        while let Some((slot, start, end, depth)) = stack.pop() {
            let m = end - start;
            counts.iter_mut().for_each(|c| *c = 0);
            for &r in &idx[start..end] {
                counts[labels[r]] += 1;
            }
            let parent = params.impurity.weighted(&counts, m);
            let can_split =
                parent > 0.0 && m >= 2 * k && params.max_depth.is_none_or(|md| depth < md);

            let mut best: Option<BestSplit> = None;
            if can_split {
                let mut candidates = sample(&mut rng, d, n_cand).into_vec();
                candidates.sort_unstable();
                for &f in &candidates {
                    buf.clear();
                    buf.extend(
                        idx[start..end]
                            .iter()
                            .map(|&r| (data.value(r, f), labels[r])),
                    );
                    buf.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
                    if buf[0].0 == buf[m - 1].0 {
                        continue;
                    }
                    left.iter_mut().for_each(|c| *c = 0);
                    for i in 0..m - 1 {
                        left[buf[i].1] += 1;
                        if buf[i].0 == buf[i + 1].0 {
                            continue;
                        }
                        let nl = i + 1;
                        let nr = m - nl;
                        if nl < k || nr < k {
                            continue;
                        }
                        let score = params.impurity.weighted(&left, nl)
                            + right_weighted(params.impurity, &counts, &left, nr);
                        if best.as_ref().is_none_or(|b| score < b.score) {
                            best = Some(BestSplit {
                                score,
                                feature: f,
                                lo: buf[i].0,
                                hi: buf[i + 1].0,
                            });
                        }
                    }
                }
            }

            match best.filter(|b| b.score < parent - 1e-12 * (m as f64).max(1.0)) {
                Some(b) => {
                    let threshold = place_threshold(params.threshold_rule, b.lo, b.hi);
                    let mid = partition_in_place(&mut idx[start..end], |r| {
                        data.value(r, b.feature) <= threshold
                    }) + start;
                    let l = nodes.len();
                    nodes.push(Node::Leaf { leaf: usize::MAX });
                    nodes.push(Node::Leaf { leaf: usize::MAX });
                    nodes[slot] = Node::Split {
                        feature: b.feature,
                        threshold,
                        left: l,
                        right: l + 1,
                    };
                    stack.push((l + 1, mid, end, depth + 1));
                    stack.push((l, start, mid, depth + 1));
                }
                None => {
                    nodes[slot] = Node::Leaf { leaf: n_leaves };
                    n_leaves += 1;
                    max_depth_seen = max_depth_seen.max(depth);
                }
            }
        }

        Ok(Self {
            nodes,
            n_leaves,
            depth: max_depth_seen,
            n_features: d,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn n_leaves(&self) -> usize {
        self.n_leaves
    }

    /// Length of the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Leaf reached by `x`: `x[feature] <= threshold` goes left.
    pub fn leaf_of(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.n_features {
            return Err(Error::Input(format!(
                "point has {} features, tree was fitted on {}",
                x.len(),
                self.n_features
            )));
        }
        Ok(self.leaf_unchecked(x))
    }

    #[inline]
    pub(crate) fn leaf_unchecked(&self, x: &[f64]) -> usize {
        let mut node = 0;
        loop {
            match self.nodes[node] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => node = if x[feature] <= threshold { left } else { right },
                Node::Leaf { leaf } => return leaf,
            }
        }
    }
}

#[inline]
fn right_weighted(impurity: Impurity, total: &[usize], left: &[usize], nr: usize) -> f64 {
    // Right-child counts are total minus left; evaluated without allocating.
    if nr == 0 {
        return 0.0;
    }
    let nf = nr as f64;
    match impurity {
        Impurity::Gini => {
            let sq: usize = total
                .iter()
                .zip(left)
                .map(|(&t, &l)| (t - l) * (t - l))
                .sum();
            nf - sq as f64 / nf
        }
        Impurity::Entropy => {
            let s: f64 = total
                .iter()
                .zip(left)
                .map(|(&t, &l)| t - l)
                .filter(|&c| c > 0)
                .map(|c| c as f64 * (c as f64).ln())
                .sum();
            nf * nf.ln() - s
        }
    }
}

fn place_threshold(rule: ThresholdRule, lo: f64, hi: f64) -> f64 {
    match rule {
        ThresholdRule::LowerValue => lo,
        ThresholdRule::Midpoint => {
            let t = 0.5 * lo + 0.5 * hi;
            // Adjacent floats can round the midpoint onto `hi`.
            if t >= lo && t < hi {
                t
            } else {
                lo
            }
        }
    }
}

/// Moves rows satisfying `goes_left` to the front; returns how many there are.
fn partition_in_place<F: Fn(usize) -> bool>(rows: &mut [usize], goes_left: F) -> usize {
    let mut next = 0;
    for i in 0..rows.len() {
        if goes_left(rows[i]) {
            rows.swap(i, next);
            next += 1;
        }
    }
    next
}

/// Fits a tree on every row of `partition_set`.
pub fn fit_tree(
    partition_set: &LabeledDataset,
    params: &TreeParams,
    seed: u64,
) -> Result<TreePartition> {
    let rows: Vec<usize> = (0..partition_set.n_rows()).collect();
    TreePartition::fit(partition_set, &rows, params, seed)
}
