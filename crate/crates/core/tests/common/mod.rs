//! Oracles shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use uforest::tree::{Node, TreePartition};
use uforest::LabeledDataset;

/// Exhaustive-scan CART: every feature, every gap between distinct values,
/// impurity recomputed from scratch for each candidate.
#[derive(Debug)]
pub enum Oracle {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Oracle>,
        right: Box<Oracle>,
    },
    Leaf,
}

fn gini_weighted(labels: &[usize], k: usize) -> f64 {
    let mut counts = vec![0usize; k];
    for &y in labels {
        counts[y] += 1;
    }
    let n = labels.len();
    if n == 0 {
        return 0.0;
    }
    let sq: usize = counts.iter().map(|c| c * c).sum();
    n as f64 - sq as f64 / n as f64
}

pub fn oracle(xs: &[Vec<f64>], ys: &[usize], rows: &[usize], k: usize, min_leaf: usize) -> Oracle {
    let m = rows.len();
    let node_labels: Vec<usize> = rows.iter().map(|&r| ys[r]).collect();
    let parent = gini_weighted(&node_labels, k);
    if parent <= 0.0 || m < 2 * min_leaf {
        return Oracle::Leaf;
    }
    let d = xs[0].len();
    let mut best: Option<(f64, usize, f64)> = None;
    for f in 0..d {
        let mut values: Vec<f64> = rows.iter().map(|&r| xs[r][f]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let t = 0.5 * w[0] + 0.5 * w[1];
            let t = if t >= w[0] && t < w[1] { t } else { w[0] };
            let left: Vec<usize> = rows
                .iter()
                .filter(|&&r| xs[r][f] <= t)
                .map(|&r| ys[r])
                .collect();
            let right: Vec<usize> = rows
                .iter()
                .filter(|&&r| xs[r][f] > t)
                .map(|&r| ys[r])
                .collect();
            if left.len() < min_leaf || right.len() < min_leaf {
                continue;
            }
            let score = gini_weighted(&left, k) + gini_weighted(&right, k);
            if best.is_none_or(|b| score < b.0) {
                best = Some((score, f, t));
            }
        }
    }
    match best {
        Some((score, feature, threshold)) if score < parent - 1e-12 * m as f64 => {
            let (l, r): (Vec<usize>, Vec<usize>) =
                rows.iter().partition(|&&r| xs[r][feature] <= threshold);
            Oracle::Split {
                feature,
                threshold,
                left: Box::new(oracle(xs, ys, &l, k, min_leaf)),
                right: Box::new(oracle(xs, ys, &r, k, min_leaf)),
            }
        }
        _ => Oracle::Leaf,
    }
}

pub fn same_shape(tree: &TreePartition, node: usize, o: &Oracle) -> bool {
    match (&tree.nodes()[node], o) {
        (Node::Leaf { .. }, Oracle::Leaf) => true,
        (
            Node::Split {
                feature,
                threshold,
                left,
                right,
            },
            Oracle::Split {
                feature: of,
                threshold: ot,
                left: ol,
                right: or,
            },
        ) => {
            feature == of
                && threshold == ot
                && same_shape(tree, *left, ol)
                && same_shape(tree, *right, or)
        }
        _ => false,
    }
}

/// A seeded dataset with n <= 200, up to 4 features (odd ones integer
/// valued) and 2 or 3 classes, as rows, labels, class count and dataset.
pub fn random_instance(seed: u64) -> (Vec<Vec<f64>>, Vec<usize>, usize, LabeledDataset) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(20..=200);
    let d = rng.random_range(1..=4);
    let k = rng.random_range(2..=3);
    let xs: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..d)
                .map(|j| {
                    if j % 2 == 1 {
                        rng.random_range(0..6) as f64
                    } else {
                        rng.random::<f64>() * 4.0 - 2.0
                    }
                })
                .collect()
        })
        .collect();
    let ys: Vec<usize> = xs
        .iter()
        .map(|x| {
            let signal = if x[0] > 0.3 { 1 } else { 0 };
            if rng.random::<f64>() < 0.7 {
                signal % k
            } else {
                rng.random_range(0..k)
            }
        })
        .collect();
    let mut ys = ys;
    ys[0] = 0;
    ys[1] = 1;
    let data = LabeledDataset::new(
        xs.concat(),
        (0..d).map(|j| format!("x{j}")).collect(),
        ys.clone(),
        (0..k).map(|c| c.to_string()).collect(),
    )
    .unwrap();
    (xs, ys, k, data)
}
