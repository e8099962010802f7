use serde::{Deserialize, Serialize};

use crate::forest::ForestConfig;

/// Result of one estimation run. All quantities are in nats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimator: String,
    pub n: usize,
    pub d: usize,
    pub h_y: f64,
    pub h_y_given_x: f64,
    /// `h_y - h_y_given_x`; may be slightly negative from sampling noise.
    pub mi: f64,
    /// `mi / h_y` (zero when `h_y` is zero). Not clamped.
    pub mi_normalized: f64,
    /// One conditional-entropy value per tree, each from that tree's own
    /// posterior on its own evaluation rows. Empty for forest-level evaluation
    /// and non-forest estimators.
    pub per_tree_values: Vec<f64>,
    pub forest_config: Option<ForestConfig>,
    pub knn_k: Option<usize>,
    pub seed: u64,
    pub label_names: Vec<String>,
}

impl EstimateReport {
    pub fn new(estimator: &str, n: usize, d: usize, h_y: f64, h_y_given_x: f64, seed: u64) -> Self {
        let mi = h_y - h_y_given_x;
        Self {
            estimator: estimator.to_string(),
            n,
            d,
            h_y,
            h_y_given_x,
            mi,
            mi_normalized: if h_y > 0.0 { mi / h_y } else { 0.0 },
            per_tree_values: Vec::new(),
            forest_config: None,
            knn_k: None,
            seed,
            label_names: Vec::new(),
        }
    }

    /// Flat key/value view, in a fixed key order.
    pub fn to_record(&self) -> Vec<(String, String)> {
        let mut rec: Vec<(String, String)> = vec![
            ("estimator".into(), self.estimator.clone()),
            ("n".into(), self.n.to_string()),
            ("d".into(), self.d.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("h_y".into(), fmt_num(self.h_y)),
            ("h_y_given_x".into(), fmt_num(self.h_y_given_x)),
            ("mi".into(), fmt_num(self.mi)),
            ("mi_normalized".into(), fmt_num(self.mi_normalized)),
            ("labels".into(), self.label_names.join("|")),
        ];
        if !self.per_tree_values.is_empty() {
            let m = self.per_tree_values.len() as f64;
            let mean = self.per_tree_values.iter().sum::<f64>() / m;
            rec.push((
                "per_tree_count".into(),
                self.per_tree_values.len().to_string(),
            ));
            rec.push(("per_tree_mean".into(), fmt_num(mean)));
        }
        if let Some(c) = &self.forest_config {
            rec.extend(forest_config_record(c));
        }
        if let Some(k) = self.knn_k {
            rec.push(("knn_k".into(), k.to_string()));
        }
        rec
    }
}

/// Formats a number with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn forest_config_record(c: &ForestConfig) -> Vec<(String, String)> {
    vec![
        ("n_trees".into(), c.n_trees.to_string()),
        ("min_leaf_size".into(), c.tree.min_leaf_size.to_string()),
        (
            "max_depth".into(),
            c.tree.max_depth.map_or("none".into(), |v| v.to_string()),
        ),
        (
            "n_candidate_features".into(),
            c.tree
                .n_candidate_features
                .map_or("sqrt".into(), |v| v.to_string()),
        ),
        ("impurity".into(), c.tree.impurity.to_string()),
        ("threshold_rule".into(), c.tree.threshold_rule.to_string()),
        ("kappa".into(), c.kappa.to_string()),
        ("frac_partition".into(), c.frac_partition.to_string()),
        ("frac_vote".into(), c.frac_vote.to_string()),
        ("frac_eval".into(), c.frac_eval.to_string()),
        ("eval_mode".into(), c.eval_mode.to_string()),
        ("honest".into(), c.honest.to_string()),
        ("correction".into(), c.correction.to_string()),
        (
            "subsample_size".into(),
            c.subsample_size.map_or("auto".into(), |v| v.to_string()),
        ),
    ]
}
