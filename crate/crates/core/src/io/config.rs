//! Flat `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Every key must be one
//! of [`RunConfig::KEYS`]; repeated or unknown keys are errors. Lists are
//! comma-separated. Feature subsets are separated by `|`, with `{}` standing
//! for the empty subset.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::experiments::Estimator;
use crate::forest::ForestConfig;
use crate::sim::SettingKind;

/// Every setting a command can take. Fields not used by a command are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub setting: SettingKind,
    pub mu: f64,
    pub pi: f64,
    pub d: usize,
    pub n: usize,
    pub input: Option<PathBuf>,
    pub label_column: String,
    pub estimators: Vec<Estimator>,
    pub forest: ForestConfig,
    pub knn_k: usize,
    pub grid_n: Vec<usize>,
    pub grid_d: Vec<usize>,
    pub grid_mu: Vec<f64>,
    pub grid_pi: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub reps: usize,
    pub subsets: Vec<Vec<String>>,
    pub timing: bool,
    pub svg: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            setting: SettingKind::Spherical,
            mu: 1.0,
            pi: 0.5,
            d: 1,
            n: 1000,
            input: None,
            label_column: "y".into(),
            estimators: vec![Estimator::Uf],
            forest: ForestConfig::default(),
            knn_k: 3,
            grid_n: vec![500, 1000, 2000, 4000, 6000],
            grid_d: vec![1],
            grid_mu: vec![1.0],
            grid_pi: vec![0.5],
            trials: 20,
            seed: 0,
            out: None,
            out_dir: PathBuf::from("results"),
            reps: 1000,
            subsets: Vec::new(),
            timing: true,
            svg: false,
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value '{value}' for '{key}'")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    let items = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s))
        .collect::<Result<Vec<T>>>()?;
    if items.is_empty() {
        return Err(Error::Config(format!("'{key}' must not be empty")));
    }
    Ok(items)
}

fn parse_optional<T: std::str::FromStr>(key: &str, value: &str, none: &str) -> Result<Option<T>> {
    if value == none {
        Ok(None)
    } else {
        parse_value(key, value).map(Some)
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(format!(
            "invalid boolean '{value}' for '{key}'"
        ))),
    }
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Recognized keys with a one-line description each.
    pub const KEYS: [(&'static str, &'static str); 35] = [
        (
            "setting",
            "simulation setting: spherical, elliptical or three-class",
        ),
        ("mu", "effect size of the simulation setting"),
        ("pi", "class balance of the simulation setting"),
        (
            "d",
            "feature dimension of simulated data (noise columns pad the setting)",
        ),
        ("n", "number of simulated rows"),
        ("input", "input CSV (none = simulate)"),
        ("label_column", "label column of the input CSV"),
        (
            "estimator",
            "estimators, comma-separated: uf, cart, irf, ksg, mixed-ksg",
        ),
        ("n_trees", "trees per forest"),
        ("min_leaf_size", "minimum partition rows per leaf"),
        ("max_depth", "maximum tree depth (none = unbounded)"),
        (
            "n_candidate_features",
            "features tried per split (sqrt = ceil(sqrt(d)))",
        ),
        ("impurity", "split criterion: gini or entropy"),
        ("threshold_rule", "split threshold: midpoint or lower"),
        ("kappa", "finite-sample correction constant"),
        ("frac_partition", "fraction of rows used to place splits"),
        ("frac_vote", "fraction of rows used to fill leaves"),
        (
            "frac_eval",
            "fraction of rows used to evaluate the estimate",
        ),
        (
            "eval_mode",
            "evaluation set drawn per tree or once per forest: tree or forest",
        ),
        ("honest", "fill leaves from rows not used for splitting"),
        ("correction", "apply the finite-sample correction"),
        (
            "subsample_size",
            "rows drawn per tree (auto = partition + vote)",
        ),
        ("knn_k", "neighbours for ksg and mixed-ksg"),
        ("grid_n", "sweep grid of sample sizes"),
        ("grid_d", "sweep grid of dimensions"),
        ("grid_mu", "sweep grid of effect sizes"),
        ("grid_pi", "sweep grid of class balances"),
        ("trials", "trials per sweep cell"),
        ("seed", "master seed"),
        ("out", "output file (none = standard output)"),
        ("out_dir", "output directory for figure data"),
        ("reps", "permutation replicates"),
        (
            "subsets",
            "feature subsets for decompose, '|'-separated, {} = empty",
        ),
        ("timing", "record wall_time_ms in results"),
        ("svg", "also write SVG line plots for figure data"),
    ];

    pub fn is_key(key: &str) -> bool {
        Self::KEYS.iter().any(|(k, _)| *k == key)
    }

    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let f = &mut self.forest;
        match key {
            "setting" => self.setting = parse_value(key, v)?,
            "mu" => self.mu = parse_value(key, v)?,
            "pi" => self.pi = parse_value(key, v)?,
            "d" => self.d = parse_value(key, v)?,
            "n" => self.n = parse_value(key, v)?,
            "input" => self.input = parse_optional(key, v, "none")?,
            "label_column" => self.label_column = v.to_string(),
            "estimator" => self.estimators = parse_list(key, v)?,
            "n_trees" => f.n_trees = parse_value(key, v)?,
            "min_leaf_size" => f.tree.min_leaf_size = parse_value(key, v)?,
            "max_depth" => f.tree.max_depth = parse_optional(key, v, "none")?,
            "n_candidate_features" => f.tree.n_candidate_features = parse_optional(key, v, "sqrt")?,
            "impurity" => f.tree.impurity = parse_value(key, v)?,
            "threshold_rule" => f.tree.threshold_rule = parse_value(key, v)?,
            "kappa" => f.kappa = parse_value(key, v)?,
            "frac_partition" => f.frac_partition = parse_value(key, v)?,
            "frac_vote" => f.frac_vote = parse_value(key, v)?,
            "frac_eval" => f.frac_eval = parse_value(key, v)?,
            "eval_mode" => f.eval_mode = parse_value(key, v)?,
            "honest" => f.honest = parse_bool(key, v)?,
            "correction" => f.correction = parse_bool(key, v)?,
            "subsample_size" => f.subsample_size = parse_optional(key, v, "auto")?,
            "knn_k" => self.knn_k = parse_value(key, v)?,
            "grid_n" => self.grid_n = parse_list(key, v)?,
            "grid_d" => self.grid_d = parse_list(key, v)?,
            "grid_mu" => self.grid_mu = parse_list(key, v)?,
            "grid_pi" => self.grid_pi = parse_list(key, v)?,
            "trials" => self.trials = parse_value(key, v)?,
            "seed" => self.seed = parse_value(key, v)?,
            "out" => self.out = parse_optional(key, v, "none")?,
            "out_dir" => self.out_dir = PathBuf::from(v),
            "reps" => self.reps = parse_value(key, v)?,
            "subsets" => self.subsets = parse_subsets(v),
            "timing" => self.timing = parse_bool(key, v)?,
            "svg" => self.svg = parse_bool(key, v)?,
            _ => return Err(Error::Config(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    /// Canonical text of one key's value; `set(key, &get(key))` is a no-op.
    pub fn get(&self, key: &str) -> Option<String> {
        let f = &self.forest;
        let path = |p: &Option<PathBuf>| {
            p.as_ref()
                .map_or("none".into(), |p| p.display().to_string())
        };
        Some(match key {
            "setting" => self.setting.to_string(),
            "mu" => self.mu.to_string(),
            "pi" => self.pi.to_string(),
            "d" => self.d.to_string(),
            "n" => self.n.to_string(),
            "input" => path(&self.input),
            "label_column" => self.label_column.clone(),
            "estimator" => join(&self.estimators),
            "n_trees" => f.n_trees.to_string(),
            "min_leaf_size" => f.tree.min_leaf_size.to_string(),
            "max_depth" => f.tree.max_depth.map_or("none".into(), |v| v.to_string()),
            "n_candidate_features" => f
                .tree
                .n_candidate_features
                .map_or("sqrt".into(), |v| v.to_string()),
            "impurity" => f.tree.impurity.to_string(),
            "threshold_rule" => f.tree.threshold_rule.to_string(),
            "kappa" => f.kappa.to_string(),
            "frac_partition" => f.frac_partition.to_string(),
            "frac_vote" => f.frac_vote.to_string(),
            "frac_eval" => f.frac_eval.to_string(),
            "eval_mode" => f.eval_mode.to_string(),
            "honest" => f.honest.to_string(),
            "correction" => f.correction.to_string(),
            "subsample_size" => f.subsample_size.map_or("auto".into(), |v| v.to_string()),
            "knn_k" => self.knn_k.to_string(),
            "grid_n" => join(&self.grid_n),
            "grid_d" => join(&self.grid_d),
            "grid_mu" => join(&self.grid_mu),
            "grid_pi" => join(&self.grid_pi),
            "trials" => self.trials.to_string(),
            "seed" => self.seed.to_string(),
            "out" => path(&self.out),
            "out_dir" => self.out_dir.display().to_string(),
            "reps" => self.reps.to_string(),
            "subsets" => format_subsets(&self.subsets),
            "timing" => self.timing.to_string(),
            "svg" => self.svg.to_string(),
            _ => return None,
        })
    }

    /// Parses a config document on top of the defaults.
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut config = Self::default();
        let mut seen: Vec<String> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "line {}: expected 'key = value', got '{line}'",
                    i + 1
                ))
            })?;
            let key = key.trim();
            if !Self::is_key(key) {
                return Err(Error::Config(format!(
                    "line {}: unknown key '{key}'",
                    i + 1
                )));
            }
            if seen.iter().any(|k| k == key) {
                return Err(Error::Config(format!(
                    "line {}: duplicate key '{key}'",
                    i + 1
                )));
            }
            seen.push(key.to_string());
            config
                .set(key, value)
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_str(&text)
    }

    /// Every key with its resolved value, one `key = value` line each.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (key, _) in Self::KEYS {
            if let Some(v) = self.get(key) {
                let _ = writeln!(out, "{key} = {v}");
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        self.forest.validate()?;
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if self.reps == 0 {
            return Err(Error::Config("reps must be >= 1".into()));
        }
        if self.knn_k == 0 {
            return Err(Error::Config("knn_k must be >= 1".into()));
        }
        if self.grid_n.contains(&0) || self.grid_d.contains(&0) {
            return Err(Error::Config(
                "grid sizes and dimensions must be positive".into(),
            ));
        }
        Ok(())
    }
}

fn parse_subsets(value: &str) -> Vec<Vec<String>> {
    if value.is_empty() || value == "none" {
        return Vec::new();
    }
    value
        .split('|')
        .map(|s| {
            let s = s.trim();
            if s == "{}" {
                Vec::new()
            } else {
                s.split(',')
                    .map(|f| f.trim().to_string())
                    .filter(|f| !f.is_empty())
                    .collect()
            }
        })
        .collect()
}

fn format_subsets(subsets: &[Vec<String>]) -> String {
    if subsets.is_empty() {
        return "none".into();
    }
    subsets
        .iter()
        .map(|s| {
            if s.is_empty() {
                "{}".to_string()
            } else {
                s.join(",")
            }
        })
        .collect::<Vec<_>>()
        .join("|")
}
