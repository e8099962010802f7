use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::TreeParams;

/// How the evaluation set is drawn and how tree posteriors are combined on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EvalMode {
    /// A fresh evaluation set is drawn for every tree. Each evaluation row
    /// averages the posteriors of the trees that held it out, and the entropy
    /// of that average is then averaged over rows.
    TreeLevel,
    /// One evaluation set is held out up front and shared by all trees; each
    /// row uses the posterior averaged over the whole forest.
    ForestLevel,
}

impl fmt::Display for EvalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvalMode::TreeLevel => "tree",
            EvalMode::ForestLevel => "forest",
        })
    }
}

impl FromStr for EvalMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tree" | "tree-level" | "treelevel" => Ok(EvalMode::TreeLevel),
            "forest" | "forest-level" | "forestlevel" => Ok(EvalMode::ForestLevel),
            other => Err(Error::Config(format!(
                "unknown eval mode '{other}' (tree|forest)"
            ))),
        }
    }
}

/// Forest hyperparameters. The default is the honest, corrected forest;
/// [`ForestConfig::cart`] is the plain CART forest baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub tree: TreeParams,
    pub kappa: f64,
    pub frac_partition: f64,
    pub frac_vote: f64,
    pub frac_eval: f64,
    pub eval_mode: EvalMode,
    pub honest: bool,
    pub correction: bool,
    /// Rows drawn per tree from the non-evaluation pool; `None` means
    /// partition plus voting size.
    pub subsample_size: Option<usize>,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 300,
            tree: TreeParams::default(),
            kappa: 3.0,
            frac_partition: 0.4,
            frac_vote: 0.3,
            frac_eval: 0.3,
            eval_mode: EvalMode::TreeLevel,
            honest: true,
            correction: true,
            subsample_size: None,
        }
    }
}

/// Row counts for one tree's partition, voting and evaluation sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSizes {
    pub partition: usize,
    pub vote: usize,
    pub eval: usize,
}

impl ForestConfig {
    /// Dishonest, uncorrected forest: every tree votes with its own training rows.
    pub fn cart() -> Self {
        Self {
            honest: false,
            correction: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.tree.validate()?;
        if self.n_trees == 0 {
            return Err(Error::Config("n_trees must be >= 1".into()));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::Config(format!(
                "kappa must be positive, got {}",
                self.kappa
            )));
        }
        let fracs = [self.frac_partition, self.frac_vote, self.frac_eval];
        if fracs.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(Error::Config(format!(
                "split fractions must lie in [0, 1], got {fracs:?}"
            )));
        }
        let total: f64 = fracs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "split fractions must sum to 1, got {total}"
            )));
        }
        if self.frac_partition == 0.0 || self.frac_eval == 0.0 {
            return Err(Error::Config(
                "partition and evaluation fractions must be positive".into(),
            ));
        }
        if self.honest && self.frac_vote == 0.0 {
            return Err(Error::Config(
                "an honest forest needs a positive voting fraction".into(),
            ));
        }
        if self.subsample_size == Some(0) {
            return Err(Error::Config("subsample_size must be >= 1".into()));
        }
        Ok(())
    }

    /// Set sizes for `n` labeled rows.
    pub fn split_sizes(&self, n: usize) -> Result<SplitSizes> {
        let partition = (self.frac_partition * n as f64).round() as usize;
        let vote = (self.frac_vote * n as f64).round() as usize;
        let eval = n.saturating_sub(partition + vote);
        let sizes = SplitSizes {
            partition,
            vote,
            eval,
        };
        if partition == 0 || eval == 0 || (self.honest && vote == 0) {
            return Err(Error::Fit(format!(
                "{n} rows are too few for split fractions {}/{}/{}",
                self.frac_partition, self.frac_vote, self.frac_eval
            )));
        }
        Ok(sizes)
    }

    /// Partition and voting counts for an honest subsample of `s` rows.
    pub(crate) fn honest_split(&self, s: usize, sizes: SplitSizes) -> Result<(usize, usize)> {
        if s == sizes.partition + sizes.vote {
            return Ok((sizes.partition, sizes.vote));
        }
        if s < 2 {
            return Err(Error::Fit(format!(
                "subsample of {s} rows cannot be split honestly"
            )));
        }
        let share = self.frac_partition / (self.frac_partition + self.frac_vote);
        let p = ((share * s as f64).round() as usize).clamp(1, s - 1);
        Ok((p, s - p))
    }
}
