//! Honest decision forests for estimating conditional entropy and mutual
//! information between continuous features and a categorical label.

pub mod baselines;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod forest;
pub mod inference;
pub mod io;
pub mod rng;
pub mod sim;
pub mod tree;

pub use error::{Error, Result};
pub use forest::{
    estimate_mutual_information, EstimateReport, EvalMode, EvalSource, ForestConfig,
    UncertaintyForest,
};
pub use io::LabeledDataset;
pub use sim::{SettingKind, SimSetting, TruthValues};
