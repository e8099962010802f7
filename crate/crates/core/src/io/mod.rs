//! Dataset CSV files, run configuration files and results files.

mod config;
mod dataset;
mod results;

pub use config::RunConfig;
pub use dataset::{load_csv, save_csv, write_csv, LabeledDataset};
pub use results::{
    load_results, save_report, save_results, write_results, ResultRow, RESULT_COLUMNS,
};
