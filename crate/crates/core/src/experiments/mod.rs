//! Estimator dispatch, simulation sweeps and figure presets.

mod figures;
mod svg;

pub use figures::{reproduce, write_decomposition, Figure, FigureFile, FIG4_SUBSETS};
pub use svg::{line_plot, Series};

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{irf_estimate, ksg_estimate, mixed_ksg_estimate, IsotonicForest};
use crate::error::{Error, Result};
use crate::forest::{
    estimate_mutual_information, fmt_num, EstimateReport, ForestConfig, UncertaintyForest,
};
use crate::io::{LabeledDataset, ResultRow, RunConfig};
use crate::rng::{derive_seed, Domain};
use crate::sim::{sample, truth, SettingKind, SimSetting};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Estimator {
    Uf,
    Cart,
    Irf,
    Ksg,
    MixedKsg,
}

impl Estimator {
    pub const ALL: [Estimator; 5] = [
        Estimator::Uf,
        Estimator::Cart,
        Estimator::Irf,
        Estimator::Ksg,
        Estimator::MixedKsg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::Uf => "uf",
            Estimator::Cart => "cart",
            Estimator::Irf => "irf",
            Estimator::Ksg => "ksg",
            Estimator::MixedKsg => "mixed-ksg",
        }
    }

    pub fn is_forest(self) -> bool {
        matches!(self, Estimator::Uf | Estimator::Cart | Estimator::Irf)
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Estimator::ALL
            .into_iter()
            .find(|e| e.name() == lower || (lower == "mixed_ksg" && *e == Estimator::MixedKsg))
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown estimator '{s}' (uf|cart|irf|ksg|mixed-ksg)"
                ))
            })
    }
}

/// The forest config used by `estimator`: `cart` switches honesty and the
/// correction off; the other estimators use `forest` as given.
pub fn forest_config_for(estimator: Estimator, forest: &ForestConfig) -> ForestConfig {
    match estimator {
        Estimator::Cart => ForestConfig {
            honest: false,
            correction: false,
            ..forest.clone()
        },
        _ => forest.clone(),
    }
}

/// Runs one estimator on labeled data.
pub fn run_estimator(
    estimator: Estimator,
    data: &LabeledDataset,
    forest: &ForestConfig,
    knn_k: usize,
    seed: u64,
) -> Result<EstimateReport> {
    let config = forest_config_for(estimator, forest);
    match estimator {
        Estimator::Uf | Estimator::Cart => estimate_mutual_information(data, &config, seed),
        Estimator::Irf => irf_estimate(data, &config, seed),
        Estimator::Ksg => ksg_estimate(data, knn_k, seed),
        Estimator::MixedKsg => mixed_ksg_estimate(data, knn_k, seed),
    }
}

/// One point of a simulation grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub d: usize,
    pub mu: f64,
    pub pi: f64,
    pub n: usize,
}

/// Grid cells in `d`, `mu`, `pi`, `n` order, `n` varying fastest.
pub fn grid_cells(config: &RunConfig) -> Vec<Cell> {
    let mut cells = Vec::new();
    for &d in &config.grid_d {
        for &mu in &config.grid_mu {
            for &pi in &config.grid_pi {
                for &n in &config.grid_n {
                    cells.push(Cell { d, mu, pi, n });
                }
            }
        }
    }
    cells
}

/// Seed of the data drawn in trial `t`. It does not depend on the cell, so
/// trials are paired across the grid (and nested across `n`).
pub fn trial_data_seed(seed: u64, trial: usize) -> u64 {
    derive_seed(seed, Domain::Trial, trial as u64)
}

/// Seed handed to the estimators for cell `c`, trial `t`.
pub fn trial_fit_seed(seed: u64, cell: usize, trial: usize) -> u64 {
    derive_seed(
        derive_seed(seed, Domain::Cell, cell as u64),
        Domain::Trial,
        trial as u64,
    )
}

/// Runs every configured estimator on every grid cell and trial. Rows come
/// back ordered by cell, then trial, then estimator, whatever the thread count.
pub fn sweep(config: &RunConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    if config.estimators.is_empty() {
        return Err(Error::Config("no estimator selected".into()));
    }
    let cells = grid_cells(config);
    let settings = cells
        .iter()
        .map(|c| SimSetting::new(config.setting, c.mu, c.pi, c.d))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..config.trials).map(move |t| (c, t)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(c, t)| {
            let cell = cells[c];
            let data = sample(&settings[c], cell.n, trial_data_seed(config.seed, t))?;
            let seed = trial_fit_seed(config.seed, c, t);
            config
                .estimators
                .iter()
                .map(|&e| {
                    let start = Instant::now();
                    let report = run_estimator(e, &data, &config.forest, config.knn_k, seed)?;
                    let ms = config.timing.then(|| start.elapsed().as_secs_f64() * 1e3);
                    Ok(ResultRow::from_report(
                        &report,
                        Some(cell.mu),
                        Some(cell.pi),
                        ms,
                    ))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// One `truth` row per cell, from quadrature, so truth lines up with the
/// estimates.
pub fn truth_rows(kind: SettingKind, cells: &[Cell]) -> Result<Vec<ResultRow>> {
    cells
        .iter()
        .map(|c| {
            let t = truth(&SimSetting::new(kind, c.mu, c.pi, c.d)?)?;
            Ok(ResultRow {
                estimator: "truth".into(),
                n: c.n,
                d: c.d,
                mu: Some(c.mu),
                pi: Some(c.pi),
                seed: 0,
                h_y: t.h_y,
                h_y_given_x: t.h_y_given_x,
                mi: t.mi,
                mi_normalized: t.mi_normalized,
                wall_time_ms: None,
            })
        })
        .collect()
}

/// A fitted model that can report class posteriors.
pub enum PosteriorModel {
    Forest(UncertaintyForest),
    Isotonic(IsotonicForest),
}

impl PosteriorModel {
    pub fn fit(
        estimator: Estimator,
        data: &LabeledDataset,
        forest: &ForestConfig,
        seed: u64,
    ) -> Result<Self> {
        let config = forest_config_for(estimator, forest);
        match estimator {
            Estimator::Uf | Estimator::Cart => {
                Ok(Self::Forest(UncertaintyForest::fit(data, &config, seed)?))
            }
            Estimator::Irf => Ok(Self::Isotonic(IsotonicForest::fit(data, &config, seed)?)),
            other => Err(Error::Config(format!(
                "{other} does not estimate posteriors"
            ))),
        }
    }

    pub fn posterior(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Self::Forest(f) => f.posterior(x),
            Self::Isotonic(f) => f.posterior(x),
        }
    }
}

/// Mean and variance over trials of an estimated class probability at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub estimator: String,
    pub x: f64,
    pub mean: f64,
    pub variance: f64,
    pub truth: f64,
}

/// Estimated probability of class `class` along the first coordinate (other
/// coordinates zero), summarized over `trials` independent datasets. The
/// variance uses the `trials - 1` denominator.
#[allow(clippy::too_many_arguments)]
pub fn posterior_curves(
    estimators: &[Estimator],
    setting: &SimSetting,
    n: usize,
    trials: usize,
    grid: &[f64],
    class: usize,
    forest: &ForestConfig,
    seed: u64,
) -> Result<Vec<CurvePoint>> {
    if trials < 2 {
        return Err(Error::Config(
            "posterior curves need at least 2 trials".into(),
        ));
    }
    if class >= setting.kind.n_classes() {
        return Err(Error::Config(format!("class {class} out of range")));
    }
    let point = |x: f64| {
        let mut p = vec![0.0; setting.d];
        p[0] = x;
        p
    };
    // values[e][t][g]
    let values = estimators
        .iter()
        .enumerate()
        .map(|(ei, &e)| {
            (0..trials)
                .into_par_iter()
                .map(|t| {
                    let data = sample(setting, n, trial_data_seed(seed, t))?;
                    let model = PosteriorModel::fit(e, &data, forest, trial_fit_seed(seed, ei, t))?;
                    grid.iter()
                        .map(|&x| Ok(model.posterior(&point(x))?[class]))
                        .collect::<Result<Vec<f64>>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(estimators.len() * grid.len());
    for (e, per_trial) in estimators.iter().zip(&values) {
        for (g, &x) in grid.iter().enumerate() {
            let v: Vec<f64> = per_trial.iter().map(|row| row[g]).collect();
            let m = v.len() as f64;
            let mean = v.iter().sum::<f64>() / m;
            let variance = v.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (m - 1.0);
            out.push(CurvePoint {
                estimator: e.to_string(),
                x,
                mean,
                variance,
                truth: setting.posterior(&point(x))[class],
            });
        }
    }
    Ok(out)
}

pub fn write_curves<W: std::io::Write>(points: &[CurvePoint], mut out: W) -> std::io::Result<()> {
    writeln!(out, "estimator,x,mean,variance,truth")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{}",
            p.estimator,
            fmt_num(p.x),
            fmt_num(p.mean),
            fmt_num(p.variance),
            fmt_num(p.truth)
        )?;
    }
    Ok(())
}
