use std::fmt;
use std::io::Write;
use std::str::FromStr;

use super::svg::{line_plot, Series};
use super::{grid_cells, posterior_curves, sweep, truth_rows, write_curves, CurvePoint, Estimator};
use crate::error::{Error, Result};
use crate::forest::fmt_num;
use crate::inference::{mi_decomposition, permutation_test, DecompositionRow};
use crate::io::{load_csv, write_results, ResultRow, RunConfig};
use crate::sim::{SettingKind, SimSetting};

/// Figure presets of `reproduce`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Posterior curves of CART, IRF and UF.
    Fig1,
    /// Conditional entropy against sample size and effect size.
    Fig2,
    /// Normalized mutual information against class prior and dimension.
    Fig3,
    /// Mutual information decomposition of a labeled CSV.
    Fig4,
}

impl FromStr for Figure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fig1" | "1" => Ok(Figure::Fig1),
            "fig2" | "2" => Ok(Figure::Fig2),
            "fig3" | "3" => Ok(Figure::Fig3),
            "fig4" | "4" => Ok(Figure::Fig4),
            _ => Err(Error::Config(format!(
                "unknown figure '{s}' (fig1|fig2|fig3|fig4)"
            ))),
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = match self {
            Figure::Fig1 => 1,
            Figure::Fig2 => 2,
            Figure::Fig3 => 3,
            Figure::Fig4 => 4,
        };
        write!(f, "fig{n}")
    }
}

/// A named output of a figure preset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FigureFile {
    pub name: String,
    pub contents: String,
}

pub const FIG_N_GRID: [usize; 5] = [500, 1000, 2000, 4000, 6000];
pub const FIG_MU_GRID: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 4.0];
pub const FIG_PI_GRID: [f64; 5] = [0.1, 0.2, 0.3, 0.4, 0.5];
pub const FIG_D_GRID: [usize; 5] = [2, 4, 8, 16, 20];

/// Default feature subsets of the decomposition table.
pub const FIG4_SUBSETS: [&[&str]; 7] = [
    &["cluster"],
    &["cluster", "claw"],
    &["cluster", "dist"],
    &["cluster", "age"],
    &["cluster", "claw", "dist"],
    &["cluster", "claw", "age"],
    &["cluster", "dist", "age"],
];

/// Runs the desk-scale preset of `figure`. Trials, seed, forest settings,
/// `knn_k`, timing and `svg` come from `config`; grids and settings are fixed
/// by the preset.
pub fn reproduce(figure: Figure, config: &RunConfig) -> Result<Vec<FigureFile>> {
    config.validate()?;
    match figure {
        Figure::Fig1 => fig1(config),
        Figure::Fig2 => fig2(config),
        Figure::Fig3 => fig3(config),
        Figure::Fig4 => fig4(config),
    }
}

fn to_string(write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<String> {
    let mut buf = Vec::new();
    write(&mut buf).map_err(|e| Error::Data(format!("cannot format output: {e}")))?;
    String::from_utf8(buf).map_err(|e| Error::Data(e.to_string()))
}

fn fig1(config: &RunConfig) -> Result<Vec<FigureFile>> {
    let setting = SimSetting::new(SettingKind::Spherical, 1.0, 0.5, 1)?;
    let grid: Vec<f64> = (0..=60).map(|i| -3.0 + 0.1 * i as f64).collect();
    let estimators = [Estimator::Cart, Estimator::Irf, Estimator::Uf];
    let points = posterior_curves(
        &estimators,
        &setting,
        6000,
        config.trials,
        &grid,
        1,
        &config.forest,
        config.seed,
    )?;
    let mut files = vec![FigureFile {
        name: "fig1.csv".into(),
        contents: to_string(|b| write_curves(&points, b))?,
    }];
    if config.svg {
        let curve = |e: Estimator, f: fn(&CurvePoint) -> f64| Series {
            name: e.to_string(),
            points: points
                .iter()
                .filter(|p| p.estimator == e.name())
                .map(|p| (p.x, f(p)))
                .collect(),
        };
        let mut means: Vec<Series> = estimators.iter().map(|&e| curve(e, |p| p.mean)).collect();
        means.push(Series {
            name: "truth".into(),
            points: grid
                .iter()
                .map(|&x| (x, setting.posterior(&[x])[1]))
                .collect(),
        });
        let vars: Vec<Series> = estimators
            .iter()
            .map(|&e| curve(e, |p| p.variance))
            .collect();
        files.push(FigureFile {
            name: "fig1_mean.svg".into(),
            contents: line_plot("Posterior mean", "x", "p(y = 1 | x)", &means),
        });
        files.push(FigureFile {
            name: "fig1_variance.svg".into(),
            contents: line_plot("Posterior variance", "x", "variance", &vars),
        });
    }
    Ok(files)
}

/// Mean of `value` per estimator along `x`, one series each, in row order.
fn mean_series(
    rows: &[ResultRow],
    x: impl Fn(&ResultRow) -> f64,
    value: impl Fn(&ResultRow) -> f64,
) -> Vec<Series> {
    let mut names: Vec<&str> = Vec::new();
    for r in rows {
        if !names.contains(&r.estimator.as_str()) {
            names.push(&r.estimator);
        }
    }
    names
        .into_iter()
        .map(|name| {
            let mut acc: Vec<(f64, f64, usize)> = Vec::new();
            for r in rows.iter().filter(|r| r.estimator == name) {
                let xv = x(r);
                match acc.iter_mut().find(|a| a.0 == xv) {
                    Some(a) => {
                        a.1 += value(r);
                        a.2 += 1;
                    }
                    None => acc.push((xv, value(r), 1)),
                }
            }
            Series {
                name: name.to_string(),
                points: acc.into_iter().map(|(x, s, c)| (x, s / c as f64)).collect(),
            }
        })
        .collect()
}

struct Panel {
    name: &'static str,
    setting: SettingKind,
    estimators: Vec<Estimator>,
    grid_n: Vec<usize>,
    grid_d: Vec<usize>,
    grid_mu: Vec<f64>,
    grid_pi: Vec<f64>,
    x_label: &'static str,
    normalized: bool,
}

fn run_panel(config: &RunConfig, panel: Panel) -> Result<Vec<FigureFile>> {
    let cfg = RunConfig {
        setting: panel.setting,
        estimators: panel.estimators,
        grid_n: panel.grid_n,
        grid_d: panel.grid_d,
        grid_mu: panel.grid_mu,
        grid_pi: panel.grid_pi,
        ..config.clone()
    };
    let mut rows = truth_rows(cfg.setting, &grid_cells(&cfg))?;
    rows.extend(sweep(&cfg)?);
    let mut files = vec![FigureFile {
        name: format!("{}.csv", panel.name),
        contents: {
            let mut buf = Vec::new();
            write_results(&rows, &mut buf)?;
            String::from_utf8(buf).map_err(|e| Error::Data(e.to_string()))?
        },
    }];
    if config.svg {
        let x = |r: &ResultRow| match panel.x_label {
            "n" => r.n as f64,
            "d" => r.d as f64,
            "mu" => r.mu.unwrap_or(f64::NAN),
            _ => r.pi.unwrap_or(f64::NAN),
        };
        let (series, y_label) = if panel.normalized {
            (
                mean_series(&rows, x, |r| r.mi_normalized),
                "normalized I(X; Y)",
            )
        } else {
            (mean_series(&rows, x, |r| r.h_y_given_x), "H(Y | X), nats")
        };
        files.push(FigureFile {
            name: format!("{}.svg", panel.name),
            contents: line_plot(panel.name, panel.x_label, y_label, &series),
        });
    }
    Ok(files)
}

fn fig2(config: &RunConfig) -> Result<Vec<FigureFile>> {
    let estimators = vec![Estimator::Cart, Estimator::Irf, Estimator::Uf];
    let panels = [
        ("fig2a", 1, FIG_N_GRID.to_vec(), vec![1.0], "n"),
        ("fig2b", 1, vec![3000], FIG_MU_GRID.to_vec(), "mu"),
        ("fig2c", 20, FIG_N_GRID.to_vec(), vec![1.0], "n"),
        ("fig2d", 20, vec![6000], FIG_MU_GRID.to_vec(), "mu"),
    ];
    let mut files = Vec::new();
    for (name, d, grid_n, grid_mu, x_label) in panels {
        files.extend(run_panel(
            config,
            Panel {
                name,
                setting: SettingKind::Spherical,
                estimators: estimators.clone(),
                grid_n,
                grid_d: vec![d],
                grid_mu,
                grid_pi: vec![0.5],
                x_label,
                normalized: false,
            },
        )?);
    }
    Ok(files)
}

fn fig3(config: &RunConfig) -> Result<Vec<FigureFile>> {
    let estimators = vec![
        Estimator::Uf,
        Estimator::Ksg,
        Estimator::MixedKsg,
        Estimator::Irf,
    ];
    let mut files = Vec::new();
    for (kind, pi_name, d_name) in [
        (
            SettingKind::Spherical,
            "fig3_spherical_pi",
            "fig3_spherical_d",
        ),
        (
            SettingKind::Elliptical,
            "fig3_elliptical_pi",
            "fig3_elliptical_d",
        ),
        (
            SettingKind::ThreeClass,
            "fig3_three-class_pi",
            "fig3_three-class_d",
        ),
    ] {
        let balanced = if kind == SettingKind::ThreeClass {
            1.0 / 3.0
        } else {
            0.5
        };
        let mut pis = FIG_PI_GRID.to_vec();
        *pis.last_mut().unwrap() = balanced;
        files.extend(run_panel(
            config,
            Panel {
                name: pi_name,
                setting: kind,
                estimators: estimators.clone(),
                grid_n: vec![6000],
                grid_d: vec![2],
                grid_mu: vec![1.0],
                grid_pi: pis,
                x_label: "pi",
                normalized: true,
            },
        )?);
        files.extend(run_panel(
            config,
            Panel {
                name: d_name,
                setting: kind,
                estimators: estimators.clone(),
                grid_n: vec![6000],
                grid_d: FIG_D_GRID.to_vec(),
                grid_mu: vec![1.0],
                grid_pi: vec![balanced],
                x_label: "d",
                normalized: true,
            },
        )?);
    }
    Ok(files)
}

fn fig4(config: &RunConfig) -> Result<Vec<FigureFile>> {
    let path = config
        .input
        .as_ref()
        .ok_or_else(|| Error::Config("fig4 needs an input CSV (--input)".into()))?;
    let data = load_csv(path, Some(&config.label_column))?;
    data.require_labels()?;
    let subsets: Vec<Vec<String>> = if config.subsets.is_empty() {
        FIG4_SUBSETS
            .iter()
            .map(|s| s.iter().map(|f| f.to_string()).collect())
            .collect()
    } else {
        config.subsets.clone()
    };
    let rows = mi_decomposition(&data, &subsets, &config.forest, config.seed)?;
    let table = to_string(|b| write_decomposition(&rows, b))?;
    let test = permutation_test(&data, &config.forest, config.reps, config.seed)?;
    let h_y = rows.first().map(|r| r.h_y).unwrap_or(0.0);
    let normalized = if h_y > 0.0 { test.observed / h_y } else { 0.0 };
    let perm = format!(
        "observed,observed_normalized,p_value,reps\n{},{},{},{}\n",
        fmt_num(test.observed),
        fmt_num(normalized),
        fmt_num(test.p_value),
        config.reps
    );
    Ok(vec![
        FigureFile {
            name: "fig4.csv".into(),
            contents: table,
        },
        FigureFile {
            name: "fig4_permutation.csv".into(),
            contents: perm,
        },
    ])
}

/// Writes decomposition rows as CSV, raw nats followed by the values divided
/// by the label entropy. Feature names within a subset are space-separated.
pub fn write_decomposition<W: Write>(rows: &[DecompositionRow], mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "in_features,i_in,i_cond,i_total,i_in_normalized,i_cond_normalized,i_total_normalized"
    )?;
    for r in rows {
        let (a, b, c) = r.normalized();
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.in_features.join(" "),
            fmt_num(r.i_in),
            fmt_num(r.i_cond),
            fmt_num(r.i_total),
            fmt_num(a),
            fmt_num(b),
            fmt_num(c)
        )?;
    }
    Ok(())
}
