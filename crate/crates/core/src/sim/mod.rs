//! Gaussian-mixture simulation settings and their ground-truth entropies.
//!
//! Three settings are supported, each padded with independent standard normal
//! noise dimensions up to the requested `d`:
//!
//! * `Spherical`: two classes `y ∈ {-1, +1}`, `P(y = +1) = π`, first coordinate
//!   `N(y·μ, 1)`.
//! * `Elliptical`: as spherical on the first two coordinates, but class `-1`
//!   has covariance `diag(3, 1)`.
//! * `ThreeClass`: classes drawn from `(π, (1-π)/2, (1-π)/2)` with means
//!   `(0, μ)`, `(μ, 0)`, `(-μ, 0)` and identity covariance.
//!
//! Ground truth is computed by numerically integrating the analytic class
//! posterior over the signal coordinates only; noise coordinates cancel out of
//! the posterior and so never affect the truth.

pub mod quadrature;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::LabeledDataset;
use crate::rng::{stream, Domain};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SettingKind {
    Spherical,
    Elliptical,
    ThreeClass,
}

impl SettingKind {
    /// Number of leading coordinates that carry class information.
    pub fn base_dim(self) -> usize {
        match self {
            SettingKind::Spherical => 1,
            SettingKind::Elliptical | SettingKind::ThreeClass => 2,
        }
    }

    pub fn n_classes(self) -> usize {
        match self {
            SettingKind::Spherical | SettingKind::Elliptical => 2,
            SettingKind::ThreeClass => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SettingKind::Spherical => "spherical",
            SettingKind::Elliptical => "elliptical",
            SettingKind::ThreeClass => "three-class",
        }
    }
}

impl fmt::Display for SettingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SettingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "spherical" => Ok(SettingKind::Spherical),
            "elliptical" => Ok(SettingKind::Elliptical),
            "three-class" | "threeclass" | "three_class" => Ok(SettingKind::ThreeClass),
            other => Err(Error::Config(format!(
                "unknown setting '{other}' (expected spherical, elliptical or three-class)"
            ))),
        }
    }
}

/// One simulation setting: mixture family, effect size, class prior and dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSetting {
    pub kind: SettingKind,
    pub mu: f64,
    pub pi: f64,
    pub d: usize,
}

/// Ground-truth information quantities, in nats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthValues {
    pub h_y: f64,
    pub h_y_given_x: f64,
    pub mi: f64,
    pub mi_normalized: f64,
}

#[derive(Debug, Clone, Copy)]
struct Component {
    weight: f64,
    mean: [f64; 2],
    var: [f64; 2],
}

impl SimSetting {
    pub fn new(kind: SettingKind, mu: f64, pi: f64, d: usize) -> Result<Self> {
        let s = Self { kind, mu, pi, d };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.mu >= 0.0) {
            return Err(Error::Config(format!(
                "effect size mu must be >= 0, got {}",
                self.mu
            )));
        }
        if !(self.pi > 0.0 && self.pi < 1.0) {
            return Err(Error::Config(format!(
                "class prior pi must lie in (0, 1), got {}",
                self.pi
            )));
        }
        if self.d < self.kind.base_dim() {
            return Err(Error::Config(format!(
                "{} setting needs d >= {}, got {}",
                self.kind,
                self.kind.base_dim(),
                self.d
            )));
        }
        Ok(())
    }

    /// Class prior vector, indexed by label code.
    pub fn class_weights(&self) -> Vec<f64> {
        match self.kind {
            // code 0 is y = -1, code 1 is y = +1
            SettingKind::Spherical | SettingKind::Elliptical => vec![1.0 - self.pi, self.pi],
            SettingKind::ThreeClass => {
                let rest = 0.5 * (1.0 - self.pi);
                vec![self.pi, rest, rest]
            }
        }
    }

    pub fn label_names(&self) -> Vec<String> {
        match self.kind {
            SettingKind::Spherical | SettingKind::Elliptical => vec!["-1".into(), "1".into()],
            SettingKind::ThreeClass => vec!["0".into(), "1".into(), "2".into()],
        }
    }

    fn components(&self) -> Vec<Component> {
        let w = self.class_weights();
        let mu = self.mu;
        match self.kind {
            SettingKind::Spherical => vec![
                Component {
                    weight: w[0],
                    mean: [-mu, 0.0],
                    var: [1.0, 1.0],
                },
                Component {
                    weight: w[1],
                    mean: [mu, 0.0],
                    var: [1.0, 1.0],
                },
            ],
            SettingKind::Elliptical => vec![
                Component {
                    weight: w[0],
                    mean: [-mu, 0.0],
                    var: [3.0, 1.0],
                },
                Component {
                    weight: w[1],
                    mean: [mu, 0.0],
                    var: [1.0, 1.0],
                },
            ],
            SettingKind::ThreeClass => vec![
                Component {
                    weight: w[0],
                    mean: [0.0, mu],
                    var: [1.0, 1.0],
                },
                Component {
                    weight: w[1],
                    mean: [mu, 0.0],
                    var: [1.0, 1.0],
                },
                Component {
                    weight: w[2],
                    mean: [-mu, 0.0],
                    var: [1.0, 1.0],
                },
            ],
        }
    }

    /// Analytic class posterior `p(y | x)`; only the signal coordinates of `x` are read.
    pub fn posterior(&self, x: &[f64]) -> Vec<f64> {
        let comps = self.components();
        let dims = self.kind.base_dim();
        let logs: Vec<f64> = comps.iter().map(|c| log_joint(c, &x[..dims])).collect();
        let lse = log_sum_exp(&logs);
        logs.iter().map(|l| (l - lse).exp()).collect()
    }
}

fn log_normal(x: f64, mean: f64, var: f64) -> f64 {
    let z = x - mean;
    -0.5 * (z * z / var + var.ln() + (2.0 * std::f64::consts::PI).ln())
}

fn log_joint(c: &Component, x: &[f64]) -> f64 {
    c.weight.ln()
        + x.iter()
            .enumerate()
            .map(|(j, &v)| log_normal(v, c.mean[j], c.var[j]))
            .sum::<f64>()
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Mixture density times the entropy of the posterior at `x`.
fn weighted_posterior_entropy(comps: &[Component], x: &[f64]) -> f64 {
    let mut logs = [0.0f64; 3];
    for (k, c) in comps.iter().enumerate() {
        logs[k] = log_joint(c, x);
    }
    let logs = &logs[..comps.len()];
    let lse = log_sum_exp(logs);
    if lse == f64::NEG_INFINITY {
        return 0.0;
    }
    let h: f64 = logs
        .iter()
        .map(|&l| {
            let lp = l - lse;
            let p = lp.exp();
            if p > 0.0 {
                -p * lp
            } else {
                0.0
            }
        })
        .sum();
    lse.exp() * h
}

const TAIL_SDS: f64 = 14.0;
const TOL: f64 = 1e-10;

fn bounds(comps: &[Component], dim: usize) -> (f64, f64) {
    let lo = comps
        .iter()
        .map(|c| c.mean[dim] - TAIL_SDS * c.var[dim].sqrt())
        .fold(f64::INFINITY, f64::min);
    let hi = comps
        .iter()
        .map(|c| c.mean[dim] + TAIL_SDS * c.var[dim].sqrt())
        .fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Ground truth for a setting, by adaptive quadrature over the signal coordinates.
pub fn truth(setting: &SimSetting) -> Result<TruthValues> {
    setting.validate()?;
    let comps = setting.components();
    let h_y: f64 = setting
        .class_weights()
        .iter()
        .map(|&w| if w > 0.0 { -w * w.ln() } else { 0.0 })
        .sum();
    let (a0, b0) = bounds(&comps, 0);
    let raw = match setting.kind.base_dim() {
        1 => quadrature::integrate(|x| weighted_posterior_entropy(&comps, &[x]), a0, b0, TOL).0,
        _ => {
            let (a1, b1) = bounds(&comps, 1);
            quadrature::integrate(
                |x0| {
                    quadrature::integrate(
                        |x1| weighted_posterior_entropy(&comps, &[x0, x1]),
                        a1,
                        b1,
                        TOL * 1e-2,
                    )
                    .0
                },
                a0,
                b0,
                TOL,
            )
            .0
        }
    };
    let h_y_given_x = raw.clamp(0.0, h_y);
    let mi = h_y - h_y_given_x;
    Ok(TruthValues {
        h_y,
        h_y_given_x,
        mi,
        mi_normalized: if h_y > 0.0 { mi / h_y } else { 0.0 },
    })
}

/// Draws `n` labeled rows. Row `i` depends only on `(seed, i)`, so growing `n`
/// leaves earlier rows unchanged.
pub fn sample(setting: &SimSetting, n: usize, seed: u64) -> Result<LabeledDataset> {
    setting.validate()?;
    if n == 0 {
        return Err(Error::Config("sample size must be positive".into()));
    }
    let d = setting.d;
    let comps = setting.components();
    let base = setting.kind.base_dim();
    let mut cumulative = Vec::with_capacity(comps.len());
    let mut acc = 0.0;
    for c in &comps {
        acc += c.weight;
        cumulative.push(acc);
    }
    let mut features = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = stream(seed, Domain::SampleRow, i as u64);
        let u: f64 = rng.random();
        let label = cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(comps.len() - 1);
        let comp = &comps[label];
        for j in 0..d {
            let z: f64 = rng.sample(StandardNormal);
            if j < base {
                features.push(comp.mean[j] + comp.var[j].sqrt() * z);
            } else {
                features.push(z);
            }
        }
        labels.push(label);
    }
    let names = (1..=d).map(|j| format!("x{j}")).collect();
    LabeledDataset::from_parts(
        features,
        names,
        Some(labels),
        setting.label_names(),
        Some("y".to_string()),
    )
}
