//! Isotonic calibration of class scores by pool-adjacent-violators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weighted least-squares non-decreasing fit to `y` (already ordered by the
/// predictor). Returns one fitted value per input.
pub fn pava(y: &[f64], w: &[f64]) -> Vec<f64> {
    assert_eq!(y.len(), w.len());
    // Blocks as (mean, weight, count).
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(y.len());
    for (&v, &wt) in y.iter().zip(w) {
        blocks.push((v, wt, 1));
        while blocks.len() > 1 {
            let (m2, w2, c2) = blocks[blocks.len() - 1];
            let (m1, w1, c1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.truncate(blocks.len() - 2);
            let wt = w1 + w2;
            blocks.push(((m1 * w1 + m2 * w2) / wt, wt, c1 + c2));
        }
    }
    blocks
        .iter()
        .flat_map(|&(m, _, c)| std::iter::repeat_n(m, c))
        .collect()
}

/// Non-decreasing step function from a raw score to a calibrated probability.
///
/// `knots[i]` is the smallest score of the `i`-th fitted level; a score maps
/// to the level of the last knot at or below it, or to the first level when it
/// lies below every knot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationMap {
    knots: Vec<f64>,
    levels: Vec<f64>,
}

impl CalibrationMap {
    /// Fits the map to `(score, target)` pairs, targets in `[0, 1]`.
    pub fn fit(scores: &[f64], targets: &[f64]) -> Result<Self> {
        if scores.is_empty() || scores.len() != targets.len() {
            return Err(Error::Input(format!(
                "need matching non-empty scores and targets, got {} and {}",
                scores.len(),
                targets.len()
            )));
        }
        if scores.iter().chain(targets).any(|v| !v.is_finite()) {
            return Err(Error::Input("scores and targets must be finite".into()));
        }
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
        // Equal scores share one level, so they are pooled before fitting.
        let mut xs: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        let mut ws: Vec<f64> = Vec::new();
        for &i in &order {
            match xs.last() {
                Some(&last) if last == scores[i] => {
                    let j = ys.len() - 1;
                    ys[j] += targets[i];
                    ws[j] += 1.0;
                }
                _ => {
                    xs.push(scores[i]);
                    ys.push(targets[i]);
                    ws.push(1.0);
                }
            }
        }
        for (y, w) in ys.iter_mut().zip(&ws) {
            *y /= w;
        }
        let fitted = pava(&ys, &ws);
        let mut knots = Vec::new();
        let mut levels = Vec::new();
        for (x, v) in xs.into_iter().zip(fitted) {
            if levels.last() != Some(&v) {
                knots.push(x);
                levels.push(v.clamp(0.0, 1.0));
            }
        }
        Ok(Self { knots, levels })
    }

    pub fn apply(&self, score: f64) -> f64 {
        let i = self.knots.partition_point(|&k| k <= score);
        self.levels[i.saturating_sub(1)]
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }
}

/// One calibration map per class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassCalibrator {
    maps: Vec<CalibrationMap>,
}

impl ClassCalibrator {
    /// Fits class `c`'s map to the pairs `(posteriors[i][c], labels[i] == c)`.
    /// `posteriors` is row-major with `n_classes` columns.
    pub fn fit(posteriors: &[f64], labels: &[usize], n_classes: usize) -> Result<Self> {
        if n_classes == 0 || posteriors.len() != labels.len() * n_classes {
            return Err(Error::Input(format!(
                "{} posterior values do not match {} labels of {n_classes} classes",
                posteriors.len(),
                labels.len()
            )));
        }
        let maps = (0..n_classes)
            .map(|c| {
                let scores: Vec<f64> = posteriors.chunks(n_classes).map(|p| p[c]).collect();
                let targets: Vec<f64> = labels
                    .iter()
                    .map(|&y| f64::from(u8::from(y == c)))
                    .collect();
                CalibrationMap::fit(&scores, &targets)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { maps })
    }

    pub fn maps(&self) -> &[CalibrationMap] {
        &self.maps
    }

    /// Calibrates each class score and renormalizes onto the simplex. If every
    /// calibrated score is zero the raw posterior is returned unchanged.
    pub fn calibrate(&self, raw: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .maps
            .iter()
            .zip(raw)
            .map(|(m, &s)| m.apply(s))
            .collect();
        let total: f64 = out.iter().sum();
        if total > 0.0 {
            out.iter_mut().for_each(|v| *v /= total);
            out
        } else {
            raw.to_vec()
        }
    }
}
