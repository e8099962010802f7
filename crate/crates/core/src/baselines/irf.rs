use rand::seq::SliceRandom;

use super::isotonic::ClassCalibrator;
use crate::error::{Error, Result};
use crate::forest::{entropy, entropy_of_counts, EstimateReport, ForestConfig, UncertaintyForest};
use crate::io::LabeledDataset;
use crate::rng::{derive_seed, stream, Domain};

/// A plain CART forest whose posteriors are recalibrated by per-class
/// isotonic maps.
///
/// The rows are split once into train, calibration and evaluation sets using
/// the config's partition, voting and evaluation fractions. The forest (the
/// config with honesty and correction switched off) is fitted on the train
/// set and the maps on its posteriors over the calibration set.
#[derive(Debug, Clone)]
pub struct IsotonicForest {
    forest: UncertaintyForest,
    calibrator: ClassCalibrator,
    eval_rows: Vec<usize>,
    seed: u64,
}

impl IsotonicForest {
    pub fn fit(data: &LabeledDataset, config: &ForestConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let labels = data.require_labels()?;
        let sizes = config.split_sizes(data.n_rows())?;
        if sizes.vote == 0 {
            return Err(Error::Config(
                "the isotonic forest needs a calibration split".into(),
            ));
        }
        let mut rows: Vec<usize> = (0..data.n_rows()).collect();
        rows.shuffle(&mut stream(seed, Domain::SplitData, 0));
        let (train, rest) = rows.split_at(sizes.partition);
        let (calib, eval) = rest.split_at(sizes.vote);

        let forest_config = ForestConfig {
            honest: false,
            correction: false,
            ..config.clone()
        };
        let forest = UncertaintyForest::fit(
            &data.select_rows(train)?,
            &forest_config,
            derive_seed(seed, Domain::Estimator, 0),
        )?;
        let k = data.n_classes();
        let mut calib_post = Vec::with_capacity(calib.len() * k);
        for &r in calib {
            calib_post.extend(forest.posterior(data.row(r))?);
        }
        let calib_labels: Vec<usize> = calib.iter().map(|&r| labels[r]).collect();
        let calibrator = ClassCalibrator::fit(&calib_post, &calib_labels, k)?;
        Ok(Self {
            forest,
            calibrator,
            eval_rows: eval.to_vec(),
            seed,
        })
    }

    pub fn forest(&self) -> &UncertaintyForest {
        &self.forest
    }

    pub fn calibrator(&self) -> &ClassCalibrator {
        &self.calibrator
    }

    /// Calibrated class probabilities at `x`.
    pub fn posterior(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.calibrator.calibrate(&self.forest.posterior(x)?))
    }

    /// Entropy estimates on the evaluation split of `data`, the dataset the
    /// model was fitted on.
    pub fn estimate(&self, data: &LabeledDataset) -> Result<EstimateReport> {
        let mut total = 0.0;
        for &r in &self.eval_rows {
            total += entropy(&self.posterior(data.row(r))?);
        }
        let h_cond = total / self.eval_rows.len() as f64;
        let h_y = entropy_of_counts(&data.class_counts()?);
        let mut report = EstimateReport::new(
            "irf",
            data.n_rows(),
            data.n_features(),
            h_y,
            h_cond,
            self.seed,
        );
        report.forest_config = Some(self.forest.config().clone());
        report.label_names = data.label_names().to_vec();
        Ok(report)
    }
}

/// Isotonic-regression forest estimate of `H(Y | X)` and `I(X; Y)`.
pub fn irf_estimate(
    data: &LabeledDataset,
    config: &ForestConfig,
    seed: u64,
) -> Result<EstimateReport> {
    IsotonicForest::fit(data, config, seed)?.estimate(data)
}
