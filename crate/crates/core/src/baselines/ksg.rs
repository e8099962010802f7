//! k-nearest-neighbour mutual information estimators under the max-norm.

use rand::Rng;
use rayon::prelude::*;

use super::digamma::digamma;
use super::knn::KnnIndex;
use crate::error::{Error, Result};
use crate::forest::{empirical_entropy, EstimateReport};
use crate::io::LabeledDataset;
use crate::rng::{stream, Domain};

/// Settings for [`ksg_mi`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsgParams {
    pub k: usize,
    /// Half-width of the uniform noise added to every coordinate to break
    /// exact ties. Zero disables it.
    pub jitter: f64,
    pub seed: u64,
}

impl Default for KsgParams {
    fn default() -> Self {
        Self {
            k: 3,
            jitter: 1e-10,
            seed: 0,
        }
    }
}

fn check_shapes(x: &[f64], y: &[f64], n: usize, k: usize) -> Result<(usize, usize)> {
    if n == 0
        || !x.len().is_multiple_of(n)
        || !y.len().is_multiple_of(n)
        || x.is_empty()
        || y.is_empty()
    {
        return Err(Error::Input(format!(
            "x ({}) and y ({}) must both hold n = {n} non-empty rows",
            x.len(),
            y.len()
        )));
    }
    if k == 0 || k >= n {
        return Err(Error::Input(format!(
            "need 1 <= k < n, got k = {k}, n = {n}"
        )));
    }
    Ok((x.len() / n, y.len() / n))
}

fn joint(x: &[f64], dx: usize, y: &[f64], dy: usize, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n * (dx + dy));
    for i in 0..n {
        out.extend_from_slice(&x[i * dx..(i + 1) * dx]);
        out.extend_from_slice(&y[i * dy..(i + 1) * dy]);
    }
    out
}

/// Adds order-independent sums: sorting first makes the total exactly
/// invariant to the order of the samples.
fn sorted_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

/// KSG estimator (first variant) of `I(X; Y)` in nats.
///
/// `x` and `y` hold `n` rows each, row-major. For every sample the distance
/// `eps` to its `k`-th neighbour in the joint space is found; `n_x` and `n_y`
/// count the other samples strictly closer than `eps` in each marginal space
/// (both zero when `eps` is zero, which only happens with exact ties).
/// The estimate is `ψ(k) + ψ(n) − ⟨ψ(n_x + 1) + ψ(n_y + 1)⟩`.
pub fn ksg_mi(x: &[f64], y: &[f64], n: usize, params: &KsgParams) -> Result<f64> {
    let (dx, dy) = check_shapes(x, y, n, params.k)?;
    let (mut x, mut y) = (x.to_vec(), y.to_vec());
    if params.jitter > 0.0 {
        let mut rng = stream(params.seed, Domain::Jitter, 0);
        for v in x.iter_mut().chain(y.iter_mut()) {
            *v += rng.random_range(-params.jitter..params.jitter);
        }
    }
    let xy = KnnIndex::new(joint(&x, dx, &y, dy, n), dx + dy)?;
    let xi = KnnIndex::new(x, dx)?;
    let yi = KnnIndex::new(y, dy)?;
    let k = params.k;
    let terms = (0..n)
        .into_par_iter()
        .map(|i| {
            let eps = xy.knn(xy.point(i), k, Some(i))?[k - 1].dist;
            // The point itself is inside the open ball only when eps > 0.
            let own = usize::from(eps > 0.0);
            let nx = xi.count_within(xi.point(i), eps, true) - own;
            let ny = yi.count_within(yi.point(i), eps, true) - own;
            Ok(digamma(k as f64) - digamma(nx as f64 + 1.0) - digamma(ny as f64 + 1.0))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(digamma(n as f64) + sorted_sum(terms) / n as f64)
}

/// Mixed KSG estimator of `I(X; Y)` for data with exact ties, such as a
/// categorical `y` given as numeric codes.
///
/// Samples whose `k`-th joint neighbour is at a positive distance use the KSG
/// term. Samples with `k` or more exact duplicates replace `k` by the number
/// of duplicates `k~` and count marginal ties with closed balls of radius 0:
/// `ψ(k~) + ψ(n) − ψ(m_x + 1) − ψ(m_y + 1)`.
pub fn mixed_ksg_mi(x: &[f64], y: &[f64], n: usize, k: usize) -> Result<f64> {
    let (dx, dy) = check_shapes(x, y, n, k)?;
    let xy = KnnIndex::new(joint(x, dx, y, dy, n), dx + dy)?;
    let xi = KnnIndex::new(x.to_vec(), dx)?;
    let yi = KnnIndex::new(y.to_vec(), dy)?;
    let terms = (0..n)
        .into_par_iter()
        .map(|i| {
            let rho = xy.knn(xy.point(i), k, Some(i))?[k - 1].dist;
            let term = if rho == 0.0 {
                let kt = xy.count_within(xy.point(i), 0.0, false) - 1;
                let mx = xi.count_within(xi.point(i), 0.0, false) - 1;
                let my = yi.count_within(yi.point(i), 0.0, false) - 1;
                digamma(kt as f64) - digamma(mx as f64 + 1.0) - digamma(my as f64 + 1.0)
            } else {
                let nx = xi.count_within(xi.point(i), rho, true) - 1;
                let ny = yi.count_within(yi.point(i), rho, true) - 1;
                digamma(k as f64) - digamma(nx as f64 + 1.0) - digamma(ny as f64 + 1.0)
            };
            Ok(term)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(digamma(n as f64) + sorted_sum(terms) / n as f64)
}

fn labels_as_reals(data: &LabeledDataset) -> Result<Vec<f64>> {
    Ok(data.require_labels()?.iter().map(|&c| c as f64).collect())
}

fn knn_report(
    name: &str,
    data: &LabeledDataset,
    mi: f64,
    k: usize,
    seed: u64,
) -> Result<EstimateReport> {
    let h_y = empirical_entropy(data.require_labels()?, data.n_classes())?;
    let mut report =
        EstimateReport::new(name, data.n_rows(), data.n_features(), h_y, h_y - mi, seed);
    report.knn_k = Some(k);
    report.label_names = data.label_names().to_vec();
    Ok(report)
}

/// KSG on a labeled dataset, with the label codes used as a real-valued `y`.
pub fn ksg_estimate(data: &LabeledDataset, k: usize, seed: u64) -> Result<EstimateReport> {
    let y = labels_as_reals(data)?;
    let params = KsgParams {
        k,
        seed,
        ..KsgParams::default()
    };
    let mi = ksg_mi(data.features(), &y, data.n_rows(), &params)?;
    knn_report("ksg", data, mi, k, seed)
}

/// Mixed KSG on a labeled dataset, with the labels treated as discrete.
pub fn mixed_ksg_estimate(data: &LabeledDataset, k: usize, seed: u64) -> Result<EstimateReport> {
    let y = labels_as_reals(data)?;
    let mi = mixed_ksg_mi(data.features(), &y, data.n_rows(), k)?;
    knn_report("mixed-ksg", data, mi, k, seed)
}
