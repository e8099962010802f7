//! Plug-in entropy utilities (natural log, so values are in nats).

use crate::error::{Error, Result};

/// Shannon entropy of a probability vector, with `0 · log 0 = 0`.
pub fn entropy(p: &[f64]) -> f64 {
    let h: f64 = p.iter().filter(|&&q| q > 0.0).map(|&q| -q * q.ln()).sum();
    h.max(0.0)
}

/// Entropy of the empirical class frequencies of `labels`.
pub fn empirical_entropy(labels: &[usize], n_classes: usize) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::Input("entropy of an empty label vector".into()));
    }
    let mut counts = vec![0usize; n_classes.max(1)];
    for &l in labels {
        if l >= counts.len() {
            counts.resize(l + 1, 0);
        }
        counts[l] += 1;
    }
    Ok(entropy_of_counts(&counts))
}

pub(crate) fn entropy_of_counts(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    let freqs: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    entropy(&freqs)
}
