//! Classification metrics over a fixed set of predictions.

use crate::error::{Error, Result};

/// Fraction of windows where `p > threshold` agrees with the target.
pub fn accuracy<P: Copy + Into<f64>>(p: &[P], y: &[u8], threshold: f64) -> Result<f64> {
    if p.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: y.len(),
        });
    }
    if p.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let hits = p
        .iter()
        .zip(y)
        .filter(|(&pi, &yi)| (pi.into() > threshold) == (yi == 1))
        .count();
    Ok(hits as f64 / p.len() as f64)
}

/// Area under the ROC curve as the Mann-Whitney statistic: the share of
/// positive/negative pairs where the positive scores higher, ties counting
/// one half. Computed from midranks in `O(n log n)`.
pub fn roc_auc<P: Copy + Into<f64>>(p: &[P], y: &[u8]) -> Result<f64> {
    if p.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: y.len(),
        });
    }
    let positives = y.iter().filter(|&&v| v == 1).count();
    let negatives = y.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClassBatch);
    }
    let mut order: Vec<(f64, u8)> = p.iter().map(|&v| v.into()).zip(y.iter().copied()).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));

    // sum of 1-based midranks of the positives
    let mut rank_sum = 0.0f64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && order[j + 1].0 == order[i].0 {
            j += 1;
        }
        let midrank = (i + j + 2) as f64 / 2.0;
        let pos_in_group = order[i..=j].iter().filter(|e| e.1 == 1).count();
        rank_sum += midrank * pos_in_group as f64;
        i = j + 1;
    }
    let u = rank_sum - (positives * (positives + 1)) as f64 / 2.0;
    Ok(u / (positives as f64 * negatives as f64))
}
