//! Classification metrics: per-class and support-weighted precision, recall
//! and F-measure, rank-based ROC AUC, and Wilson score intervals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seqdata::Label;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrfReport {
    /// Indexed by [`Label::index`].
    pub per_class: [Prf; 2],
    /// True-class support counts.
    pub support: [usize; 2],
    /// Per-class metrics averaged with weights `support_c / N`.
    pub weighted: Prf,
}

/// Precision/recall/F per class, and their support-weighted average.
/// Precision of a class that is never predicted is 0, as is F when
/// precision and recall are both 0.
pub fn weighted_metrics(predicted: &[Label], truth: &[Label]) -> PrfReport {
    assert_eq!(
        predicted.len(),
        truth.len(),
        "prediction and label counts differ"
    );
    let mut confusion = [[0usize; 2]; 2]; // [truth][pred]
    for (p, t) in predicted.iter().zip(truth) {
        confusion[t.index()][p.index()] += 1;
    }
    let n = truth.len();
    let mut per_class = [Prf::default(); 2];
    let mut support = [0usize; 2];
    for c in 0..2 {
        let tp = confusion[c][c];
        let fp = confusion[1 - c][c];
        let fn_ = confusion[c][1 - c];
        support[c] = tp + fn_;
        let precision = if tp + fp > 0 {
            tp as f64 / (tp + fp) as f64
        } else {
            0.0
        };
        let recall = if tp + fn_ > 0 {
            tp as f64 / (tp + fn_) as f64
        } else {
            0.0
        };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        per_class[c] = Prf {
            precision,
            recall,
            f1,
        };
    }
    let mut weighted = Prf::default();
    if n > 0 {
        for c in 0..2 {
            let w = support[c] as f64 / n as f64;
            weighted.precision += w * per_class[c].precision;
            weighted.recall += w * per_class[c].recall;
            weighted.f1 += w * per_class[c].f1;
        }
    }
    PrfReport {
        per_class,
        support,
        weighted,
    }
}

/// Probability that a random good item outscores a random bad one, ties
/// counting one half. Computed from average ranks in O(n log n).
pub fn roc_auc(scores: &[f64], truth: &[Label]) -> Result<f64> {
    assert_eq!(scores.len(), truth.len(), "score and label counts differ");
    let n_pos = truth.iter().filter(|l| **l == Label::Good).count();
    let n_neg = truth.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedAuc);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 share their mean
        let mean_rank = (i + j + 2) as f64 / 2.0;
        for &k in &order[i..=j] {
            if truth[k] == Label::Good {
                rank_sum_pos += mean_rank;
            }
        }
        i = j + 1;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos * n_neg) as f64)
}

/// Wilson score interval for a proportion `p` observed over `n` trials.
pub fn wilson_interval(p: f64, n: usize, z: f64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "Wilson interval needs n >= 1".into(),
        ));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "proportion {p} outside [0, 1]"
        )));
    }
    let n = n as f64;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Ok(((center - half).max(0.0), (center + half).min(1.0)))
}

/// z for a two-sided 95% interval.
pub const Z95: f64 = 1.96;

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Bad, Good};

    fn constant_bad_case() -> (Vec<Label>, Vec<Label>) {
        let mut truth = vec![Bad; 30];
        truth.extend(vec![Good; 77]);
        (vec![Bad; 107], truth)
    }

    #[test]
    fn all_bad_baseline() {
        let (pred, truth) = constant_bad_case();
        let r = weighted_metrics(&pred, &truth);
        // bad: P = 30/107, R = 1; good: P = R = F = 0
        let p_bad = 30.0 / 107.0;
        assert!((r.weighted.precision - p_bad * p_bad).abs() < 1e-12);
        assert!((r.weighted.recall - p_bad).abs() < 1e-12);
        let f_bad = 2.0 * p_bad / (p_bad + 1.0);
        assert!((r.weighted.f1 - p_bad * f_bad).abs() < 1e-12);
        assert!((r.weighted.precision - 0.0786).abs() < 5e-5);
        assert!((r.weighted.recall - 0.2804).abs() < 5e-5);
        assert!((r.weighted.f1 - 0.1228).abs() < 5e-5);
        assert_eq!(r.support, [30, 77]);
    }

    #[test]
    fn perfect_and_inverted() {
        let truth = vec![Bad, Good, Good, Bad];
        let r = weighted_metrics(&truth, &truth);
        assert_eq!(
            r.weighted,
            Prf {
                precision: 1.0,
                recall: 1.0,
                f1: 1.0
            }
        );
        let inv: Vec<Label> = truth.iter().map(|l| l.other()).collect();
        assert_eq!(weighted_metrics(&inv, &truth).weighted, Prf::default());
    }

    #[test]
    fn auc_examples() {
        let t = [Good, Good, Bad, Bad];
        assert_eq!(roc_auc(&[0.9, 0.8, 0.4, 0.3], &t).unwrap(), 1.0);
        assert_eq!(roc_auc(&[0.5; 4], &t).unwrap(), 0.5);
        assert_eq!(roc_auc(&[0.9, 0.4, 0.8, 0.3], &t).unwrap(), 0.75);
        assert!(matches!(
            roc_auc(&[0.1, 0.2], &[Good, Good]),
            Err(Error::UndefinedAuc)
        ));
    }

    #[test]
    fn wilson_examples() {
        assert_eq!(wilson_interval(0.0, 10, Z95).unwrap().0, 0.0);
        let (lo, hi) = wilson_interval(0.5, 100, Z95).unwrap();
        assert!((lo - 0.4038).abs() < 1e-4 && (hi - 0.5962).abs() < 1e-4);
        let (lo, hi) = wilson_interval(0.65, 535, Z95).unwrap();
        assert!(
            (lo - 0.609).abs() < 5e-4 && (hi - 0.689).abs() < 5e-4,
            "{lo} {hi}"
        );
        assert!(wilson_interval(0.5, 0, Z95).is_err());
    }
}
