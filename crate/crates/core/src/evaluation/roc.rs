//! Rank-based ROC-AUC and ROC curves.

use crate::error::{Error, Result};
use crate::ingest::ExamKind;

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPrediction {
    pub score: f64,
    pub label: bool,
    pub student_id: String,
    pub exam: ExamKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub false_positive_rate: f64,
    pub true_positive_rate: f64,
    /// Scores `>= threshold` are called positive.
    pub threshold: f64,
}

fn class_counts(labels: &[bool]) -> Result<(usize, usize)> {
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::UndefinedAuc { positives, negatives });
    }
    Ok((positives, negatives))
}

/// Mann-Whitney form: `(R+ - P(P+1)/2) / (P N)` where `R+` sums the
/// mid-ranks of positive scores.
pub fn auc_from_scores(scores: &[f64], labels: &[bool]) -> Result<f64> {
    assert_eq!(scores.len(), labels.len());
    let (p, n) = class_counts(labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // 1-based ranks start+1 ..= end share their average
        let mid_rank = (start + 1 + end) as f64 / 2.0;
        let pos_in_run = order[start..end].iter().filter(|&&i| labels[i]).count();
        rank_sum += mid_rank * pos_in_run as f64;
        start = end;
    }
    let (p, n) = (p as f64, n as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

pub fn roc_auc(predictions: &[ScoredPrediction]) -> Result<f64> {
    let (scores, labels): (Vec<f64>, Vec<bool>) = predictions.iter().map(|p| (p.score, p.label)).unzip();
    auc_from_scores(&scores, &labels)
}

/// One point per distinct score, descending, after a `+inf` sentinel that
/// yields `(0, 0)`.
pub fn roc_curve(predictions: &[ScoredPrediction]) -> Result<Vec<RocPoint>> {
    let labels: Vec<bool> = predictions.iter().map(|p| p.label).collect();
    let (p, n) = class_counts(&labels)?;
    let mut sorted: Vec<(f64, bool)> = predictions.iter().map(|p| (p.score, p.label)).collect();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut curve = vec![RocPoint {
        false_positive_rate: 0.0,
        true_positive_rate: 0.0,
        threshold: f64::INFINITY,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < sorted.len() {
        let threshold = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == threshold {
            if sorted[i].1 {
                tp += 1
            } else {
                fp += 1
            }
            i += 1;
        }
        curve.push(RocPoint {
            false_positive_rate: fp as f64 / n as f64,
            true_positive_rate: tp as f64 / p as f64,
            threshold,
        });
    }
    Ok(curve)
}

/// Trapezoidal area under a curve's points.
pub fn trapezoid_area(curve: &[RocPoint]) -> f64 {
    curve
        .windows(2)
        .map(|w| {
            (w[1].false_positive_rate - w[0].false_positive_rate)
                * (w[0].true_positive_rate + w[1].true_positive_rate)
                / 2.0
        })
        .sum()
}
