use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary classification metrics with "stressed" as the positive class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// `None` when only one class is present.
    pub auc_roc: Option<f64>,
    pub balanced_accuracy: f64,
}

/// Area under the ROC curve via the Mann-Whitney rank-sum, with midranks for ties.
pub fn auc_roc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::InsufficientData(
            "AUC needs both positive and negative labels".into(),
        ));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Config("AUC on NaN scores".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // Ranks are 1-based; tied block i..=j shares the mean rank.
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            if labels[idx] {
                rank_sum_pos += midrank;
            }
        }
        i = j + 1;
    }
    let p = pos as f64;
    Ok((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * neg as f64))
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Metrics {
    /// Metrics for hard predictions `score >= threshold`.
    pub fn from_scores(scores: &[f64], labels: &[bool], threshold: f64) -> Result<Self> {
        if scores.len() != labels.len() {
            return Err(Error::Shape(format!(
                "{} scores for {} labels",
                scores.len(),
                labels.len()
            )));
        }
        if scores.is_empty() {
            return Err(Error::InsufficientData("metrics on an empty set".into()));
        }
        let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
        for (&s, &l) in scores.iter().zip(labels) {
            match (s >= threshold, l) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, false) => tn += 1,
                (false, true) => fn_ += 1,
            }
        }
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        let specificity = ratio(tn, tn + fp);
        let has_both = tp + fn_ > 0 && tn + fp > 0;
        let balanced_accuracy = if has_both {
            (recall + specificity) / 2.0
        } else {
            ratio(tp + tn, scores.len())
        };
        Ok(Self {
            accuracy: ratio(tp + tn, scores.len()),
            precision,
            recall,
            f1,
            auc_roc: auc_roc(scores, labels).ok(),
            balanced_accuracy,
        })
    }

    fn fields(&self) -> [Option<f64>; 6] {
        [
            Some(self.accuracy),
            Some(self.precision),
            Some(self.recall),
            Some(self.f1),
            self.auc_roc,
            Some(self.balanced_accuracy),
        ]
    }

    fn from_fields(f: [Option<f64>; 6]) -> Self {
        Self {
            accuracy: f[0].unwrap_or(0.0),
            precision: f[1].unwrap_or(0.0),
            recall: f[2].unwrap_or(0.0),
            f1: f[3].unwrap_or(0.0),
            auc_roc: f[4],
            balanced_accuracy: f[5].unwrap_or(0.0),
        }
    }
}

/// Mean and sample standard deviation of each metric over runs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub runs: usize,
    pub mean: Metrics,
    pub std: Metrics,
}

impl MetricsSummary {
    pub fn from_runs(runs: &[Metrics]) -> Option<Self> {
        if runs.is_empty() {
            return None;
        }
        let mut mean = [None; 6];
        let mut std = [None; 6];
        for k in 0..6 {
            let vals: Vec<f64> = runs.iter().filter_map(|m| m.fields()[k]).collect();
            if vals.is_empty() {
                continue;
            }
            let n = vals.len() as f64;
            let mu = vals.iter().sum::<f64>() / n;
            let var = if vals.len() > 1 {
                vals.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            mean[k] = Some(mu);
            std[k] = Some(var.sqrt());
        }
        Some(Self {
            runs: runs.len(),
            mean: Metrics::from_fields(mean),
            std: Metrics::from_fields(std),
        })
    }
}
