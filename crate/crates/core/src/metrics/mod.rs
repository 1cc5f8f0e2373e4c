//! Ranking metrics for scored screening results.

mod report;

pub use report::{DatasetEval, EvalReport, GroupSummary};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("{scores} scores but {labels} labels")]
    LengthMismatch { scores: usize, labels: usize },
    #[error("need at least one positive and one negative, got {positives} positives of {n}")]
    SingleClass { positives: usize, n: usize },
    #[error("false positive rate {0} outside (0, 1)")]
    FprOutOfRange(f64),
    #[error("expected {expected} fold values, got {got}")]
    MissingFold { expected: usize, got: usize },
    #[error("no values to aggregate")]
    Empty,
    #[error("non-finite score")]
    NonFinite,
    #[error("report i/o on {path}: {message}")]
    Io { path: std::path::PathBuf, message: String },
}

/// False positive rates at which enrichment is reported.
pub const ENRICHMENT_FPRS: [f64; 4] = [0.005, 0.01, 0.02, 0.05];

/// Bound applied to AUCs before taking log-odds.
pub const LOGIT_CLAMP: f64 = 1e-4;

/// Scores with binary labels (true = active).
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredSet {
    scores: Vec<f64>,
    labels: Vec<bool>,
    positives: usize,
}

impl ScoredSet {
    pub fn new(scores: Vec<f64>, labels: Vec<bool>) -> Result<Self, MetricsError> {
        if scores.len() != labels.len() {
            return Err(MetricsError::LengthMismatch { scores: scores.len(), labels: labels.len() });
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(MetricsError::NonFinite);
        }
        let positives = labels.iter().filter(|&&l| l).count();
        if positives == 0 || positives == labels.len() {
            return Err(MetricsError::SingleClass { positives, n: labels.len() });
        }
        Ok(ScoredSet { scores, labels, positives })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.positives
    }

    pub fn negatives(&self) -> usize {
        self.len() - self.positives
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    /// Indices sorted by descending score.
    fn descending(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| self.scores[b].total_cmp(&self.scores[a]));
        idx
    }
}

/// Area under the ROC curve, computed as the Mann–Whitney statistic with
/// half credit for tied scores.
pub fn roc_auc(s: &ScoredSet) -> f64 {
    let mut idx: Vec<usize> = (0..s.len()).collect();
    idx.sort_by(|&a, &b| s.scores[a].total_cmp(&s.scores[b]));
    // sum of (1-based, tie-averaged) ranks of the positives
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && s.scores[idx[j + 1]] == s.scores[idx[i]] {
            j += 1;
        }
        let avg_rank = (i + j) as f64 / 2.0 + 1.0;
        let pos = idx[i..=j].iter().filter(|&&k| s.labels[k]).count();
        rank_sum += avg_rank * pos as f64;
        i = j + 1;
    }
    let (p, n) = (s.positives() as f64, s.negatives() as f64);
    (rank_sum - p * (p + 1.0) / 2.0) / (p * n)
}

/// ROC curve vertices `(fpr, tpr)` from `(0, 0)` to `(1, 1)`, one per
/// distinct score.
pub fn roc_curve(s: &ScoredSet) -> Vec<(f64, f64)> {
    let idx = s.descending();
    let (p, n) = (s.positives() as f64, s.negatives() as f64);
    let mut out = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < idx.len() {
        let score = s.scores[idx[i]];
        while i < idx.len() && s.scores[idx[i]] == score {
            if s.labels[idx[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        out.push((fp as f64 / n, tp as f64 / p));
    }
    out
}

/// TPR at the given FPR, linearly interpolated between ROC vertices,
/// divided by the FPR.
pub fn roc_enrichment(s: &ScoredSet, fpr: f64) -> Result<f64, MetricsError> {
    if !(fpr > 0.0 && fpr < 1.0) {
        return Err(MetricsError::FprOutOfRange(fpr));
    }
    let curve = roc_curve(s);
    let k = curve.iter().position(|&(x, _)| x >= fpr).expect("curve ends at fpr 1");
    let (x1, y1) = curve[k];
    let tpr = if x1 == fpr {
        // the highest TPR reached at exactly this FPR
        curve[k..].iter().take_while(|&&(x, _)| x == fpr).map(|&(_, y)| y).fold(y1, f64::max)
    } else {
        let (x0, y0) = curve[k - 1];
        y0 + (y1 - y0) * (fpr - x0) / (x1 - x0)
    };
    Ok(tpr / fpr)
}

/// Mean of the per-fold AUCs of one dataset.
pub fn kfold_average_auc(per_fold: &[f64], k: usize) -> Result<f64, MetricsError> {
    if per_fold.len() != k || k == 0 {
        return Err(MetricsError::MissingFold { expected: k, got: per_fold.len() });
    }
    Ok(per_fold.iter().sum::<f64>() / k as f64)
}

/// Mean and median; an even count takes the midpoint of the central pair.
pub fn mean_median(values: &[f64]) -> Result<(f64, f64), MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    let median = if v.len() % 2 == 1 { v[m] } else { (v[m - 1] + v[m]) / 2.0 };
    Ok((mean, median))
}

/// `ln(p / (1 - p))` with `p` clamped to `[LOGIT_CLAMP, 1 - LOGIT_CLAMP]`.
pub fn logit(p: f64) -> f64 {
    let p = p.clamp(LOGIT_CLAMP, 1.0 - LOGIT_CLAMP);
    (p / (1.0 - p)).ln()
}

/// Difference in log-odds between a multitask and a single-task mean AUC.
pub fn delta_log_odds(multitask_auc: f64, single_task_auc: f64) -> f64 {
    logit(multitask_auc) - logit(single_task_auc)
}
