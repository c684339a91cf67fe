//! Next-stage and health-status metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stage::{HealthStatus, Stage, N_HS, N_STAGES};

pub fn accuracy(predictions: &[Stage], truths: &[Stage]) -> Result<f64> {
    check_lengths(predictions.len(), truths.len())?;
    let hits = predictions.iter().zip(truths).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truths.len() as f64)
}

/// Unweighted mean of per-stage F1 over the stages present in `truths`.
pub fn macro_f1(predictions: &[Stage], truths: &[Stage]) -> Result<f64> {
    check_lengths(predictions.len(), truths.len())?;
    let mut tp = [0usize; N_STAGES];
    let mut fp = [0usize; N_STAGES];
    let mut fn_ = [0usize; N_STAGES];
    for (&p, &t) in predictions.iter().zip(truths) {
        if p == t {
            tp[t.index()] += 1;
        } else {
            fp[p.index()] += 1;
            fn_[t.index()] += 1;
        }
    }
    let mut sum = 0.0;
    let mut n = 0;
    for s in 0..N_STAGES {
        if tp[s] + fn_[s] == 0 {
            continue;
        }
        let denom = 2 * tp[s] + fp[s] + fn_[s];
        sum += 2.0 * tp[s] as f64 / denom as f64;
        n += 1;
    }
    Ok(sum / n as f64)
}

/// Area under the ROC curve from the rank-sum statistic; tied scores get
/// half credit.
pub fn auroc(scores: &[f64], positive: &[bool]) -> Result<f64> {
    check_lengths(scores.len(), positive.len())?;
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Metric("AUROC needs both positive and negative cases".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1..=j+1 share their mean
        let mid = (i + j + 2) as f64 / 2.0;
        rank_sum += mid * order[i..=j].iter().filter(|&&k| positive[k]).count() as f64;
        i = j + 1;
    }
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// One-vs-rest AUROC per health status (`None` where a class has no
/// positives or no negatives).
pub fn ovr_auroc(scores: &[[f64; N_HS]], labels: &[HealthStatus]) -> Result<[Option<f64>; N_HS]> {
    check_lengths(scores.len(), labels.len())?;
    let mut out = [None; N_HS];
    for (c, slot) in out.iter_mut().enumerate() {
        let s: Vec<f64> = scores.iter().map(|r| r[c]).collect();
        let pos: Vec<bool> = labels.iter().map(|l| l.index() == c).collect();
        *slot = auroc(&s, &pos).ok();
    }
    Ok(out)
}

pub fn mean_ovr_auroc(scores: &[[f64; N_HS]], labels: &[HealthStatus]) -> Result<f64> {
    let per_class = ovr_auroc(scores, labels)?;
    let defined: Vec<f64> = per_class.iter().flatten().copied().collect();
    if defined.is_empty() {
        return Err(Error::Metric("no class has both positive and negative subjects".into()));
    }
    Ok(defined.iter().sum::<f64>() / defined.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub mean_ovr_auroc: f64,
}

pub fn compute_metrics(
    predictions: &[Stage],
    truths: &[Stage],
    scores: &[[f64; N_HS]],
    labels: &[HealthStatus],
) -> Result<Metrics> {
    Ok(Metrics {
        accuracy: accuracy(predictions, truths)?,
        macro_f1: macro_f1(predictions, truths)?,
        mean_ovr_auroc: mean_ovr_auroc(scores, labels)?,
    })
}

/// Mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
}

impl MeanSd {
    pub fn of(values: &[f64]) -> MeanSd {
        let n = values.len();
        if n == 0 {
            return MeanSd {
                mean: f64::NAN,
                sd: f64::NAN,
                n,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        MeanSd { mean, sd, n }
    }

    /// `mean (sd)` in percent with one decimal.
    pub fn percent(&self) -> String {
        format!("{:.1} ({:.1})", 100.0 * self.mean, 100.0 * self.sd)
    }
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Metric(format!("length mismatch {a} vs {b}")));
    }
    if a == 0 {
        return Err(Error::Metric("empty input".into()));
    }
    Ok(())
}
