//! Exact queries on fully observed windows.

use super::dag::Var;
use super::model::{row_of, FittedBn, Window};
use crate::error::{Error, Result};
use crate::stage::{Stage, N_HS, N_STAGES};

/// Distribution of the current stage given its observed parents (true health
/// status included). The window's own current stage is ignored.
pub fn predict_next_stage(bn: &FittedBn, w: &Window) -> Result<[f64; N_STAGES]> {
    let a = bn.assignment(w)?;
    let s = bn.node_index(Var::Stage(0));
    let cpt = &bn.cpts[s];
    let row = cpt.row(row_of(&bn.dag, s, &a));
    let mut out = [0.0; N_STAGES];
    out.copy_from_slice(row);
    Ok(out)
}

/// Argmax with ties resolved towards the earlier stage (W < N1 < N2 < N3 < R).
pub fn argmax_stage(dist: &[f64; N_STAGES]) -> Stage {
    let mut best = 0;
    for i in 1..N_STAGES {
        if dist[i] > dist[best] {
            best = i;
        }
    }
    Stage::ALL[best]
}

/// Posterior over health status for one window, or `None` when every level
/// has zero likelihood.
pub fn window_hs_posterior(bn: &FittedBn, w: &Window) -> Result<Option<[f64; N_HS]>> {
    let mut a = bn.assignment(w)?;
    let hs = bn.node_index(Var::Hs);
    let family: Vec<usize> = bn
        .dag
        .nodes()
        .iter()
        .enumerate()
        .filter(|(i, n)| *i != hs && n.parents.contains(&hs))
        .map(|(i, _)| i)
        .collect();
    let mut post = [0.0; N_HS];
    for (h, p) in post.iter_mut().enumerate() {
        a[hs] = h;
        *p = bn.hs_prior[h] * family.iter().map(|&i| bn.factor(i, &a)).product::<f64>();
    }
    let z: f64 = post.iter().sum();
    if z > 0.0 && z.is_finite() {
        Ok(Some(post.map(|p| p / z)))
    } else {
        Ok(None)
    }
}

/// Subject-level posterior: the arithmetic mean of the per-window posteriors.
/// Falls back to the prior when no window carries information.
pub fn classify_hs(bn: &FittedBn, windows: &[Window]) -> Result<[f64; N_HS]> {
    if windows.is_empty() {
        return Err(Error::Contract("classify_hs needs at least one window".into()));
    }
    let mut acc = [0.0; N_HS];
    let mut n = 0usize;
    for w in windows {
        if let Some(p) = window_hs_posterior(bn, w)? {
            for (a, v) in acc.iter_mut().zip(p) {
                *a += v;
            }
            n += 1;
        }
    }
    if n == 0 {
        return Ok(bn.hs_prior);
    }
    let mean = acc.map(|a| a / n as f64);
    let z: f64 = mean.iter().sum();
    Ok(mean.map(|m| m / z))
}

/// Sum over windows of the log joint probability of all nodes. Returns
/// negative infinity when some observed event has probability zero.
pub fn loglik(bn: &FittedBn, windows: &[Window]) -> Result<f64> {
    let mut total = 0.0;
    for w in windows {
        let a = bn.assignment(w)?;
        for i in 0..bn.dag.len() {
            let p = bn.factor(i, &a);
            if p <= 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            total += p.ln();
        }
    }
    Ok(total)
}
