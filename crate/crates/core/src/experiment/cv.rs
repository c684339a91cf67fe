//! Health-status-balanced, subject-wise fold assignment.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{derive, rng_from_seed, CV};
use crate::stage::{HealthStatus, N_HS};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvPlan {
    pub n_folds: usize,
    pub seed: u64,
    pub assignments: BTreeMap<String, usize>,
}

impl CvPlan {
    pub fn fold_of(&self, subject_id: &str) -> Option<usize> {
        self.assignments.get(subject_id).copied()
    }

    /// Per-fold subject counts of each health status.
    pub fn fold_counts(&self, labels: &BTreeMap<String, HealthStatus>) -> Vec<[usize; N_HS]> {
        let mut out = vec![[0; N_HS]; self.n_folds];
        for (id, &f) in &self.assignments {
            if let Some(h) = labels.get(id) {
                out[f][h.index()] += 1;
            }
        }
        out
    }
}

/// Shuffles each health-status group with its own substream and deals it
/// round-robin over the folds. The dealing position carries over between
/// groups so that fold sizes also stay within one of each other.
pub fn make_cv_plan<'a>(
    subjects: impl IntoIterator<Item = (&'a str, HealthStatus)>,
    n_folds: usize,
    seed: u64,
) -> Result<CvPlan> {
    if n_folds < 2 {
        return Err(Error::Planning(format!("need at least 2 folds, got {n_folds}")));
    }
    let mut groups: [Vec<&str>; N_HS] = Default::default();
    for (id, hs) in subjects {
        groups[hs.index()].push(id);
    }
    let mut assignments = BTreeMap::new();
    let mut next = 0;
    for (h, group) in groups.iter_mut().enumerate() {
        if group.is_empty() {
            continue;
        }
        if group.len() < n_folds {
            return Err(Error::Planning(format!(
                "{} has {} subjects, fewer than {n_folds} folds",
                HealthStatus::ALL[h],
                group.len()
            )));
        }
        group.sort_unstable();
        let mut rng = rng_from_seed(derive(seed, CV, h as u64));
        group.shuffle(&mut rng);
        for id in group.iter() {
            if assignments.insert(id.to_string(), next).is_some() {
                return Err(Error::Planning(format!("duplicate subject {id}")));
            }
            next = (next + 1) % n_folds;
        }
    }
    Ok(CvPlan {
        n_folds,
        seed,
        assignments,
    })
}
