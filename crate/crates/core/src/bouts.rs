//! Run-length encoding of hypnograms into bouts with time covariates.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::discretize::{DiscreteBout, DiscretizationSpec};
use crate::error::{Error, Result};
use crate::hypnogram::{Cohort, SubjectRecord};
use crate::stage::{HealthStatus, Stage};

/// A maximal run of one stage.
///
/// `tsso_min` is the onset of the bout measured from sleep onset. The two
/// cumulative covariates only count minutes strictly before the bout, so a
/// bout never sees its own duration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bout {
    pub t: usize,
    pub stage: Stage,
    pub epochs: u32,
    pub duration_min: f64,
    pub tsso_min: f64,
    pub cst_min: f64,
    pub crst_min: f64,
}

/// Bouts of one subject together with its label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectBouts {
    pub subject_id: String,
    pub health_status: HealthStatus,
    pub bouts: Vec<Bout>,
}

/// Index of the first non-W epoch.
pub fn sleep_onset_index(epochs: &[Stage]) -> Option<usize> {
    epochs.iter().position(|s| s.is_sleep())
}

/// Drops the leading wake before sleep onset; everything after it, trailing
/// wake included, is kept.
pub fn trim_to_sleep_onset(subject: &SubjectRecord) -> Result<&[Stage]> {
    sleep_onset_index(&subject.stages)
        .map(|i| &subject.stages[i..])
        .ok_or_else(|| Error::OnsetUndefined(subject.subject_id.clone()))
}

fn minutes(epochs: u64, epoch_seconds: u32) -> f64 {
    (epochs * epoch_seconds as u64) as f64 / 60.0
}

pub fn encode_bouts(epochs: &[Stage], epoch_seconds: u32) -> Vec<Bout> {
    let mut bouts = Vec::new();
    let mut elapsed = 0u64;
    let mut sleep = 0u64;
    let mut restorative = 0u64;
    let mut i = 0;
    while i < epochs.len() {
        let stage = epochs[i];
        let run = epochs[i..].iter().take_while(|&&s| s == stage).count();
        bouts.push(Bout {
            t: bouts.len(),
            stage,
            epochs: run as u32,
            duration_min: minutes(run as u64, epoch_seconds),
            tsso_min: minutes(elapsed, epoch_seconds),
            cst_min: minutes(sleep, epoch_seconds),
            crst_min: minutes(restorative, epoch_seconds),
        });
        elapsed += run as u64;
        if stage.is_sleep() {
            sleep += run as u64;
        }
        if stage.is_restorative() {
            restorative += run as u64;
        }
        i += run;
    }
    bouts
}

pub fn subject_bouts(subject: &SubjectRecord) -> Result<SubjectBouts> {
    let trimmed = trim_to_sleep_onset(subject)?;
    Ok(SubjectBouts {
        subject_id: subject.subject_id.clone(),
        health_status: subject.health_status,
        bouts: encode_bouts(trimmed, subject.epoch_seconds),
    })
}

/// Bout sequences for every subject with a sleep onset, plus the ids of
/// subjects skipped for having none.
pub fn cohort_bouts(cohort: &Cohort) -> (Vec<SubjectBouts>, Vec<String>) {
    let mut out = Vec::with_capacity(cohort.subjects.len());
    let mut skipped = Vec::new();
    for s in &cohort.subjects {
        match subject_bouts(s) {
            Ok(b) => out.push(b),
            Err(_) => skipped.push(s.subject_id.clone()),
        }
    }
    (out, skipped)
}

pub const BOUT_TABLE_HEADER: [&str; 11] = [
    "subject_id",
    "t",
    "stage",
    "duration_min",
    "tsso_min",
    "cst_min",
    "crst_min",
    "d_level",
    "t_level",
    "cst_level",
    "crst_level",
];

/// Writes the bout table with the discretized levels under `spec`.
pub fn write_bout_table<W: Write>(subjects: &[SubjectBouts], spec: &DiscretizationSpec, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(BOUT_TABLE_HEADER)?;
    for s in subjects {
        for b in &s.bouts {
            let d: DiscreteBout = spec.apply(b);
            w.write_record([
                s.subject_id.clone(),
                b.t.to_string(),
                b.stage.to_string(),
                format!("{:.4}", b.duration_min),
                format!("{:.4}", b.tsso_min),
                format!("{:.4}", b.cst_min),
                format!("{:.4}", b.crst_min),
                d.d_level.to_string(),
                d.t_level.to_string(),
                d.cst_level.to_string(),
                d.crst_level.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
