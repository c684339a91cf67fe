//! Epoch-level hypnogram files and subject metadata.
//!
//! The on-disk format is a delimited table with header
//! `subject_id,health_status,epoch_index,stage`, one epoch per row. An optional
//! trailing `epoch_seconds` column carries the scoring epoch length (30 s when
//! absent). The health status may be left empty and supplied by a sidecar file
//! `subject_id,health_status` instead.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stage::{HealthStatus, Stage, N_HS, N_STAGES};

pub const DEFAULT_EPOCH_SECONDS: u32 = 30;

/// Alphabet of the stage column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum StageFormat {
    /// `W, N1, N2, N3, R`
    #[default]
    Token,
    /// Legacy codes `0..=5` with S4 folded into N3.
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubjectRecord {
    pub subject_id: String,
    pub health_status: HealthStatus,
    pub epoch_seconds: u32,
    pub stages: Vec<Stage>,
}

impl SubjectRecord {
    pub fn new(subject_id: impl Into<String>, health_status: HealthStatus, stages: Vec<Stage>) -> Self {
        SubjectRecord {
            subject_id: subject_id.into(),
            health_status,
            epoch_seconds: DEFAULT_EPOCH_SECONDS,
            stages,
        }
    }

    pub fn has_sleep_onset(&self) -> bool {
        self.stages.iter().any(|s| s.is_sleep())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Cohort {
    pub subjects: Vec<SubjectRecord>,
    pub provenance: String,
}

impl Cohort {
    /// Builds a cohort, rejecting duplicate ids, empty stage lists and zero epoch lengths.
    pub fn new(subjects: Vec<SubjectRecord>, provenance: impl Into<String>) -> Result<Self> {
        let mut seen = HashMap::new();
        for s in &subjects {
            if seen.insert(s.subject_id.as_str(), ()).is_some() {
                return Err(Error::Integrity(format!("duplicate subject_id {}", s.subject_id)));
            }
            if s.stages.is_empty() {
                return Err(Error::Integrity(format!("subject {} has no epochs", s.subject_id)));
            }
            if s.epoch_seconds == 0 {
                return Err(Error::Integrity(format!("subject {} has epoch_seconds = 0", s.subject_id)));
            }
        }
        Ok(Cohort {
            subjects,
            provenance: provenance.into(),
        })
    }

    pub fn group_counts(&self) -> [usize; N_HS] {
        let mut counts = [0; N_HS];
        for s in &self.subjects {
            counts[s.health_status.index()] += 1;
        }
        counts
    }

    pub fn n_epochs(&self) -> usize {
        self.subjects.iter().map(|s| s.stages.len()).sum()
    }
}

/// Report-only summary of a cohort.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub n_subjects: usize,
    pub epoch_counts: Vec<(String, usize)>,
    /// Epochs per stage, pooled over subjects.
    pub stage_coverage: [usize; N_STAGES],
    pub group_counts: [usize; N_HS],
    /// Subjects flagged "no sleep onset" (all epochs W).
    pub no_sleep_onset: Vec<String>,
}

pub fn validate_cohort(cohort: &Cohort) -> ValidationReport {
    let mut report = ValidationReport {
        n_subjects: cohort.subjects.len(),
        group_counts: cohort.group_counts(),
        ..Default::default()
    };
    for s in &cohort.subjects {
        report.epoch_counts.push((s.subject_id.clone(), s.stages.len()));
        for st in &s.stages {
            report.stage_coverage[st.index()] += 1;
        }
        if !s.has_sleep_onset() {
            report.no_sleep_onset.push(s.subject_id.clone());
        }
    }
    report
}

pub fn parse_cohort(path: &Path, format: StageFormat) -> Result<Cohort> {
    parse_cohort_with_sidecar(path, None, format)
}

/// Parses a hypnogram file, optionally filling missing health statuses from a sidecar file.
pub fn parse_cohort_with_sidecar(path: &Path, sidecar: Option<&Path>, format: StageFormat) -> Result<Cohort> {
    let meta = match sidecar {
        Some(p) => Some(read_sidecar(File::open(p)?)?),
        None => None,
    };
    read_cohort(File::open(path)?, format, meta.as_ref(), path.display().to_string())
}

/// Reads `subject_id,health_status` rows.
pub fn read_sidecar<R: Read>(reader: R) -> Result<HashMap<String, HealthStatus>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let id_col = column(&headers, "subject_id", 1)?;
    let hs_col = column(&headers, "health_status", 1)?;
    let mut out = HashMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = line_of(&rec);
        let id = rec.get(id_col).unwrap_or("").to_string();
        let hs = rec
            .get(hs_col)
            .unwrap_or("")
            .parse::<HealthStatus>()
            .map_err(|e| at_line(e, line))?;
        if out.insert(id.clone(), hs).is_some() {
            return Err(Error::Integrity(format!("sidecar lists subject {id} twice")));
        }
    }
    Ok(out)
}

struct PendingSubject {
    health_status: Option<HealthStatus>,
    epoch_seconds: u32,
    epochs: Vec<(u64, Stage, usize)>,
}

pub fn read_cohort<R: Read>(
    reader: R,
    format: StageFormat,
    sidecar: Option<&HashMap<String, HealthStatus>>,
    provenance: impl Into<String>,
) -> Result<Cohort> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let id_col = column(&headers, "subject_id", 1)?;
    let hs_col = column(&headers, "health_status", 1)?;
    let idx_col = column(&headers, "epoch_index", 1)?;
    let stage_col = column(&headers, "stage", 1)?;
    let secs_col = headers.iter().position(|h| h == "epoch_seconds");

    let mut pending: BTreeMap<String, PendingSubject> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = line_of(&rec);
        let id = rec.get(id_col).unwrap_or("");
        if id.is_empty() {
            return Err(Error::Parse {
                line,
                msg: "empty subject_id".into(),
            });
        }
        let hs_field = rec.get(hs_col).unwrap_or("");
        let hs = if hs_field.is_empty() {
            None
        } else {
            Some(hs_field.parse::<HealthStatus>().map_err(|e| at_line(e, line))?)
        };
        let idx: u64 = rec.get(idx_col).unwrap_or("").parse().map_err(|_| Error::Parse {
            line,
            msg: format!("bad epoch_index {:?}", rec.get(idx_col).unwrap_or("")),
        })?;
        let stage = parse_stage(rec.get(stage_col).unwrap_or(""), format, line)?;
        let secs = match secs_col.and_then(|c| rec.get(c)).filter(|s| !s.is_empty()) {
            Some(s) => s.parse::<u32>().ok().filter(|&v| v > 0).ok_or_else(|| Error::Parse {
                line,
                msg: format!("bad epoch_seconds {s:?}"),
            })?,
            None => DEFAULT_EPOCH_SECONDS,
        };

        let entry = pending.entry(id.to_string()).or_insert_with(|| PendingSubject {
            health_status: None,
            epoch_seconds: secs,
            epochs: Vec::new(),
        });
        if let Some(hs) = hs {
            match entry.health_status {
                Some(prev) if prev != hs => {
                    return Err(Error::Integrity(format!(
                        "subject {id} has conflicting health status {prev} and {hs} (line {line})"
                    )))
                }
                _ => entry.health_status = Some(hs),
            }
        }
        if entry.epoch_seconds != secs {
            return Err(Error::Integrity(format!(
                "subject {id} mixes epoch lengths (line {line})"
            )));
        }
        entry.epochs.push((idx, stage, line));
    }

    let mut subjects = Vec::with_capacity(pending.len());
    for (id, mut p) in pending {
        let hs = p
            .health_status
            .or_else(|| sidecar.and_then(|m| m.get(&id).copied()))
            .ok_or_else(|| Error::Integrity(format!("subject {id} has no health_status")))?;
        p.epochs.sort_by_key(|e| e.0);
        for pair in p.epochs.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::Integrity(format!(
                    "duplicate epoch {} for subject {id} (lines {} and {})",
                    pair[0].0, pair[0].2, pair[1].2
                )));
            }
        }
        subjects.push(SubjectRecord {
            subject_id: id,
            health_status: hs,
            epoch_seconds: p.epoch_seconds,
            stages: p.epochs.into_iter().map(|e| e.1).collect(),
        });
    }
    Cohort::new(subjects, provenance)
}

/// Writes the cohort in token format. The `epoch_seconds` column is only
/// emitted when some subject deviates from the 30 s default.
pub fn write_cohort<W: Write>(cohort: &Cohort, writer: W) -> Result<()> {
    let with_secs = cohort.subjects.iter().any(|s| s.epoch_seconds != DEFAULT_EPOCH_SECONDS);
    let mut w = csv::Writer::from_writer(writer);
    if with_secs {
        w.write_record(["subject_id", "health_status", "epoch_index", "stage", "epoch_seconds"])?;
    } else {
        w.write_record(["subject_id", "health_status", "epoch_index", "stage"])?;
    }
    for s in &cohort.subjects {
        let secs = s.epoch_seconds.to_string();
        for (i, st) in s.stages.iter().enumerate() {
            let idx = i.to_string();
            if with_secs {
                w.write_record([&s.subject_id, s.health_status.as_str(), &idx, st.as_str(), &secs])?;
            } else {
                w.write_record([&s.subject_id, s.health_status.as_str(), &idx, st.as_str()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn parse_stage(field: &str, format: StageFormat, line: usize) -> Result<Stage> {
    match format {
        StageFormat::Token => field.parse::<Stage>().map_err(|e| at_line(e, line)),
        StageFormat::Numeric => field
            .parse::<i64>()
            .ok()
            .and_then(Stage::from_numeric)
            .ok_or_else(|| Error::Parse {
                line,
                msg: format!("unknown stage code {field:?}"),
            }),
    }
}

fn column(headers: &csv::StringRecord, name: &str, line: usize) -> Result<usize> {
    headers.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
        line,
        msg: format!("missing column {name:?}"),
    })
}

fn line_of(rec: &csv::StringRecord) -> usize {
    rec.position().map(|p| p.line() as usize).unwrap_or(0)
}

fn at_line(e: Error, line: usize) -> Error {
    match e {
        Error::Parse { msg, .. } => Error::Parse { line, msg },
        other => other,
    }
}
