//! Descriptive bout statistics, delimited and JSON tables, and DOT graphs.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bouts::SubjectBouts;
use crate::error::Result;
use crate::experiment::{ConfigResult, MeanSd, MetaRegression, REGRESSOR_NAMES};
use crate::intervention::{StatEstimate, StatKey};
use crate::stage::{HealthStatus, Stage, N_HS};

pub const TABLE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoutStatsRow {
    pub stage: Stage,
    /// Bouts per subject-night, per health status.
    pub count: [MeanSd; N_HS],
    /// Per-subject mean bout duration (minutes), over subjects with at
    /// least one bout of the stage.
    pub duration: [MeanSd; N_HS],
}

pub fn descriptive_bout_stats(subjects: &[SubjectBouts]) -> Vec<BoutStatsRow> {
    Stage::ALL
        .iter()
        .map(|&stage| {
            let mut counts: [Vec<f64>; N_HS] = Default::default();
            let mut durations: [Vec<f64>; N_HS] = Default::default();
            for s in subjects {
                let h = s.health_status.index();
                let mins: Vec<f64> = s.bouts.iter().filter(|b| b.stage == stage).map(|b| b.duration_min).collect();
                counts[h].push(mins.len() as f64);
                if !mins.is_empty() {
                    durations[h].push(mins.iter().sum::<f64>() / mins.len() as f64);
                }
            }
            BoutStatsRow {
                stage,
                count: std::array::from_fn(|h| MeanSd::of(&counts[h])),
                duration: std::array::from_fn(|h| MeanSd::of(&durations[h])),
            }
        })
        .collect()
}

fn mean_sd_cell(m: &MeanSd) -> String {
    if m.n == 0 {
        String::new()
    } else {
        format!("{:.1} ({:.1})", m.mean, m.sd)
    }
}

/// Wide layout: one row per stage, bouts and duration per health status,
/// and an empty pairwise-comparison column.
pub fn write_bout_stats<W: Write>(rows: &[BoutStatsRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["stage".to_string()];
    for hs in HealthStatus::ALL {
        header.push(format!("{hs}_bouts"));
        header.push(format!("{hs}_duration_min"));
    }
    header.push("pairwise_differences".into());
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.stage.to_string()];
        for h in 0..N_HS {
            rec.push(mean_sd_cell(&r.count[h]));
            rec.push(mean_sd_cell(&r.duration[h]));
        }
        rec.push(String::new());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// One estimate with the analysis it belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub analysis: String,
    pub condition: HealthStatus,
    /// Set for contrasts (`condition - reference`).
    pub reference: Option<HealthStatus>,
    pub statistic: String,
    pub estimate: Option<f64>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub significant: bool,
    pub n_valid: usize,
    pub n_replicates: usize,
}

impl EstimateRow {
    pub fn new(analysis: &str, condition: HealthStatus, reference: Option<HealthStatus>, e: &StatEstimate) -> Self {
        EstimateRow {
            analysis: analysis.to_string(),
            condition,
            reference,
            statistic: e.id(),
            estimate: e.ci.map(|c| c.estimate),
            lo: e.ci.map(|c| c.lo),
            hi: e.ci.map(|c| c.hi),
            significant: e.significant(),
            n_valid: e.n_valid,
            n_replicates: e.n_replicates,
        }
    }
}

pub const ESTIMATE_HEADER: [&str; 10] = [
    "analysis",
    "condition",
    "reference",
    "statistic",
    "estimate",
    "lo",
    "hi",
    "significant",
    "n_valid",
    "n_replicates",
];

fn opt4(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_default()
}

pub fn write_estimates<W: Write>(rows: &[EstimateRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(ESTIMATE_HEADER)?;
    for r in rows {
        w.write_record([
            r.analysis.clone(),
            r.condition.to_string(),
            r.reference.map(|h| h.to_string()).unwrap_or_default(),
            r.statistic.clone(),
            opt4(r.estimate),
            opt4(r.lo),
            opt4(r.hi),
            r.significant.to_string(),
            r.n_valid.to_string(),
            r.n_replicates.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Versioned JSON envelope around any serializable payload.
pub fn to_json_document<T: Serialize>(schema: &str, payload: &T) -> Result<String> {
    #[derive(Serialize)]
    struct Doc<'a, T> {
        schema: &'a str,
        version: u32,
        data: &'a T,
    }
    let mut s = serde_json::to_string_pretty(&Doc {
        schema,
        version: TABLE_SCHEMA_VERSION,
        data: payload,
    })?;
    s.push('\n');
    Ok(s)
}

pub const CONFIG_RESULT_HEADER: [&str; 16] = [
    "config",
    "lag",
    "tsso",
    "duration",
    "cumulative",
    "accuracy",
    "accuracy_sd",
    "macro_f1",
    "macro_f1_sd",
    "auroc",
    "auroc_sd",
    "subject_accuracy",
    "subject_accuracy_sd",
    "subject_macro_f1",
    "subject_macro_f1_sd",
    "n_folds",
];

/// One row per configuration; metrics in percent.
pub fn write_config_results<W: Write>(results: &[ConfigResult], writer: W) -> Result<()> {
    let pct = |v: f64| format!("{:.1}", 100.0 * v);
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CONFIG_RESULT_HEADER)?;
    for (i, r) in results.iter().enumerate() {
        let c = &r.config;
        w.write_record([
            i.to_string(),
            c.lag.to_string(),
            c.include_tsso.to_string(),
            c.include_duration.to_string(),
            c.cumulative.as_str().to_string(),
            pct(r.accuracy.mean),
            pct(r.accuracy.sd),
            pct(r.macro_f1.mean),
            pct(r.macro_f1.sd),
            pct(r.auroc.mean),
            pct(r.auroc.sd),
            pct(r.subject_accuracy.mean),
            pct(r.subject_accuracy.sd),
            pct(r.subject_macro_f1.mean),
            pct(r.subject_macro_f1.sd),
            r.folds.len().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Regressors down, metrics across: coefficient and significance band per
/// metric, then the model F and adjusted R-squared rows.
pub fn write_regression_table<W: Write>(regressions: &[MetaRegression], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["regressor".to_string()];
    for r in regressions {
        header.push(r.metric.as_str().to_string());
        header.push(format!("{}_sig", r.metric.as_str()));
    }
    w.write_record(&header)?;
    for (i, name) in REGRESSOR_NAMES.iter().enumerate() {
        let mut rec = vec![name.to_string()];
        for r in regressions {
            let c = &r.coefficients[i];
            rec.push(format!("{:.1}", c.estimate));
            rec.push(c.band().to_string());
        }
        w.write_record(&rec)?;
    }
    if let Some(first) = regressions.first() {
        let mut rec = vec![format!("F({}, {})", first.df_model, first.df_resid)];
        for r in regressions {
            rec.push(format!("{:.1}", r.f_stat));
            rec.push(crate::experiment::significance_band(r.f_p_value).to_string());
        }
        w.write_record(&rec)?;
        let mut rec = vec!["R2_adjusted".to_string()];
        for r in regressions {
            rec.push(format!("{:.4}", r.r2_adjusted));
            rec.push(String::new());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GraphMode {
    Expected,
    Contrast,
}

/// Node width in inches per unit of prevalence (expected mode).
pub const NODE_SCALE_EXPECTED: f64 = 2.0;
/// Node width in inches per unit of prevalence difference (contrast mode).
pub const NODE_SCALE_CONTRAST: f64 = 20.0;
pub const NODE_MIN_WIDTH: f64 = 0.3;

const POSITIVE_COLOR: &str = "blue";
const NEGATIVE_COLOR: &str = "red";

fn color(mode: GraphMode, v: f64) -> &'static str {
    match mode {
        GraphMode::Expected => "black",
        GraphMode::Contrast if v >= 0.0 => POSITIVE_COLOR,
        GraphMode::Contrast => NEGATIVE_COLOR,
    }
}

fn find<'a>(items: &'a [StatEstimate], key: StatKey) -> Option<&'a StatEstimate> {
    items.iter().find(|e| e.key == key)
}

fn render(title: &str, mode: GraphMode, nodes: &[Option<&StatEstimate>], edges: &[(Stage, Stage, Option<&StatEstimate>)]) -> String {
    let scale = match mode {
        GraphMode::Expected => NODE_SCALE_EXPECTED,
        GraphMode::Contrast => NODE_SCALE_CONTRAST,
    };
    let mut s = String::new();
    let _ = writeln!(s, "digraph \"{title}\" {{");
    let _ = writeln!(s, "  label=\"{title}\";");
    let _ = writeln!(s, "  node [shape=circle, fixedsize=true];");
    for (i, stage) in Stage::ALL.iter().enumerate() {
        match nodes[i].and_then(|e| e.ci.map(|c| (e, c))) {
            Some((e, c)) => {
                let width = NODE_MIN_WIDTH + scale * c.estimate.abs();
                let mark = if e.significant() { "*" } else { "" };
                let _ = writeln!(
                    s,
                    "  {stage} [width={width:.4}, color={}, label=\"{stage}\\n{:.4}{mark}\\n[{:.4}, {:.4}]\"];",
                    color(mode, c.estimate),
                    c.estimate,
                    c.lo,
                    c.hi
                );
            }
            None => {
                let _ = writeln!(s, "  {stage} [width={NODE_MIN_WIDTH:.4}, style=dashed, label=\"{stage}\"];");
            }
        }
    }
    for &(from, to, est) in edges {
        match est.and_then(|e| e.ci.map(|c| (e, c))) {
            Some((e, c)) => {
                let sig = e.significant();
                let _ = writeln!(
                    s,
                    "  {from} -> {to} [color={}, penwidth={}, label=\"{:.4}{}\\n[{:.4}, {:.4}]\"];",
                    color(mode, c.estimate),
                    if sig { 3 } else { 1 },
                    c.estimate,
                    if sig { "*" } else { "" },
                    c.lo,
                    c.hi
                );
            }
            None => {
                let _ = writeln!(s, "  {from} -> {to} [style=dashed, label=\"\"];");
            }
        }
    }
    s.push_str("}\n");
    s
}

fn off_diagonal() -> impl Iterator<Item = (Stage, Stage)> {
    Stage::ALL
        .into_iter()
        .flat_map(|a| Stage::ALL.into_iter().filter(move |&b| b != a).map(move |b| (a, b)))
}

/// Stage graph with node size from `S[t-1]` prevalence and one edge per
/// transition. Self-transitions are not drawn.
pub fn lag1_graph(title: &str, mode: GraphMode, prevalence: &[StatEstimate], transitions: &[StatEstimate]) -> String {
    let nodes: Vec<_> = Stage::ALL.iter().map(|&s| find(prevalence, StatKey::Prevalence(s))).collect();
    let edges: Vec<_> = off_diagonal()
        .map(|(from, to)| (from, to, find(transitions, StatKey::Lag1 { from, to })))
        .collect();
    render(title, mode, &nodes, &edges)
}

/// One graph per starting stage `S[t-2]`, in stage order.
pub fn lag2_graphs(
    title: &str,
    mode: GraphMode,
    nodes: &[StatEstimate],
    edges: &[StatEstimate],
) -> Vec<(Stage, String)> {
    Stage::ALL
        .iter()
        .map(|&start| {
            let n: Vec<_> = Stage::ALL
                .iter()
                .map(|&stage| find(nodes, StatKey::Lag2Node { start, stage }))
                .collect();
            let e: Vec<_> = off_diagonal()
                .map(|(from, to)| (from, to, find(edges, StatKey::Lag2 { start, from, to })))
                .collect();
            (start, render(&format!("{title} | S[t-2]={start}"), mode, &n, &e))
        })
        .collect()
}

/// Writes `{stem}.dot` for lag 1 or `{stem}_{S}.dot` per starting stage.
pub fn write_graphs(dir: &Path, stem: &str, graphs: &[(Option<Stage>, String)]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut out = Vec::with_capacity(graphs.len());
    for (stage, text) in graphs {
        let name = match stage {
            Some(s) => format!("{stem}_{s}.dot"),
            None => format!("{stem}.dot"),
        };
        let p = dir.join(name);
        std::fs::write(&p, text)?;
        out.push(p);
    }
    Ok(out)
}
