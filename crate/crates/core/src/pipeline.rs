//! File-to-file commands driven by one run configuration.
//!
//! Every command reads its inputs, writes into `out_dir` and finishes with a
//! `run_log.json` naming each output file and its schema. The log carries a
//! SHA-256 of the effective configuration with `out_dir` left out, so the
//! same run in two places produces identical bytes.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bn::{argmax_stage, classify_hs, load_model, predict_next_stage, save_model, BnConfig, FittedBn, MODEL_SCHEMA, MODEL_SCHEMA_VERSION};
use crate::bouts::{cohort_bouts, write_bout_table, SubjectBouts};
use crate::discretize::fit_discretization;
use crate::error::{Error, Result};
use crate::experiment::{
    accuracy, enumerate_configs, fit_meta_regression, macro_f1, make_cv_plan, mean_ovr_auroc, run_experiment,
    MeanSd, Metric,
};
use crate::hypnogram::{parse_cohort_with_sidecar, write_cohort, Cohort, StageFormat};
use crate::intervention::{
    do_sample, duration_contrast, expected_durations, expected_lag1, expected_lag2, lag1_contrast, lag2_contrast,
    ReplicateBatch, StatEstimate, DEFAULT_REPLICATES, DEFAULT_SAMPLES,
};
use crate::report::{
    descriptive_bout_stats, lag1_graph, lag2_graphs, to_json_document, write_bout_stats, write_config_results,
    write_estimates, write_graphs, write_regression_table, EstimateRow, GraphMode, TABLE_SCHEMA_VERSION,
};
use crate::simulator::{make_default_ground_truth, simulate_cohort, REFERENCE_GROUP_SIZES};
use crate::stage::{HealthStatus, Stage, N_HS};

pub const RUN_LOG_SCHEMA: &str = "sleep-dbn/run-log";
pub const RUN_LOG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Epoch-level hypnogram file.
    pub input: Option<PathBuf>,
    /// Optional `subject_id,health_status` file.
    pub sidecar: Option<PathBuf>,
    pub out_dir: PathBuf,
    /// Model read by predict, classify and intervene.
    pub model: Option<PathBuf>,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            input: None,
            sidecar: None,
            out_dir: PathBuf::from("out"),
            model: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentOptions {
    pub folds: usize,
    pub replicates: usize,
    pub samples: usize,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions {
            folds: 3,
            replicates: DEFAULT_REPLICATES,
            samples: DEFAULT_SAMPLES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationOptions {
    /// Subjects per group in H, CFS, CFSFM order.
    pub group_sizes: [usize; N_HS],
    pub night_length_min: f64,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        SimulationOptions {
            group_sizes: REFERENCE_GROUP_SIZES,
            night_length_min: 480.0,
        }
    }
}

/// Everything a command needs besides its input files. All fields have
/// defaults, so an empty TOML file is a valid configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub stage_format: StageFormat,
    pub paths: Paths,
    pub model: BnConfig,
    pub experiment: ExperimentOptions,
    pub simulation: SimulationOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            stage_format: StageFormat::Token,
            paths: Paths::default(),
            model: BnConfig::default(),
            experiment: ExperimentOptions::default(),
            simulation: SimulationOptions::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        let e = &self.experiment;
        if e.folds < 2 || e.replicates == 0 || e.samples == 0 {
            return Err(Error::Config("folds must be >= 2, replicates and samples > 0".into()));
        }
        if !(self.simulation.night_length_min > 0.0) {
            return Err(Error::Config("night_length_min must be positive".into()));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// SHA-256 of the canonical TOML form without the output directory.
    pub fn hash(&self) -> Result<String> {
        let mut c = self.clone();
        c.paths.out_dir = PathBuf::new();
        let digest = Sha256::digest(c.to_toml()?.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }

    fn input(&self) -> Result<&Path> {
        self.paths
            .input
            .as_deref()
            .ok_or_else(|| Error::Config("no input file given".into()))
    }

    fn model_path(&self) -> Result<&Path> {
        self.paths
            .model
            .as_deref()
            .ok_or_else(|| Error::Config("no model file given".into()))
    }

    fn read_cohort(&self) -> Result<Cohort> {
        parse_cohort_with_sidecar(self.input()?, self.paths.sidecar.as_deref(), self.stage_format)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputRecord {
    /// Relative to the output directory.
    pub file: String,
    pub schema: String,
    pub version: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub schema: String,
    pub version: u32,
    pub command: String,
    pub config_sha256: String,
    pub seed: u64,
    pub outputs: Vec<OutputRecord>,
    pub warnings: Vec<String>,
}

struct Run<'a> {
    cfg: &'a RunConfig,
    log: RunLog,
}

impl<'a> Run<'a> {
    fn start(cfg: &'a RunConfig, command: &str) -> Result<Self> {
        cfg.validate()?;
        std::fs::create_dir_all(&cfg.paths.out_dir)?;
        Ok(Run {
            cfg,
            log: RunLog {
                schema: RUN_LOG_SCHEMA.into(),
                version: RUN_LOG_VERSION,
                command: command.into(),
                config_sha256: cfg.hash()?,
                seed: cfg.seed,
                outputs: Vec::new(),
                warnings: Vec::new(),
            },
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.cfg.paths.out_dir.join(name)
    }

    fn record(&mut self, name: &str, schema: &str, version: u32) {
        self.log.outputs.push(OutputRecord {
            file: name.into(),
            schema: schema.into(),
            version,
        });
    }

    fn write_text(&mut self, name: &str, schema: &str, text: &str) -> Result<()> {
        std::fs::write(self.path(name), text)?;
        self.record(name, schema, TABLE_SCHEMA_VERSION);
        Ok(())
    }

    fn write_csv(&mut self, name: &str, schema: &str, f: impl FnOnce(BufWriter<File>) -> Result<()>) -> Result<()> {
        f(BufWriter::new(File::create(self.path(name))?))?;
        self.record(name, schema, TABLE_SCHEMA_VERSION);
        Ok(())
    }

    fn warn(&mut self, msg: String) {
        log::warn!("{msg}");
        self.log.warnings.push(msg);
    }

    fn finish(mut self) -> Result<RunLog> {
        self.record("run_log.json", RUN_LOG_SCHEMA, RUN_LOG_VERSION);
        let mut text = serde_json::to_string_pretty(&self.log)?;
        text.push('\n');
        std::fs::write(self.path("run_log.json"), text)?;
        Ok(self.log)
    }
}

fn bouts_with_warnings(run: &mut Run<'_>, cohort: &Cohort) -> Vec<SubjectBouts> {
    let (subjects, skipped) = cohort_bouts(cohort);
    for id in skipped {
        run.warn(format!("subject {id} skipped: no sleep onset"));
    }
    subjects
}

/// Bout table with levels from edges fitted on the whole cohort, plus the
/// discretization itself.
pub fn cmd_preprocess(cfg: &RunConfig) -> Result<RunLog> {
    let mut run = Run::start(cfg, "preprocess")?;
    let cohort = cfg.read_cohort()?;
    let subjects = bouts_with_warnings(&mut run, &cohort);
    let spec = fit_discretization(subjects.iter().flat_map(|s| s.bouts.iter()))?;
    run.write_csv("bouts.csv", "sleep-dbn/bouts", |w| write_bout_table(&subjects, &spec, w))?;
    run.write_text("discretization.json", "sleep-dbn/discretization", &to_json_document("sleep-dbn/discretization", &spec)?)?;
    run.finish()
}

/// Fits `cfg.model` on every subject and writes `model.json`.
pub fn cmd_fit(cfg: &RunConfig) -> Result<RunLog> {
    let mut run = Run::start(cfg, "fit")?;
    let cohort = cfg.read_cohort()?;
    let subjects = bouts_with_warnings(&mut run, &cohort);
    let bn = fit_subjects(cfg.model, &subjects)?;
    save_model(&bn, &run.path("model.json"))?;
    run.record("model.json", MODEL_SCHEMA, MODEL_SCHEMA_VERSION);
    run.finish()
}

pub fn fit_subjects(config: BnConfig, subjects: &[SubjectBouts]) -> Result<FittedBn> {
    let spec = fit_discretization(subjects.iter().flat_map(|s| s.bouts.iter()))?;
    let windows: Vec<_> = subjects
        .iter()
        .flat_map(|s| crate::bn::subject_windows(s, &spec, config.lag))
        .collect();
    FittedBn::fit(config, spec, &windows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionSummary {
    pub n_subjects: usize,
    pub n_windows: usize,
    /// On-subject accuracy and macro-F1 (fractions).
    pub accuracy: MeanSd,
    pub macro_f1: MeanSd,
    /// `mean (sd)` in percent.
    pub accuracy_percent: String,
    pub macro_f1_percent: String,
}

/// Next-stage distribution and argmax for every window of every subject.
pub fn cmd_predict(cfg: &RunConfig) -> Result<RunLog> {
    let mut run = Run::start(cfg, "predict")?;
    let bn = load_model(cfg.model_path()?)?;
    let cohort = cfg.read_cohort()?;
    let subjects = bouts_with_warnings(&mut run, &cohort);
    let mut accs = Vec::new();
    let mut f1s = Vec::new();
    let mut n_windows = 0;
    let path = run.path("predictions.csv");
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    let mut header = vec!["subject_id".to_string(), "health_status".into(), "t".into()];
    header.extend(Stage::ALL.iter().map(|s| format!("p_{s}")));
    header.extend(["predicted".to_string(), "observed".into()]);
    w.write_record(&header)?;
    for s in &subjects {
        let windows = bn.windows_for(s);
        if windows.is_empty() {
            run.warn(format!("subject {} has fewer than {} bouts", s.subject_id, bn.config.lag + 1));
            continue;
        }
        let mut preds = Vec::with_capacity(windows.len());
        let mut truths = Vec::with_capacity(windows.len());
        for (k, win) in windows.iter().enumerate() {
            let dist = predict_next_stage(&bn, win)?;
            let p = argmax_stage(&dist);
            let mut rec = vec![s.subject_id.clone(), s.health_status.to_string(), (k + bn.config.lag).to_string()];
            rec.extend(dist.iter().map(|v| format!("{v:.4}")));
            rec.extend([p.to_string(), win.current().stage.to_string()]);
            w.write_record(&rec)?;
            preds.push(p);
            truths.push(win.current().stage);
        }
        n_windows += windows.len();
        accs.push(accuracy(&preds, &truths)?);
        f1s.push(macro_f1(&preds, &truths)?);
    }
    w.flush()?;
    drop(w);
    run.record("predictions.csv", "sleep-dbn/predictions", TABLE_SCHEMA_VERSION);
    let accuracy = MeanSd::of(&accs);
    let macro_f1 = MeanSd::of(&f1s);
    let summary = PredictionSummary {
        n_subjects: accs.len(),
        n_windows,
        accuracy,
        macro_f1,
        accuracy_percent: accuracy.percent(),
        macro_f1_percent: macro_f1.percent(),
    };
    run.write_text("prediction_summary.json", "sleep-dbn/prediction-summary", &to_json_document("sleep-dbn/prediction-summary", &summary)?)?;
    run.finish()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationSummary {
    pub n_subjects: usize,
    /// Fraction of subjects whose largest posterior is their own status.
    pub accuracy: f64,
    pub mean_ovr_auroc: Option<f64>,
    pub mean_ovr_auroc_percent: Option<String>,
}

/// Per-subject health-status posterior averaged over its windows.
pub fn cmd_classify(cfg: &RunConfig) -> Result<RunLog> {
    let mut run = Run::start(cfg, "classify")?;
    let bn = load_model(cfg.model_path()?)?;
    let cohort = cfg.read_cohort()?;
    let subjects = bouts_with_warnings(&mut run, &cohort);
    let mut posts = Vec::new();
    let mut labels = Vec::new();
    let path = run.path("posteriors.csv");
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    let mut header = vec!["subject_id".to_string(), "health_status".into(), "n_windows".into()];
    header.extend(HealthStatus::ALL.iter().map(|h| format!("p_{h}")));
    header.push("predicted".into());
    w.write_record(&header)?;
    for s in &subjects {
        let windows = bn.windows_for(s);
        let post = if windows.is_empty() {
            run.warn(format!("subject {} has no complete window; prior used", s.subject_id));
            bn.hs_prior
        } else {
            classify_hs(&bn, &windows)?
        };
        let best = (0..N_HS).fold(0, |b, i| if post[i] > post[b] { i } else { b });
        let mut rec = vec![s.subject_id.clone(), s.health_status.to_string(), windows.len().to_string()];
        rec.extend(post.iter().map(|v| format!("{v:.4}")));
        rec.push(HealthStatus::ALL[best].to_string());
        w.write_record(&rec)?;
        posts.push(post);
        labels.push(s.health_status);
    }
    w.flush()?;
    drop(w);
    run.record("posteriors.csv", "sleep-dbn/posteriors", TABLE_SCHEMA_VERSION);
    let correct = posts
        .iter()
        .zip(&labels)
        .filter(|(p, l)| (0..N_HS).fold(0, |b, i| if p[i] > p[b] { i } else { b }) == l.index())
        .count();
    let auroc = mean_ovr_auroc(&posts, &labels).ok();
    let summary = ClassificationSummary {
        n_subjects: posts.len(),
        accuracy: if posts.is_empty() { f64::NAN } else { correct as f64 / posts.len() as f64 },
        mean_ovr_auroc: auroc,
        mean_ovr_auroc_percent: auroc.map(|a| format!("{:.1}", 100.0 * a)),
    };
    run.write_text("classification_summary.json", "sleep-dbn/classification-summary", &to_json_document("sleep-dbn/classification-summary", &summary)?)?;
    run.finish()
}

/// Full grid under cross-validation and one meta-regression per metric.
pub fn cmd_experiment(cfg: &RunConfig) -> Result<RunLog> {
    let mut run = Run::start(cfg, "experiment")?;
    let cohort = cfg.read_cohort()?;
    let subjects = bouts_with_warnings(&mut run, &cohort);
    let plan = make_cv_plan(
        subjects.iter().map(|s| (s.subject_id.as_str(), s.health_status)),
        cfg.experiment.folds,
        cfg.seed,
    )?;
    let configs: Vec<BnConfig> = enumerate_configs()
        .into_iter()
        .map(|c| c.with_alpha(cfg.model.smoothing_alpha))
        .collect();
    let results = run_experiment(&configs, &subjects, &plan)?;
    run.write_csv("config_results.csv", "sleep-dbn/config-results", |w| write_config_results(&results, w))?;
    run.write_text("config_results.json", "sleep-dbn/config-results", &to_json_document("sleep-dbn/config-results", &results)?)?;
    run.write_text("cv_plan.json", "sleep-dbn/cv-plan", &to_json_document("sleep-dbn/cv-plan", &plan)?)?;
    let mut regressions = Vec::new();
    for m in Metric::ALL {
        match fit_meta_regression(&results, m) {
            Ok(r) => regressions.push(r),
            Err(e) => run.warn(format!("{} regression skipped: {e}", m.as_str())),
        }
    }
    run.write_csv("regression.csv", "sleep-dbn/regression", |w| write_regression_table(&regressions, w))?;
    run.write_text("regression.json", "sleep-dbn/regression", &to_json_document("sleep-dbn/regression", &regressions)?)?;
    run.finish()
}

/// Samples every health-status condition, summarizes each, contrasts the
/// patient groups against H and draws the transition graphs.
pub fn cmd_intervene(cfg: &RunConfig) -> Result<RunLog> {
    let mut run = Run::start(cfg, "intervene")?;
    let bn = load_model(cfg.model_path()?)?;
    let e = &cfg.experiment;
    let batches: Vec<Vec<ReplicateBatch>> = HealthStatus::ALL
        .iter()
        .map(|&hs| do_sample(&bn, hs, e.replicates, e.samples, cfg.seed))
        .collect::<Result<_>>()?;
    let lag = bn.config.lag;
    let has_duration = bn.config.include_duration;
    if lag < 2 {
        run.warn(format!("lag {lag} < 2: lag-2 outputs skipped"));
    }
    if lag < 1 {
        run.warn("lag 0: lag-1 outputs skipped".into());
    }
    if !has_duration {
        run.warn("no duration node: duration outputs skipped".into());
    }
    let mut rows = Vec::new();
    let push = |rows: &mut Vec<EstimateRow>, analysis: &str, c: HealthStatus, r: Option<HealthStatus>, v: &[StatEstimate]| {
        rows.extend(v.iter().map(|x| EstimateRow::new(analysis, c, r, x)));
    };
    let graph_dir = run.path("graphs");
    let mut graphs: Vec<(String, Vec<(Option<Stage>, String)>)> = Vec::new();
    for (h, b) in HealthStatus::ALL.iter().zip(&batches) {
        if has_duration {
            push(&mut rows, "duration", *h, None, &expected_durations(&bn, b)?);
        }
        if lag >= 1 {
            let (p, t) = expected_lag1(b)?;
            push(&mut rows, "prevalence", *h, None, &p);
            push(&mut rows, "lag1", *h, None, &t);
            graphs.push((format!("lag1_{h}"), vec![(None, lag1_graph(&format!("{h}"), GraphMode::Expected, &p, &t))]));
        }
        if lag >= 2 {
            let (n, t) = expected_lag2(b)?;
            push(&mut rows, "lag2_node", *h, None, &n);
            push(&mut rows, "lag2", *h, None, &t);
            let g = lag2_graphs(&format!("{h}"), GraphMode::Expected, &n, &t);
            graphs.push((format!("lag2_{h}"), g.into_iter().map(|(s, g)| (Some(s), g)).collect()));
        }
    }
    let reference = &batches[HealthStatus::H.index()];
    for h in [HealthStatus::Cfs, HealthStatus::CfsFm] {
        let b = &batches[h.index()];
        let name = format!("{h}-H");
        if has_duration {
            push(&mut rows, "duration_contrast", h, Some(HealthStatus::H), &duration_contrast(&bn, b, reference)?);
        }
        if lag >= 1 {
            let (p, t) = lag1_contrast(b, reference)?;
            push(&mut rows, "prevalence_contrast", h, Some(HealthStatus::H), &p);
            push(&mut rows, "lag1_contrast", h, Some(HealthStatus::H), &t);
            graphs.push((format!("lag1_{h}_vs_H"), vec![(None, lag1_graph(&name, GraphMode::Contrast, &p, &t))]));
        }
        if lag >= 2 {
            let (n, t) = lag2_contrast(b, reference)?;
            push(&mut rows, "lag2_node_contrast", h, Some(HealthStatus::H), &n);
            push(&mut rows, "lag2_contrast", h, Some(HealthStatus::H), &t);
            let g = lag2_graphs(&name, GraphMode::Contrast, &n, &t);
            graphs.push((format!("lag2_{h}_vs_H"), g.into_iter().map(|(s, g)| (Some(s), g)).collect()));
        }
    }
    run.write_csv("estimates.csv", "sleep-dbn/estimates", |w| write_estimates(&rows, w))?;
    run.write_text("estimates.json", "sleep-dbn/estimates", &to_json_document("sleep-dbn/estimates", &rows)?)?;
    for (stem, g) in &graphs {
        for p in write_graphs(&graph_dir, stem, g)? {
            let rel = format!("graphs/{}", p.file_name().unwrap().to_string_lossy());
            run.record(&rel, "graphviz-dot", TABLE_SCHEMA_VERSION);
        }
    }
    run.finish()
}

/// Cohort from the default ground truth, plus the ground-truth network.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<RunLog> {
    let mut run = Run::start(cfg, "simulate")?;
    let mut gt = make_default_ground_truth();
    gt.group_sizes = cfg.simulation.group_sizes;
    gt.night_length_min = cfg.simulation.night_length_min;
    let cohort = simulate_cohort(&gt, cfg.seed)?;
    run.write_csv("cohort.csv", "sleep-dbn/hypnogram", |w| write_cohort(&cohort, w))?;
    save_model(&gt.bn, &run.path("ground_truth.json"))?;
    run.record("ground_truth.json", MODEL_SCHEMA, MODEL_SCHEMA_VERSION);
    run.finish()
}

/// Descriptive bout statistics per stage and health status.
pub fn cmd_report(cfg: &RunConfig) -> Result<RunLog> {
    let mut run = Run::start(cfg, "report")?;
    let cohort = cfg.read_cohort()?;
    let subjects = bouts_with_warnings(&mut run, &cohort);
    let rows = descriptive_bout_stats(&subjects);
    run.write_csv("bout_stats.csv", "sleep-dbn/bout-stats", |w| write_bout_stats(&rows, w))?;
    run.write_text("bout_stats.json", "sleep-dbn/bout-stats", &to_json_document("sleep-dbn/bout-stats", &rows)?)?;
    run.finish()
}
