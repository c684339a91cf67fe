//! The 60-configuration grid and its cross-validated evaluation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cv::CvPlan;
use super::metrics::{accuracy, macro_f1, mean_ovr_auroc, MeanSd};
use crate::bn::{argmax_stage, classify_hs, make_windows, predict_next_stage, BnConfig, Cumulative, FittedBn, Window, MAX_LAG};
use crate::bouts::SubjectBouts;
use crate::discretize::{fit_discretization, DiscreteBout, DiscretizationSpec};
use crate::error::{Error, Result};
use crate::stage::{HealthStatus, Stage, N_HS};

/// Lag-major cross product: lag, then TSSO, then duration, then cumulative.
pub fn enumerate_configs() -> Vec<BnConfig> {
    let mut out = Vec::with_capacity(60);
    for lag in 0..=MAX_LAG {
        for tsso in [false, true] {
            for duration in [false, true] {
                for cumulative in Cumulative::ALL {
                    out.push(BnConfig::new(lag, tsso, duration, cumulative));
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Accuracy,
    MacroF1,
    Auroc,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Accuracy, Metric::MacroF1, Metric::Auroc];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::MacroF1 => "macro_f1",
            Metric::Auroc => "auroc",
        }
    }
}

/// One test subject's outcome in its fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectScore {
    pub subject_id: String,
    pub health_status: HealthStatus,
    pub fold: usize,
    pub n_windows: usize,
    /// `None` when the subject has too few bouts for a single window.
    pub accuracy: Option<f64>,
    pub macro_f1: Option<f64>,
    pub posterior: [f64; N_HS],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub fold: usize,
    pub accuracy: f64,
    pub macro_f1: f64,
    /// Undefined when the fold lacks a health-status class.
    pub auroc: Option<f64>,
    pub n_test_subjects: usize,
    pub n_test_windows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigResult {
    pub config: BnConfig,
    pub folds: Vec<FoldMetrics>,
    /// Across folds.
    pub accuracy: MeanSd,
    pub macro_f1: MeanSd,
    pub auroc: MeanSd,
    /// Across all test subjects (on-subject mean and SD).
    pub subject_accuracy: MeanSd,
    pub subject_macro_f1: MeanSd,
    pub subjects: Vec<SubjectScore>,
}

impl ConfigResult {
    /// Fold-mean value of `metric`.
    pub fn value(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Accuracy => self.accuracy.mean,
            Metric::MacroF1 => self.macro_f1.mean,
            Metric::Auroc => self.auroc.mean,
        }
    }
}

/// Training and test material of one fold, discretized with edges fitted on
/// the training subjects only.
#[derive(Debug, Clone)]
pub struct FoldData {
    pub fold: usize,
    pub spec: DiscretizationSpec,
    pub train: Vec<(HealthStatus, Vec<DiscreteBout>)>,
    pub test: Vec<(String, HealthStatus, Vec<DiscreteBout>)>,
}

pub fn prepare_folds(subjects: &[SubjectBouts], plan: &CvPlan) -> Result<Vec<FoldData>> {
    let mut folds_of = Vec::with_capacity(subjects.len());
    for s in subjects {
        let f = plan
            .fold_of(&s.subject_id)
            .ok_or_else(|| Error::Planning(format!("subject {} is not in the plan", s.subject_id)))?;
        folds_of.push(f);
    }
    (0..plan.n_folds)
        .map(|fold| {
            let train_bouts = subjects
                .iter()
                .zip(&folds_of)
                .filter(|(_, &f)| f != fold)
                .flat_map(|(s, _)| s.bouts.iter());
            let spec = fit_discretization(train_bouts).map_err(|e| fold_err(fold, e))?;
            let mut train = Vec::new();
            let mut test = Vec::new();
            for (s, &f) in subjects.iter().zip(&folds_of) {
                let d = spec.apply_all(&s.bouts);
                if f == fold {
                    test.push((s.subject_id.clone(), s.health_status, d));
                } else {
                    train.push((s.health_status, d));
                }
            }
            if test.is_empty() {
                return Err(fold_err(fold, Error::Planning("empty test fold".into())));
            }
            Ok(FoldData { fold, spec, train, test })
        })
        .collect()
}

fn fold_err(fold: usize, e: Error) -> Error {
    Error::Fold {
        fold,
        source: Box::new(e),
    }
}

/// Scores every test subject of one prepared fold.
pub fn evaluate_fold(config: &BnConfig, data: &FoldData) -> Result<(FoldMetrics, Vec<SubjectScore>)> {
    let inner = || -> Result<(FoldMetrics, Vec<SubjectScore>)> {
        let lag = config.lag;
        let windows: Vec<Window> = data.train.iter().flat_map(|(hs, b)| make_windows(*hs, b, lag)).collect();
        let bn = FittedBn::fit(*config, data.spec.clone(), &windows)?;
        let mut scores = Vec::with_capacity(data.test.len());
        let mut n_windows = 0;
        for (id, hs, bouts) in &data.test {
            let ws = make_windows(*hs, bouts, lag);
            n_windows += ws.len();
            let (acc, f1, posterior) = if ws.is_empty() {
                (None, None, bn.hs_prior)
            } else {
                let mut preds = Vec::with_capacity(ws.len());
                let mut truths: Vec<Stage> = Vec::with_capacity(ws.len());
                for w in &ws {
                    preds.push(argmax_stage(&predict_next_stage(&bn, w)?));
                    truths.push(w.current().stage);
                }
                (
                    Some(accuracy(&preds, &truths)?),
                    Some(macro_f1(&preds, &truths)?),
                    classify_hs(&bn, &ws)?,
                )
            };
            scores.push(SubjectScore {
                subject_id: id.clone(),
                health_status: *hs,
                fold: data.fold,
                n_windows: ws.len(),
                accuracy: acc,
                macro_f1: f1,
                posterior,
            });
        }
        let accs: Vec<f64> = scores.iter().filter_map(|s| s.accuracy).collect();
        let f1s: Vec<f64> = scores.iter().filter_map(|s| s.macro_f1).collect();
        if accs.is_empty() {
            return Err(Error::Metric("no test subject has a complete window".into()));
        }
        let posts: Vec<[f64; N_HS]> = scores.iter().map(|s| s.posterior).collect();
        let labels: Vec<HealthStatus> = scores.iter().map(|s| s.health_status).collect();
        let metrics = FoldMetrics {
            fold: data.fold,
            accuracy: MeanSd::of(&accs).mean,
            macro_f1: MeanSd::of(&f1s).mean,
            auroc: mean_ovr_auroc(&posts, &labels).ok(),
            n_test_subjects: scores.len(),
            n_test_windows: n_windows,
        };
        Ok((metrics, scores))
    };
    inner().map_err(|e| match e {
        e @ Error::Fold { .. } => e,
        e => fold_err(data.fold, e),
    })
}

fn aggregate(config: BnConfig, parts: Vec<(FoldMetrics, Vec<SubjectScore>)>) -> ConfigResult {
    let mut folds = Vec::with_capacity(parts.len());
    let mut subjects = Vec::new();
    for (m, s) in parts {
        folds.push(m);
        subjects.extend(s);
    }
    subjects.sort_by(|a, b| a.subject_id.cmp(&b.subject_id));
    let col = |f: fn(&FoldMetrics) -> Option<f64>| MeanSd::of(&folds.iter().filter_map(f).collect::<Vec<_>>());
    let accuracy = col(|m| Some(m.accuracy));
    let macro_f1 = col(|m| Some(m.macro_f1));
    let auroc = col(|m| m.auroc);
    let subject_accuracy = MeanSd::of(&subjects.iter().filter_map(|s| s.accuracy).collect::<Vec<_>>());
    let subject_macro_f1 = MeanSd::of(&subjects.iter().filter_map(|s| s.macro_f1).collect::<Vec<_>>());
    ConfigResult {
        config,
        folds,
        accuracy,
        macro_f1,
        auroc,
        subject_accuracy,
        subject_macro_f1,
        subjects,
    }
}

/// Evaluates every configuration on every fold. Tasks run in parallel and
/// are reassembled in (config, fold) order.
pub fn run_experiment(configs: &[BnConfig], subjects: &[SubjectBouts], plan: &CvPlan) -> Result<Vec<ConfigResult>> {
    let folds = prepare_folds(subjects, plan)?;
    let tasks: Vec<(usize, usize)> = (0..configs.len())
        .flat_map(|c| (0..folds.len()).map(move |f| (c, f)))
        .collect();
    let outcomes: Vec<(FoldMetrics, Vec<SubjectScore>)> = tasks
        .par_iter()
        .map(|&(c, f)| evaluate_fold(&configs[c], &folds[f]))
        .collect::<Result<_>>()?;
    let mut it = outcomes.into_iter();
    Ok(configs
        .iter()
        .map(|c| aggregate(*c, it.by_ref().take(folds.len()).collect()))
        .collect())
}

pub fn evaluate_config(config: &BnConfig, subjects: &[SubjectBouts], plan: &CvPlan) -> Result<ConfigResult> {
    Ok(run_experiment(std::slice::from_ref(config), subjects, plan)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bouts::encode_bouts;
    use crate::experiment::cv::make_cv_plan;
    use Stage::*;

    #[test]
    fn grid_shape() {
        let g = enumerate_configs();
        assert_eq!(g.len(), 60);
        assert!(g.contains(&BnConfig::new(2, false, true, Cumulative::None)));
        let mut uniq = g.clone();
        uniq.dedup();
        assert_eq!(uniq.len(), 60);
    }

    fn cycling_subject(id: &str, hs: HealthStatus, reps: usize) -> SubjectBouts {
        // deterministic N1 -> N2 -> N3 -> R -> N1 cycle with varied run lengths
        let mut epochs = Vec::new();
        for i in 0..reps {
            for (k, s) in [N1, N2, N3, R].into_iter().enumerate() {
                epochs.extend(std::iter::repeat(s).take(1 + (i + k) % 5));
            }
        }
        SubjectBouts {
            subject_id: id.into(),
            health_status: hs,
            bouts: encode_bouts(&epochs, 30),
        }
    }

    #[test]
    fn deterministic_dynamics_are_predicted_perfectly() {
        let mut subjects = Vec::new();
        for hs in HealthStatus::ALL {
            for i in 0..3 {
                subjects.push(cycling_subject(&format!("{hs}{i}"), hs, 20));
            }
        }
        let plan = make_cv_plan(subjects.iter().map(|s| (s.subject_id.as_str(), s.health_status)), 3, 7).unwrap();
        let r = evaluate_config(&BnConfig::new(1, false, false, Cumulative::None), &subjects, &plan).unwrap();
        assert_eq!(r.accuracy.mean, 1.0);
        assert_eq!(r.macro_f1.mean, 1.0);
        assert_eq!(r.subject_accuracy.percent(), "100.0 (0.0)");
        // identical dynamics in every group carry no class information
        assert_eq!(r.auroc.mean, 0.5);
        let again = evaluate_config(&BnConfig::new(1, false, false, Cumulative::None), &subjects, &plan).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn missing_subject_is_planning_error() {
        let subjects = vec![cycling_subject("x", HealthStatus::H, 3)];
        let plan = CvPlan {
            n_folds: 3,
            seed: 0,
            assignments: Default::default(),
        };
        assert!(matches!(prepare_folds(&subjects, &plan), Err(Error::Planning(_))));
    }
}
