//! Structure-selection experiment: configuration grid, subject-wise
//! cross-validation, metrics and the indicator meta-regression.

pub mod cv;
pub mod grid;
pub mod metrics;
pub mod regression;

pub use cv::{make_cv_plan, CvPlan};
pub use grid::{
    enumerate_configs, evaluate_config, evaluate_fold, prepare_folds, run_experiment, ConfigResult, FoldData,
    FoldMetrics, Metric, SubjectScore,
};
pub use metrics::{accuracy, auroc, compute_metrics, macro_f1, mean_ovr_auroc, ovr_auroc, MeanSd, Metrics};
pub use regression::{
    design_row, fit_meta_regression, ols_no_intercept, significance_band, Coefficient, MetaRegression, OlsFit,
    REGRESSOR_NAMES,
};
