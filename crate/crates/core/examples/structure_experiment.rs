//! Cross-validates the configuration grid and regresses a metric on the
//! configuration indicators.
//!
//!     cargo run --release --example structure_experiment

use sleep_dbn::bouts::cohort_bouts;
use sleep_dbn::experiment::{enumerate_configs, fit_meta_regression, make_cv_plan, run_experiment, Metric};
use sleep_dbn::simulator::{make_default_ground_truth, simulate_cohort};

pub fn run_example() -> sleep_dbn::Result<()> {
    let (subjects, _) = cohort_bouts(&simulate_cohort(&make_default_ground_truth(), 5)?);
    let plan = make_cv_plan(subjects.iter().map(|s| (s.subject_id.as_str(), s.health_status)), 3, 5)?;
    let configs = enumerate_configs();
    let results = run_experiment(&configs, &subjects, &plan)?;

    let best = results
        .iter()
        .max_by(|a, b| a.accuracy.mean.total_cmp(&b.accuracy.mean))
        .expect("non-empty grid");
    println!("best by accuracy: {} at {}", best.config, best.subject_accuracy.percent());

    let reg = fit_meta_regression(&results, Metric::Accuracy)?;
    println!("accuracy ~ indicators, F({}, {}) = {:.1}", reg.df_model, reg.df_resid, reg.f_stat);
    for c in &reg.coefficients {
        println!("  {:<15} {:>6.1} {}", c.name, c.estimate, c.band());
    }
    println!("adjusted R2 {:.4}", reg.r2_adjusted);
    Ok(())
}

#[allow(dead_code)]
fn main() -> sleep_dbn::Result<()> {
    run_example()
}
