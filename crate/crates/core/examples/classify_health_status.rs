//! Scores each subject's health status from its bout windows.
//!
//!     cargo run --example classify_health_status

use sleep_dbn::bn::classify_hs;
use sleep_dbn::bouts::cohort_bouts;
use sleep_dbn::experiment::ovr_auroc;
use sleep_dbn::pipeline::fit_subjects;
use sleep_dbn::simulator::{make_default_ground_truth, simulate_cohort};
use sleep_dbn::HealthStatus;

pub fn run_example() -> sleep_dbn::Result<()> {
    let gt = make_default_ground_truth();
    let (train, _) = cohort_bouts(&simulate_cohort(&gt, 1)?);
    let (test, _) = cohort_bouts(&simulate_cohort(&gt, 2)?);
    let bn = fit_subjects(Default::default(), &train)?;

    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for s in &test {
        let post = classify_hs(&bn, &bn.windows_for(s))?;
        if scores.len() < 3 || s.subject_id.ends_with("001") {
            println!("{:>9} {:>5}  H={:.3} CFS={:.3} CFSFM={:.3}", s.subject_id, s.health_status, post[0], post[1], post[2]);
        }
        scores.push(post);
        labels.push(s.health_status);
    }
    let per_class = ovr_auroc(&scores, &labels)?;
    for (hs, a) in HealthStatus::ALL.iter().zip(per_class) {
        println!("AUROC {hs} vs rest: {:.3}", a.unwrap_or(f64::NAN));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> sleep_dbn::Result<()> {
    run_example()
}
