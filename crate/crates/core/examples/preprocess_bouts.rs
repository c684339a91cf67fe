//! Trims leading wake, run-length encodes each night and fits the
//! quartile discretization.
//!
//!     cargo run --example preprocess_bouts

use sleep_dbn::bouts::{cohort_bouts, encode_bouts, write_bout_table};
use sleep_dbn::discretize::fit_discretization;
use sleep_dbn::hypnogram::{Cohort, SubjectRecord};
use sleep_dbn::simulator::{make_default_ground_truth, simulate_cohort};
use sleep_dbn::{HealthStatus, Stage};

pub fn run_example() -> sleep_dbn::Result<()> {
    use Stage::*;
    // a hand-written night: two wake epochs before onset, then bouts
    let night = vec![W, W, N1, N1, N2, N2, N2, N3, N3, R, R, R, W, N2];
    let toy = SubjectRecord::new("toy", HealthStatus::H, night);
    let bouts = encode_bouts(&toy.stages[2..], toy.epoch_seconds);
    for b in &bouts {
        println!(
            "t={} {:>2} {:>4.1} min  tsso={:>4.1} cst={:>4.1} crst={:>4.1}",
            b.t, b.stage, b.duration_min, b.tsso_min, b.cst_min, b.crst_min
        );
    }

    // all-wake subjects are skipped rather than failing the cohort
    let mut cohort = simulate_cohort(&make_default_ground_truth(), 7)?;
    cohort.subjects.push(SubjectRecord::new("awake", HealthStatus::Cfs, vec![W; 20]));
    let cohort = Cohort::new(cohort.subjects, "example")?;
    let (subjects, skipped) = cohort_bouts(&cohort);
    let n_bouts: usize = subjects.iter().map(|s| s.bouts.len()).sum();
    println!("{} epochs -> {} bouts; skipped {:?}", cohort.n_epochs(), n_bouts, skipped);

    let spec = fit_discretization(subjects.iter().flat_map(|s| s.bouts.iter()))?;
    println!("duration edges {:?}, midpoints {:?}", spec.duration.edges, spec.duration.midpoints());
    println!("CST edges {:?}, CRST edges {:?}", spec.cst.edges, spec.crst.edges);

    let mut table = Vec::new();
    write_bout_table(&subjects[..1], &spec, &mut table)?;
    let text = String::from_utf8(table).expect("utf-8");
    for line in text.lines().take(4) {
        println!("{line}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> sleep_dbn::Result<()> {
    run_example()
}
