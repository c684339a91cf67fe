//! Simulates a cohort from the default ground truth and writes it as a
//! hypnogram file.
//!
//!     cargo run --example simulate_cohort

use sleep_dbn::hypnogram::{parse_cohort, validate_cohort, write_cohort, StageFormat};
use sleep_dbn::simulator::{make_default_ground_truth, simulate_cohort};

pub fn run_example() -> sleep_dbn::Result<()> {
    let gt = make_default_ground_truth();
    let cohort = simulate_cohort(&gt, 2024)?;

    let dir = std::env::temp_dir().join("sleep-dbn-examples");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("simulated_cohort.csv");
    write_cohort(&cohort, std::fs::File::create(&path)?)?;

    // the reader orders subjects by id
    let reread = parse_cohort(&path, StageFormat::Token)?;
    let mut expected = cohort.subjects.clone();
    expected.sort_by(|a, b| a.subject_id.cmp(&b.subject_id));
    assert_eq!(reread.subjects, expected);

    let report = validate_cohort(&reread);
    println!("wrote {}", path.display());
    println!("subjects per group (H, CFS, CFSFM): {:?}", report.group_counts);
    println!("epochs: {}", reread.n_epochs());
    println!("stage coverage (W, N1, N2, N3, R): {:?}", report.stage_coverage);
    Ok(())
}

#[allow(dead_code)]
fn main() -> sleep_dbn::Result<()> {
    run_example()
}
