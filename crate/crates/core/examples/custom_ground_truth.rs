//! Builds a ground truth from a transition kernel, plants a group
//! difference in one second-order context and simulates from it.
//!
//!     cargo run --example custom_ground_truth

use sleep_dbn::discretize::QuantileBins;
use sleep_dbn::simulator::{ground_truth_from_kernel, simulate_cohort, KernelSpec};
use sleep_dbn::{HealthStatus, Stage};

pub fn run_example() -> sleep_dbn::Result<()> {
    use Stage::*;
    let kernel = |hs: HealthStatus, hist: &[Stage]| -> [f64; 5] {
        // hist is oldest first
        let prev = hist[hist.len() - 1];
        let mut row = match prev {
            W => [0.0, 0.6, 0.3, 0.0, 0.1],
            N1 => [0.2, 0.0, 0.7, 0.0, 0.1],
            N2 => [0.15, 0.3, 0.0, 0.35, 0.2],
            N3 => [0.1, 0.1, 0.8, 0.0, 0.0],
            R => [0.3, 0.4, 0.3, 0.0, 0.0],
        };
        if hs == HealthStatus::Cfs && hist == [N2, R] {
            row = [0.45, 0.25, 0.3, 0.0, 0.0];
        }
        row
    };
    let duration = |_: HealthStatus, s: Stage| match s {
        N2 | R => vec![0.1, 0.2, 0.3, 0.4],
        _ => vec![0.4, 0.3, 0.2, 0.1],
    };
    let gt = ground_truth_from_kernel(KernelSpec {
        lag: 2,
        kernel: &kernel,
        duration: &duration,
        duration_bins: QuantileBins::from_edges([1.0, 3.0, 8.0], false, 20.0)?,
        duration_epochs: vec![1, 4, 10, 30],
        group_sizes: [5, 5, 5],
        night_length_min: 420.0,
    })?;
    let cohort = simulate_cohort(&gt, 0)?;
    println!("{} subjects, {} epochs", cohort.subjects.len(), cohort.n_epochs());
    let first = &cohort.subjects[0];
    let head: Vec<_> = first.stages.iter().take(30).map(|s| s.as_str()).collect();
    println!("{}: {}", first.subject_id, head.join(" "));
    Ok(())
}

#[allow(dead_code)]
fn main() -> sleep_dbn::Result<()> {
    run_example()
}
