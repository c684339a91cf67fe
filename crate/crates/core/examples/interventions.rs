//! Pins the health-status node, samples windows and contrasts the patient
//! groups with the healthy group.
//!
//!     cargo run --release --example interventions

use sleep_dbn::intervention::{do_sample, expected_durations, lag1_contrast, lag2_contrast};
use sleep_dbn::report::{lag1_graph, lag2_graphs, GraphMode};
use sleep_dbn::simulator::make_default_ground_truth;
use sleep_dbn::HealthStatus;

pub fn run_example() -> sleep_dbn::Result<()> {
    let bn = make_default_ground_truth().bn;
    let (replicates, samples) = (200, 1000);
    let h = do_sample(&bn, HealthStatus::H, replicates, samples, 99)?;
    let cfs = do_sample(&bn, HealthStatus::Cfs, replicates, samples, 99)?;

    for e in expected_durations(&bn, &h)? {
        let c = e.ci.expect("every stage is sampled");
        println!("{:<8} {:.2} [{:.2}, {:.2}] min", e.id(), c.estimate, c.lo, c.hi);
    }

    let (prev, trans) = lag1_contrast(&cfs, &h)?;
    println!("significant CFS-H differences:");
    for e in prev.iter().chain(&trans).filter(|e| e.significant()) {
        let c = e.ci.unwrap();
        println!("  {:<12} {:+.4} [{:+.4}, {:+.4}]", e.id(), c.estimate, c.lo, c.hi);
    }
    let dot = lag1_graph("CFS-H", GraphMode::Contrast, &prev, &trans);
    println!("lag-1 graph: {} lines of DOT", dot.lines().count());

    let (nodes, edges) = lag2_contrast(&cfs, &h)?;
    let graphs = lag2_graphs("CFS-H", GraphMode::Contrast, &nodes, &edges);
    let n_sig = edges.iter().filter(|e| e.significant()).count();
    println!("lag-2: {} graphs, {n_sig} significant edges", graphs.len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> sleep_dbn::Result<()> {
    run_example()
}
