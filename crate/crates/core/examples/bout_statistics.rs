//! Mean (SD) bouts per night and bout duration by stage and group.
//!
//!     cargo run --example bout_statistics

use sleep_dbn::bouts::cohort_bouts;
use sleep_dbn::report::{descriptive_bout_stats, write_bout_stats};
use sleep_dbn::simulator::{make_default_ground_truth, simulate_cohort};

pub fn run_example() -> sleep_dbn::Result<()> {
    let (subjects, _) = cohort_bouts(&simulate_cohort(&make_default_ground_truth(), 3)?);
    let rows = descriptive_bout_stats(&subjects);
    write_bout_stats(&rows, std::io::stdout().lock())?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> sleep_dbn::Result<()> {
    run_example()
}
