//! Fits a second-order network with stage durations, predicts the next
//! stage and round-trips the model through its JSON file.
//!
//!     cargo run --example fit_and_predict

use sleep_dbn::bn::{argmax_stage, build_structure, load_model, predict_next_stage, save_model, BnConfig, Var};
use sleep_dbn::bouts::cohort_bouts;
use sleep_dbn::experiment::{accuracy, MeanSd};
use sleep_dbn::pipeline::fit_subjects;
use sleep_dbn::simulator::{make_default_ground_truth, simulate_cohort};

pub fn run_example() -> sleep_dbn::Result<()> {
    let config = BnConfig::default();
    let dag = build_structure(&config, Default::default());
    let s = dag.index_of(Var::Stage(0)).expect("current stage node");
    println!("{config}: {} nodes, S[t] has {} parent configurations", dag.len(), dag.parent_configs(s));

    let cohort = simulate_cohort(&make_default_ground_truth(), 11)?;
    let (subjects, _) = cohort_bouts(&cohort);
    // every fourth subject is held out, so each group is seen in training
    let (test, train): (Vec<_>, Vec<_>) = subjects.into_iter().enumerate().partition(|(i, _)| i % 4 == 0);
    let test: Vec<_> = test.into_iter().map(|(_, s)| s).collect();
    let train: Vec<_> = train.into_iter().map(|(_, s)| s).collect();
    let bn = fit_subjects(config, &train)?;

    let mut per_subject = Vec::new();
    for subj in &test {
        let windows = bn.windows_for(subj);
        let mut preds = Vec::new();
        let mut truth = Vec::new();
        for w in &windows {
            preds.push(argmax_stage(&predict_next_stage(&bn, w)?));
            truth.push(w.current().stage);
        }
        per_subject.push(accuracy(&preds, &truth)?);
    }
    println!("held-out next-stage accuracy {}", MeanSd::of(&per_subject).percent());

    let path = std::env::temp_dir().join("sleep-dbn-example-model.json");
    save_model(&bn, &path)?;
    let back = load_model(&path)?;
    let w = &back.windows_for(&test[0])[0];
    assert_eq!(predict_next_stage(&back, w)?, predict_next_stage(&bn, w)?);
    println!("model reloaded from {}", path.display());
    Ok(())
}

#[allow(dead_code)]
fn main() -> sleep_dbn::Result<()> {
    run_example()
}
