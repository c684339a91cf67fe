use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sleep_dbn::hypnogram::StageFormat;
use sleep_dbn::pipeline::{
    cmd_classify, cmd_experiment, cmd_fit, cmd_intervene, cmd_predict, cmd_preprocess, cmd_report, cmd_simulate,
    RunConfig,
};

#[derive(Parser)]
#[command(name = "sleep-dbn", version, about = "Bout-level Bayesian networks for hypnograms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; flags below override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    stage_format: Option<StageFormat>,
    #[arg(long, global = true)]
    folds: Option<usize>,
    #[arg(long, global = true)]
    replicates: Option<usize>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Hypnogram file.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Health-status sidecar file.
    #[arg(long, global = true)]
    sidecar: Option<PathBuf>,
    /// Model file.
    #[arg(long, global = true)]
    model: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Trim, run-length encode and discretize a cohort.
    Preprocess,
    /// Fit the configured network on a cohort.
    Fit,
    /// Next-stage predictions for every window.
    Predict,
    /// Health-status posteriors per subject.
    Classify,
    /// Cross-validated structure grid and meta-regression.
    Experiment,
    /// do(HS) sampling, contrasts and transition graphs.
    Intervene,
    /// Synthetic cohort from the default ground truth.
    Simulate,
    /// Descriptive bout statistics.
    Report,
}

fn resolve(c: Common) -> sleep_dbn::Result<RunConfig> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(v) = c.seed {
        cfg.seed = v;
    }
    if let Some(v) = c.stage_format {
        cfg.stage_format = v;
    }
    if let Some(v) = c.folds {
        cfg.experiment.folds = v;
    }
    if let Some(v) = c.replicates {
        cfg.experiment.replicates = v;
    }
    if let Some(v) = c.samples {
        cfg.experiment.samples = v;
    }
    if let Some(v) = c.out {
        cfg.paths.out_dir = v;
    }
    if c.input.is_some() {
        cfg.paths.input = c.input;
    }
    if c.sidecar.is_some() {
        cfg.paths.sidecar = c.sidecar;
    }
    if c.model.is_some() {
        cfg.paths.model = c.model;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = resolve(cli.common).and_then(|cfg| match cli.command {
        Command::Preprocess => cmd_preprocess(&cfg),
        Command::Fit => cmd_fit(&cfg),
        Command::Predict => cmd_predict(&cfg),
        Command::Classify => cmd_classify(&cfg),
        Command::Experiment => cmd_experiment(&cfg),
        Command::Intervene => cmd_intervene(&cfg),
        Command::Simulate => cmd_simulate(&cfg),
        Command::Report => cmd_report(&cfg),
    });
    match result {
        Ok(log) => {
            for o in &log.outputs {
                println!("{}", o.file);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
