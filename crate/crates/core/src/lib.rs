//! Dynamic Bayesian networks for sleep-stage bout sequences.

pub mod bn;
pub mod bouts;
pub mod discretize;
pub mod error;
pub mod experiment;
pub mod hypnogram;
pub mod intervention;
pub mod pipeline;
pub mod report;
pub mod seed;
pub mod simulator;
pub mod stage;

pub use error::{Error, Result};
pub use stage::{HealthStatus, Stage};
