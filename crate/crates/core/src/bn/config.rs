use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_LAG: usize = 4;

/// Which cumulative-sleep covariate, if any, enters the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Cumulative {
    #[default]
    None,
    /// Cumulative sleep time (N1+N2+N3+R).
    Cst,
    /// Cumulative restorative sleep time (N3+R).
    Crst,
}

impl Cumulative {
    pub const ALL: [Cumulative; 3] = [Cumulative::None, Cumulative::Cst, Cumulative::Crst];

    pub fn as_str(self) -> &'static str {
        match self {
            Cumulative::None => "none",
            Cumulative::Cst => "CST",
            Cumulative::Crst => "CRST",
        }
    }
}

/// One point of the structure family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BnConfig {
    pub lag: usize,
    pub include_tsso: bool,
    pub include_duration: bool,
    pub cumulative: Cumulative,
    #[serde(default = "default_alpha")]
    pub smoothing_alpha: f64,
}

fn default_alpha() -> f64 {
    1.0
}

impl Default for BnConfig {
    /// Second-order network with stage durations.
    fn default() -> Self {
        BnConfig {
            lag: 2,
            include_tsso: false,
            include_duration: true,
            cumulative: Cumulative::None,
            smoothing_alpha: 1.0,
        }
    }
}

impl BnConfig {
    pub fn new(lag: usize, include_tsso: bool, include_duration: bool, cumulative: Cumulative) -> Self {
        BnConfig {
            lag,
            include_tsso,
            include_duration,
            cumulative,
            smoothing_alpha: 1.0,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.smoothing_alpha = alpha;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.lag > MAX_LAG {
            return Err(Error::Config(format!("lag {} outside 0..={MAX_LAG}", self.lag)));
        }
        if !(self.smoothing_alpha >= 0.0 && self.smoothing_alpha.is_finite()) {
            return Err(Error::Config(format!("smoothing_alpha {} must be >= 0", self.smoothing_alpha)));
        }
        Ok(())
    }
}

impl fmt::Display for BnConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "lag={}", self.lag)?;
        if self.include_tsso {
            f.write_str("+TSSO")?;
        }
        if self.include_duration {
            f.write_str("+D")?;
        }
        if self.cumulative != Cumulative::None {
            write!(f, "+{}", self.cumulative.as_str())?;
        }
        Ok(())
    }
}
