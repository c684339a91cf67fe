//! The five-stage sleep alphabet and the health-status label.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Number of sleep-wake stages.
pub const N_STAGES: usize = 5;
/// Number of health-status levels.
pub const N_HS: usize = 3;

/// AASM sleep-wake stage. The declaration order (W < N1 < N2 < N3 < R) is
/// also the tie-break order for argmax predictions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stage {
    W,
    N1,
    N2,
    N3,
    R,
}

impl Stage {
    pub const ALL: [Stage; N_STAGES] = [Stage::W, Stage::N1, Stage::N2, Stage::N3, Stage::R];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Stage> {
        Stage::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::W => "W",
            Stage::N1 => "N1",
            Stage::N2 => "N2",
            Stage::N3 => "N3",
            Stage::R => "R",
        }
    }

    /// Legacy numeric scoring: 0=W, 1..=3 = N1..N3, 4 (old S4) folds into N3, 5=R.
    /// Anything else, including movement-time codes, is rejected.
    pub fn from_numeric(code: i64) -> Option<Stage> {
        match code {
            0 => Some(Stage::W),
            1 => Some(Stage::N1),
            2 => Some(Stage::N2),
            3 | 4 => Some(Stage::N3),
            5 => Some(Stage::R),
            _ => None,
        }
    }

    /// Counts towards cumulative sleep time (N1+N2+N3+R).
    pub fn is_sleep(self) -> bool {
        self != Stage::W
    }

    /// Counts towards cumulative restorative sleep time (N3+R).
    pub fn is_restorative(self) -> bool {
        matches!(self, Stage::N3 | Stage::R)
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "W" => Ok(Stage::W),
            "N1" => Ok(Stage::N1),
            "N2" => Ok(Stage::N2),
            "N3" => Ok(Stage::N3),
            "R" => Ok(Stage::R),
            other => Err(Error::Parse {
                line: 0,
                msg: format!("unknown stage token {other:?}"),
            }),
        }
    }
}

/// Health status of a subject.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum HealthStatus {
    H,
    Cfs,
    CfsFm,
}

impl HealthStatus {
    pub const ALL: [HealthStatus; N_HS] = [HealthStatus::H, HealthStatus::Cfs, HealthStatus::CfsFm];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<HealthStatus> {
        HealthStatus::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            HealthStatus::H => "H",
            HealthStatus::Cfs => "CFS",
            HealthStatus::CfsFm => "CFSFM",
        }
    }
}

impl fmt::Display for HealthStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for HealthStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "H" => Ok(HealthStatus::H),
            "CFS" => Ok(HealthStatus::Cfs),
            "CFSFM" | "CFS+FM" => Ok(HealthStatus::CfsFm),
            other => Err(Error::Parse {
                line: 0,
                msg: format!("unknown health status {other:?}"),
            }),
        }
    }
}
