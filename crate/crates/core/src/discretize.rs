//! Discretization of bout covariates.
//!
//! Time since sleep onset uses fixed 90-minute bins. Duration and the two
//! cumulative variables are split at their 25/50/75% training quantiles, with
//! an extra level 0 reserved for exact zeros when zeros occur in training.
//! Edges are fitted on training bouts only and then frozen.

use serde::{Deserialize, Serialize};

use crate::bouts::Bout;
use crate::error::{Error, Result};
use crate::stage::Stage;

pub const TSSO_EDGES: [f64; 4] = [90.0, 180.0, 270.0, 360.0];
pub const N_TSSO_LEVELS: usize = 5;
pub const QUANTILE_PROBS: [f64; 3] = [0.25, 0.5, 0.75];

/// Empirical quantile of an ascending sample by linear interpolation between
/// order statistics at position `(n - 1) * p`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let pos = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    }
}

/// Quartile bins over the positive values, with an optional zero class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileBins {
    pub edges: [f64; 3],
    pub zero_class: bool,
    /// Largest training value; closes the top bin for midpoint purposes.
    pub max: f64,
}

impl QuantileBins {
    /// Bins from explicit edges, e.g. for ground-truth models.
    pub fn from_edges(edges: [f64; 3], zero_class: bool, max: f64) -> Result<Self> {
        if !(0.0 < edges[0] && edges[0] < edges[1] && edges[1] < edges[2] && edges[2] <= max) {
            return Err(Error::Discretization(format!("edges {edges:?} with max {max} are not valid")));
        }
        Ok(QuantileBins { edges, zero_class, max })
    }

    pub fn fit(name: &str, values: &[f64]) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Discretization(format!("{name}: negative or non-finite value")));
        }
        let zero_class = values.iter().any(|&v| v == 0.0);
        let mut positive: Vec<f64> = values.iter().copied().filter(|&v| v > 0.0).collect();
        positive.sort_by(|a, b| a.total_cmp(b));
        let mut distinct = positive.clone();
        distinct.dedup();
        if distinct.len() < 4 {
            return Err(Error::Discretization(format!(
                "{name}: {} distinct positive values, need at least 4",
                distinct.len()
            )));
        }
        let edges = QUANTILE_PROBS.map(|p| quantile_sorted(&positive, p));
        if !(edges[0] < edges[1] && edges[1] < edges[2]) {
            return Err(Error::Discretization(format!(
                "{name}: quartile edges {edges:?} are not strictly increasing"
            )));
        }
        Ok(QuantileBins {
            edges,
            zero_class,
            max: *positive.last().unwrap(),
        })
    }

    pub fn n_levels(&self) -> usize {
        if self.zero_class {
            5
        } else {
            4
        }
    }

    /// Zero maps to the zero class when present (otherwise to the lowest
    /// bin); positive values fall in `(0,q25], (q25,q50], (q50,q75], (q75,inf)`.
    pub fn level(&self, v: f64) -> usize {
        let offset = self.zero_class as usize;
        if v <= 0.0 {
            return 0;
        }
        let bin = self.edges.iter().take_while(|&&e| v > e).count();
        bin + offset
    }

    /// Representative value of each level: 0 for the zero class, the
    /// arithmetic midpoint of each bin, with the top bin closed at the
    /// training maximum.
    pub fn midpoints(&self) -> Vec<f64> {
        let [q1, q2, q3] = self.edges;
        let mut mids = Vec::with_capacity(5);
        if self.zero_class {
            mids.push(0.0);
        }
        mids.extend([q1 / 2.0, (q1 + q2) / 2.0, (q2 + q3) / 2.0, (q3 + self.max.max(q3)) / 2.0]);
        mids
    }
}

pub fn tsso_level(tsso_min: f64) -> usize {
    TSSO_EDGES.iter().take_while(|&&e| tsso_min >= e).count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationSpec {
    pub tsso_edges: [f64; 4],
    pub duration: QuantileBins,
    pub cst: QuantileBins,
    pub crst: QuantileBins,
}

/// Discretized bout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiscreteBout {
    pub stage: Stage,
    pub d_level: u8,
    pub t_level: u8,
    pub cst_level: u8,
    pub crst_level: u8,
}

/// Fits quartile edges on the pooled training bouts (all stages, all subjects).
pub fn fit_discretization<'a>(bouts: impl IntoIterator<Item = &'a Bout>) -> Result<DiscretizationSpec> {
    let mut d = Vec::new();
    let mut cst = Vec::new();
    let mut crst = Vec::new();
    for b in bouts {
        d.push(b.duration_min);
        cst.push(b.cst_min);
        crst.push(b.crst_min);
    }
    if d.is_empty() {
        return Err(Error::Discretization("no training bouts".into()));
    }
    Ok(DiscretizationSpec {
        tsso_edges: TSSO_EDGES,
        duration: QuantileBins::fit("duration", &d)?,
        cst: QuantileBins::fit("cst", &cst)?,
        crst: QuantileBins::fit("crst", &crst)?,
    })
}

impl DiscretizationSpec {
    pub fn tsso_level(&self, tsso_min: f64) -> usize {
        self.tsso_edges.iter().take_while(|&&e| tsso_min >= e).count()
    }

    pub fn apply(&self, b: &Bout) -> DiscreteBout {
        DiscreteBout {
            stage: b.stage,
            d_level: self.duration.level(b.duration_min) as u8,
            t_level: self.tsso_level(b.tsso_min) as u8,
            cst_level: self.cst.level(b.cst_min) as u8,
            crst_level: self.crst.level(b.crst_min) as u8,
        }
    }

    pub fn apply_all(&self, bouts: &[Bout]) -> Vec<DiscreteBout> {
        bouts.iter().map(|b| self.apply(b)).collect()
    }
}
