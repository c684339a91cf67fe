//! Monte-Carlo do(HS = h) analyses with quantile credible intervals.
//!
//! Each replicate draws windows from the network with the health-status node
//! pinned and keeps sufficient counts. Statistics are read off the counts per
//! replicate; intervals are quantiles over replicates. Contrasts pair
//! replicate `r` of one condition with replicate `r` of the other.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bn::{resolve_fixed, FittedBn, Sampler, Var};
use crate::discretize::quantile_sorted;
use crate::error::{Error, Result};
use crate::seed::{derive, rng_from_seed, INTERVENTION};
use crate::stage::{HealthStatus, Stage, N_STAGES};

pub const DEFAULT_REPLICATES: usize = 1000;
pub const DEFAULT_SAMPLES: usize = 1000;

type Pair = [[u64; N_STAGES]; N_STAGES];
type Triple = [Pair; N_STAGES];

/// Sufficient counts of one replicate.
///
/// `prevalence` counts the stage preceding the predicted one (`S[t-1]`), or
/// the current stage of a lag-0 network. Duration sums accumulate the
/// midpoint of the sampled `D[t]` level by `S[t]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateBatch {
    pub condition: HealthStatus,
    pub replicate_index: usize,
    pub n_samples: usize,
    pub lag: usize,
    pub prevalence: [u64; N_STAGES],
    pub pairs: Pair,
    pub triples: Option<Box<Triple>>,
    pub duration_sum: [f64; N_STAGES],
    pub duration_n: [u64; N_STAGES],
}

impl ReplicateBatch {
    pub fn prevalence(&self) -> [f64; N_STAGES] {
        let n: u64 = self.prevalence.iter().sum();
        self.prevalence.map(|c| c as f64 / n as f64)
    }

    /// `P(S[t] | S[t-1] = from)`, `None` when `from` was never sampled.
    pub fn lag1_row(&self, from: Stage) -> Option<[f64; N_STAGES]> {
        normalize(&self.pairs[from.index()])
    }

    /// `P(S[t-1] | S[t-2] = start)`.
    pub fn lag2_node_row(&self, start: Stage) -> Option<[f64; N_STAGES]> {
        let t = self.triples.as_ref()?;
        let counts: [u64; N_STAGES] = std::array::from_fn(|j| t[start.index()][j].iter().sum());
        normalize(&counts)
    }

    /// `P(S[t] | S[t-2] = start, S[t-1] = from)`.
    pub fn lag2_row(&self, start: Stage, from: Stage) -> Option<[f64; N_STAGES]> {
        normalize(&self.triples.as_ref()?[start.index()][from.index()])
    }

    /// Mean duration midpoint of bouts in `stage`.
    pub fn expected_duration(&self, stage: Stage) -> Option<f64> {
        let n = self.duration_n[stage.index()];
        (n > 0).then(|| self.duration_sum[stage.index()] / n as f64)
    }

    /// Value of one statistic in this replicate.
    pub fn value(&self, key: StatKey) -> Option<f64> {
        match key {
            StatKey::Prevalence(s) => Some(self.prevalence()[s.index()]),
            StatKey::Duration(s) => self.expected_duration(s),
            StatKey::Lag1 { from, to } => self.lag1_row(from).map(|r| r[to.index()]),
            StatKey::Lag2Node { start, stage } => self.lag2_node_row(start).map(|r| r[stage.index()]),
            StatKey::Lag2 { start, from, to } => self.lag2_row(start, from).map(|r| r[to.index()]),
        }
    }
}

fn normalize(counts: &[u64; N_STAGES]) -> Option<[f64; N_STAGES]> {
    let n: u64 = counts.iter().sum();
    (n > 0).then(|| counts.map(|c| c as f64 / n as f64))
}

/// Draws `n_replicates` batches of `n_per_replicate` windows with HS pinned
/// to `hs`. Replicate `r` of condition `hs` always uses the same substream.
pub fn do_sample(
    bn: &FittedBn,
    hs: HealthStatus,
    n_replicates: usize,
    n_per_replicate: usize,
    seed: u64,
) -> Result<Vec<ReplicateBatch>> {
    if n_replicates == 0 || n_per_replicate == 0 {
        return Err(Error::Contract("replicate and sample counts must be positive".into()));
    }
    let pins = resolve_fixed(bn, &[(Var::Hs, hs.index())])?;
    let sampler = Sampler::new(bn);
    let lag = bn.config.lag;
    let s_now = bn.node_index(Var::Stage(0));
    let s1 = (lag >= 1).then(|| bn.node_index(Var::Stage(1)));
    let s2 = (lag >= 2).then(|| bn.node_index(Var::Stage(2)));
    let dur = bn.dag.index_of(Var::Duration(0));
    let mids = bn.discretization.duration.midpoints();
    let base = derive(seed, INTERVENTION, hs.index() as u64);
    let batches = (0..n_replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_from_seed(derive(base, INTERVENTION, r as u64));
            let mut b = ReplicateBatch {
                condition: hs,
                replicate_index: r,
                n_samples: n_per_replicate,
                lag,
                prevalence: [0; N_STAGES],
                pairs: [[0; N_STAGES]; N_STAGES],
                triples: s2.map(|_| Box::new([[[0; N_STAGES]; N_STAGES]; N_STAGES])),
                duration_sum: [0.0; N_STAGES],
                duration_n: [0; N_STAGES],
            };
            let mut a = vec![0; bn.dag.len()];
            for _ in 0..n_per_replicate {
                sampler.sample_into(&mut rng, &pins, &mut a);
                let now = a[s_now];
                match s1 {
                    Some(i1) => {
                        let prev = a[i1];
                        b.prevalence[prev] += 1;
                        b.pairs[prev][now] += 1;
                        if let (Some(i2), Some(t)) = (s2, b.triples.as_mut()) {
                            t[a[i2]][prev][now] += 1;
                        }
                    }
                    None => b.prevalence[now] += 1,
                }
                if let Some(d) = dur {
                    b.duration_sum[now] += mids[a[d]];
                    b.duration_n[now] += 1;
                }
            }
            b
        })
        .collect();
    Ok(batches)
}

/// Identifies one statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StatKey {
    Prevalence(Stage),
    Duration(Stage),
    Lag1 { from: Stage, to: Stage },
    /// `S[t-1] = stage` given `S[t-2] = start`.
    Lag2Node { start: Stage, stage: Stage },
    Lag2 { start: Stage, from: Stage, to: Stage },
}

impl StatKey {
    /// e.g. `prev[N1]`, `dur[N3]`, `lag1[N1->W]`, `lag2[N2][R]`, `lag2[N2][R->W]`.
    pub fn id(&self) -> String {
        match *self {
            StatKey::Prevalence(s) => format!("prev[{s}]"),
            StatKey::Duration(s) => format!("dur[{s}]"),
            StatKey::Lag1 { from, to } => format!("lag1[{from}->{to}]"),
            StatKey::Lag2Node { start, stage } => format!("lag2[{start}][{stage}]"),
            StatKey::Lag2 { start, from, to } => format!("lag2[{start}][{from}->{to}]"),
        }
    }

    pub fn prevalence() -> Vec<StatKey> {
        Stage::ALL.map(StatKey::Prevalence).to_vec()
    }

    pub fn durations() -> Vec<StatKey> {
        Stage::ALL.map(StatKey::Duration).to_vec()
    }

    pub fn lag1() -> Vec<StatKey> {
        Stage::ALL
            .iter()
            .flat_map(|&from| Stage::ALL.map(|to| StatKey::Lag1 { from, to }))
            .collect()
    }

    pub fn lag2_nodes() -> Vec<StatKey> {
        Stage::ALL
            .iter()
            .flat_map(|&start| Stage::ALL.map(|stage| StatKey::Lag2Node { start, stage }))
            .collect()
    }

    pub fn lag2() -> Vec<StatKey> {
        let mut out = Vec::with_capacity(125);
        for start in Stage::ALL {
            for from in Stage::ALL {
                for to in Stage::ALL {
                    out.push(StatKey::Lag2 { start, from, to });
                }
            }
        }
        out
    }

    fn needs_lag(&self) -> usize {
        match self {
            StatKey::Prevalence(_) | StatKey::Duration(_) => 0,
            StatKey::Lag1 { .. } => 1,
            StatKey::Lag2Node { .. } | StatKey::Lag2 { .. } => 2,
        }
    }
}

/// Median and (2.5%, 97.5%) quantiles over replicates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CiEstimate {
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
    /// Contrasts only: the interval excludes zero.
    pub significant: bool,
}

impl CiEstimate {
    pub fn from_values(values: &[f64]) -> Option<CiEstimate> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(|a, b| a.total_cmp(b));
        Some(CiEstimate {
            estimate: quantile_sorted(&v, 0.5),
            lo: quantile_sorted(&v, 0.025),
            hi: quantile_sorted(&v, 0.975),
            significant: false,
        })
    }

    pub fn excludes_zero(&self) -> bool {
        self.lo > 0.0 || self.hi < 0.0
    }
}

/// One reported statistic. `ci` is `None` when no replicate observed the
/// conditioning event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatEstimate {
    pub key: StatKey,
    pub ci: Option<CiEstimate>,
    pub n_valid: usize,
    pub n_replicates: usize,
}

impl StatEstimate {
    pub fn id(&self) -> String {
        self.key.id()
    }

    pub fn complete(&self) -> bool {
        self.n_valid == self.n_replicates
    }

    pub fn significant(&self) -> bool {
        self.ci.is_some_and(|c| c.significant)
    }
}

/// Per-replicate values of every statistic in one condition.
pub fn summarize(keys: &[StatKey], batches: &[ReplicateBatch]) -> Vec<StatEstimate> {
    keys.iter()
        .map(|&key| {
            let values: Vec<f64> = batches.iter().filter_map(|b| b.value(key)).collect();
            StatEstimate {
                key,
                ci: CiEstimate::from_values(&values),
                n_valid: values.len(),
                n_replicates: batches.len(),
            }
        })
        .collect()
}

/// Paired differences `a[r] - b[r]`. A statistic is only flagged
/// significant when every replicate pair observed it.
pub fn contrast(keys: &[StatKey], a: &[ReplicateBatch], b: &[ReplicateBatch]) -> Result<Vec<StatEstimate>> {
    check_paired(a, b)?;
    Ok(keys
        .iter()
        .map(|&key| {
            let diffs = paired_differences(key, a, b);
            let values: Vec<f64> = diffs.iter().flatten().copied().collect();
            let mut ci = CiEstimate::from_values(&values);
            let complete = values.len() == a.len();
            if let Some(c) = ci.as_mut() {
                c.significant = complete && c.excludes_zero();
            }
            StatEstimate {
                key,
                ci,
                n_valid: values.len(),
                n_replicates: a.len(),
            }
        })
        .collect())
}

/// `a[r] - b[r]` per replicate, `None` where either side is undefined.
pub fn paired_differences(key: StatKey, a: &[ReplicateBatch], b: &[ReplicateBatch]) -> Vec<Option<f64>> {
    a.iter()
        .zip(b)
        .map(|(x, y)| Some(x.value(key)? - y.value(key)?))
        .collect()
}

fn check_paired(a: &[ReplicateBatch], b: &[ReplicateBatch]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Contract(format!("{} replicates vs {}", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(Error::Contract("no replicates".into()));
    }
    for (x, y) in a.iter().zip(b) {
        if x.replicate_index != y.replicate_index {
            return Err(Error::Contract(format!(
                "replicate {} paired with {}",
                x.replicate_index, y.replicate_index
            )));
        }
    }
    Ok(())
}

fn check_lag(keys: &[StatKey], batches: &[ReplicateBatch]) -> Result<()> {
    let lag = batches.first().map_or(0, |b| b.lag);
    let need = keys.iter().map(StatKey::needs_lag).max().unwrap_or(0);
    if lag < need {
        return Err(Error::Unsupported(format!("statistics need lag >= {need}, network has lag {lag}")));
    }
    Ok(())
}

/// Expected per-stage duration midpoints under one condition.
pub fn expected_durations(bn: &FittedBn, batches: &[ReplicateBatch]) -> Result<Vec<StatEstimate>> {
    if bn.dag.index_of(Var::Duration(0)).is_none() {
        return Err(Error::Unsupported("network has no duration node".into()));
    }
    Ok(summarize(&StatKey::durations(), batches))
}

/// Prevalence of the preceding stage and the lag-1 transition matrix.
pub fn expected_lag1(batches: &[ReplicateBatch]) -> Result<(Vec<StatEstimate>, Vec<StatEstimate>)> {
    let keys = StatKey::lag1();
    check_lag(&keys, batches)?;
    Ok((summarize(&StatKey::prevalence(), batches), summarize(&keys, batches)))
}

/// Conditional `S[t-1]` prevalences (nodes) and `S[t-1] -> S[t]`
/// transitions (edges), both given `S[t-2]`.
pub fn expected_lag2(batches: &[ReplicateBatch]) -> Result<(Vec<StatEstimate>, Vec<StatEstimate>)> {
    let keys = StatKey::lag2();
    check_lag(&keys, batches)?;
    Ok((summarize(&StatKey::lag2_nodes(), batches), summarize(&keys, batches)))
}

/// Paired prevalence and lag-1 transition differences `a - b`.
pub fn lag1_contrast(a: &[ReplicateBatch], b: &[ReplicateBatch]) -> Result<(Vec<StatEstimate>, Vec<StatEstimate>)> {
    let keys = StatKey::lag1();
    check_paired(a, b)?;
    check_lag(&keys, a)?;
    Ok((contrast(&StatKey::prevalence(), a, b)?, contrast(&keys, a, b)?))
}

/// Paired lag-2 node and edge differences `a - b`, grouped by `S[t-2]` in
/// key order.
pub fn lag2_contrast(a: &[ReplicateBatch], b: &[ReplicateBatch]) -> Result<(Vec<StatEstimate>, Vec<StatEstimate>)> {
    let keys = StatKey::lag2();
    check_paired(a, b)?;
    check_lag(&keys, a)?;
    Ok((contrast(&StatKey::lag2_nodes(), a, b)?, contrast(&keys, a, b)?))
}

pub fn duration_contrast(bn: &FittedBn, a: &[ReplicateBatch], b: &[ReplicateBatch]) -> Result<Vec<StatEstimate>> {
    if bn.dag.index_of(Var::Duration(0)).is_none() {
        return Err(Error::Unsupported("network has no duration node".into()));
    }
    contrast(&StatKey::durations(), a, b)
}
