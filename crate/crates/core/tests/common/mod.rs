//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use sleep_dbn::bn::{Cumulative, FittedBn, Var, Window};
use sleep_dbn::discretize::DiscreteBout;
use sleep_dbn::intervention::StatKey;
use sleep_dbn::{HealthStatus, Stage};

/// Row-major parent index, first parent most significant.
pub fn oracle_row(bn: &FittedBn, node: usize, a: &[usize]) -> usize {
    let nodes = bn.dag.nodes();
    let mut row = 0;
    for &p in &nodes[node].parents {
        row = row * nodes[p].card + a[p];
    }
    row
}

fn prob(bn: &FittedBn, node: usize, a: &[usize]) -> f64 {
    let card = bn.dag.nodes()[node].card;
    bn.cpts[node].table[oracle_row(bn, node, a) * card + a[node]]
}

/// Every assignment of the window with its joint probability. With
/// `pin_hs = Some(h)` the health-status table is replaced by a point mass
/// (the mutilated network); otherwise the prior is used.
pub fn enumerate_joint(bn: &FittedBn, pin_hs: Option<usize>) -> Vec<(Vec<usize>, f64)> {
    let nodes = bn.dag.nodes();
    let cards: Vec<usize> = nodes.iter().map(|n| n.card).collect();
    let hs = bn.dag.index_of(Var::Hs).unwrap();
    let total: usize = cards.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut a = vec![0usize; cards.len()];
    for _ in 0..total {
        let mut p = 1.0;
        for i in 0..cards.len() {
            p *= if i == hs {
                match pin_hs {
                    Some(h) => (a[i] == h) as u8 as f64,
                    None => bn.hs_prior[a[i]],
                }
            } else {
                prob(bn, i, &a)
            };
            if p == 0.0 {
                break;
            }
        }
        if p > 0.0 {
            out.push((a.clone(), p));
        }
        // odometer, last node fastest
        for i in (0..cards.len()).rev() {
            a[i] += 1;
            if a[i] < cards[i] {
                break;
            }
            a[i] = 0;
        }
    }
    out
}

/// Joint restricted to HS = h and renormalized (conditioning).
pub fn condition_on_hs(bn: &FittedBn, joint: &[(Vec<usize>, f64)], h: usize) -> Vec<(Vec<usize>, f64)> {
    let hs = bn.dag.index_of(Var::Hs).unwrap();
    let kept: Vec<_> = joint.iter().filter(|(a, _)| a[hs] == h).cloned().collect();
    let z: f64 = kept.iter().map(|(_, p)| p).sum();
    kept.into_iter().map(|(a, p)| (a, p / z)).collect()
}

/// Exact value of a statistic under a (conditioned) joint.
pub fn exact_stat(bn: &FittedBn, joint: &[(Vec<usize>, f64)], key: StatKey) -> Option<f64> {
    let idx = |v: Var| bn.dag.index_of(v);
    let s0 = idx(Var::Stage(0)).unwrap();
    let ratio = |event: &dyn Fn(&[usize]) -> bool, context: &dyn Fn(&[usize]) -> bool| {
        let mut num = 0.0;
        let mut den = 0.0;
        for (a, p) in joint {
            if context(a) {
                den += p;
                if event(a) {
                    num += p;
                }
            }
        }
        (den > 0.0).then(|| num / den)
    };
    match key {
        StatKey::Prevalence(s) => {
            let node = idx(Var::Stage(1)).unwrap_or(s0);
            ratio(&|a| a[node] == s.index(), &|_| true)
        }
        StatKey::Lag1 { from, to } => {
            let s1 = idx(Var::Stage(1))?;
            ratio(&|a| a[s0] == to.index(), &|a| a[s1] == from.index())
        }
        StatKey::Lag2Node { start, stage } => {
            let (s1, s2) = (idx(Var::Stage(1))?, idx(Var::Stage(2))?);
            ratio(&|a| a[s1] == stage.index(), &|a| a[s2] == start.index())
        }
        StatKey::Lag2 { start, from, to } => {
            let (s1, s2) = (idx(Var::Stage(1))?, idx(Var::Stage(2))?);
            ratio(&|a| a[s0] == to.index(), &|a| a[s2] == start.index() && a[s1] == from.index())
        }
        StatKey::Duration(s) => {
            let d = idx(Var::Duration(0))?;
            let mids = bn.discretization.duration.midpoints();
            let mut num = 0.0;
            let mut den = 0.0;
            for (a, p) in joint {
                if a[s0] == s.index() {
                    den += p;
                    num += p * mids[a[d]];
                }
            }
            (den > 0.0).then(|| num / den)
        }
    }
}

/// Turns a sampled node assignment back into a window of bouts.
pub fn window_from_assignment(bn: &FittedBn, a: &[usize]) -> Window {
    let lag = bn.config.lag;
    let get = |v: Var| bn.dag.index_of(v).map(|i| a[i]).unwrap_or(0);
    let bouts = (0..=lag)
        .rev()
        .map(|k| DiscreteBout {
            stage: Stage::ALL[get(Var::Stage(k))],
            d_level: get(Var::Duration(k)) as u8,
            t_level: if k == 0 { get(Var::Tsso) as u8 } else { 0 },
            cst_level: if k == 0 && bn.config.cumulative == Cumulative::Cst { get(Var::Cumulative) as u8 } else { 0 },
            crst_level: if k == 0 && bn.config.cumulative == Cumulative::Crst { get(Var::Cumulative) as u8 } else { 0 },
        })
        .collect();
    Window {
        hs: HealthStatus::ALL[get(Var::Hs)],
        bouts,
    }
}

/// Value a window takes on node `var`, read straight from the bouts.
pub fn window_value(w: &Window, var: Var, cumulative: Cumulative) -> usize {
    match var {
        Var::Hs => w.hs.index(),
        Var::Tsso => w.current().t_level as usize,
        Var::Cumulative => match cumulative {
            Cumulative::Cst => w.current().cst_level as usize,
            Cumulative::Crst => w.current().crst_level as usize,
            Cumulative::None => unreachable!(),
        },
        Var::Stage(k) => w.at(k).stage.index(),
        Var::Duration(k) => w.at(k).d_level as usize,
    }
}

/// Family counts keyed by parent values, for one node.
pub fn count_family(bn: &FittedBn, node: usize, windows: &[Window]) -> HashMap<Vec<usize>, Vec<f64>> {
    let n = &bn.dag.nodes()[node];
    let mut out: HashMap<Vec<usize>, Vec<f64>> = HashMap::new();
    for w in windows {
        let key: Vec<usize> = n
            .parents
            .iter()
            .map(|&p| window_value(w, bn.dag.nodes()[p].var, bn.config.cumulative))
            .collect();
        out.entry(key).or_insert_with(|| vec![0.0; n.card])[window_value(w, n.var, bn.config.cumulative)] += 1.0;
    }
    out
}

pub fn brute_accuracy(pred: &[Stage], truth: &[Stage]) -> f64 {
    let mut hit = 0.0;
    for i in 0..truth.len() {
        if pred[i] == truth[i] {
            hit += 1.0;
        }
    }
    hit / truth.len() as f64
}

/// F1 = 2PR/(P+R) per stage present in the truth, averaged.
pub fn brute_macro_f1(pred: &[Stage], truth: &[Stage]) -> f64 {
    let mut total = 0.0;
    let mut classes = 0.0;
    for s in Stage::ALL {
        let support = truth.iter().filter(|&&t| t == s).count();
        if support == 0 {
            continue;
        }
        let predicted = pred.iter().filter(|&&p| p == s).count();
        let tp = pred.iter().zip(truth).filter(|(p, t)| **p == s && **t == s).count();
        let precision = if predicted == 0 { 0.0 } else { tp as f64 / predicted as f64 };
        let recall = tp as f64 / support as f64;
        total += if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
        classes += 1.0;
    }
    total / classes
}

/// All positive-negative pairs, half credit for ties.
pub fn brute_auroc(scores: &[f64], positive: &[bool]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if positive[i] && !positive[j] {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}

pub struct NormalEquations {
    pub beta: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub f_stat: f64,
    pub r2_adjusted: f64,
}

/// Solves (X'X) b = X'y by Gauss-Jordan elimination with partial pivoting.
pub fn normal_equations(x: &[Vec<f64>], y: &[f64]) -> NormalEquations {
    let n = x.len();
    let p = x[0].len();
    // augmented [X'X | I | X'y]
    let mut m = vec![vec![0.0; 2 * p + 1]; p];
    for i in 0..p {
        for j in 0..p {
            m[i][j] = (0..n).map(|r| x[r][i] * x[r][j]).sum();
        }
        m[i][p + i] = 1.0;
        m[i][2 * p] = (0..n).map(|r| x[r][i] * y[r]).sum();
    }
    for col in 0..p {
        let piv = (col..p).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())).unwrap();
        m.swap(col, piv);
        let d = m[col][col];
        for v in m[col].iter_mut() {
            *v /= d;
        }
        for r in 0..p {
            if r != col {
                let f = m[r][col];
                for c in 0..=2 * p {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    let beta: Vec<f64> = (0..p).map(|i| m[i][2 * p]).collect();
    let fitted: Vec<f64> = x.iter().map(|r| r.iter().zip(&beta).map(|(a, b)| a * b).sum()).collect();
    let rss: f64 = y.iter().zip(&fitted).map(|(a, b)| (a - b).powi(2)).sum();
    let s2 = rss / (n - p) as f64;
    let std_errors = (0..p).map(|i| (s2 * m[i][p + i]).sqrt()).collect();
    let ssm: f64 = fitted.iter().map(|v| v * v).sum();
    let tss: f64 = y.iter().map(|v| v * v).sum();
    let r2 = 1.0 - rss / tss;
    NormalEquations {
        beta,
        std_errors,
        f_stat: (ssm / p as f64) / s2,
        r2_adjusted: 1.0 - (1.0 - r2) * n as f64 / (n - p) as f64,
    }
}
