//! Forward (ancestral) sampling of windows.
//!
//! Fixing a node replaces its table by a point mass. Only roots may be fixed,
//! where this intervention coincides with conditioning.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::dag::Var;
use super::model::FittedBn;
use crate::error::{Error, Result};
use crate::seed::rng_from_seed;

/// Precomputed cumulative tables for fast repeated draws.
#[derive(Debug, Clone)]
pub struct Sampler<'a> {
    bn: &'a FittedBn,
    cumulative: Vec<Vec<f64>>,
}

impl<'a> Sampler<'a> {
    pub fn new(bn: &'a FittedBn) -> Self {
        let cumulative = bn
            .cpts
            .iter()
            .map(|cpt| {
                let mut out = Vec::with_capacity(cpt.table.len());
                for row in cpt.table.chunks(cpt.child_card) {
                    let start = out.len();
                    let mut acc = 0.0;
                    for &p in row {
                        acc += p;
                        out.push(acc);
                    }
                    // close the row at its last reachable state so rounding
                    // never selects a zero-probability tail
                    if let Some(last) = row.iter().rposition(|&p| p > 0.0) {
                        for c in &mut out[start + last..] {
                            *c = f64::INFINITY;
                        }
                    }
                }
                out
            })
            .collect();
        Sampler { bn, cumulative }
    }

    pub fn bn(&self) -> &FittedBn {
        self.bn
    }

    /// Draws node `i` given the states of its parents in `a`.
    #[inline]
    pub fn sample_node<R: Rng + ?Sized>(&self, rng: &mut R, i: usize, a: &[usize]) -> usize {
        let nodes = self.bn.dag.nodes();
        let node = &nodes[i];
        let row = node.parents.iter().fold(0, |acc, &p| acc * nodes[p].card + a[p]);
        let cum = &self.cumulative[i][row * node.card..(row + 1) * node.card];
        let u: f64 = rng.random();
        cum.iter().position(|&c| u < c).unwrap_or(node.card - 1)
    }

    /// Draws one window into `out` (node order). `fixed[i] = Some(v)` pins node `i`.
    #[inline]
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, fixed: &[Option<usize>], out: &mut [usize]) {
        for i in 0..out.len() {
            out[i] = match fixed[i] {
                Some(v) => v,
                None => self.sample_node(rng, i, out),
            };
        }
    }
}

/// Resolves `(variable, level)` pins into a per-node vector, rejecting
/// non-root targets and out-of-range levels.
pub fn resolve_fixed(bn: &FittedBn, fixed: &[(Var, usize)]) -> Result<Vec<Option<usize>>> {
    let mut out = vec![None; bn.dag.len()];
    for &(var, level) in fixed {
        let i = bn
            .dag
            .index_of(var)
            .ok_or_else(|| Error::Contract(format!("{var:?} is not a node of this network")))?;
        let node = &bn.dag.nodes()[i];
        if !bn.dag.is_root(i) {
            return Err(Error::Unsupported(format!(
                "intervention on non-root node {} is not supported",
                node.name
            )));
        }
        if level >= node.card {
            return Err(Error::Contract(format!("level {level} of {} outside 0..{}", node.name, node.card)));
        }
        out[i] = Some(level);
    }
    Ok(out)
}

/// Draws `n` windows in topological order, deterministically from `seed`.
pub fn ancestral_sample(bn: &FittedBn, n: usize, seed: u64, fixed: &[(Var, usize)]) -> Result<Vec<Vec<usize>>> {
    let pins = resolve_fixed(bn, fixed)?;
    let sampler = Sampler::new(bn);
    let mut rng: ChaCha8Rng = rng_from_seed(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut a = vec![0; bn.dag.len()];
        sampler.sample_into(&mut rng, &pins, &mut a);
        out.push(a);
    }
    Ok(out)
}
