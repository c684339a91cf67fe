//! Window structure of the dynamic network.
//!
//! A window covers the current bout `t` and `lag` previous bouts. Every stage
//! node depends on all earlier stages in the window and on health status; the
//! current stage additionally sees lagged durations, time since sleep onset
//! and the cumulative covariate when those are included. Health status and
//! time since sleep onset are the only roots.

use serde::{Deserialize, Serialize};

use super::config::{BnConfig, Cumulative};
use crate::discretize::{DiscretizationSpec, N_TSSO_LEVELS};
use crate::error::{Error, Result};
use crate::stage::{N_HS, N_STAGES};

/// Variable identity inside a window. Offsets count back from `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Var {
    Hs,
    Tsso,
    Cumulative,
    Stage(usize),
    Duration(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub var: Var,
    pub name: String,
    pub card: usize,
    pub parents: Vec<usize>,
}

/// Nodes stored in topological order: every parent index is smaller than
/// the index of its child.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dag {
    nodes: Vec<Node>,
}

impl Dag {
    pub fn new(nodes: Vec<Node>) -> Result<Self> {
        for (i, n) in nodes.iter().enumerate() {
            if n.card < 2 {
                return Err(Error::Contract(format!("node {} has {} states", n.name, n.card)));
            }
            if let Some(&p) = n.parents.iter().find(|&&p| p >= i) {
                return Err(Error::Contract(format!(
                    "edge {} -> {} breaks topological order",
                    nodes.get(p).map(|x| x.name.as_str()).unwrap_or("?"),
                    n.name
                )));
            }
        }
        Ok(Dag { nodes })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index_of(&self, var: Var) -> Option<usize> {
        self.nodes.iter().position(|n| n.var == var)
    }

    pub fn node(&self, var: Var) -> Option<&Node> {
        self.nodes.iter().find(|n| n.var == var)
    }

    pub fn is_root(&self, i: usize) -> bool {
        self.nodes[i].parents.is_empty()
    }

    pub fn parent_configs(&self, i: usize) -> usize {
        self.nodes[i].parents.iter().map(|&p| self.nodes[p].card).product()
    }

    /// Parents of the current stage, by variable.
    pub fn stage_parents(&self) -> Vec<Var> {
        let s = self.index_of(Var::Stage(0)).expect("stage node");
        self.nodes[s].parents.iter().map(|&p| self.nodes[p].var).collect()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.nodes
            .iter()
            .enumerate()
            .flat_map(|(i, n)| n.parents.iter().map(move |&p| (p, i)))
            .collect()
    }
}

/// Cardinalities of the data-dependent variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateSpaces {
    pub duration: usize,
    pub cst: usize,
    pub crst: usize,
}

impl Default for StateSpaces {
    fn default() -> Self {
        StateSpaces {
            duration: 4,
            cst: 4,
            crst: 4,
        }
    }
}

impl StateSpaces {
    pub fn from_spec(spec: &DiscretizationSpec) -> Self {
        StateSpaces {
            duration: spec.duration.n_levels(),
            cst: spec.cst.n_levels(),
            crst: spec.crst.n_levels(),
        }
    }
}

fn offset_name(base: &str, k: usize) -> String {
    if k == 0 {
        format!("{base}[t]")
    } else {
        format!("{base}[t-{k}]")
    }
}

pub fn build_structure(config: &BnConfig, spaces: StateSpaces) -> Dag {
    let lag = config.lag;
    let mut nodes: Vec<Node> = Vec::new();
    let push = |nodes: &mut Vec<Node>, var, name: String, card, parents| {
        nodes.push(Node {
            var,
            name,
            card,
            parents,
        });
        nodes.len() - 1
    };

    let hs = push(&mut nodes, Var::Hs, "HS".into(), N_HS, vec![]);
    let tsso = config
        .include_tsso
        .then(|| push(&mut nodes, Var::Tsso, "T[t]".into(), N_TSSO_LEVELS, vec![]));
    let cumulative = match config.cumulative {
        Cumulative::None => None,
        c => {
            let card = if c == Cumulative::Cst { spaces.cst } else { spaces.crst };
            let mut parents = vec![hs];
            parents.extend(tsso);
            Some(push(&mut nodes, Var::Cumulative, format!("{}[t]", c.as_str()), card, parents))
        }
    };

    // stage[k] / duration[k] hold the node index of offset k
    let mut stage = vec![usize::MAX; lag + 1];
    let mut duration = vec![usize::MAX; lag + 1];
    for k in (0..=lag).rev() {
        let mut parents: Vec<usize> = (k + 1..=lag).map(|j| stage[j]).collect();
        parents.push(hs);
        if k == 0 {
            if config.include_duration {
                parents.extend((1..=lag).map(|j| duration[j]));
            }
            parents.extend(tsso);
            parents.extend(cumulative);
        }
        stage[k] = push(&mut nodes, Var::Stage(k), offset_name("S", k), N_STAGES, parents);

        if config.include_duration {
            let mut parents = vec![stage[k], hs];
            if k == 0 {
                parents.extend(tsso);
            }
            duration[k] = push(&mut nodes, Var::Duration(k), offset_name("D", k), spaces.duration, parents);
        }
    }
    Dag::new(nodes).expect("structure family is acyclic by construction")
}
