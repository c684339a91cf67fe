use serde::{Deserialize, Serialize};

use super::config::{BnConfig, Cumulative};
use super::cpt::Cpt;
use super::dag::{build_structure, Dag, StateSpaces, Var};
use crate::bouts::SubjectBouts;
use crate::discretize::{DiscreteBout, DiscretizationSpec};
use crate::error::{Error, Result};
use crate::stage::{HealthStatus, N_HS};

/// `lag + 1` consecutive discretized bouts of one subject, oldest first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub hs: HealthStatus,
    pub bouts: Vec<DiscreteBout>,
}

impl Window {
    pub fn lag(&self) -> usize {
        self.bouts.len() - 1
    }

    /// Bout at offset `k` back from the current one.
    pub fn at(&self, k: usize) -> &DiscreteBout {
        &self.bouts[self.lag() - k]
    }

    pub fn current(&self) -> &DiscreteBout {
        self.bouts.last().expect("window is never empty")
    }
}

/// Sliding windows of one subject. The first `lag` bouts never become
/// prediction targets.
pub fn make_windows(hs: HealthStatus, bouts: &[DiscreteBout], lag: usize) -> Vec<Window> {
    if bouts.len() <= lag {
        return Vec::new();
    }
    bouts
        .windows(lag + 1)
        .map(|w| Window {
            hs,
            bouts: w.to_vec(),
        })
        .collect()
}

pub fn subject_windows(subject: &SubjectBouts, spec: &DiscretizationSpec, lag: usize) -> Vec<Window> {
    make_windows(subject.health_status, &spec.apply_all(&subject.bouts), lag)
}

/// A network of the structure family with fitted tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedBn {
    pub config: BnConfig,
    pub dag: Dag,
    /// One table per node, in node order; the health-status table is the prior.
    pub cpts: Vec<Cpt>,
    pub discretization: DiscretizationSpec,
    pub hs_prior: [f64; N_HS],
}

pub const UNIFORM_HS_PRIOR: [f64; N_HS] = [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0];

impl FittedBn {
    /// Counts every node's family over the windows and smooths each row with
    /// `config.smoothing_alpha`. The health-status prior stays uniform.
    pub fn fit(config: BnConfig, discretization: DiscretizationSpec, windows: &[Window]) -> Result<Self> {
        config.validate()?;
        if windows.is_empty() {
            return Err(Error::Fit("no training windows".into()));
        }
        let dag = build_structure(&config, StateSpaces::from_spec(&discretization));
        let mut counts: Vec<Vec<f64>> = dag
            .nodes()
            .iter()
            .enumerate()
            .map(|(i, n)| vec![0.0; dag.parent_configs(i) * n.card])
            .collect();
        let mut a = vec![0; dag.len()];
        for w in windows {
            if w.lag() != config.lag {
                return Err(Error::Fit(format!("window of lag {} for a lag-{} network", w.lag(), config.lag)));
            }
            fill_assignment(&dag, &config, w, &mut a)?;
            for (i, n) in dag.nodes().iter().enumerate() {
                let row = row_of(&dag, i, &a);
                counts[i][row * n.card + a[i]] += 1.0;
            }
        }
        let cpts = dag
            .nodes()
            .iter()
            .zip(&counts)
            .map(|(n, c)| {
                if n.var == Var::Hs {
                    Cpt {
                        child_card: N_HS,
                        parent_cards: vec![],
                        table: UNIFORM_HS_PRIOR.to_vec(),
                    }
                } else {
                    let pc = n.parents.iter().map(|&p| dag.nodes()[p].card).collect();
                    Cpt::from_counts(n.card, pc, c, config.smoothing_alpha)
                }
            })
            .collect();
        Ok(FittedBn {
            config,
            dag,
            cpts,
            discretization,
            hs_prior: UNIFORM_HS_PRIOR,
        })
    }

    /// Assembles a network from explicit tables (ground truths, loaded models).
    pub fn from_parts(config: BnConfig, discretization: DiscretizationSpec, cpts: Vec<Cpt>) -> Result<Self> {
        config.validate()?;
        let dag = build_structure(&config, StateSpaces::from_spec(&discretization));
        if cpts.len() != dag.len() {
            return Err(Error::Contract(format!("{} tables for {} nodes", cpts.len(), dag.len())));
        }
        for (n, c) in dag.nodes().iter().zip(&cpts) {
            let pc: Vec<usize> = n.parents.iter().map(|&p| dag.nodes()[p].card).collect();
            if c.child_card != n.card || c.parent_cards != pc {
                return Err(Error::Contract(format!("table shape mismatch for node {}", n.name)));
            }
            c.validate()?;
        }
        let hs = dag.index_of(Var::Hs).expect("HS node");
        let mut prior = [0.0; N_HS];
        prior.copy_from_slice(&cpts[hs].table);
        Ok(FittedBn {
            config,
            dag,
            cpts,
            discretization,
            hs_prior: prior,
        })
    }

    pub fn set_hs_prior(&mut self, prior: [f64; N_HS]) -> Result<()> {
        let sum: f64 = prior.iter().sum();
        if prior.iter().any(|&p| p < 0.0) || (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Contract(format!("hs prior {prior:?} is not a distribution")));
        }
        let hs = self.node_index(Var::Hs);
        self.cpts[hs].table = prior.to_vec();
        self.hs_prior = prior;
        Ok(())
    }

    pub fn node_index(&self, var: Var) -> usize {
        self.dag.index_of(var).unwrap_or_else(|| panic!("{var:?} not in network"))
    }

    pub fn cpt(&self, var: Var) -> Option<&Cpt> {
        self.dag.index_of(var).map(|i| &self.cpts[i])
    }

    pub fn cpt_mut(&mut self, var: Var) -> Option<&mut Cpt> {
        self.dag.index_of(var).map(move |i| &mut self.cpts[i])
    }

    /// Node states of a window, in node order.
    pub fn assignment(&self, w: &Window) -> Result<Vec<usize>> {
        let mut a = vec![0; self.dag.len()];
        fill_assignment(&self.dag, &self.config, w, &mut a)?;
        Ok(a)
    }

    /// `P(node = a[node] | parents = a[parents])`.
    pub fn factor(&self, node: usize, a: &[usize]) -> f64 {
        let cpt = &self.cpts[node];
        cpt.table[row_of(&self.dag, node, a) * cpt.child_card + a[node]]
    }

    pub fn windows_for(&self, subject: &SubjectBouts) -> Vec<Window> {
        subject_windows(subject, &self.discretization, self.config.lag)
    }
}

pub(crate) fn row_of(dag: &Dag, node: usize, a: &[usize]) -> usize {
    let nodes = dag.nodes();
    nodes[node].parents.iter().fold(0, |acc, &p| acc * nodes[p].card + a[p])
}

fn fill_assignment(dag: &Dag, config: &BnConfig, w: &Window, a: &mut [usize]) -> Result<()> {
    if w.lag() < config.lag {
        return Err(Error::Contract(format!("window of lag {} for lag-{} network", w.lag(), config.lag)));
    }
    for (i, n) in dag.nodes().iter().enumerate() {
        let v = match n.var {
            Var::Hs => w.hs.index(),
            Var::Tsso => w.current().t_level as usize,
            Var::Cumulative => match config.cumulative {
                Cumulative::Cst => w.current().cst_level as usize,
                Cumulative::Crst => w.current().crst_level as usize,
                Cumulative::None => unreachable!("no cumulative node without a cumulative variant"),
            },
            Var::Stage(k) => w.at(k).stage.index(),
            Var::Duration(k) => w.at(k).d_level as usize,
        };
        if v >= n.card {
            return Err(Error::Contract(format!("level {v} of {} outside 0..{}", n.name, n.card)));
        }
        a[i] = v;
    }
    Ok(())
}
