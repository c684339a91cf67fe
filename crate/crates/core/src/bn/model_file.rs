//! Versioned JSON model files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::BnConfig;
use super::cpt::Cpt;
use super::dag::{build_structure, StateSpaces};
use super::model::FittedBn;
use crate::discretize::DiscretizationSpec;
use crate::error::{Error, Result};
use crate::stage::N_HS;

pub const MODEL_SCHEMA: &str = "sleep-dbn/model";
pub const MODEL_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct NodeRecord {
    name: String,
    card: usize,
    parents: Vec<String>,
    table: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    schema: String,
    version: u32,
    config: BnConfig,
    discretization: DiscretizationSpec,
    hs_prior: [f64; N_HS],
    nodes: Vec<NodeRecord>,
}

pub fn model_to_json(bn: &FittedBn) -> Result<String> {
    let nodes = bn
        .dag
        .nodes()
        .iter()
        .zip(&bn.cpts)
        .map(|(n, c)| NodeRecord {
            name: n.name.clone(),
            card: n.card,
            parents: n.parents.iter().map(|&p| bn.dag.nodes()[p].name.clone()).collect(),
            table: c.table.clone(),
        })
        .collect();
    let file = ModelFile {
        schema: MODEL_SCHEMA.into(),
        version: MODEL_SCHEMA_VERSION,
        config: bn.config,
        discretization: bn.discretization.clone(),
        hs_prior: bn.hs_prior,
        nodes,
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn model_from_json(text: &str) -> Result<FittedBn> {
    let file: ModelFile = serde_json::from_str(text)?;
    if file.schema != MODEL_SCHEMA || file.version != MODEL_SCHEMA_VERSION {
        return Err(Error::Schema(format!(
            "model file is {}@{}, expected {MODEL_SCHEMA}@{MODEL_SCHEMA_VERSION}",
            file.schema, file.version
        )));
    }
    let dag = build_structure(&file.config, StateSpaces::from_spec(&file.discretization));
    if dag.len() != file.nodes.len() {
        return Err(Error::Schema(format!(
            "model lists {} nodes, config implies {}",
            file.nodes.len(),
            dag.len()
        )));
    }
    let mut cpts = Vec::with_capacity(dag.len());
    for (node, rec) in dag.nodes().iter().zip(file.nodes) {
        let parents: Vec<String> = node.parents.iter().map(|&p| dag.nodes()[p].name.clone()).collect();
        if node.name != rec.name || node.card != rec.card || parents != rec.parents {
            return Err(Error::Schema(format!("node {} does not match the configured structure", rec.name)));
        }
        let pc = node.parents.iter().map(|&p| dag.nodes()[p].card).collect();
        cpts.push(Cpt::new(node.card, pc, rec.table)?);
    }
    let mut bn = FittedBn::from_parts(file.config, file.discretization, cpts)?;
    bn.set_hs_prior(file.hs_prior)?;
    Ok(bn)
}

pub fn save_model(bn: &FittedBn, path: &Path) -> Result<()> {
    std::fs::write(path, model_to_json(bn)? + "\n")?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<FittedBn> {
    model_from_json(&std::fs::read_to_string(path)?)
}
