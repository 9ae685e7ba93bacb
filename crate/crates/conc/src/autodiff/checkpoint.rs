//! Parameter checkpoint manifest (JSON).
//!
//! Values are serialized as plain JSON numbers; serde_json emits the
//! shortest representation that round-trips each finite double exactly, so a
//! save→load cycle reproduces forward outputs bit for bit.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::autodiff::adam::Adam;
use crate::autodiff::params::{LearnGroup, ParamSet};
use crate::{Error, Result, Tensor};

#[derive(Serialize, Deserialize)]
struct ParamEntry {
    name: String,
    shape: Vec<usize>,
    learn_group: LearnGroup,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct AdamState {
    t: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

/// On-disk manifest: parameters plus whatever metadata the caller attaches
/// (model name, network config, iteration counter).
#[derive(Serialize, Deserialize)]
pub struct Checkpoint {
    pub meta: serde_json::Value,
    pub iteration: u64,
    params: Vec<ParamEntry>,
    adam: Option<AdamState>,
}

impl Checkpoint {
    pub fn capture(params: &ParamSet, meta: serde_json::Value, iteration: u64) -> Self {
        Checkpoint {
            meta,
            iteration,
            params: params
                .iter()
                .map(|(_, p)| ParamEntry {
                    name: p.name.clone(),
                    shape: p.value.shape().to_vec(),
                    learn_group: p.learn_group(),
                    values: p.value.data().to_vec(),
                })
                .collect(),
            adam: None,
        }
    }

    pub fn with_optimizer(mut self, opt: &Adam) -> Self {
        let (m, v, t) = opt.state_tensors();
        self.adam = Some(AdamState {
            t,
            m: m.iter().map(|t| t.data().to_vec()).collect(),
            v: v.iter().map(|t| t.data().to_vec()).collect(),
        });
        self
    }

    /// Write back into an already-constructed parameter set. Every manifest
    /// entry must match a parameter by name and shape.
    pub fn restore(&self, params: &mut ParamSet) -> Result<()> {
        if self.params.len() != params.len() {
            return Err(Error::Checkpoint(format!(
                "checkpoint has {} parameters, model has {}",
                self.params.len(),
                params.len()
            )));
        }
        for entry in &self.params {
            let value = Tensor::new(entry.shape.clone(), entry.values.clone())
                .map_err(|e| Error::Checkpoint(format!("{}: {e}", entry.name)))?;
            params.set_value(&entry.name, value)?;
            let id = params.id_of(&entry.name).expect("checked by set_value");
            if params.get(id).learn_group() != entry.learn_group {
                return Err(Error::Checkpoint(format!(
                    "parameter {} learn_group mismatch",
                    entry.name
                )));
            }
        }
        Ok(())
    }

    /// Restore optimizer moments if the manifest carries them.
    pub fn restore_optimizer(&self, params: &ParamSet, opt: &mut Adam) -> Result<()> {
        let Some(state) = &self.adam else { return Ok(()) };
        if state.m.len() != params.len() {
            return Err(Error::Checkpoint("optimizer state size mismatch".into()));
        }
        let mut m = Vec::with_capacity(state.m.len());
        let mut v = Vec::with_capacity(state.v.len());
        for ((_, p), (ms, vs)) in params.iter().zip(state.m.iter().zip(&state.v)) {
            m.push(Tensor::new(p.value.shape().to_vec(), ms.clone()).map_err(|_| {
                Error::Checkpoint(format!("optimizer moment shape mismatch for {}", p.name))
            })?);
            v.push(Tensor::new(p.value.shape().to_vec(), vs.clone()).map_err(|_| {
                Error::Checkpoint(format!("optimizer moment shape mismatch for {}", p.name))
            })?);
        }
        opt.restore_state(m, v, state.t);
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer(std::io::BufWriter::new(file), self)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
    }
}
