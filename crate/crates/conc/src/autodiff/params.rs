//! Learnable parameters and their gradients.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::{Error, Result, Tensor};

/// Which learning-rate group a parameter belongs to.
///
/// Parameters on the motivational-regression backward path (score matrices,
/// subnetwork MLPs, shared encoders) train faster than parameters that only
/// ever see the policy gradient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnGroup {
    PolicyOnly,
    RegressionTrained,
}

/// A named learnable tensor with a gradient slot.
#[derive(Clone, Debug)]
pub struct Parameter {
    pub name: String,
    pub value: Tensor,
    pub grad: Tensor,
    group: LearnGroup,
}

impl Parameter {
    pub fn learn_group(&self) -> LearnGroup {
        self.group
    }
}

/// Handle into a [`ParamSet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ParamId(pub(crate) usize);

/// An ordered collection of parameters; the unit of checkpointing and
/// optimization. Order is construction order and is stable, which keeps
/// training bit-reproducible.
#[derive(Clone, Debug, Default)]
pub struct ParamSet {
    params: Vec<Parameter>,
    by_name: HashMap<String, usize>,
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: &str, value: Tensor, group: LearnGroup) -> ParamId {
        assert!(
            !self.by_name.contains_key(name),
            "duplicate parameter name {name}"
        );
        let id = self.params.len();
        self.by_name.insert(name.to_string(), id);
        let grad = Tensor::zeros(value.shape().to_vec());
        self.params.push(Parameter { name: name.to_string(), value, grad, group });
        ParamId(id)
    }

    /// Gaussian init scaled by 1/sqrt(fan_in); `gain` shrinks output heads.
    pub fn add_init<R: Rng>(
        &mut self,
        name: &str,
        shape: Vec<usize>,
        group: LearnGroup,
        gain: f64,
        rng: &mut R,
    ) -> ParamId {
        let fan_in = if shape.len() == 2 { shape[0] } else { 1 }.max(1);
        let std = gain / (fan_in as f64).sqrt();
        let n: usize = shape.iter().product();
        let dist = Normal::new(0.0, std).expect("valid normal");
        let data: Vec<f64> = (0..n).map(|_| dist.sample(rng)).collect();
        self.add(name, Tensor::new(shape, data).expect("consistent shape"), group)
    }

    /// Zero-initialized parameter (biases).
    pub fn add_zeros(&mut self, name: &str, shape: Vec<usize>, group: LearnGroup) -> ParamId {
        self.add(name, Tensor::zeros(shape), group)
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn get(&self, id: ParamId) -> &Parameter {
        &self.params[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Parameter {
        &mut self.params[id.0]
    }

    pub fn id_of(&self, name: &str) -> Option<ParamId> {
        self.by_name.get(name).copied().map(ParamId)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &Parameter)> {
        self.params.iter().enumerate().map(|(i, p)| (ParamId(i), p))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (ParamId, &mut Parameter)> {
        self.params.iter_mut().enumerate().map(|(i, p)| (ParamId(i), p))
    }

    /// Total number of scalar coefficients.
    pub fn num_scalars(&self) -> usize {
        self.params.iter().map(|p| p.value.len()).sum()
    }

    pub fn zero_grads(&mut self) {
        for p in &mut self.params {
            for g in p.grad.data_mut() {
                *g = 0.0;
            }
        }
    }

    /// Add `grads` into every parameter's gradient slot.
    pub fn accumulate(&mut self, grads: &Gradients) {
        assert_eq!(grads.per_param.len(), self.params.len());
        for (p, g) in self.params.iter_mut().zip(grads.per_param.iter()) {
            for (dst, src) in p.grad.data_mut().iter_mut().zip(g.iter()) {
                *dst += src;
            }
        }
    }
}

/// Gradient buffer aligned with a [`ParamSet`]; reusable across samples so
/// chunked accumulation does not reallocate.
#[derive(Clone, Debug)]
pub struct Gradients {
    pub(crate) per_param: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(params: &ParamSet) -> Self {
        Gradients {
            per_param: params.params.iter().map(|p| vec![0.0; p.value.len()]).collect(),
        }
    }

    pub fn get(&self, id: ParamId) -> &[f64] {
        &self.per_param[id.0]
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        assert_eq!(self.per_param.len(), other.per_param.len());
        for (dst, src) in self.per_param.iter_mut().zip(other.per_param.iter()) {
            for (d, s) in dst.iter_mut().zip(src.iter()) {
                *d += s;
            }
        }
    }

    pub fn clear(&mut self) {
        for g in &mut self.per_param {
            for v in g.iter_mut() {
                *v = 0.0;
            }
        }
    }
}

/// Weight/bias handles for one MLP, built into a [`ParamSet`].
#[derive(Clone, Debug)]
pub struct MlpParams {
    pub layers: Vec<(ParamId, ParamId)>,
}

impl MlpParams {
    /// `dims` is the full width ladder, e.g. `[in, hidden, out]`.
    pub fn build<R: Rng>(
        params: &mut ParamSet,
        prefix: &str,
        dims: &[usize],
        group: LearnGroup,
        out_gain: f64,
        rng: &mut R,
    ) -> Self {
        assert!(dims.len() >= 2, "mlp needs at least one layer");
        let mut layers = Vec::new();
        for l in 0..dims.len() - 1 {
            let is_last = l == dims.len() - 2;
            let gain = if is_last { out_gain } else { 1.0 };
            let w = params.add_init(
                &format!("{prefix}.w{l}"),
                vec![dims[l], dims[l + 1]],
                group,
                gain,
                rng,
            );
            let b = params.add_zeros(&format!("{prefix}.b{l}"), vec![dims[l + 1]], group);
            layers.push((w, b));
        }
        MlpParams { layers }
    }

    /// Collect `(weight, bias)` tensors for the plain (tape-free) forward.
    pub fn tensors(&self, params: &ParamSet) -> Vec<(Tensor, Tensor)> {
        self.layers
            .iter()
            .map(|(w, b)| (params.get(*w).value.clone(), params.get(*b).value.clone()))
            .collect()
    }
}

impl ParamSet {
    /// Checked tensor replacement used by checkpoint loading.
    pub fn set_value(&mut self, name: &str, value: Tensor) -> Result<()> {
        let id = self
            .id_of(name)
            .ok_or_else(|| Error::Checkpoint(format!("unknown parameter {name}")))?;
        let p = self.get_mut(id);
        if p.value.shape() != value.shape() {
            return Err(Error::Checkpoint(format!(
                "parameter {name} has shape {:?}, checkpoint has {:?}",
                p.value.shape(),
                value.shape()
            )));
        }
        p.value = value;
        Ok(())
    }
}
