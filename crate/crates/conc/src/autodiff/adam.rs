//! Adam with per-group learning rates and global-norm gradient clipping.

use serde::{Deserialize, Serialize};

use crate::autodiff::params::{LearnGroup, ParamSet};
use crate::Tensor;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AdamHyper {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        AdamHyper { beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// Optimizer state: first/second moment estimates per parameter.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Adam {
    pub hyper: AdamHyper,
    pub lr_policy: f64,
    pub lr_regression: f64,
    m: Vec<Tensor>,
    v: Vec<Tensor>,
    t: u64,
}

impl Adam {
    pub fn new(params: &ParamSet, lr_policy: f64, lr_regression: f64, hyper: AdamHyper) -> Self {
        Adam {
            hyper,
            lr_policy,
            lr_regression,
            m: params.iter().map(|(_, p)| Tensor::zeros(p.value.shape().to_vec())).collect(),
            v: params.iter().map(|(_, p)| Tensor::zeros(p.value.shape().to_vec())).collect(),
            t: 0,
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.t
    }

    /// One update from the gradients currently stored on the parameters.
    /// Each parameter steps at its learn-group's rate; gradients are zeroed
    /// afterwards. A no-op on an empty set.
    pub fn step(&mut self, params: &mut ParamSet) {
        if params.is_empty() {
            return;
        }
        self.t += 1;
        let bc1 = 1.0 - self.hyper.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.hyper.beta2.powi(self.t as i32);
        for (id, p) in params.iter_mut() {
            let lr = match p.learn_group() {
                LearnGroup::PolicyOnly => self.lr_policy,
                LearnGroup::RegressionTrained => self.lr_regression,
            };
            let m = self.m[id.0].data_mut();
            let v = self.v[id.0].data_mut();
            for ((val, g), (m, v)) in p
                .value
                .data_mut()
                .iter_mut()
                .zip(p.grad.data_mut().iter_mut())
                .zip(m.iter_mut().zip(v.iter_mut()))
            {
                *m = self.hyper.beta1 * *m + (1.0 - self.hyper.beta1) * *g;
                *v = self.hyper.beta2 * *v + (1.0 - self.hyper.beta2) * *g * *g;
                let mhat = *m / bc1;
                let vhat = *v / bc2;
                *val -= lr * mhat / (vhat.sqrt() + self.hyper.eps);
                *g = 0.0;
            }
        }
    }
}

/// Scale all gradients so their joint L2 norm is at most `max_norm`.
/// Returns the pre-clip norm.
pub fn clip_global_norm(params: &mut ParamSet, max_norm: f64) -> f64 {
    let mut sq = 0.0;
    for (_, p) in params.iter() {
        for g in p.grad.data() {
            sq += g * g;
        }
    }
    let norm = sq.sqrt();
    if norm > max_norm && norm > 0.0 {
        let scale = max_norm / norm;
        for (_, p) in params.iter_mut() {
            for g in p.grad.data_mut() {
                *g *= scale;
            }
        }
    }
    norm
}

impl Adam {
    pub(crate) fn state_tensors(&self) -> (&[Tensor], &[Tensor], u64) {
        (&self.m, &self.v, self.t)
    }

    pub(crate) fn restore_state(&mut self, m: Vec<Tensor>, v: Vec<Tensor>, t: u64) {
        self.m = m;
        self.v = v;
        self.t = t;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::LearnGroup;

    fn one_param_set(value: Vec<f64>, group: LearnGroup) -> ParamSet {
        let mut ps = ParamSet::new();
        ps.add("p", Tensor::vector(value), group);
        ps
    }

    #[test]
    fn zero_gradients_leave_values_unchanged() {
        let mut ps = one_param_set(vec![1.0, -2.0, 3.0], LearnGroup::PolicyOnly);
        let mut opt = Adam::new(&ps, 1e-3, 1e-2, AdamHyper::default());
        opt.step(&mut ps);
        let id = ps.id_of("p").unwrap();
        assert_eq!(ps.get(id).value.data(), &[1.0, -2.0, 3.0]);
    }

    #[test]
    fn single_step_matches_hand_recurrence() {
        let mut ps = one_param_set(vec![0.5], LearnGroup::PolicyOnly);
        let id = ps.id_of("p").unwrap();
        let g = 0.3;
        ps.get_mut(id).grad.data_mut()[0] = g;
        let lr = 1e-3;
        let hyper = AdamHyper::default();
        let mut opt = Adam::new(&ps, lr, 1e-2, hyper);
        opt.step(&mut ps);

        // Hand evaluation of the textbook recurrence for t = 1.
        let m = (1.0 - hyper.beta1) * g;
        let v = (1.0 - hyper.beta2) * g * g;
        let mhat = m / (1.0 - hyper.beta1);
        let vhat = v / (1.0 - hyper.beta2);
        let expected = 0.5 - lr * mhat / (vhat.sqrt() + hyper.eps);
        let got = ps.get(id).value.data()[0];
        assert!((got - expected).abs() < 1e-15, "{got} vs {expected}");
        // First step moves by ≈ lr in the gradient's direction.
        assert!((0.5 - got - lr).abs() < 1e-6);
        // Gradient cleared after the step.
        assert_eq!(ps.get(id).grad.data()[0], 0.0);
    }

    #[test]
    fn group_rates_scale_identical_gradients_ten_to_one() {
        let mut ps = ParamSet::new();
        let slow = ps.add("slow", Tensor::vector(vec![1.0]), LearnGroup::PolicyOnly);
        let fast = ps.add("fast", Tensor::vector(vec![1.0]), LearnGroup::RegressionTrained);
        ps.get_mut(slow).grad.data_mut()[0] = 0.7;
        ps.get_mut(fast).grad.data_mut()[0] = 0.7;
        let mut opt = Adam::new(&ps, 5e-4, 5e-3, AdamHyper::default());
        opt.step(&mut ps);
        let d_slow = (1.0 - ps.get(slow).value.data()[0]).abs();
        let d_fast = (1.0 - ps.get(fast).value.data()[0]).abs();
        let ratio = d_fast / d_slow;
        assert!((ratio - 10.0).abs() < 1e-6, "ratio {ratio}");
    }

    #[test]
    fn clipping_rescales_to_the_requested_norm() {
        let mut ps = one_param_set(vec![0.0, 0.0], LearnGroup::PolicyOnly);
        let id = ps.id_of("p").unwrap();
        ps.get_mut(id).grad.data_mut().copy_from_slice(&[3.0, 4.0]);
        let pre = clip_global_norm(&mut ps, 0.5);
        assert!((pre - 5.0).abs() < 1e-12);
        let g = ps.get(id).grad.data();
        let post = (g[0] * g[0] + g[1] * g[1]).sqrt();
        assert!((post - 0.5).abs() < 1e-12);
    }
}
