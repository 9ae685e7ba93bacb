//! Central finite-difference verification of analytic gradients.

use crate::autodiff::params::{Gradients, ParamSet};
use crate::{Error, Result};

/// Compare analytic gradients against central finite differences.
///
/// `f` must run a deterministic taped forward pass and return the scalar
/// loss together with its analytic gradients. Every parameter coordinate is
/// perturbed by ±`step`; the result is the maximum over coordinates of
/// `|analytic − numeric| / max(1, |analytic|, |numeric|)`.
pub fn finite_difference_check(
    params: &mut ParamSet,
    step: f64,
    f: impl Fn(&ParamSet) -> Result<(f64, Gradients)>,
) -> Result<f64> {
    let (base, analytic) = f(params)?;
    if !base.is_finite() {
        return Err(Error::Numeric(format!("loss is not finite: {base}")));
    }

    let ids: Vec<_> = params.iter().map(|(id, _)| id).collect();
    let mut max_rel = 0.0f64;
    for id in ids {
        let n = params.get(id).value.len();
        for j in 0..n {
            let orig = params.get(id).value.data()[j];

            params.get_mut(id).value.data_mut()[j] = orig + step;
            let (plus, _) = f(params)?;
            params.get_mut(id).value.data_mut()[j] = orig - step;
            let (minus, _) = f(params)?;
            params.get_mut(id).value.data_mut()[j] = orig;

            if !plus.is_finite() || !minus.is_finite() {
                return Err(Error::Numeric("perturbed loss is not finite".into()));
            }
            let numeric = (plus - minus) / (2.0 * step);
            let exact = analytic.get(id)[j];
            let rel = (exact - numeric).abs() / 1.0f64.max(exact.abs()).max(numeric.abs());
            if rel > max_rel {
                max_rel = rel;
            }
        }
    }
    Ok(max_rel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::{LearnGroup, Tape};
    use crate::Tensor;

    #[test]
    fn quadratic_gradient_is_exact() {
        let mut ps = ParamSet::new();
        let p = ps.add("p", Tensor::vector(vec![1.0, 2.0]), LearnGroup::PolicyOnly);
        let err = finite_difference_check(&mut ps, 1e-5, |ps| {
            let mut tape = Tape::new(ps);
            let v = tape.param(p);
            let sq = tape.mul(v, v)?;
            let loss = tape.sum(sq);
            let value = tape.value(loss).item();
            let grads = tape.backward(loss)?;
            Ok((value, grads))
        })
        .unwrap();
        assert!(err < 1e-9, "relative error {err}");

        // And the analytic values themselves are [2, 4].
        let mut tape = Tape::new(&ps);
        let v = tape.param(p);
        let sq = tape.mul(v, v).unwrap();
        let loss = tape.sum(sq);
        let grads = tape.backward(loss).unwrap();
        assert!((grads.get(p)[0] - 2.0).abs() < 1e-12);
        assert!((grads.get(p)[1] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn constant_function_has_vanishing_gradients() {
        let mut ps = ParamSet::new();
        ps.add("p", Tensor::vector(vec![0.4, -0.7, 1.1]), LearnGroup::PolicyOnly);
        let err = finite_difference_check(&mut ps, 1e-5, |ps| {
            let mut tape = Tape::new(ps);
            let c = tape.scalar(3.25);
            let grads = tape.backward(c)?;
            Ok((3.25, grads))
        })
        .unwrap();
        assert!(err < 1e-12);
    }
}
