//! Categorical distribution over discrete actions.

use rand::Rng;

use crate::{Error, Result, Tensor};

/// Softmax distribution over action indices, built from raw logits.
#[derive(Clone, Debug)]
pub struct Categorical {
    probs: Vec<f64>,
    log_probs: Vec<f64>,
}

impl Categorical {
    pub fn from_logits(logits: &Tensor) -> Result<Self> {
        if logits.is_empty() {
            return Err(Error::Numeric("categorical over zero actions".into()));
        }
        if !logits.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite logits: {:?}",
                logits.data()
            )));
        }
        let max = logits.data().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + logits.data().iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        let log_probs: Vec<f64> = logits.data().iter().map(|v| v - lse).collect();
        let probs: Vec<f64> = log_probs.iter().map(|v| v.exp()).collect();
        Ok(Categorical { probs, log_probs })
    }

    pub fn num_actions(&self) -> usize {
        self.probs.len()
    }

    /// Inverse-CDF sampling.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        self.probs.len() - 1
    }

    pub fn log_prob(&self, action: usize) -> f64 {
        self.log_probs[action]
    }

    pub fn prob(&self, action: usize) -> f64 {
        self.probs[action]
    }

    /// −Σ p·log p
    pub fn entropy(&self) -> f64 {
        -self
            .probs
            .iter()
            .zip(&self.log_probs)
            .map(|(p, lp)| if *p > 0.0 { p * lp } else { 0.0 })
            .sum::<f64>()
    }

    /// Index with the largest probability.
    pub fn argmax(&self) -> usize {
        self.probs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite probs"))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_logits_reach_maximum_entropy() {
        let d = Categorical::from_logits(&Tensor::vector(vec![0.3; 7])).unwrap();
        assert!((d.entropy() - (7.0f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn extreme_logits_are_near_deterministic() {
        let mut logits = vec![-50.0; 7];
        logits[0] = 50.0;
        let d = Categorical::from_logits(&Tensor::vector(logits)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            assert_eq!(d.sample(&mut rng), 0);
        }
        assert!(d.log_prob(0).abs() < 1e-12);
    }

    #[test]
    fn log_probs_exponentiate_to_a_distribution() {
        let d = Categorical::from_logits(&Tensor::vector(vec![
            1.5, -0.3, 0.0, 2.0, -4.0, 0.7, 0.1,
        ]))
        .unwrap();
        let total: f64 = (0..7).map(|a| d.log_prob(a).exp()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampling_frequencies_match_probabilities() {
        let logits = Tensor::vector(vec![0.4, -1.0, 0.0, 1.2, 0.3, -0.5, 0.9]);
        let d = Categorical::from_logits(&logits).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 1_000_000usize;
        let mut counts = [0usize; 7];
        for _ in 0..n {
            counts[d.sample(&mut rng)] += 1;
        }
        for a in 0..7 {
            let p = d.prob(a);
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            let freq = counts[a] as f64 / n as f64;
            assert!(
                (freq - p).abs() <= 3.0 * sigma,
                "action {a}: freq {freq} vs prob {p} (3σ = {})",
                3.0 * sigma
            );
        }
    }

    #[test]
    fn non_finite_logit_is_rejected() {
        let logits = Tensor::vector(vec![0.0, f64::NAN, 1.0]);
        assert!(Categorical::from_logits(&logits).is_err());
    }
}
