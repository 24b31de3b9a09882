use serde::{Deserialize, Serialize};

use crate::error::{AlgaeError, Result};

/// Tabular softmax policy, `π(a|s) ∝ exp(θ[s, a])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxPolicy {
    num_states: usize,
    num_actions: usize,
    logits: Vec<f64>,
}

impl SoftmaxPolicy {
    pub fn new(num_states: usize, num_actions: usize, logits: Vec<f64>) -> Result<Self> {
        if num_states == 0 || num_actions == 0 {
            return Err(AlgaeError::InvalidInput(
                "policy needs at least one state and one action".into(),
            ));
        }
        if logits.len() != num_states * num_actions {
            return Err(AlgaeError::InvalidInput(format!(
                "policy has {} logits, expected {}x{}",
                logits.len(),
                num_states,
                num_actions
            )));
        }
        if logits.iter().any(|v| !v.is_finite()) {
            return Err(AlgaeError::InvalidInput("policy logits must be finite".into()));
        }
        Ok(Self {
            num_states,
            num_actions,
            logits,
        })
    }

    pub fn uniform(num_states: usize, num_actions: usize) -> Self {
        Self {
            num_states,
            num_actions,
            logits: vec![0.0; num_states * num_actions],
        }
    }

    /// Builds logits `ln π(a|s)` from a strictly positive probability table.
    pub fn from_probabilities(num_states: usize, num_actions: usize, probs: &[f64]) -> Result<Self> {
        if probs.len() != num_states * num_actions {
            return Err(AlgaeError::InvalidInput("probability table has wrong size".into()));
        }
        for (s, row) in probs.chunks(num_actions).enumerate() {
            if row.iter().any(|&p| !(p > 0.0)) {
                return Err(AlgaeError::InvalidInput(format!(
                    "softmax policies need strictly positive probabilities (state {s})"
                )));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(AlgaeError::InvalidInput(format!(
                    "probabilities of state {s} sum to {total}"
                )));
            }
        }
        Self::new(num_states, num_actions, probs.iter().map(|p| p.ln()).collect())
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn logits(&self) -> &[f64] {
        &self.logits
    }

    pub fn logits_mut(&mut self) -> &mut [f64] {
        &mut self.logits
    }

    /// Action distribution at state `s`.
    pub fn action_probs(&self, s: usize) -> Vec<f64> {
        let row = &self.logits[s * self.num_actions..(s + 1) * self.num_actions];
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = row.iter().map(|&l| (l - max).exp()).collect();
        let z: f64 = exps.iter().sum();
        exps.into_iter().map(|e| e / z).collect()
    }

    /// The full table `π(a|s)`, flattened `s * A + a`.
    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.num_states).flat_map(|s| self.action_probs(s)).collect()
    }

    /// `θ ← θ + step * direction`.
    pub fn ascend(&mut self, direction: &[f64], step: f64) {
        assert_eq!(direction.len(), self.logits.len());
        for (l, d) in self.logits.iter_mut().zip(direction) {
            *l += step * d;
        }
    }

    /// Numerical error when an update left a non-finite logit.
    pub fn check_finite(&self) -> Result<()> {
        if self.logits.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(AlgaeError::Numerical("policy logits overflowed".into()))
        }
    }

    /// Returns the policy with logits `θ + step * direction`.
    pub fn stepped(&self, direction: &[f64], step: f64) -> Self {
        let mut out = self.clone();
        out.ascend(direction, step);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn uniform_policy_probabilities() {
        let pi = SoftmaxPolicy::uniform(3, 4);
        assert!(pi.probabilities().iter().all(|&p| (p - 0.25).abs() < 1e-15));
    }

    #[test]
    fn from_probabilities_round_trips() {
        let probs = [0.2, 0.8, 0.5, 0.5];
        let pi = SoftmaxPolicy::from_probabilities(2, 2, &probs).unwrap();
        for (p, q) in pi.probabilities().iter().zip(probs) {
            assert!((p - q).abs() < 1e-12);
        }
        assert!(SoftmaxPolicy::from_probabilities(1, 2, &[0.0, 1.0]).is_err());
    }

    #[test]
    fn extreme_logits_stay_finite() {
        let pi = SoftmaxPolicy::new(1, 3, vec![1000.0, -1000.0, 0.0]).unwrap();
        let p = pi.probabilities();
        assert!((p[0] - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|v| v.is_finite()));
    }

    proptest! {
        #[test]
        fn rows_are_distributions_and_shift_invariant(
            logits in prop::collection::vec(-20.0f64..20.0, 12),
            shift in -50.0f64..50.0,
            row in 0usize..3,
        ) {
            let pi = SoftmaxPolicy::new(3, 4, logits.clone()).unwrap();
            for s in 0..3 {
                let total: f64 = pi.action_probs(s).iter().sum();
                prop_assert!((total - 1.0).abs() < 1e-12);
            }
            let mut shifted = logits;
            for a in 0..4 {
                shifted[row * 4 + a] += shift;
            }
            let pi2 = SoftmaxPolicy::new(3, 4, shifted).unwrap();
            for (p, q) in pi.probabilities().iter().zip(pi2.probabilities()) {
                prop_assert!((p - q).abs() < 1e-12);
            }
        }
    }
}
