//! State-action tables. Every table is flattened row-major with index
//! `s * num_actions + a`.

use serde::{Deserialize, Serialize};

use crate::error::{AlgaeError, Result};

macro_rules! state_action_table {
    ($(#[$meta:meta])* $name:ident, $field:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        pub struct $name {
            num_states: usize,
            num_actions: usize,
            $field: Vec<f64>,
        }

        impl $name {
            pub fn new(num_states: usize, num_actions: usize, $field: Vec<f64>) -> Result<Self> {
                if $field.len() != num_states * num_actions {
                    return Err(AlgaeError::InvalidInput(format!(
                        "{} has {} entries, expected {}x{}",
                        stringify!($name),
                        $field.len(),
                        num_states,
                        num_actions
                    )));
                }
                if let Some(i) = $field.iter().position(|v| !v.is_finite()) {
                    return Err(AlgaeError::InvalidInput(format!(
                        "{} entry {} is not finite",
                        stringify!($name),
                        i
                    )));
                }
                Ok(Self { num_states, num_actions, $field })
            }

            pub fn zeros(num_states: usize, num_actions: usize) -> Self {
                Self { num_states, num_actions, $field: vec![0.0; num_states * num_actions] }
            }

            pub fn constant(num_states: usize, num_actions: usize, value: f64) -> Self {
                Self { num_states, num_actions, $field: vec![value; num_states * num_actions] }
            }

            pub fn num_states(&self) -> usize {
                self.num_states
            }

            pub fn num_actions(&self) -> usize {
                self.num_actions
            }

            pub fn len(&self) -> usize {
                self.$field.len()
            }

            pub fn is_empty(&self) -> bool {
                self.$field.is_empty()
            }

            pub fn get(&self, s: usize, a: usize) -> f64 {
                self.$field[s * self.num_actions + a]
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.$field
            }

            pub fn into_vec(self) -> Vec<f64> {
                self.$field
            }

            pub fn sum(&self) -> f64 {
                self.$field.iter().sum()
            }

            pub(crate) fn from_parts(num_states: usize, num_actions: usize, $field: Vec<f64>) -> Self {
                debug_assert_eq!($field.len(), num_states * num_actions);
                Self { num_states, num_actions, $field }
            }
        }
    };
}

state_action_table!(
    /// Nonnegative weights over state-action pairs: visitation `d^π`, data
    /// distribution `d^D`, or an unnormalized dual `ρ`.
    Occupancy,
    weights
);

state_action_table!(
    /// A real function over state-action pairs (`ν`, `Q`, `x`, `ζ`, gradients).
    ValueTable,
    values
);

impl Occupancy {
    /// Per-state marginal `Σ_a d(s, a)`.
    pub fn state_marginal(&self) -> Vec<f64> {
        self.weights
            .chunks(self.num_actions)
            .map(|row| row.iter().sum())
            .collect()
    }

    /// Checks entrywise nonnegativity and (optionally) normalization.
    pub fn validate_distribution(&self, tol: f64) -> Result<()> {
        if let Some(i) = self.weights.iter().position(|&w| w < 0.0) {
            return Err(AlgaeError::InvalidInput(format!(
                "occupancy entry {i} is negative ({})",
                self.weights[i]
            )));
        }
        let total = self.sum();
        if (total - 1.0).abs() > tol {
            return Err(AlgaeError::InvalidInput(format!(
                "occupancy sums to {total}, expected 1"
            )));
        }
        Ok(())
    }
}

impl ValueTable {
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}
