//! Tabular actor-critic: exact `Q_π`, then one semi-gradient step on
//! `Σ_s d^D(s) Σ_a π(a|s) Q_π(s,a)` with `Q_π` frozen.

use crate::algae::{check_learning_rate, evaluation_distribution, StepMetrics, TrainOutcome};
use crate::dataset::DataSource;
use crate::error::Result;
use crate::linalg::{dot, inf_norm};
use crate::mdp::{softmax_score_gradient, PolicyKernel, TabularMdp};
use crate::policy::SoftmaxPolicy;
use crate::tables::Occupancy;

/// Default step size; the tabular protocol leaves it unspecified.
pub const DEFAULT_AC_LEARNING_RATE: f64 = 0.1;

/// Semi-gradient direction and the frozen-`Q` surrogate value.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticStep {
    pub gradient: Vec<f64>,
    pub surrogate: f64,
}

pub fn actor_critic_direction(mdp: &TabularMdp, pi: &SoftmaxPolicy, d_data: &Occupancy) -> Result<CriticStep> {
    mdp.check_occupancy(d_data, "d^D")?;
    let kernel = PolicyKernel::new(mdp, pi)?;
    let q = kernel.q_values_for(mdp.rewards())?;
    let weight = d_data.state_marginal();
    let probs = kernel.probs();
    let gradient = softmax_score_gradient(&weight, probs, q.as_slice(), mdp.num_actions());
    let na = mdp.num_actions();
    let surrogate = weight
        .iter()
        .enumerate()
        .map(|(s, w)| w * dot(&probs[s * na..(s + 1) * na], &q.as_slice()[s * na..(s + 1) * na]))
        .sum();
    Ok(CriticStep { gradient, surrogate })
}

pub fn actor_critic_step(
    mdp: &TabularMdp,
    pi: &SoftmaxPolicy,
    d_data: &Occupancy,
    learning_rate: f64,
) -> Result<SoftmaxPolicy> {
    check_learning_rate(learning_rate)?;
    let step = actor_critic_direction(mdp, pi, d_data)?;
    Ok(pi.stepped(&step.gradient, learning_rate))
}

/// Starts from the uniform policy and records `steps + 1` metric rows; the
/// objective column holds the frozen-`Q` surrogate.
pub fn train_actor_critic(
    mdp: &TabularMdp,
    source: &DataSource,
    steps: usize,
    learning_rate: f64,
    seed: u64,
) -> Result<TrainOutcome> {
    check_learning_rate(learning_rate)?;
    let mut pi = SoftmaxPolicy::uniform(mdp.num_states(), mdp.num_actions());
    let mut metrics = Vec::with_capacity(steps + 1);
    for step in 0..=steps {
        let d_data = source.distribution_for(&pi, seed, step)?;
        let dir = actor_critic_direction(mdp, &pi, &d_data)?;
        let d_pi = evaluation_distribution(mdp, &pi, false)?;
        metrics.push(StepMetrics {
            step,
            dual_return: dot(d_pi.as_slice(), mdp.rewards()),
            objective: dir.surrogate,
            zeta_error: f64::NAN,
            grad_norm: inf_norm(&dir.gradient),
        });
        if step < steps {
            pi.ascend(&dir.gradient, learning_rate);
        }
    }
    Ok(TrainOutcome { policy: pi, metrics })
}
