//! Seeded generators for random MDPs, policies and tables. Used by the
//! `verify` command and by tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mdp::TabularMdp;
use crate::policy::SoftmaxPolicy;
use crate::tables::{Occupancy, ValueTable};

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normalized(weights: Vec<f64>) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    let mut out: Vec<f64> = weights.into_iter().map(|w| w / total).collect();
    // Push the rounding error into the largest entry so rows sum to 1 tightly.
    let err = 1.0 - out.iter().sum::<f64>();
    let imax = out
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    out[imax] += err;
    out
}

/// Random MDP with dense, strictly positive transitions (hence ergodic for
/// every softmax policy), rewards in `[-1, 1]` and a random initial
/// distribution.
pub fn random_mdp<R: Rng>(rng: &mut R, num_states: usize, num_actions: usize, discount: f64) -> TabularMdp {
    let reward = (0..num_states * num_actions)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let mut transition = Vec::with_capacity(num_states * num_actions * num_states);
    for _ in 0..num_states * num_actions {
        let w: Vec<f64> = (0..num_states)
            .map(|_| {
                let u: f64 = rng.random_range(0.02..1.0);
                u * u * u
            })
            .collect();
        transition.extend(normalized(w));
    }
    let init = normalized((0..num_states).map(|_| rng.random_range(0.05..1.0)).collect());
    TabularMdp::new(num_states, num_actions, reward, transition, init, discount)
        .expect("random MDP is valid")
}

/// Random MDP whose transition rows have a random sparse support.
pub fn random_sparse_mdp<R: Rng>(
    rng: &mut R,
    num_states: usize,
    num_actions: usize,
    discount: f64,
) -> TabularMdp {
    let reward = (0..num_states * num_actions)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let mut transition = Vec::with_capacity(num_states * num_actions * num_states);
    for _ in 0..num_states * num_actions {
        let keep = rng.random_range(0..num_states);
        let w: Vec<f64> = (0..num_states)
            .map(|s| {
                if s == keep || rng.random_bool(0.4) {
                    rng.random_range(0.05..1.0)
                } else {
                    0.0
                }
            })
            .collect();
        transition.extend(normalized(w));
    }
    let init = normalized((0..num_states).map(|_| rng.random_range(0.05..1.0)).collect());
    TabularMdp::new(num_states, num_actions, reward, transition, init, discount)
        .expect("random MDP is valid")
}

/// Logits drawn uniformly from `[-scale, scale]`.
pub fn random_policy<R: Rng>(rng: &mut R, num_states: usize, num_actions: usize, scale: f64) -> SoftmaxPolicy {
    let logits = (0..num_states * num_actions)
        .map(|_| rng.random_range(-scale..=scale))
        .collect();
    SoftmaxPolicy::new(num_states, num_actions, logits).expect("finite logits")
}

pub fn random_values<R: Rng>(rng: &mut R, num_states: usize, num_actions: usize, scale: f64) -> ValueTable {
    let values = (0..num_states * num_actions)
        .map(|_| rng.random_range(-scale..=scale))
        .collect();
    ValueTable::new(num_states, num_actions, values).expect("finite values")
}

/// Normalized occupancy with every entry at least `floor / (S·A)` before
/// normalization; `floor = 0` may produce (rare) tiny entries but never zeros.
pub fn random_occupancy<R: Rng>(rng: &mut R, num_states: usize, num_actions: usize, floor: f64) -> Occupancy {
    let w = (0..num_states * num_actions)
        .map(|_| floor + rng.random_range(0.05..1.0))
        .collect();
    Occupancy::new(num_states, num_actions, normalized(w)).expect("finite weights")
}
