//! Behavior-agnostic experience: fixed-length rollouts of a behavior policy,
//! the initial-state sample, and the empirical data distribution `d^D`.
//!
//! Randomness: trajectory `j` of a collection with master seed `seed` draws
//! from `ChaCha8Rng::seed_from_u64(seed)` on stream `j`, so each trajectory is
//! reproducible on its own and independent of how many others are drawn.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{AlgaeError, Result};
use crate::mdp::TabularMdp;
use crate::policy::SoftmaxPolicy;
use crate::tables::Occupancy;

/// Smoothing added to every pair count unless overridden.
pub const DEFAULT_SMOOTHING: f64 = 1e-6;

const FILE_MAGIC: &str = "algae-exp v1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub s: usize,
    pub a: usize,
    pub r: f64,
    pub s_next: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollectionMeta {
    pub num_trajectories: usize,
    pub trajectory_length: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperienceSet {
    pub num_states: usize,
    pub num_actions: usize,
    pub transitions: Vec<Transition>,
    pub initial_states: Vec<usize>,
    pub seed: u64,
    /// Present when the set was generated in-process; not stored on disk.
    pub meta: Option<CollectionMeta>,
}

/// SplitMix64 finalizer, used to derive per-iteration seeds.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn sample_index<R: Rng>(rng: &mut R, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

/// Rolls out `num_trajectories` trajectories of `trajectory_length` steps
/// each, starting from `s0 ~ μ0` and following `behavior`.
pub fn collect(
    mdp: &TabularMdp,
    behavior: &SoftmaxPolicy,
    num_trajectories: usize,
    trajectory_length: usize,
    seed: u64,
) -> Result<ExperienceSet> {
    if num_trajectories == 0 || trajectory_length == 0 {
        return Err(AlgaeError::InvalidInput(
            "trajectory count and length must be positive".into(),
        ));
    }
    if behavior.num_states() != mdp.num_states() || behavior.num_actions() != mdp.num_actions() {
        return Err(AlgaeError::InvalidInput(
            "behavior policy shape does not match the MDP".into(),
        ));
    }
    let na = mdp.num_actions();
    let probs = behavior.probabilities();
    let mut transitions = Vec::with_capacity(num_trajectories * trajectory_length);
    let mut initial_states = Vec::with_capacity(num_trajectories);
    for j in 0..num_trajectories {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(j as u64);
        let mut s = sample_index(&mut rng, mdp.initial_dist());
        initial_states.push(s);
        for _ in 0..trajectory_length {
            let a = sample_index(&mut rng, &probs[s * na..(s + 1) * na]);
            let s_next = sample_index(&mut rng, mdp.next_state_dist(s, a));
            transitions.push(Transition {
                s,
                a,
                r: mdp.reward(s, a),
                s_next,
            });
            s = s_next;
        }
    }
    Ok(ExperienceSet {
        num_states: mdp.num_states(),
        num_actions: na,
        transitions,
        initial_states,
        seed,
        meta: Some(CollectionMeta {
            num_trajectories,
            trajectory_length,
        }),
    })
}

/// `d^D(s,a) = (count(s,a) + ε) / (N + ε·S·A)`.
pub fn empirical_distribution(
    data: &ExperienceSet,
    num_states: usize,
    num_actions: usize,
    smoothing: f64,
) -> Result<Occupancy> {
    if !(smoothing >= 0.0) || !smoothing.is_finite() {
        return Err(AlgaeError::InvalidInput(format!(
            "smoothing must be finite and nonnegative, got {smoothing}"
        )));
    }
    let mut counts = vec![0.0; num_states * num_actions];
    for (k, t) in data.transitions.iter().enumerate() {
        if t.s >= num_states || t.a >= num_actions || t.s_next >= num_states {
            return Err(AlgaeError::InvalidInput(format!(
                "transition {k} has (s={}, a={}, s'={}) outside {num_states}x{num_actions}",
                t.s, t.a, t.s_next
            )));
        }
        counts[t.s * num_actions + t.a] += 1.0;
    }
    let n = data.transitions.len() as f64;
    let denom = n + smoothing * counts.len() as f64;
    if !(denom > 0.0) {
        return Err(AlgaeError::InvalidInput(
            "empty experience set with zero smoothing".into(),
        ));
    }
    let weights = counts.into_iter().map(|c| (c + smoothing) / denom).collect();
    Occupancy::new(num_states, num_actions, weights)
}

/// Infinite-data idealization of `d^D`: the discounted visitation of the
/// behavior policy.
pub fn exact_behavior_distribution(mdp: &TabularMdp, behavior: &SoftmaxPolicy) -> Result<Occupancy> {
    mdp.visitation(behavior)
}

/// Expected per-step pair distribution of `collect`:
/// `(1/H) Σ_{t<H} Pr[s_t = s, a_t = a]` with `s_0 ~ μ0`.
pub fn expected_rollout_distribution(
    mdp: &TabularMdp,
    behavior: &SoftmaxPolicy,
    trajectory_length: usize,
) -> Result<Occupancy> {
    if trajectory_length == 0 {
        return Err(AlgaeError::InvalidInput("trajectory length must be positive".into()));
    }
    let (ns, na) = (mdp.num_states(), mdp.num_actions());
    let probs = behavior.probabilities();
    let mut state = mdp.initial_dist().to_vec();
    let mut acc = vec![0.0; ns * na];
    for _ in 0..trajectory_length {
        let mut next = vec![0.0; ns];
        for s in 0..ns {
            for a in 0..na {
                let w = state[s] * probs[s * na + a];
                acc[s * na + a] += w;
                if w > 0.0 {
                    for (n, &t) in next.iter_mut().zip(mdp.next_state_dist(s, a)) {
                        *n += w * t;
                    }
                }
            }
        }
        state = next;
    }
    let h = trajectory_length as f64;
    Occupancy::new(ns, na, acc.into_iter().map(|v| v / h).collect())
}

/// Where the data distribution comes from during training.
#[derive(Debug, Clone)]
pub enum DataSource {
    /// A distribution that stays fixed for the whole run (offline, or exact).
    Fixed(Occupancy),
    /// Re-collect with the current policy at every iteration.
    Online {
        collection_mdp: TabularMdp,
        num_trajectories: usize,
        trajectory_length: usize,
        smoothing: f64,
    },
}

impl DataSource {
    pub fn distribution_for(&self, policy: &SoftmaxPolicy, seed: u64, step: usize) -> Result<Occupancy> {
        match self {
            DataSource::Fixed(d) => Ok(d.clone()),
            DataSource::Online {
                collection_mdp,
                num_trajectories,
                trajectory_length,
                smoothing,
            } => {
                let data = collect(
                    collection_mdp,
                    policy,
                    *num_trajectories,
                    *trajectory_length,
                    derive_seed(seed, step as u64),
                )?;
                empirical_distribution(
                    &data,
                    collection_mdp.num_states(),
                    collection_mdp.num_actions(),
                    *smoothing,
                )
            }
        }
    }

    pub fn is_online(&self) -> bool {
        matches!(self, DataSource::Online { .. })
    }
}

impl ExperienceSet {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    /// Mean reward over the stored transitions.
    pub fn mean_reward(&self) -> f64 {
        if self.transitions.is_empty() {
            return 0.0;
        }
        self.transitions.iter().map(|t| t.r).sum::<f64>() / self.transitions.len() as f64
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(16 * (self.transitions.len() + self.initial_states.len()));
        let _ = write!(
            out,
            "{FILE_MAGIC} S={} A={} seed={}",
            self.num_states, self.num_actions, self.seed
        );
        if let Some(m) = &self.meta {
            let _ = write!(out, " trajectories={} length={}", m.num_trajectories, m.trajectory_length);
        }
        out.push('\n');
        for t in &self.transitions {
            let _ = writeln!(out, "{},{},{},{}", t.s, t.a, t.r, t.s_next);
        }
        out.push_str("INITIAL\n");
        for s in &self.initial_states {
            let _ = writeln!(out, "{s}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| AlgaeError::Parse("empty experience file".into()))?;
        let rest = header
            .strip_prefix(FILE_MAGIC)
            .ok_or_else(|| AlgaeError::Parse(format!("bad header '{header}'")))?;
        let mut fields = rest.split_whitespace();
        let mut take = |key: &str| -> Result<u64> {
            let tok = fields
                .next()
                .ok_or_else(|| AlgaeError::Parse(format!("header is missing {key}")))?;
            tok.strip_prefix(key)
                .and_then(|v| v.strip_prefix('='))
                .ok_or_else(|| AlgaeError::Parse(format!("expected {key}=<n>, got '{tok}'")))?
                .parse::<u64>()
                .map_err(|e| AlgaeError::Parse(format!("{key}: {e}")))
        };
        let num_states = take("S")? as usize;
        let num_actions = take("A")? as usize;
        let seed = take("seed")?;
        let meta = match fields.next() {
            None => None,
            Some(tok) => {
                let mut rest = std::iter::once(tok).chain(fields.by_ref());
                let mut take = |key: &str| -> Result<usize> {
                    let tok = rest
                        .next()
                        .ok_or_else(|| AlgaeError::Parse(format!("header is missing {key}")))?;
                    tok.strip_prefix(key)
                        .and_then(|v| v.strip_prefix('='))
                        .ok_or_else(|| AlgaeError::Parse(format!("expected {key}=<n>, got '{tok}'")))?
                        .parse::<usize>()
                        .map_err(|e| AlgaeError::Parse(format!("{key}: {e}")))
                };
                Some(CollectionMeta {
                    num_trajectories: take("trajectories")?,
                    trajectory_length: take("length")?,
                })
            }
        };

        let bad = |n: usize, line: &str| AlgaeError::Parse(format!("line {n}: cannot parse '{line}'"));
        let mut transitions = Vec::new();
        let mut initial_states = Vec::new();
        let mut in_initial = false;
        for (i, line) in lines.enumerate() {
            let n = i + 2;
            if line.is_empty() {
                continue;
            }
            if !in_initial {
                if line == "INITIAL" {
                    in_initial = true;
                    continue;
                }
                let parts: Vec<&str> = line.split(',').collect();
                if parts.len() != 4 {
                    return Err(bad(n, line));
                }
                let idx = |p: &str| p.parse::<usize>().map_err(|_| bad(n, line));
                let t = Transition {
                    s: idx(parts[0])?,
                    a: idx(parts[1])?,
                    r: parts[2].parse::<f64>().map_err(|_| bad(n, line))?,
                    s_next: idx(parts[3])?,
                };
                if t.s >= num_states || t.s_next >= num_states || t.a >= num_actions {
                    return Err(AlgaeError::Parse(format!("line {n}: index out of range")));
                }
                transitions.push(t);
            } else {
                let s = line.parse::<usize>().map_err(|_| bad(n, line))?;
                if s >= num_states {
                    return Err(AlgaeError::Parse(format!("line {n}: initial state out of range")));
                }
                initial_states.push(s);
            }
        }
        if !in_initial {
            return Err(AlgaeError::Parse("missing INITIAL section".into()));
        }
        if transitions.is_empty() {
            return Err(AlgaeError::Parse("experience file has no transitions".into()));
        }
        Ok(Self {
            num_states,
            num_actions,
            transitions,
            initial_states,
            seed,
            meta,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_mdp, random_policy, seeded_rng};
    use proptest::prelude::*;

    #[test]
    fn single_step_collection() {
        let mut rng = seeded_rng(1);
        let mdp = random_mdp(&mut rng, 3, 2, 0.9);
        let pi = random_policy(&mut rng, 3, 2, 1.0);
        let data = collect(&mdp, &pi, 1, 1, 42).unwrap();
        assert_eq!(data.len(), 1);
        assert_eq!(data.initial_states.len(), 1);
        let t = data.transitions[0];
        assert_eq!(t.s, data.initial_states[0]);
        assert_eq!(t.r, mdp.reward(t.s, t.a));
    }

    #[test]
    fn collection_is_deterministic_and_chained() {
        let mut rng = seeded_rng(2);
        let mdp = random_mdp(&mut rng, 5, 3, 0.9);
        let pi = random_policy(&mut rng, 5, 3, 1.0);
        let a = collect(&mdp, &pi, 20, 7, 99).unwrap();
        let b = collect(&mdp, &pi, 20, 7, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_text(), b.to_text());
        let c = collect(&mdp, &pi, 20, 7, 100).unwrap();
        assert_ne!(a.transitions, c.transitions);
        for traj in a.transitions.chunks(7) {
            for w in traj.windows(2) {
                assert_eq!(w[0].s_next, w[1].s);
            }
        }
        // Streams are per trajectory: a prefix of trajectories is reproduced.
        let prefix = collect(&mdp, &pi, 5, 7, 99).unwrap();
        assert_eq!(&a.transitions[..35], &prefix.transitions[..]);
    }

    #[test]
    fn rejects_zero_counts() {
        let mut rng = seeded_rng(3);
        let mdp = random_mdp(&mut rng, 2, 2, 0.9);
        let pi = SoftmaxPolicy::uniform(2, 2);
        assert!(collect(&mdp, &pi, 0, 5, 1).is_err());
        assert!(collect(&mdp, &pi, 5, 0, 1).is_err());
    }

    #[test]
    fn empirical_distribution_examples() {
        let data = ExperienceSet {
            num_states: 2,
            num_actions: 1,
            transitions: vec![Transition { s: 0, a: 0, r: 0.0, s_next: 1 }],
            initial_states: vec![0],
            seed: 0,
            meta: None,
        };
        let d = empirical_distribution(&data, 2, 1, 0.0).unwrap();
        assert_eq!(d.as_slice(), &[1.0, 0.0]);
        let d = empirical_distribution(&data, 2, 1, 1e-3).unwrap();
        assert!(d.as_slice().iter().all(|&w| w > 0.0));
        assert!((d.sum() - 1.0).abs() < 1e-15);
        assert!(empirical_distribution(&data, 1, 1, 0.0).is_err());
        assert!(empirical_distribution(&data, 2, 1, -1.0).is_err());
    }

    #[test]
    fn counts_are_integral_without_smoothing() {
        let mut rng = seeded_rng(4);
        let mdp = random_mdp(&mut rng, 4, 2, 0.9);
        let data = collect(&mdp, &SoftmaxPolicy::uniform(4, 2), 13, 11, 5).unwrap();
        let d = empirical_distribution(&data, 4, 2, 0.0).unwrap();
        let n = data.len() as f64;
        for &w in d.as_slice() {
            assert!((w * n - (w * n).round()).abs() < 1e-9);
        }
    }

    #[test]
    fn empirical_converges_to_rollout_distribution() {
        let mut rng = seeded_rng(5);
        let mdp = random_mdp(&mut rng, 5, 2, 0.9);
        let pi = random_policy(&mut rng, 5, 2, 1.0);
        let exact = expected_rollout_distribution(&mdp, &pi, 10).unwrap();
        let l1: Vec<f64> = [10usize, 1000, 100_000]
            .iter()
            .map(|&n| {
                let data = collect(&mdp, &pi, n, 10, 17).unwrap();
                let d = empirical_distribution(&data, 5, 2, 0.0).unwrap();
                d.as_slice()
                    .iter()
                    .zip(exact.as_slice())
                    .map(|(a, b)| (a - b).abs())
                    .sum()
            })
            .collect();
        assert!(l1[0] > l1[1] && l1[1] > l1[2], "{l1:?}");
    }

    #[test]
    fn file_format_parses_and_rejects() {
        let text = "algae-exp v1 S=2 A=1 seed=7\n0,0,0.5,1\n1,0,-0.25,0\nINITIAL\n0\n";
        let data = ExperienceSet::from_text(text).unwrap();
        assert_eq!(data.seed, 7);
        assert_eq!(data.len(), 2);
        assert_eq!(data.transitions[1].r, -0.25);
        assert_eq!(data.to_text(), text);
        assert!(ExperienceSet::from_text("bogus S=2 A=1 seed=7\nINITIAL\n").is_err());
        assert!(ExperienceSet::from_text("algae-exp v1 S=2 A=1 seed=7\n0,0,1\nINITIAL\n").is_err());
        assert!(ExperienceSet::from_text("algae-exp v1 S=2 A=1 seed=7\n0,3,1,0\nINITIAL\n").is_err());
        assert!(ExperienceSet::from_text("algae-exp v1 S=2 A=1 seed=7\n0,0,1,0\n").is_err());
    }

    proptest! {
        #[test]
        fn file_round_trip_is_bit_exact(seed in 0u64..10_000, n in 1usize..20, len in 1usize..10) {
            let mut rng = seeded_rng(seed);
            let mdp = random_mdp(&mut rng, 4, 3, 0.9);
            let pi = random_policy(&mut rng, 4, 3, 2.0);
            let data = collect(&mdp, &pi, n, len, seed).unwrap();
            let text = data.to_text();
            let back = ExperienceSet::from_text(&text).unwrap();
            prop_assert_eq!(&back.transitions, &data.transitions);
            prop_assert_eq!(&back.initial_states, &data.initial_states);
            prop_assert_eq!(back.seed, data.seed);
            prop_assert_eq!(back.to_text(), text);
        }
    }
}
