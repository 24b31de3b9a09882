//! Exact tabular off-policy policy optimization through the regularized
//! Lagrangian of the Q-function linear program.

pub mod algae;
pub mod baselines;
pub mod dataset;
pub mod divergence;
pub mod envs;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod mdp;
pub mod policy;
pub mod random;
pub mod tables;
pub mod verify;

pub use dataset::{collect, empirical_distribution, exact_behavior_distribution, DataSource, ExperienceSet, Transition};
pub use divergence::{density_ratio, f_divergence, variational_gap, DivergencePair};
pub use error::{AlgaeError, Result};
pub use mdp::{PolicyKernel, TabularMdp};
pub use policy::SoftmaxPolicy;
pub use tables::{Occupancy, ValueTable};
