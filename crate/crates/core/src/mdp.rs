//! Exact tabular MDP quantities: Bellman operators, Q-values, visitation
//! and stationary distributions, returns and the on-policy policy gradient.
//!
//! Pair-level linear systems `(I - γP_π) x = y` are solved by eliminating
//! the action dimension: with `v(s) = Σ_a π(a|s) x(s, a)` the system
//! becomes `(I - γP_s) v = y_π` over states, after which `x` is recovered
//! in closed form. The transpose system is handled the same way. Every
//! solve is followed by a residual check on the original pair-level system.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{AlgaeError, Result};
use crate::linalg::{inf_norm, DenseMatrix, LuFactorization, SOLVE_RESIDUAL_TOL};
use crate::policy::SoftmaxPolicy;
use crate::tables::{Occupancy, ValueTable};

const PROB_TOL: f64 = 1e-12;
const CLAMP_TOL: f64 = 1e-12;

/// A finite MDP `⟨S, A, r, T, μ0⟩` with discount `γ ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMdp {
    num_states: usize,
    num_actions: usize,
    reward: Vec<f64>,
    transition: Vec<f64>,
    initial_dist: Vec<f64>,
    discount: f64,
}

/// JSON layout of an MDP file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MdpFile {
    pub num_states: usize,
    pub num_actions: usize,
    pub discount: f64,
    pub reward: Vec<Vec<f64>>,
    pub transition: Vec<Vec<Vec<f64>>>,
    pub initial_dist: Vec<f64>,
}

impl TabularMdp {
    /// `reward` is flattened `[s * A + a]`, `transition` is flattened
    /// `[(s * A + a) * S + s']`.
    pub fn new(
        num_states: usize,
        num_actions: usize,
        reward: Vec<f64>,
        transition: Vec<f64>,
        initial_dist: Vec<f64>,
        discount: f64,
    ) -> Result<Self> {
        let mdp = Self {
            num_states,
            num_actions,
            reward,
            transition,
            initial_dist,
            discount,
        };
        mdp.validate()?;
        Ok(mdp)
    }

    fn validate(&self) -> Result<()> {
        let (ns, na) = (self.num_states, self.num_actions);
        if ns == 0 || na == 0 {
            return Err(AlgaeError::InvalidInput(
                "MDP needs at least one state and one action".into(),
            ));
        }
        if self.reward.len() != ns * na {
            return Err(AlgaeError::InvalidInput(format!(
                "reward table has {} entries, expected {}",
                self.reward.len(),
                ns * na
            )));
        }
        if self.transition.len() != ns * na * ns {
            return Err(AlgaeError::InvalidInput(format!(
                "transition table has {} entries, expected {}",
                self.transition.len(),
                ns * na * ns
            )));
        }
        if self.initial_dist.len() != ns {
            return Err(AlgaeError::InvalidInput(format!(
                "initial distribution has {} entries, expected {ns}",
                self.initial_dist.len()
            )));
        }
        if !(0.0..=1.0).contains(&self.discount) {
            return Err(AlgaeError::InvalidInput(format!(
                "discount {} outside [0, 1]",
                self.discount
            )));
        }
        if self.reward.iter().any(|r| !r.is_finite()) {
            return Err(AlgaeError::InvalidInput("rewards must be finite".into()));
        }
        for (i, row) in self.transition.chunks(ns).enumerate() {
            if row.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
                return Err(AlgaeError::InvalidInput(format!(
                    "transition row (s={}, a={}) has a negative or non-finite entry",
                    i / na,
                    i % na
                )));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > PROB_TOL {
                return Err(AlgaeError::InvalidInput(format!(
                    "transition row (s={}, a={}) sums to {total}",
                    i / na,
                    i % na
                )));
            }
        }
        if self.initial_dist.iter().any(|&p| !(p >= 0.0)) {
            return Err(AlgaeError::InvalidInput(
                "initial distribution has a negative entry".into(),
            ));
        }
        let total: f64 = self.initial_dist.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(AlgaeError::InvalidInput(format!(
                "initial distribution sums to {total}"
            )));
        }
        Ok(())
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn num_pairs(&self) -> usize {
        self.num_states * self.num_actions
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.reward[s * self.num_actions + a]
    }

    pub fn rewards(&self) -> &[f64] {
        &self.reward
    }

    pub fn reward_table(&self) -> ValueTable {
        ValueTable::from_parts(self.num_states, self.num_actions, self.reward.clone())
    }

    /// `R_max = max |r(s, a)|`.
    pub fn reward_bound(&self) -> f64 {
        inf_norm(&self.reward)
    }

    /// `T(· | s, a)`.
    pub fn next_state_dist(&self, s: usize, a: usize) -> &[f64] {
        let i = (s * self.num_actions + a) * self.num_states;
        &self.transition[i..i + self.num_states]
    }

    pub fn transition(&self, s: usize, a: usize, s_next: usize) -> f64 {
        self.next_state_dist(s, a)[s_next]
    }

    pub fn initial_dist(&self) -> &[f64] {
        &self.initial_dist
    }

    pub fn with_discount(&self, discount: f64) -> Result<Self> {
        Self::new(
            self.num_states,
            self.num_actions,
            self.reward.clone(),
            self.transition.clone(),
            self.initial_dist.clone(),
            discount,
        )
    }

    pub fn with_initial_dist(&self, initial_dist: Vec<f64>) -> Result<Self> {
        Self::new(
            self.num_states,
            self.num_actions,
            self.reward.clone(),
            self.transition.clone(),
            initial_dist,
            self.discount,
        )
    }

    pub fn with_rewards(&self, reward: Vec<f64>) -> Result<Self> {
        Self::new(
            self.num_states,
            self.num_actions,
            reward,
            self.transition.clone(),
            self.initial_dist.clone(),
            self.discount,
        )
    }

    pub fn to_file(&self) -> MdpFile {
        let (ns, na) = (self.num_states, self.num_actions);
        MdpFile {
            num_states: ns,
            num_actions: na,
            discount: self.discount,
            reward: self.reward.chunks(na).map(<[f64]>::to_vec).collect(),
            transition: (0..ns)
                .map(|s| (0..na).map(|a| self.next_state_dist(s, a).to_vec()).collect())
                .collect(),
            initial_dist: self.initial_dist.clone(),
        }
    }

    pub fn from_file(file: MdpFile) -> Result<Self> {
        let (ns, na) = (file.num_states, file.num_actions);
        if file.reward.len() != ns || file.reward.iter().any(|r| r.len() != na) {
            return Err(AlgaeError::InvalidInput(format!(
                "reward must be a {ns}x{na} array"
            )));
        }
        if file.transition.len() != ns
            || file
                .transition
                .iter()
                .any(|row| row.len() != na || row.iter().any(|p| p.len() != ns))
        {
            return Err(AlgaeError::InvalidInput(format!(
                "transition must be a {ns}x{na}x{ns} array"
            )));
        }
        Self::new(
            ns,
            na,
            file.reward.into_iter().flatten().collect(),
            file.transition.into_iter().flatten().flatten().collect(),
            file.initial_dist,
            file.discount,
        )
    }

    pub fn from_json_str(json: &str) -> Result<Self> {
        Self::from_file(serde_json::from_str(json)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("MDP serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }

    fn check_policy(&self, pi: &SoftmaxPolicy) -> Result<()> {
        if pi.num_states() != self.num_states || pi.num_actions() != self.num_actions {
            return Err(AlgaeError::InvalidInput(format!(
                "policy shape {}x{} does not match MDP {}x{}",
                pi.num_states(),
                pi.num_actions(),
                self.num_states,
                self.num_actions
            )));
        }
        Ok(())
    }

    fn check_table(&self, len: usize, ns: usize, na: usize, what: &str) -> Result<()> {
        if ns != self.num_states || na != self.num_actions || len != self.num_pairs() {
            return Err(AlgaeError::InvalidInput(format!(
                "{what} shape {ns}x{na} does not match MDP {}x{}",
                self.num_states, self.num_actions
            )));
        }
        Ok(())
    }

    pub(crate) fn check_value_table(&self, t: &ValueTable, what: &str) -> Result<()> {
        self.check_table(t.len(), t.num_states(), t.num_actions(), what)
    }

    pub(crate) fn check_occupancy(&self, t: &Occupancy, what: &str) -> Result<()> {
        self.check_table(t.len(), t.num_states(), t.num_actions(), what)
    }

    /// The pair-to-pair matrix `P_π((s,a),(s',a')) = T(s'|s,a) π(a'|s')`.
    pub fn policy_transition_matrix(&self, pi: &SoftmaxPolicy) -> Result<DenseMatrix> {
        self.check_policy(pi)?;
        let (ns, na) = (self.num_states, self.num_actions);
        let probs = pi.probabilities();
        let n = ns * na;
        let mut p = DenseMatrix::zeros(n, n);
        for i in 0..n {
            let (s, a) = (i / na, i % na);
            for (s2, &t) in self.next_state_dist(s, a).iter().enumerate() {
                if t == 0.0 {
                    continue;
                }
                for a2 in 0..na {
                    p[(i, s2 * na + a2)] = t * probs[s2 * na + a2];
                }
            }
        }
        Ok(p)
    }

    /// State-to-state matrix `P_s(s, s') = Σ_a π(a|s) T(s'|s, a)`.
    pub fn state_transition_matrix(&self, pi: &SoftmaxPolicy) -> Result<DenseMatrix> {
        self.check_policy(pi)?;
        Ok(self.state_matrix_from_probs(&pi.probabilities()))
    }

    fn state_matrix_from_probs(&self, probs: &[f64]) -> DenseMatrix {
        let (ns, na) = (self.num_states, self.num_actions);
        let mut m = DenseMatrix::zeros(ns, ns);
        for s in 0..ns {
            for a in 0..na {
                let p = probs[s * na + a];
                for (s2, &t) in self.next_state_dist(s, a).iter().enumerate() {
                    m[(s, s2)] += p * t;
                }
            }
        }
        m
    }

    /// `(B_π ν)(s, a) = r(s, a) + γ Σ_{s',a'} T(s'|s,a) π(a'|s') ν(s', a')`.
    pub fn bellman(&self, pi: &SoftmaxPolicy, nu: &ValueTable) -> Result<ValueTable> {
        self.bellman_with_discount(pi, nu, self.discount)
    }

    pub(crate) fn bellman_with_discount(
        &self,
        pi: &SoftmaxPolicy,
        nu: &ValueTable,
        discount: f64,
    ) -> Result<ValueTable> {
        self.check_policy(pi)?;
        self.check_value_table(nu, "ν")?;
        let next = expected_next(self, &pi.probabilities(), nu.as_slice());
        let out = self
            .reward
            .iter()
            .zip(next)
            .map(|(r, v)| r + discount * v)
            .collect();
        Ok(ValueTable::from_parts(self.num_states, self.num_actions, out))
    }

    /// `(B_πᵀ ρ)(s', a') = γ Σ_{s,a} π(a'|s') T(s'|s,a) ρ(s,a) + (1-γ) μ0(s') π(a'|s')`.
    pub fn transpose_bellman(&self, pi: &SoftmaxPolicy, rho: &Occupancy) -> Result<Occupancy> {
        self.check_policy(pi)?;
        self.check_occupancy(rho, "ρ")?;
        let g = self.discount;
        let probs = pi.probabilities();
        let flow = expected_next_transpose(self, &probs, rho.as_slice());
        let init = initial_pairs(self, &probs);
        let out = flow
            .iter()
            .zip(init)
            .map(|(f, i)| g * f + (1.0 - g) * i)
            .collect();
        Ok(Occupancy::from_parts(self.num_states, self.num_actions, out))
    }

    /// `Q_π = (I - γP_π)⁻¹ r`.
    pub fn q_values(&self, pi: &SoftmaxPolicy) -> Result<ValueTable> {
        let kernel = PolicyKernel::new(self, pi)?;
        kernel.q_values_for(&self.reward)
    }

    /// `d^π = (1-γ)(I - γP_πᵀ)⁻¹ (μ0 π)`.
    pub fn visitation(&self, pi: &SoftmaxPolicy) -> Result<Occupancy> {
        PolicyKernel::new(self, pi)?.visitation()
    }

    /// Invariant distribution of the state-action chain `P_π` (used for γ = 1).
    /// Fails when the induced state chain has more than one closed class.
    pub fn stationary_distribution(&self, pi: &SoftmaxPolicy) -> Result<Occupancy> {
        self.check_policy(pi)?;
        let probs = pi.probabilities();
        let ps = self.state_matrix_from_probs(&probs);
        check_single_recurrent_class(&ps)?;
        let ns = self.num_states;
        // Bordered system [I - P_sᵀ, 1; 1ᵀ, 0] [m; κ] = [0; 1].
        let mut bordered = DenseMatrix::zeros(ns + 1, ns + 1);
        for i in 0..ns {
            for j in 0..ns {
                bordered[(i, j)] = if i == j { 1.0 } else { 0.0 } - ps[(j, i)];
            }
            bordered[(i, ns)] = 1.0;
            bordered[(ns, i)] = 1.0;
        }
        let mut rhs = vec![0.0; ns + 1];
        rhs[ns] = 1.0;
        let sol = LuFactorization::new(&bordered)?.solve(&rhs)?;
        let na = self.num_actions;
        let mut d = vec![0.0; ns * na];
        for s in 0..ns {
            for a in 0..na {
                d[s * na + a] = sol[s] * probs[s * na + a];
            }
        }
        clamp_and_normalize(&mut d)?;
        Ok(Occupancy::from_parts(ns, na, d))
    }

    /// `J_P(π) = (1-γ) E_{s0~μ0, a0~π}[Q_π(s0, a0)]`.
    pub fn primal_return(&self, pi: &SoftmaxPolicy) -> Result<f64> {
        let q = self.q_values(pi)?;
        let init = initial_pairs(self, &pi.probabilities());
        Ok((1.0 - self.discount) * crate::linalg::dot(&init, q.as_slice()))
    }

    /// `J_D(π) = E_{(s,a)~d^π}[r(s, a)]`.
    pub fn dual_return(&self, pi: &SoftmaxPolicy) -> Result<f64> {
        let d = self.visitation(pi)?;
        Ok(crate::linalg::dot(d.as_slice(), &self.reward))
    }

    /// Policy gradient `E_{d^π}[Q̃(s,a) ∇_θ log π(a|s)]` with respect to the
    /// logits, where `Q̃` is the Q-table of `reward_override` (or of `r`).
    /// Returned flattened `s * A + a`.
    pub fn on_policy_policy_gradient(
        &self,
        pi: &SoftmaxPolicy,
        reward_override: Option<&ValueTable>,
    ) -> Result<Vec<f64>> {
        let kernel = PolicyKernel::new(self, pi)?;
        let reward = match reward_override {
            Some(r) => {
                self.check_value_table(r, "reward override")?;
                r.as_slice()
            }
            None => &self.reward,
        };
        let q = kernel.q_values_for(reward)?;
        let d = kernel.visitation()?;
        Ok(softmax_score_gradient(
            &d.state_marginal(),
            kernel.probs(),
            q.as_slice(),
            self.num_actions,
        ))
    }
}

/// `g[s, b] = weight(s) π(b|s) (q(s, b) - Σ_a π(a|s) q(s, a))`, the logit
/// gradient of `Σ_s weight(s) Σ_a π(a|s) q(s, a)` with `q` held fixed.
pub(crate) fn softmax_score_gradient(
    state_weight: &[f64],
    probs: &[f64],
    q: &[f64],
    num_actions: usize,
) -> Vec<f64> {
    let mut g = vec![0.0; probs.len()];
    for (s, &w) in state_weight.iter().enumerate() {
        let row = s * num_actions..(s + 1) * num_actions;
        let v: f64 = probs[row.clone()]
            .iter()
            .zip(&q[row.clone()])
            .map(|(p, q)| p * q)
            .sum();
        for i in row {
            g[i] = w * probs[i] * (q[i] - v);
        }
    }
    g
}

/// `(P_π ν)(s, a) = Σ_{s'} T(s'|s,a) Σ_{a'} π(a'|s') ν(s', a')`.
pub(crate) fn expected_next(mdp: &TabularMdp, probs: &[f64], nu: &[f64]) -> Vec<f64> {
    let na = mdp.num_actions;
    let v: Vec<f64> = probs
        .chunks(na)
        .zip(nu.chunks(na))
        .map(|(p, n)| crate::linalg::dot(p, n))
        .collect();
    (0..mdp.num_pairs())
        .map(|i| crate::linalg::dot(mdp.next_state_dist(i / na, i % na), &v))
        .collect()
}

/// `m(s') = Σ_{s,a} T(s'|s,a) ρ(s,a)`.
pub(crate) fn inflow(mdp: &TabularMdp, rho: &[f64]) -> Vec<f64> {
    let na = mdp.num_actions;
    let mut m = vec![0.0; mdp.num_states];
    for (i, &w) in rho.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for (o, &t) in m.iter_mut().zip(mdp.next_state_dist(i / na, i % na)) {
            *o += t * w;
        }
    }
    m
}

/// `(P_πᵀ ρ)(s', a') = π(a'|s') Σ_{s,a} T(s'|s,a) ρ(s,a)`.
pub(crate) fn expected_next_transpose(mdp: &TabularMdp, probs: &[f64], rho: &[f64]) -> Vec<f64> {
    let na = mdp.num_actions;
    let m = inflow(mdp, rho);
    probs
        .iter()
        .enumerate()
        .map(|(i, p)| p * m[i / na])
        .collect()
}

/// `(μ0 π)(s, a) = μ0(s) π(a|s)`.
pub(crate) fn initial_pairs(mdp: &TabularMdp, probs: &[f64]) -> Vec<f64> {
    let na = mdp.num_actions;
    probs
        .iter()
        .enumerate()
        .map(|(i, p)| p * mdp.initial_dist[i / na])
        .collect()
}

pub(crate) fn clamp_and_normalize(d: &mut [f64]) -> Result<()> {
    for (i, v) in d.iter_mut().enumerate() {
        if *v < 0.0 {
            if *v < -CLAMP_TOL {
                return Err(AlgaeError::Numerical(format!(
                    "distribution entry {i} is {v:e}, below the clamp tolerance"
                )));
            }
            *v = 0.0;
        }
    }
    let total: f64 = d.iter().sum();
    if !(total > 0.0) {
        return Err(AlgaeError::Numerical("distribution has zero mass".into()));
    }
    d.iter_mut().for_each(|v| *v /= total);
    Ok(())
}

/// A finite chain has a unique closed class iff some state is reachable
/// from every state.
fn check_single_recurrent_class(ps: &DenseMatrix) -> Result<()> {
    let n = ps.rows();
    for target in 0..n {
        let mut seen = vec![false; n];
        seen[target] = true;
        let mut stack = vec![target];
        let mut count = 1;
        while let Some(t) = stack.pop() {
            for s in 0..n {
                if !seen[s] && ps[(s, t)] > 0.0 {
                    seen[s] = true;
                    count += 1;
                    stack.push(s);
                }
            }
        }
        if count == n {
            return Ok(());
        }
    }
    Err(AlgaeError::NotErgodic(
        "no state is reachable from every state, so the chain has several closed classes".into(),
    ))
}

/// Precomputed pieces for exact evaluation of one policy in a discounted MDP.
#[derive(Debug, Clone)]
pub struct PolicyKernel<'a> {
    mdp: &'a TabularMdp,
    probs: Vec<f64>,
    lu: LuFactorization,
}

impl<'a> PolicyKernel<'a> {
    pub fn new(mdp: &'a TabularMdp, pi: &SoftmaxPolicy) -> Result<Self> {
        mdp.check_policy(pi)?;
        if mdp.discount >= 1.0 {
            return Err(AlgaeError::Singular(
                "I - γP_π is singular at γ = 1; use the stationary distribution instead".into(),
            ));
        }
        let probs = pi.probabilities();
        let mut m = mdp.state_matrix_from_probs(&probs);
        m.scale(-mdp.discount);
        for s in 0..mdp.num_states {
            m[(s, s)] += 1.0;
        }
        let lu = LuFactorization::new(&m)?;
        Ok(Self { mdp, probs, lu })
    }

    pub fn mdp(&self) -> &TabularMdp {
        self.mdp
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn discount(&self) -> f64 {
        self.mdp.discount
    }

    /// `μ0 π` as a pair table.
    pub fn initial_pairs(&self) -> Vec<f64> {
        initial_pairs(self.mdp, &self.probs)
    }

    /// `P_π ν`.
    pub fn expected_next(&self, nu: &[f64]) -> Vec<f64> {
        expected_next(self.mdp, &self.probs, nu)
    }

    /// `P_πᵀ ρ`.
    pub fn expected_next_transpose(&self, rho: &[f64]) -> Vec<f64> {
        expected_next_transpose(self.mdp, &self.probs, rho)
    }

    /// `(B_π ν - ν)` with the exact expected Bellman operator.
    pub fn bellman_residual(&self, nu: &[f64]) -> Vec<f64> {
        let g = self.mdp.discount;
        self.expected_next(nu)
            .iter()
            .zip(&self.mdp.reward)
            .zip(nu)
            .map(|((p, r), v)| r + g * p - v)
            .collect()
    }

    /// Solves `(I - γP_π) x = y`.
    pub fn solve_bellman_system(&self, y: &[f64]) -> Result<Vec<f64>> {
        let na = self.mdp.num_actions;
        let g = self.mdp.discount;
        let y_pi: Vec<f64> = self
            .probs
            .chunks(na)
            .zip(y.chunks(na))
            .map(|(p, yy)| crate::linalg::dot(p, yy))
            .collect();
        let v = self.lu.solve(&y_pi)?;
        let x: Vec<f64> = (0..self.mdp.num_pairs())
            .map(|i| y[i] + g * crate::linalg::dot(self.mdp.next_state_dist(i / na, i % na), &v))
            .collect();
        let px = self.expected_next(&x);
        let residual = x
            .iter()
            .zip(&px)
            .zip(y)
            .fold(0.0_f64, |m, ((xi, pi), yi)| m.max((xi - g * pi - yi).abs()));
        check_pair_residual("(I - γP_π) x = y", residual, y)?;
        Ok(x)
    }

    /// Solves `(I - γP_πᵀ) ρ = c`.
    pub fn solve_transpose_system(&self, c: &[f64]) -> Result<Vec<f64>> {
        let g = self.mdp.discount;
        let na = self.mdp.num_actions;
        let m = self.lu.solve_transpose(&inflow(self.mdp, c))?;
        let rho: Vec<f64> = c
            .iter()
            .enumerate()
            .map(|(i, ci)| ci + g * self.probs[i] * m[i / na])
            .collect();
        let pr = self.expected_next_transpose(&rho);
        let residual = rho
            .iter()
            .zip(&pr)
            .zip(c)
            .fold(0.0_f64, |m, ((r, p), ci)| m.max((r - g * p - ci).abs()));
        check_pair_residual("(I - γP_πᵀ) ρ = c", residual, c)?;
        Ok(rho)
    }

    /// Q-table for an arbitrary reward table.
    pub fn q_values_for(&self, reward: &[f64]) -> Result<ValueTable> {
        let q = self.solve_bellman_system(reward)?;
        Ok(ValueTable::from_parts(
            self.mdp.num_states,
            self.mdp.num_actions,
            q,
        ))
    }

    pub fn visitation(&self) -> Result<Occupancy> {
        let g = self.mdp.discount;
        let c: Vec<f64> = self.initial_pairs().iter().map(|v| (1.0 - g) * v).collect();
        let mut d = if g == 0.0 {
            c
        } else {
            self.solve_transpose_system(&c)?
        };
        clamp_and_normalize(&mut d)?;
        Ok(Occupancy::from_parts(
            self.mdp.num_states,
            self.mdp.num_actions,
            d,
        ))
    }
}

fn check_pair_residual(context: &'static str, residual: f64, rhs: &[f64]) -> Result<()> {
    let tolerance = SOLVE_RESIDUAL_TOL * inf_norm(rhs).max(1.0);
    if !(residual <= tolerance) {
        return Err(AlgaeError::Residual {
            context,
            residual,
            tolerance,
        });
    }
    Ok(())
}
