//! The regularized Q-LP saddle point.
//!
//! For a policy `π`, data distribution `d^D` and regularization weight `α`
//! the primal form is
//!
//! ```text
//! J(ν) = (1-γ) E_{μ0π}[ν] + α E_{d^D}[f*((B_π ν - ν) / α)]
//! ```
//!
//! and the Lagrangian form is
//!
//! ```text
//! L(ν, ζ) = (1-γ) E_{μ0π}[ν] + E_{d^D}[ζ (B_π ν - ν)] - α E_{d^D}[f(ζ)].
//! ```
//!
//! Writing `A = γP_π - I` and `b = μ0π`, stationarity in `ν` forces
//! `d^D ζ = d^π`, so `ζ* = w = d^π / d^D` for every `f`, and the Bellman
//! residual at the optimum is `α f'(w)`. The exact solver uses this to get
//! `ν*` from one solve of `(I - γP_π) ν = r - α f'(w)`.

use serde::{Deserialize, Serialize};

use crate::dataset::DataSource;
use crate::divergence::{density_ratio, DivergencePair};
use crate::error::{AlgaeError, Result};
use crate::linalg::{dot, inf_norm, DenseMatrix, LuFactorization};
use crate::mdp::{expected_next, inflow, initial_pairs, softmax_score_gradient, PolicyKernel, TabularMdp};
use crate::policy::SoftmaxPolicy;
use crate::tables::{Occupancy, ValueTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerSolver {
    /// Closed form from the stationarity conditions.
    Exact,
    /// Full-batch gradient descent on `ν` with backtracking.
    GradientDescent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgaeConfig {
    pub alpha: f64,
    pub divergence: DivergencePair,
    pub gamma_one_mode: bool,
    pub inner_solver: InnerSolver,
    pub inner_tolerance: f64,
    pub inner_max_iters: usize,
}

impl Default for AlgaeConfig {
    fn default() -> Self {
        Self {
            alpha: 0.01,
            divergence: DivergencePair::quadratic(),
            gamma_one_mode: false,
            inner_solver: InnerSolver::Exact,
            inner_tolerance: 1e-8,
            inner_max_iters: 100_000,
        }
    }
}

impl AlgaeConfig {
    pub fn with_alpha(alpha: f64) -> Self {
        Self {
            alpha,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() {
            return Err(AlgaeError::Config(format!("alpha must be finite, got {}", self.alpha)));
        }
        if !(self.inner_tolerance > 0.0) || !self.inner_tolerance.is_finite() {
            return Err(AlgaeError::Config(format!(
                "inner_tolerance must be positive, got {}",
                self.inner_tolerance
            )));
        }
        if self.inner_max_iters == 0 {
            return Err(AlgaeError::Config("inner_max_iters must be positive".into()));
        }
        Ok(())
    }

    fn nonzero_alpha(&self) -> Result<f64> {
        self.validate()?;
        if self.alpha == 0.0 {
            return Err(AlgaeError::Config(
                "the primal form divides by alpha; use lagrangian_objective when alpha = 0".into(),
            ));
        }
        Ok(self.alpha)
    }
}

/// Saddle point `(ν*, ζ*, λ*)` and its value.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgaeSolution {
    pub nu: ValueTable,
    pub zeta: ValueTable,
    /// Average-reward offset; 0 unless solved in undiscounted mode.
    pub lambda: f64,
    pub objective: f64,
    /// `‖∇_ν‖∞` of the primal objective at `nu`.
    pub inner_grad_norm: f64,
    pub iterations: usize,
}

impl AlgaeSolution {
    /// Largest entry of `ζ`, an empirical stand-in for `W_max`.
    pub fn max_ratio(&self) -> f64 {
        self.zeta.as_slice().iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// How far `ν` leaves the box `[-bound, bound]` (0 when inside).
    pub fn nu_range_excess(&self, bound: f64) -> f64 {
        self.nu
            .as_slice()
            .iter()
            .map(|v| (v.abs() - bound).max(0.0))
            .fold(0.0, f64::max)
    }
}

fn check_data(mdp: &TabularMdp, d_data: &Occupancy) -> Result<()> {
    mdp.check_occupancy(d_data, "d^D")?;
    if d_data.as_slice().iter().any(|&w| !(w >= 0.0)) {
        return Err(AlgaeError::InvalidInput("d^D has a negative entry".into()));
    }
    Ok(())
}

fn residual_table(mdp: &TabularMdp, probs: &[f64], nu: &[f64], discount: f64) -> Vec<f64> {
    expected_next(mdp, probs, nu)
        .iter()
        .zip(mdp.rewards())
        .zip(nu)
        .map(|((p, r), v)| r + discount * p - v)
        .collect()
}

fn primal_value(
    discount: f64,
    init: &[f64],
    nu: &[f64],
    residual: &[f64],
    d_data: &[f64],
    alpha: f64,
    div: &DivergencePair,
) -> f64 {
    let penalty: f64 = d_data
        .iter()
        .zip(residual)
        .map(|(d, e)| d * div.f_star(e / alpha))
        .sum();
    (1.0 - discount) * dot(init, nu) + alpha * penalty
}

/// `(1-γ) b + Aᵀ (d^D ⊙ y)` with `A = γP_π - I`.
fn inner_gradient(mdp: &TabularMdp, probs: &[f64], d_data: &[f64], y: &[f64]) -> Vec<f64> {
    let g = mdp.discount();
    let na = mdp.num_actions();
    let weighted: Vec<f64> = d_data.iter().zip(y).map(|(d, y)| d * y).collect();
    let m = inflow(mdp, &weighted);
    initial_pairs(mdp, probs)
        .iter()
        .enumerate()
        .map(|(i, b)| (1.0 - g) * b + g * probs[i] * m[i / na] - weighted[i])
        .collect()
}

/// `(1-γ) E_{μ0π}[ν] + α E_{d^D}[f*((B_π ν - ν) / α)]`.
pub fn primal_objective(
    mdp: &TabularMdp,
    pi: &SoftmaxPolicy,
    d_data: &Occupancy,
    nu: &ValueTable,
    cfg: &AlgaeConfig,
) -> Result<f64> {
    let alpha = cfg.nonzero_alpha()?;
    check_data(mdp, d_data)?;
    let bnu = mdp.bellman(pi, nu)?;
    let residual: Vec<f64> = bnu.as_slice().iter().zip(nu.as_slice()).map(|(b, v)| b - v).collect();
    let init = initial_pairs(mdp, &pi.probabilities());
    Ok(primal_value(
        mdp.discount(),
        &init,
        nu.as_slice(),
        &residual,
        d_data.as_slice(),
        alpha,
        &cfg.divergence,
    ))
}

/// `(1-γ) E_{μ0π}[ν] + E_{d^D}[ζ (B_π ν - ν)] - α E_{d^D}[f(ζ)]`.
pub fn lagrangian_objective(
    mdp: &TabularMdp,
    pi: &SoftmaxPolicy,
    d_data: &Occupancy,
    nu: &ValueTable,
    zeta: &ValueTable,
    cfg: &AlgaeConfig,
) -> Result<f64> {
    cfg.validate()?;
    check_data(mdp, d_data)?;
    mdp.check_value_table(zeta, "ζ")?;
    let bnu = mdp.bellman(pi, nu)?;
    let init = initial_pairs(mdp, &pi.probabilities());
    let mut value = (1.0 - mdp.discount()) * dot(&init, nu.as_slice());
    for i in 0..d_data.len() {
        let (d, z) = (d_data.as_slice()[i], zeta.as_slice()[i]);
        value += d * (z * (bnu.as_slice()[i] - nu.as_slice()[i]) - cfg.alpha * cfg.divergence.f(z));
    }
    Ok(value)
}

/// `λ + E_{d^D}[ζ (-λ + B_π ν - ν)] - α E_{d^D}[f(ζ)]` with `γ = 1`.
pub fn undiscounted_lagrangian(
    mdp: &TabularMdp,
    pi: &SoftmaxPolicy,
    d_data: &Occupancy,
    lambda: f64,
    nu: &ValueTable,
    zeta: &ValueTable,
    cfg: &AlgaeConfig,
) -> Result<f64> {
    cfg.validate()?;
    check_data(mdp, d_data)?;
    mdp.check_value_table(zeta, "ζ")?;
    let bnu = mdp.bellman_with_discount(pi, nu, 1.0)?;
    let mut value = lambda;
    for i in 0..d_data.len() {
        let (d, z) = (d_data.as_slice()[i], zeta.as_slice()[i]);
        let delta = -lambda + bnu.as_slice()[i] - nu.as_slice()[i];
        value += d * (z * delta - cfg.alpha * cfg.divergence.f(z));
    }
    Ok(value)
}

/// `E_{d^π}[r] - α (E_{d^π}[x] - E_{d^D}[f*(x)])`, the objective before the
/// change of variables `x = (B_π ν - ν) / α`.
pub fn variational_objective(
    mdp: &TabularMdp,
    pi: &SoftmaxPolicy,
    d_data: &Occupancy,
    x: &ValueTable,
    cfg: &AlgaeConfig,
) -> Result<f64> {
    cfg.validate()?;
    check_data(mdp, d_data)?;
    let d_pi = mdp.visitation(pi)?;
    let gap = cfg.divergence.variational_gap(&d_pi, d_data, x)?;
    Ok(dot(d_pi.as_slice(), mdp.rewards()) - cfg.alpha * gap)
}

fn solution_from_nu(
    kernel: &PolicyKernel<'_>,
    d_data: &Occupancy,
    nu: Vec<f64>,
    alpha: f64,
    div: &DivergencePair,
    iterations: usize,
) -> AlgaeSolution {
    let mdp = kernel.mdp();
    let (ns, na) = (mdp.num_states(), mdp.num_actions());
    let residual = kernel.bellman_residual(&nu);
    let zeta: Vec<f64> = residual.iter().map(|e| div.f_star_prime(e / alpha)).collect();
    let grad = inner_gradient(mdp, kernel.probs(), d_data.as_slice(), &zeta);
    let objective = primal_value(
        mdp.discount(),
        &kernel.initial_pairs(),
        &nu,
        &residual,
        d_data.as_slice(),
        alpha,
        div,
    );
    AlgaeSolution {
        nu: ValueTable::from_parts(ns, na, nu),
        zeta: ValueTable::from_parts(ns, na, zeta),
        lambda: 0.0,
        objective,
        inner_grad_norm: inf_norm(&grad),
        iterations,
    }
}

fn exact_solution(
    kernel: &PolicyKernel<'_>,
    d_data: &Occupancy,
    alpha: f64,
    div: &DivergencePair,
) -> Result<AlgaeSolution> {
    let mdp = kernel.mdp();
    let d_pi = kernel.visitation()?;
    let w = density_ratio(&d_pi, d_data)?;
    let rhs: Vec<f64> = mdp
        .rewards()
        .iter()
        .zip(w.as_slice())
        .map(|(r, &w)| r - alpha * div.f_prime(w))
        .collect();
    let nu = kernel.solve_bellman_system(&rhs)?;
    Ok(solution_from_nu(kernel, d_data, nu, alpha, div, 0))
}

/// Closed-form `ν*` for `f(x) = x²/2`, the minimizer of
/// `(1-γ) bᵀν + (1/2α) (r + Aν)ᵀ D (r + Aν)`.
pub fn solve_nu_quadratic(
    mdp: &TabularMdp,
    pi: &SoftmaxPolicy,
    d_data: &Occupancy,
    alpha: f64,
) -> Result<AlgaeSolution> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(AlgaeError::Config(format!(
            "the quadratic closed form needs alpha > 0, got {alpha}"
        )));
    }
    check_data(mdp, d_data)?;
    let kernel = PolicyKernel::new(mdp, pi)?;
    exact_solution(&kernel, d_data, alpha, &DivergencePair::quadratic())
}

/// Inner solve for any divergence by full-batch gradient descent on `ν`
/// (ascent when `α < 0`), with Barzilai–Borwein trial steps and Armijo
/// backtracking. Starts from `Q_π`.
pub fn solve_nu_general(
    mdp: &TabularMdp,
    pi: &SoftmaxPolicy,
    d_data: &Occupancy,
    cfg: &AlgaeConfig,
) -> Result<AlgaeSolution> {
    let alpha = cfg.nonzero_alpha()?;
    check_data(mdp, d_data)?;
    let kernel = PolicyKernel::new(mdp, pi)?;
    density_ratio(&kernel.visitation()?, d_data)?;
    let div = cfg.divergence;
    let sigma = alpha.signum();
    let probs = kernel.probs().to_vec();
    let init = kernel.initial_pairs();
    let d = d_data.as_slice();
    let g = mdp.discount();

    // Value and gradient of σJ.
    let eval = |nu: &[f64]| -> (f64, Vec<f64>) {
        let residual = residual_table(mdp, &probs, nu, g);
        let value = primal_value(g, &init, nu, &residual, d, alpha, &div);
        let y: Vec<f64> = residual.iter().map(|e| div.f_star_prime(e / alpha)).collect();
        let grad = inner_gradient(mdp, &probs, d, &y);
        (sigma * value, grad.into_iter().map(|v| sigma * v).collect())
    };

    let mut nu = kernel.solve_bellman_system(mdp.rewards())?;
    let (mut value, mut grad) = eval(&nu);
    let mut step = 1.0;
    for it in 0..cfg.inner_max_iters {
        let gn = inf_norm(&grad);
        if !gn.is_finite() || !value.is_finite() {
            return Err(AlgaeError::Numerical(format!(
                "inner objective became non-finite after {it} iterations"
            )));
        }
        if gn <= cfg.inner_tolerance {
            return Ok(solution_from_nu(&kernel, d_data, nu, alpha, &div, it));
        }
        let g2 = dot(&grad, &grad);
        let slack = 1e-15 * (1.0 + value.abs());
        let mut t = step;
        let (cand, cv, cg) = loop {
            let cand: Vec<f64> = nu.iter().zip(&grad).map(|(v, gr)| v - t * gr).collect();
            let (cv, cg) = eval(&cand);
            if cv <= value - 1e-4 * t * g2 + slack {
                break (cand, cv, cg);
            }
            t *= 0.5;
            if t < 1e-30 {
                return Err(AlgaeError::NonConvergence {
                    iterations: it,
                    grad_norm: gn,
                });
            }
        };
        let s: Vec<f64> = cand.iter().zip(&nu).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = cg.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        step = if sy > 0.0 { dot(&s, &s) / sy } else { 2.0 * t };
        nu = cand;
        value = cv;
        grad = cg;
    }
    Err(AlgaeError::NonConvergence {
        iterations: cfg.inner_max_iters,
        grad_norm: inf_norm(&grad),
    })
}

/// Undiscounted (`γ = 1`) saddle point with the gauge `E_{d^D}[ν] = 0`.
///
/// Stationarity gives `ζ* = w = d^π / d^D` with `d^π` the stationary
/// distribution, and a residual `-λ + B_π ν - ν = α f'(w)`; `(ν, λ)` then
/// solve the bordered system `[P_π - I, -1; d^Dᵀ, 0] [ν; λ] = [α f'(w) - r; 0]`.
pub fn undiscounted_solve(
    mdp: &TabularMdp,
    pi: &SoftmaxPolicy,
    d_data: &Occupancy,
    cfg: &AlgaeConfig,
) -> Result<AlgaeSolution> {
    cfg.validate()?;
    if !(cfg.alpha > 0.0) {
        return Err(AlgaeError::Config(format!(
            "the undiscounted solve needs alpha > 0, got {}",
            cfg.alpha
        )));
    }
    check_data(mdp, d_data)?;
    let d_pi = mdp.stationary_distribution(pi)?;
    let w = density_ratio(&d_pi, d_data)?;
    let div = cfg.divergence;
    let alpha = cfg.alpha;
    let (ns, na) = (mdp.num_states(), mdp.num_actions());
    let n = ns * na;
    let probs = pi.probabilities();

    let mut bordered = DenseMatrix::zeros(n + 1, n + 1);
    for i in 0..n {
        for (s2, &t) in mdp.next_state_dist(i / na, i % na).iter().enumerate() {
            if t != 0.0 {
                for a2 in 0..na {
                    bordered[(i, s2 * na + a2)] = t * probs[s2 * na + a2];
                }
            }
        }
        bordered[(i, i)] -= 1.0;
        bordered[(i, n)] = -1.0;
        bordered[(n, i)] = d_data.as_slice()[i];
    }
    let mut rhs: Vec<f64> = w
        .as_slice()
        .iter()
        .zip(mdp.rewards())
        .map(|(&w, r)| alpha * div.f_prime(w) - r)
        .collect();
    rhs.push(0.0);
    let sol = LuFactorization::new(&bordered)?.solve(&rhs)?;
    let lambda = sol[n];
    let nu = sol[..n].to_vec();

    let residual: Vec<f64> = residual_table(mdp, &probs, &nu, 1.0)
        .into_iter()
        .map(|e| e - lambda)
        .collect();
    let zeta: Vec<f64> = residual.iter().map(|e| div.f_star_prime(e / alpha)).collect();
    let d = d_data.as_slice();
    let objective = lambda
        + d.iter()
            .zip(&zeta)
            .zip(&residual)
            .map(|((d, z), e)| d * (z * e - alpha * div.f(*z)))
            .sum::<f64>();
    let weighted: Vec<f64> = d.iter().zip(&zeta).map(|(d, z)| d * z).collect();
    let m = inflow(mdp, &weighted);
    let grad_nu = (0..n).map(|i| probs[i] * m[i / na] - weighted[i]);
    let grad_lambda = 1.0 - weighted.iter().sum::<f64>();
    let inner_grad_norm = grad_nu.fold(grad_lambda.abs(), |acc, v| acc.max(v.abs()));
    Ok(AlgaeSolution {
        nu: ValueTable::from_parts(ns, na, nu),
        zeta: ValueTable::from_parts(ns, na, zeta),
        lambda,
        objective,
        inner_grad_norm,
        iterations: 0,
    })
}

/// Inner solve as selected by `cfg`.
pub fn solve(
    mdp: &TabularMdp,
    pi: &SoftmaxPolicy,
    d_data: &Occupancy,
    cfg: &AlgaeConfig,
) -> Result<AlgaeSolution> {
    if cfg.gamma_one_mode {
        return undiscounted_solve(mdp, pi, d_data, cfg);
    }
    match cfg.inner_solver {
        InnerSolver::Exact => {
            let alpha = cfg.nonzero_alpha()?;
            check_data(mdp, d_data)?;
            let kernel = PolicyKernel::new(mdp, pi)?;
            exact_solution(&kernel, d_data, alpha, &cfg.divergence)
        }
        InnerSolver::GradientDescent => solve_nu_general(mdp, pi, d_data, cfg),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyGradient {
    /// Logit gradient, flattened `s * A + a`.
    pub gradient: Vec<f64>,
    pub solution: AlgaeSolution,
}

/// Danskin gradient of the saddle value with respect to the logits: the
/// inner optimum `(ν*, ζ*)` is held fixed and only `π` inside `E_{μ0π}` and
/// `B_π` is differentiated.
pub fn policy_gradient(
    mdp: &TabularMdp,
    pi: &SoftmaxPolicy,
    d_data: &Occupancy,
    cfg: &AlgaeConfig,
) -> Result<PolicyGradient> {
    let solution = solve(mdp, pi, d_data, cfg)?;
    let g = if cfg.gamma_one_mode { 1.0 } else { mdp.discount() };
    let weighted: Vec<f64> = d_data
        .as_slice()
        .iter()
        .zip(solution.zeta.as_slice())
        .map(|(d, z)| d * z)
        .collect();
    let m = inflow(mdp, &weighted);
    let weight: Vec<f64> = m
        .iter()
        .zip(mdp.initial_dist())
        .map(|(m, mu)| if cfg.gamma_one_mode { *m } else { (1.0 - g) * mu + g * m })
        .collect();
    let gradient = softmax_score_gradient(
        &weight,
        &pi.probabilities(),
        solution.nu.as_slice(),
        mdp.num_actions(),
    );
    Ok(PolicyGradient { gradient, solution })
}

/// Behavior-agnostic estimate of the average reward of `π` from `d^D`.
///
/// With `α ≠ 0` this is the saddle value `E_{d^π}[r] - α D_f`. With
/// `α = 0` the unregularized Lagrangian is used: `ζ` solves
/// `(I - γP_πᵀ)(d^D ζ) = (1-γ) μ0π` and the estimate is `E_{d^D}[ζ r]`.
pub fn ope_estimate(
    mdp: &TabularMdp,
    pi: &SoftmaxPolicy,
    d_data: &Occupancy,
    cfg: &AlgaeConfig,
) -> Result<f64> {
    cfg.validate()?;
    check_data(mdp, d_data)?;
    if cfg.alpha != 0.0 {
        return Ok(solve(mdp, pi, d_data, cfg)?.objective);
    }
    let rho = if cfg.gamma_one_mode {
        mdp.stationary_distribution(pi)?
    } else {
        dual_flow(mdp, pi)?
    };
    let zeta = density_ratio(&rho, d_data)?;
    Ok(d_data
        .as_slice()
        .iter()
        .zip(zeta.as_slice())
        .zip(mdp.rewards())
        .map(|((d, z), r)| d * z * r)
        .sum())
}

/// Solution of `(I - γP_πᵀ) ρ = (1-γ) μ0π` without clamping.
fn dual_flow(mdp: &TabularMdp, pi: &SoftmaxPolicy) -> Result<Occupancy> {
    let kernel = PolicyKernel::new(mdp, pi)?;
    let g = mdp.discount();
    let c: Vec<f64> = kernel.initial_pairs().iter().map(|v| (1.0 - g) * v).collect();
    let rho = kernel.solve_transpose_system(&c)?;
    Ok(Occupancy::from_parts(mdp.num_states(), mdp.num_actions(), rho))
}

/// `max_ζ min_ν L(ν, ζ)`. The inner minimum over `ν` is finite only when
/// `(1-γ) b + Aᵀ(d^D ζ) = 0`; that `ζ` is found from the flow equation and
/// `L` is evaluated there.
pub fn max_min_value(
    mdp: &TabularMdp,
    pi: &SoftmaxPolicy,
    d_data: &Occupancy,
    cfg: &AlgaeConfig,
) -> Result<f64> {
    check_data(mdp, d_data)?;
    let zeta = density_ratio(&dual_flow(mdp, pi)?, d_data)?;
    let nu = ValueTable::zeros(mdp.num_states(), mdp.num_actions());
    lagrangian_objective(mdp, pi, d_data, &nu, &zeta, cfg)
}

/// `min_ν max_ζ L(ν, ζ)`: the primal objective at the exact `ν*`.
pub fn min_max_value(
    mdp: &TabularMdp,
    pi: &SoftmaxPolicy,
    d_data: &Occupancy,
    cfg: &AlgaeConfig,
) -> Result<f64> {
    let sol = solve(mdp, pi, d_data, cfg)?;
    primal_objective(mdp, pi, d_data, &sol.nu, cfg)
}

/// One row of a training log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepMetrics {
    pub step: usize,
    pub dual_return: f64,
    pub objective: f64,
    /// `‖ζ - d^π/d^D‖∞`; NaN when not applicable.
    pub zeta_error: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub policy: SoftmaxPolicy,
    pub metrics: Vec<StepMetrics>,
}

impl TrainOutcome {
    pub fn final_return(&self) -> f64 {
        self.metrics.last().map_or(f64::NAN, |m| m.dual_return)
    }
}

/// State of a run at one step, passed to training observers.
pub struct TrainSnapshot<'a> {
    pub step: usize,
    pub policy: &'a SoftmaxPolicy,
    pub solution: &'a AlgaeSolution,
    pub data_distribution: &'a Occupancy,
}

/// Exact evaluation distribution: `d^π` for `γ < 1`, stationary for `γ = 1`.
pub fn evaluation_distribution(mdp: &TabularMdp, pi: &SoftmaxPolicy, gamma_one: bool) -> Result<Occupancy> {
    if gamma_one {
        mdp.stationary_distribution(pi)
    } else {
        mdp.visitation(pi)
    }
}

pub(crate) fn check_learning_rate(learning_rate: f64) -> Result<()> {
    if !learning_rate.is_finite() {
        return Err(AlgaeError::Config(format!(
            "learning rate must be finite, got {learning_rate}"
        )));
    }
    Ok(())
}

/// Alternates an exact inner solve and one ascent step on the logits,
/// starting from the uniform policy. Produces `steps + 1` metric rows.
pub fn train(
    mdp: &TabularMdp,
    source: &DataSource,
    cfg: &AlgaeConfig,
    steps: usize,
    learning_rate: f64,
    seed: u64,
) -> Result<TrainOutcome> {
    let initial = SoftmaxPolicy::uniform(mdp.num_states(), mdp.num_actions());
    train_from(mdp, source, cfg, steps, learning_rate, seed, initial, |_| {})
}

#[allow(clippy::too_many_arguments)]
pub fn train_from<F: FnMut(&TrainSnapshot<'_>)>(
    mdp: &TabularMdp,
    source: &DataSource,
    cfg: &AlgaeConfig,
    steps: usize,
    learning_rate: f64,
    seed: u64,
    initial: SoftmaxPolicy,
    mut observer: F,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    check_learning_rate(learning_rate)?;
    let mut pi = initial;
    let mut metrics = Vec::with_capacity(steps + 1);
    for step in 0..=steps {
        let d_data = source.distribution_for(&pi, seed, step)?;
        let pg = policy_gradient(mdp, &pi, &d_data, cfg)?;
        let d_pi = evaluation_distribution(mdp, &pi, cfg.gamma_one_mode)?;
        let zeta_error = match density_ratio(&d_pi, &d_data) {
            Ok(w) => crate::linalg::max_abs_diff(w.as_slice(), pg.solution.zeta.as_slice()),
            Err(_) => f64::NAN,
        };
        metrics.push(StepMetrics {
            step,
            dual_return: dot(d_pi.as_slice(), mdp.rewards()),
            objective: pg.solution.objective,
            zeta_error,
            grad_norm: inf_norm(&pg.gradient),
        });
        observer(&TrainSnapshot {
            step,
            policy: &pi,
            solution: &pg.solution,
            data_distribution: &d_data,
        });
        if step < steps {
            pi.ascend(&pg.gradient, learning_rate);
        }
    }
    Ok(TrainOutcome { policy: pi, metrics })
}
