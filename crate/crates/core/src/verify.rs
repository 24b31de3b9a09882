//! Runtime invariant checks on seeded random MDPs, reported as a table.

use std::fmt::Write as _;

use serde::Serialize;

use crate::algae::{self, AlgaeConfig, InnerSolver};
use crate::dataset::{collect, empirical_distribution};
use crate::divergence::{f_divergence, DivergencePair};
use crate::envs::{FourRooms, FourRoomsSpec, InitialCells};
use crate::error::Result;
use crate::linalg::{dot, inf_norm, max_abs_diff};
use crate::mdp::TabularMdp;
use crate::policy::SoftmaxPolicy;
use crate::random::{random_mdp, random_occupancy, random_policy, seeded_rng};
use crate::tables::{Occupancy, ValueTable};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    /// Worst error over all trials.
    pub error: f64,
    pub tolerance: f64,
    pub trials: usize,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.error <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn table(&self) -> String {
        let mut out = format!("{:<38} {:>12} {:>10} {:>7}  result\n", "check", "max error", "tolerance", "trials");
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{:<38} {:>12.3e} {:>10.1e} {:>7}  {}",
                c.name,
                c.error,
                c.tolerance,
                c.trials,
                if c.passed() { "PASS" } else { "FAIL" }
            );
        }
        out
    }
}

struct Case {
    mdp: TabularMdp,
    pi: SoftmaxPolicy,
    d: Occupancy,
}

fn value_iteration_q(mdp: &TabularMdp, pi: &SoftmaxPolicy) -> Result<Vec<f64>> {
    let mut q = ValueTable::zeros(mdp.num_states(), mdp.num_actions());
    let sweeps = ((1e-13f64).ln() / mdp.discount().ln()).ceil() as usize + 10;
    for _ in 0..sweeps {
        q = mdp.bellman(pi, &q)?;
    }
    Ok(q.into_vec())
}

fn finite_difference_gradient(
    mdp: &TabularMdp,
    pi: &SoftmaxPolicy,
    d: &Occupancy,
    cfg: &AlgaeConfig,
) -> Result<Vec<f64>> {
    let h = 1e-5;
    let mut grad = vec![0.0; pi.logits().len()];
    for (i, g) in grad.iter_mut().enumerate() {
        let mut plus = pi.clone();
        plus.logits_mut()[i] += h;
        let mut minus = pi.clone();
        minus.logits_mut()[i] -= h;
        let fp = algae::solve(mdp, &plus, d, cfg)?.objective;
        let fm = algae::solve(mdp, &minus, d, cfg)?.objective;
        *g = (fp - fm) / (2.0 * h);
    }
    Ok(grad)
}

/// Runs every check over `trials` random MDPs for each seed.
pub fn run_checks(seeds: &[u64], trials: usize) -> Result<VerifyReport> {
    let mut cases = Vec::with_capacity(trials * seeds.len());
    for &seed in seeds {
        let mut rng = seeded_rng(seed);
        for t in 0..trials {
            let (ns, na) = (3 + t % 4, 2 + t % 3);
            let gamma = [0.5, 0.9, 0.99][t % 3];
            cases.push(Case {
                mdp: random_mdp(&mut rng, ns, na, gamma),
                pi: random_policy(&mut rng, ns, na, 1.0),
                d: random_occupancy(&mut rng, ns, na, 0.05),
            });
        }
    }
    let mut checks = Vec::new();
    let mut push = |name, tolerance, errs: Vec<f64>| {
        checks.push(CheckResult {
            name,
            error: errs.iter().cloned().fold(0.0, f64::max),
            tolerance,
            trials: errs.len(),
        })
    };

    let quad = AlgaeConfig::default();
    let poly = AlgaeConfig {
        divergence: DivergencePair::polynomial(1.5)?,
        ..AlgaeConfig::default()
    };

    let mut errs = Vec::new();
    for c in &cases {
        let q = c.mdp.q_values(&c.pi)?;
        errs.push(max_abs_diff(q.as_slice(), &value_iteration_q(&c.mdp, &c.pi)?));
    }
    push("q_values vs value iteration", 1e-9, errs);

    let mut errs = Vec::new();
    for c in &cases {
        errs.push((c.mdp.primal_return(&c.pi)? - c.mdp.dual_return(&c.pi)?).abs());
    }
    push("primal return = dual return", 1e-10, errs);

    let mut errs = Vec::new();
    for c in &cases {
        let d = c.mdp.visitation(&c.pi)?;
        let back = c.mdp.transpose_bellman(&c.pi, &d)?;
        errs.push(max_abs_diff(back.as_slice(), d.as_slice()).max((d.sum() - 1.0).abs()));
    }
    push("visitation flow constraint", 1e-10, errs);

    let mut errs = Vec::new();
    for div in [DivergencePair::quadratic(), DivergencePair::polynomial(1.5)?, DivergencePair::polynomial(3.0)?] {
        let report = div.grid_check();
        errs.push(if report.passes(1e-6) { 0.0 } else { f64::INFINITY });
    }
    push("Fenchel conjugate grid", 0.0, errs);

    for (name, cfg) in [("saddle value, quadratic", &quad), ("saddle value, polynomial 1.5", &poly)] {
        let mut errs = Vec::new();
        for c in &cases {
            let sol = algae::solve(&c.mdp, &c.pi, &c.d, cfg)?;
            let d_pi = c.mdp.visitation(&c.pi)?;
            let expected = dot(d_pi.as_slice(), c.mdp.rewards()) - cfg.alpha * f_divergence(&d_pi, &c.d, &cfg.divergence)?;
            errs.push((sol.objective - expected).abs());
        }
        push(name, 1e-8, errs);
    }

    let mut errs = Vec::new();
    for c in &cases {
        let sol = algae::solve(&c.mdp, &c.pi, &c.d, &quad)?;
        let w = crate::divergence::density_ratio(&c.mdp.visitation(&c.pi)?, &c.d)?;
        errs.push(max_abs_diff(sol.zeta.as_slice(), w.as_slice()));
    }
    push("zeta* = d_pi / d_D", 1e-8, errs);

    let mut errs = Vec::new();
    for c in &cases {
        let sol = algae::solve(&c.mdp, &c.pi, &c.d, &quad)?;
        let lag = algae::lagrangian_objective(&c.mdp, &c.pi, &c.d, &sol.nu, &sol.zeta, &quad)?;
        errs.push((lag - sol.objective).abs());
    }
    push("Lagrangian = primal at saddle", 1e-9, errs);

    let mut errs = Vec::new();
    for c in &cases {
        let pg = algae::policy_gradient(&c.mdp, &c.pi, &c.d, &quad)?;
        let w = crate::divergence::density_ratio(&c.mdp.visitation(&c.pi)?, &c.d)?;
        let shaped: Vec<f64> = c
            .mdp
            .rewards()
            .iter()
            .zip(w.as_slice())
            .map(|(r, w)| r - quad.alpha * quad.divergence.f_prime(*w))
            .collect();
        let shaped = ValueTable::new(c.mdp.num_states(), c.mdp.num_actions(), shaped)?;
        let on_policy = c.mdp.on_policy_policy_gradient(&c.pi, Some(&shaped))?;
        errs.push(max_abs_diff(&pg.gradient, &on_policy));
    }
    push("gradient = shaped on-policy gradient", 1e-8, errs);

    let mut errs = Vec::new();
    for c in &cases {
        let sol = algae::solve(&c.mdp, &c.pi, &c.d, &quad)?;
        let nu = ValueTable::new(c.mdp.num_states(), c.mdp.num_actions(), sol.nu.as_slice().iter().map(|v| v * 0.5 + 0.1).collect())?;
        let bnu = c.mdp.bellman(&c.pi, &nu)?;
        let x: Vec<f64> = bnu.as_slice().iter().zip(nu.as_slice()).map(|(b, v)| (b - v) / quad.alpha).collect();
        let x = ValueTable::new(c.mdp.num_states(), c.mdp.num_actions(), x)?;
        let lhs = algae::variational_objective(&c.mdp, &c.pi, &c.d, &x, &quad)?;
        let rhs = algae::primal_objective(&c.mdp, &c.pi, &c.d, &nu, &quad)?;
        errs.push((lhs - rhs).abs());
    }
    push("change of variables", 1e-9, errs);

    let mut errs = Vec::new();
    for c in &cases {
        let a = algae::min_max_value(&c.mdp, &c.pi, &c.d, &quad)?;
        let b = algae::max_min_value(&c.mdp, &c.pi, &c.d, &quad)?;
        errs.push((a - b).abs());
    }
    push("min-max = max-min", 1e-8, errs);

    let mut errs = Vec::new();
    for c in cases.iter().take(6) {
        let pg = algae::policy_gradient(&c.mdp, &c.pi, &c.d, &quad)?;
        let fd = finite_difference_gradient(&c.mdp, &c.pi, &c.d, &quad)?;
        errs.push(max_abs_diff(&pg.gradient, &fd) / (1.0 + inf_norm(&fd)));
    }
    push("policy gradient vs finite diff", 1e-6, errs);

    let mut errs = Vec::new();
    let ope = AlgaeConfig::with_alpha(0.0);
    for c in &cases {
        errs.push((algae::ope_estimate(&c.mdp, &c.pi, &c.d, &ope)? - c.mdp.dual_return(&c.pi)?).abs());
    }
    push("alpha = 0 estimate = true return", 1e-10, errs);

    let mut errs = Vec::new();
    let gd = AlgaeConfig {
        inner_solver: InnerSolver::GradientDescent,
        ..AlgaeConfig::default()
    };
    for c in cases.iter().filter(|c| c.mdp.discount() <= 0.9).take(6) {
        let exact = algae::solve(&c.mdp, &c.pi, &c.d, &quad)?;
        let approx = algae::solve(&c.mdp, &c.pi, &c.d, &gd)?;
        errs.push((exact.objective - approx.objective).abs());
    }
    push("gradient descent inner solver", 1e-7, errs);

    let mut errs = Vec::new();
    let undiscounted = AlgaeConfig {
        gamma_one_mode: true,
        ..AlgaeConfig::default()
    };
    for c in &cases {
        let sol = algae::solve(&c.mdp, &c.pi, &c.d, &undiscounted)?;
        let stat = c.mdp.stationary_distribution(&c.pi)?;
        let expected = dot(stat.as_slice(), c.mdp.rewards()) - undiscounted.alpha * f_divergence(&stat, &c.d, &undiscounted.divergence)?;
        errs.push((sol.objective - expected).abs());
    }
    push("undiscounted saddle value", 1e-8, errs);

    let rooms = FourRooms::new(FourRoomsSpec::default())?;
    let goal = rooms.goal_state();
    let unreachable = rooms.path_lengths_to(goal).iter().filter(|l| l.is_none()).count();
    push("Four Rooms goal reachable", 0.0, vec![unreachable as f64]);

    let mdp = rooms.mdp(0.99, InitialCells::Start)?;
    let d = mdp.visitation(&rooms.gridwalk_behavior(0.2)?)?;
    let uncovered = d.state_marginal().iter().filter(|&&m| !(m > 0.0)).count();
    push("GridWalk visitation covers grid", 0.0, vec![uncovered as f64]);

    let mut errs = Vec::new();
    for (i, c) in cases.iter().take(4).enumerate() {
        let data = collect(&c.mdp, &c.pi, 20, 10, i as u64)?;
        let emp = empirical_distribution(&data, c.mdp.num_states(), c.mdp.num_actions(), 0.0)?;
        errs.push((emp.sum() - 1.0).abs() + if data.len() == 200 { 0.0 } else { 1.0 });
    }
    push("dataset counts and normalization", 1e-12, errs);

    Ok(VerifyReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes() {
        let report = run_checks(&[11, 12], 4).unwrap();
        assert!(report.all_passed(), "{}", report.table());
        assert!(report.table().contains("PASS"));
    }
}
