mod common;

use algae_core::algae::{
    lagrangian_objective, max_min_value, min_max_value, ope_estimate, policy_gradient, primal_objective, solve,
    solve_nu_general, solve_nu_quadratic, train, undiscounted_solve, variational_objective, AlgaeConfig, InnerSolver,
};
use algae_core::random::{random_mdp, random_occupancy, random_policy, random_values, seeded_rng};
use algae_core::{exact_behavior_distribution, DataSource, DivergencePair, Occupancy, SoftmaxPolicy, TabularMdp, ValueTable};
use common::*;
use proptest::prelude::*;

#[derive(Debug)]
struct Case {
    mdp: TabularMdp,
    pi: SoftmaxPolicy,
    d: Occupancy,
}

fn case(seed: u64, ns: usize, na: usize, gamma: f64) -> Case {
    let mut rng = seeded_rng(seed);
    let mdp = random_mdp(&mut rng, ns, na, gamma);
    let pi = random_policy(&mut rng, ns, na, 1.0);
    let behavior = random_policy(&mut rng, ns, na, 1.0);
    let d = exact_behavior_distribution(&mdp, &behavior).unwrap();
    Case { mdp, pi, d }
}

fn one_state() -> TabularMdp {
    TabularMdp::new(1, 1, vec![1.0], vec![1.0], vec![1.0], 0.5).unwrap()
}

fn ratio(c: &Case) -> Vec<f64> {
    let dpi = visitation_solve(&c.mdp, &c.pi);
    dpi.iter().zip(c.d.as_slice()).map(|(a, b)| a / b).collect()
}

#[test]
fn one_state_closed_forms() {
    let mdp = one_state();
    let pi = SoftmaxPolicy::uniform(1, 1);
    let d = Occupancy::new(1, 1, vec![1.0]).unwrap();
    let sol = solve_nu_quadratic(&mdp, &pi, &d, 0.1).unwrap();
    assert!((sol.nu.as_slice()[0] - 1.8).abs() < 1e-12);
    assert!((sol.zeta.as_slice()[0] - 1.0).abs() < 1e-12);
    assert!((sol.objective - 0.95).abs() < 1e-12);
    let cfg = AlgaeConfig::with_alpha(0.1);
    let nu = ValueTable::new(1, 1, vec![1.8]).unwrap();
    assert!((primal_objective(&mdp, &pi, &d, &nu, &cfg).unwrap() - 0.95).abs() < 1e-12);
    assert!((lagrangian_objective(&mdp, &pi, &d, &nu, &sol.zeta, &cfg).unwrap() - 0.95).abs() < 1e-12);
    assert!((ope_estimate(&mdp, &pi, &d, &cfg).unwrap() - 0.95).abs() < 1e-12);

    let explore = AlgaeConfig { inner_solver: InnerSolver::GradientDescent, ..AlgaeConfig::with_alpha(-0.1) };
    assert!((solve_nu_general(&mdp, &pi, &d, &explore).unwrap().objective - 1.05).abs() < 1e-8);

    let poly = AlgaeConfig { divergence: DivergencePair::polynomial(1.5).unwrap(), ..AlgaeConfig::with_alpha(0.1) };
    assert!((solve_nu_general(&mdp, &pi, &d, &poly).unwrap().zeta.as_slice()[0] - 1.0).abs() < 1e-5);

    let und = AlgaeConfig { gamma_one_mode: true, ..AlgaeConfig::with_alpha(0.1) };
    let mdp1 = mdp.with_discount(1.0).unwrap();
    let s = undiscounted_solve(&mdp1, &pi, &d, &und).unwrap();
    assert!((s.lambda - 0.9).abs() < 1e-12);
    assert!((s.objective - 0.95).abs() < 1e-12);
}

#[test]
fn zero_zeta_and_zero_nu_examples() {
    let c = case(1, 3, 2, 0.9);
    let cfg = AlgaeConfig::with_alpha(0.3);
    let nu = random_values(&mut seeded_rng(2), 3, 2, 1.0);
    let zero = ValueTable::zeros(3, 2);
    let b = initial_pairs(&c.mdp, &c.pi);
    let expected = 0.1 * dot(&b, nu.as_slice()) - 0.3 * cfg.divergence.f(0.0);
    assert!((lagrangian_objective(&c.mdp, &c.pi, &c.d, &nu, &zero, &cfg).unwrap() - expected).abs() < 1e-12);
    let expected: f64 = c
        .d
        .as_slice()
        .iter()
        .zip(c.mdp.rewards())
        .map(|(d, r)| 0.3 * d * 0.5 * (r / 0.3) * (r / 0.3))
        .sum();
    assert!((primal_objective(&c.mdp, &c.pi, &c.d, &zero, &cfg).unwrap() - expected).abs() < 1e-12);
    assert!(primal_objective(&c.mdp, &c.pi, &c.d, &zero, &AlgaeConfig::with_alpha(0.0)).is_err());
}

#[test]
fn quadratic_solve_matches_normal_equations() {
    for seed in 0..10 {
        let c = case(seed, 5, 3, 0.9);
        for alpha in [0.01, 1.0] {
            let sol = solve_nu_quadratic(&c.mdp, &c.pi, &c.d, alpha).unwrap();
            let oracle = normal_equation_nu(&c.mdp, &c.pi, c.d.as_slice(), alpha);
            let scale = 1.0 + oracle.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(sup(sol.nu.as_slice(), &oracle) < 1e-8 * scale);
        }
    }
}

#[test]
fn small_alpha_recovers_q_values() {
    for seed in 0..5 {
        let c = case(seed, 5, 2, 0.9);
        let sol = solve_nu_quadratic(&c.mdp, &c.pi, &c.d, 1e-6).unwrap();
        assert!(sup(sol.nu.as_slice(), &q_solve(&c.mdp, &c.pi, c.mdp.rewards())) < 1e-3);
    }
}

#[test]
fn fenchel_inner_max_by_grid() {
    let c = case(3, 3, 2, 0.9);
    let cfg = AlgaeConfig::with_alpha(0.5);
    let nu = random_values(&mut seeded_rng(4), 3, 2, 1.0);
    let res = residual(&c.mdp, &c.pi, nu.as_slice());
    let b = initial_pairs(&c.mdp, &c.pi);
    let mut value = 0.1 * dot(&b, nu.as_slice());
    for (d, delta) in c.d.as_slice().iter().zip(&res) {
        value += d * maximize_1d(|z| z * delta - 0.5 * cfg.divergence.f(z), -20.0, 20.0, 4000);
    }
    assert!((primal_objective(&c.mdp, &c.pi, &c.d, &nu, &cfg).unwrap() - value).abs() < 1e-6);
}

#[test]
fn general_solver_agrees_with_closed_form() {
    for seed in 0..5 {
        let c = case(seed, 4, 2, 0.9);
        let gd = AlgaeConfig { inner_solver: InnerSolver::GradientDescent, ..AlgaeConfig::with_alpha(0.1) };
        let a = solve_nu_general(&c.mdp, &c.pi, &c.d, &gd).unwrap();
        let b = solve_nu_quadratic(&c.mdp, &c.pi, &c.d, 0.1).unwrap();
        assert!(sup(a.nu.as_slice(), b.nu.as_slice()) < 1e-5);
        assert!((a.objective - b.objective).abs() < 1e-6);
        assert!(a.inner_grad_norm <= gd.inner_tolerance);
    }
}

#[test]
fn polynomial_saddle_identities() {
    for seed in 0..5 {
        let c = case(seed, 4, 3, 0.9);
        for p in [1.5, 3.0] {
            for solver in [InnerSolver::Exact, InnerSolver::GradientDescent] {
                let cfg = AlgaeConfig {
                    divergence: DivergencePair::polynomial(p).unwrap(),
                    inner_solver: solver,
                    ..AlgaeConfig::with_alpha(0.1)
                };
                let sol = solve(&c.mdp, &c.pi, &c.d, &cfg).unwrap();
                let w = ratio(&c);
                let dpi = visitation_solve(&c.mdp, &c.pi);
                let df: f64 = c.d.as_slice().iter().zip(&w).map(|(d, w)| d * cfg.divergence.f(*w)).sum();
                let expected = dot(&dpi, c.mdp.rewards()) - 0.1 * df;
                assert!((sol.objective - expected).abs() < 1e-6, "p={p} {solver:?}");
                assert!(sup(sol.zeta.as_slice(), &w) < 1e-4, "p={p} {solver:?}");
            }
        }
    }
}

#[test]
fn gradient_vanishes_for_constant_rewards_on_policy() {
    let mut rng = seeded_rng(12);
    let mdp = random_mdp(&mut rng, 4, 2, 0.9).with_rewards(vec![0.7; 8]).unwrap();
    let pi = random_policy(&mut rng, 4, 2, 1.0);
    let d = exact_behavior_distribution(&mdp, &pi).unwrap();
    let pg = policy_gradient(&mdp, &pi, &d, &AlgaeConfig::with_alpha(1e-6)).unwrap();
    assert!(pg.gradient.iter().all(|g| g.abs() < 1e-6));
}

#[test]
fn alpha_monotonicity() {
    for seed in 0..10 {
        let c = case(seed, 4, 2, 0.9);
        let v: Vec<f64> = [0.01, 0.1, 1.0]
            .iter()
            .map(|&a| solve(&c.mdp, &c.pi, &c.d, &AlgaeConfig::with_alpha(a)).unwrap().objective)
            .collect();
        assert!(v[0] >= v[1] && v[1] >= v[2], "{v:?}");
    }
}

#[test]
fn nu_stays_in_range_box() {
    let c = case(5, 5, 2, 0.9);
    let sol = solve(&c.mdp, &c.pi, &c.d, &AlgaeConfig::with_alpha(0.01)).unwrap();
    let bound = (1.0 + 0.01 * sol.max_ratio()) / (1.0 - 0.9);
    assert_eq!(sol.nu_range_excess(bound), 0.0);
}

#[test]
fn zero_learning_rate_keeps_metrics_constant() {
    let c = case(6, 3, 2, 0.9);
    let out = train(&c.mdp, &DataSource::Fixed(c.d.clone()), &AlgaeConfig::default(), 4, 0.0, 0).unwrap();
    assert_eq!(out.policy, SoftmaxPolicy::uniform(3, 2));
    assert!(out.metrics.windows(2).all(|w| w[0].dual_return == w[1].dual_return && w[0].objective == w[1].objective));
}

#[test]
fn training_improves_return() {
    let c = case(7, 5, 3, 0.9);
    let out = train(&c.mdp, &DataSource::Fixed(c.d.clone()), &AlgaeConfig::default(), 200, 1.0, 0).unwrap();
    assert!(out.final_return() > out.metrics[0].dual_return);
    assert!(out.metrics.iter().all(|m| m.zeta_error < 1e-6));
}

#[test]
fn max_min_and_min_max_agree() {
    for seed in 0..5 {
        let c = case(seed, 4, 3, 0.95);
        let cfg = AlgaeConfig::with_alpha(0.2);
        let a = max_min_value(&c.mdp, &c.pi, &c.d, &cfg).unwrap();
        let b = min_max_value(&c.mdp, &c.pi, &c.d, &cfg).unwrap();
        assert!((a - b).abs() < 1e-9);
    }
}

fn solver_case() -> impl Strategy<Value = (Case, f64)> {
    (0u64..5000, 1usize..6, 1usize..4, prop::sample::select(vec![0.5, 0.9, 0.99]), prop::sample::select(vec![0.01, 0.1, 1.0]))
        .prop_map(|(seed, ns, na, g, alpha)| (case(seed, ns, na, g), alpha))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn residual_identity_and_nonnegative_zeta((c, alpha) in solver_case()) {
        let sol = solve_nu_quadratic(&c.mdp, &c.pi, &c.d, alpha).unwrap();
        let res = residual(&c.mdp, &c.pi, sol.nu.as_slice());
        let w = ratio(&c);
        let err = res.iter().zip(&w).map(|(r, w)| (r - alpha * w).abs()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-7, "residual identity {err}");
        prop_assert!(sol.zeta.as_slice().iter().all(|&z| z >= -1e-8));
    }

    #[test]
    fn change_of_variables_any_nu((c, alpha) in solver_case(), scale in 0.1f64..10.0, seed in 0u64..1000) {
        let cfg = AlgaeConfig::with_alpha(alpha);
        let nu = random_values(&mut seeded_rng(seed), c.mdp.num_states(), c.mdp.num_actions(), scale);
        let x: Vec<f64> = residual(&c.mdp, &c.pi, nu.as_slice()).iter().map(|r| r / alpha).collect();
        let x = ValueTable::new(c.mdp.num_states(), c.mdp.num_actions(), x).unwrap();
        let lhs = variational_objective(&c.mdp, &c.pi, &c.d, &x, &cfg).unwrap();
        let rhs = primal_objective(&c.mdp, &c.pi, &c.d, &nu, &cfg).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
    }

    #[test]
    fn nu_star_minimizes_primal((c, alpha) in solver_case(), seed in 0u64..1000) {
        let cfg = AlgaeConfig::with_alpha(alpha);
        let sol = solve(&c.mdp, &c.pi, &c.d, &cfg).unwrap();
        let dir = random_values(&mut seeded_rng(seed), c.mdp.num_states(), c.mdp.num_actions(), 0.1);
        let moved: Vec<f64> = sol.nu.as_slice().iter().zip(dir.as_slice()).map(|(a, b)| a + b).collect();
        let moved = ValueTable::new(c.mdp.num_states(), c.mdp.num_actions(), moved).unwrap();
        prop_assert!(primal_objective(&c.mdp, &c.pi, &c.d, &moved, &cfg).unwrap() >= sol.objective - 1e-12);
    }

    #[test]
    fn ope_with_random_data_distribution(seed in 0u64..5000) {
        let mut rng = seeded_rng(seed);
        let mdp = random_mdp(&mut rng, 4, 2, 0.9);
        let pi = random_policy(&mut rng, 4, 2, 1.0);
        let d = random_occupancy(&mut rng, 4, 2, 0.05);
        let est = ope_estimate(&mdp, &pi, &d, &AlgaeConfig::with_alpha(0.0)).unwrap();
        prop_assert!((est - dot(&visitation_solve(&mdp, &pi), mdp.rewards())).abs() <= 1e-10);
    }
}
