mod common;

use algae_core::algae::{solve_nu_quadratic, AlgaeConfig};
use algae_core::baselines::actor_critic_direction;
use algae_core::dataset::expected_rollout_distribution;
use algae_core::envs::{residual_map, residual_values, FourRooms, FourRoomsSpec, InitialCells, GRID_SIZE};
use algae_core::random::{random_mdp, random_occupancy, random_policy, seeded_rng};
use algae_core::{collect, empirical_distribution, exact_behavior_distribution, DivergencePair, SoftmaxPolicy, ValueTable};
use common::*;

fn rooms() -> FourRooms {
    FourRooms::new(FourRoomsSpec::default()).unwrap()
}

#[test]
fn uniform_policy_return_near_behavior_baseline() {
    let r = rooms();
    let mdp = r.mdp(0.97, InitialCells::Start).unwrap();
    let j = mdp.dual_return(&SoftmaxPolicy::uniform(r.num_states(), 4)).unwrap();
    assert!((j - 0.03).abs() <= 0.015, "uniform return {j}");
}

#[test]
fn reachability_by_breadth_first_search() {
    let r = rooms();
    let mdp = r.mdp(0.99, InitialCells::Start).unwrap();
    let n = r.num_states();
    let mut reaches = vec![false; n];
    reaches[r.goal_state()] = true;
    let mut changed = true;
    while changed {
        changed = false;
        for s in 0..n {
            if !reaches[s] && (0..4).any(|a| (0..n).any(|t| reaches[t] && mdp.transition(s, a, t) > 0.0)) {
                reaches[s] = true;
                changed = true;
            }
        }
    }
    assert!(reaches.iter().all(|&x| x));
}

#[test]
fn slip_rows_remain_distributions() {
    let r = FourRooms::new(FourRoomsSpec { slip: 0.3, ..FourRoomsSpec::default() }).unwrap();
    let mdp = r.mdp(0.99, InitialCells::UniformOpen).unwrap();
    for s in 0..r.num_states() {
        for a in 0..4 {
            let row = mdp.next_state_dist(s, a);
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(row.iter().filter(|&&p| p > 0.0).count() >= 2 || s == r.goal_state());
        }
    }
}

#[test]
fn gridwalk_visitation_covers_every_cell() {
    let r = rooms();
    let mdp = r.mdp(0.99, InitialCells::Start).unwrap();
    let d = visitation_solve(&mdp, &r.gridwalk_behavior(0.2).unwrap());
    assert!(state_marginal(&d, 4).iter().all(|&m| m > 0.0));
}

#[test]
fn collected_counts_and_coverage() {
    let r = rooms();
    let mdp = r.mdp(0.97, InitialCells::UniformOpen).unwrap();
    let uniform = SoftmaxPolicy::uniform(r.num_states(), 4);
    let data = collect(&mdp, &uniform, 500, 10, 0).unwrap();
    assert_eq!(data.len(), 5000);
    assert_eq!(data.initial_states.len(), 500);
    let emp = empirical_distribution(&data, r.num_states(), 4, 0.0).unwrap();
    let expected = expected_rollout_distribution(&mdp, &uniform, 10).unwrap();
    let reachable: Vec<usize> = (0..emp.len()).filter(|&i| expected.as_slice()[i] > 0.0).collect();
    let hits: Vec<f64> = reachable.iter().map(|&i| emp.as_slice()[i]).collect();
    let (lo, hi) = hits.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    assert!(lo > 0.0 && (hi / lo).is_finite(), "min {lo} max {hi}");
    let tv: f64 = emp.as_slice().iter().zip(expected.as_slice()).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
    assert!(tv < 0.15, "total variation {tv}");
    for t in &data.transitions {
        assert_eq!(t.r, mdp.reward(t.s, t.a));
    }
}

#[test]
fn residual_map_at_saddle_is_ratio_pattern() {
    let r = rooms();
    let mdp = r.mdp(0.99, InitialCells::Start).unwrap();
    let pi = r.gridwalk_behavior(0.5).unwrap();
    let behavior = SoftmaxPolicy::uniform(r.num_states(), 4);
    let d = exact_behavior_distribution(&r.mdp(0.99, InitialCells::UniformOpen).unwrap(), &behavior).unwrap();
    let alpha = 0.01;
    let sol = solve_nu_quadratic(&mdp, &pi, &d, alpha).unwrap();
    let map = residual_map(&r, &mdp, &pi, &sol.nu, alpha, &DivergencePair::quadratic(), 7).unwrap();
    let dpi = visitation_solve(&mdp, &pi);
    let w: Vec<f64> = dpi.iter().zip(d.as_slice()).map(|(a, b)| a / b).collect();
    let per_state = state_marginal(&w, 4);
    assert_eq!(map.step, 7);
    assert_eq!(map.grid.len(), GRID_SIZE);
    for (s, &(row, col)) in r.cells().iter().enumerate() {
        assert!((map.grid[row][col] - per_state[s]).abs() < 1e-6 * (1.0 + per_state[s]));
    }
    let json = serde_json::to_value(&map).unwrap();
    assert_eq!(json["grid"].as_array().unwrap().len(), 11);
    assert_eq!(json["step"], 7);
}

#[test]
fn zero_nu_map_is_scaled_reward() {
    let r = rooms();
    let mdp = r.mdp(0.99, InitialCells::Start).unwrap();
    let pi = SoftmaxPolicy::uniform(r.num_states(), 4);
    let zero = ValueTable::zeros(r.num_states(), 4);
    let div = DivergencePair::polynomial(1.5).unwrap();
    let m = residual_values(&mdp, &pi, &zero, 0.5, &div).unwrap();
    for (s, v) in m.iter().enumerate() {
        let expected: f64 = (0..4).map(|a| div.f_star_prime(mdp.reward(s, a) / 0.5)).sum();
        assert!((v - expected).abs() < 1e-12);
    }
}

#[test]
fn actor_critic_direction_is_frozen_surrogate_gradient() {
    let mut rng = seeded_rng(3);
    let mdp = random_mdp(&mut rng, 5, 3, 0.9);
    let pi = random_policy(&mut rng, 5, 3, 1.0);
    let d = random_occupancy(&mut rng, 5, 3, 0.1);
    let q = q_solve(&mdp, &pi, mdp.rewards());
    let weight = state_marginal(d.as_slice(), 3);
    let surrogate = |th: &[f64]| {
        let p = probs(&SoftmaxPolicy::new(5, 3, th.to_vec()).unwrap());
        (0..15).map(|i| weight[i / 3] * p[i] * q[i]).sum::<f64>()
    };
    let fd = finite_difference(surrogate, pi.logits(), 1e-5);
    let step = actor_critic_direction(&mdp, &pi, &d).unwrap();
    assert!(sup(&step.gradient, &fd) < 1e-9);
    assert!(sup(&step.gradient, &score_gradient(&weight, &pi, &q)) < 1e-12);
    assert!((step.surrogate - surrogate(pi.logits())).abs() < 1e-12);
}

#[test]
fn algae_config_json_defaults() {
    let cfg: AlgaeConfig = serde_json::from_str(&serde_json::to_string(&AlgaeConfig::default()).unwrap()).unwrap();
    assert_eq!(cfg.alpha, 0.01);
}
