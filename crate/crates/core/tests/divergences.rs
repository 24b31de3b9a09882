mod common;

use algae_core::random::{random_occupancy, random_values, seeded_rng};
use algae_core::{f_divergence, variational_gap, AlgaeError, DivergencePair, Occupancy, ValueTable};
use common::maximize_1d;
use proptest::prelude::*;

fn families() -> Vec<DivergencePair> {
    let mut out = vec![DivergencePair::quadratic()];
    for p in [1.5, 2.0, 3.0, 4.0] {
        out.push(DivergencePair::polynomial(p).unwrap());
    }
    out
}

#[test]
fn quadratic_and_hoelder_values() {
    let q = DivergencePair::quadratic();
    assert_eq!(q.f(2.0), 2.0);
    assert_eq!(q.f_star(0.0), 0.0);
    assert_eq!(q.f_star_prime(q.f_prime(3.7)), 3.7);
    let p = DivergencePair::polynomial(1.5).unwrap();
    assert!((p.f(2.0) - 8.0 / 3.0).abs() < 1e-12);
    let two = DivergencePair::polynomial(2.0).unwrap();
    for i in -50..=50 {
        let x = i as f64 / 10.0;
        assert!((two.f(x) - q.f(x)).abs() < 1e-12);
        assert!((two.f_star(x) - q.f_star(x)).abs() < 1e-12);
    }
    assert!(matches!(DivergencePair::polynomial(1.0), Err(AlgaeError::Domain(_))));
}

#[test]
fn conjugacy_by_independent_search() {
    for div in families() {
        for i in -40..=40 {
            let x = i as f64 / 10.0;
            let sup = maximize_1d(|y| x * y - div.f_star(y), -60.0, 60.0, 24_000);
            assert!((div.f(x) - sup).abs() < 1e-8, "{div} at {x}: {} vs {sup}", div.f(x));
        }
    }
}

#[test]
fn fenchel_young_and_inverse_derivatives_on_grid() {
    let grid: Vec<f64> = (-50..=50).map(|i| i as f64 / 10.0).collect();
    for div in families() {
        for &x in &grid {
            assert!((div.f_star_prime(div.f_prime(x)) - x).abs() < 1e-8, "{div} at {x}");
            let y = div.f_prime(x);
            assert!((x * y - div.f(x) - div.f_star(y)).abs() < 1e-8);
            for &y in &grid {
                assert!(x * y <= div.f(x) + div.f_star(y) + 1e-9);
            }
        }
        for w in grid.windows(3) {
            assert!(div.f(w[0]) - 2.0 * div.f(w[1]) + div.f(w[2]) >= -1e-10);
        }
    }
}

#[test]
fn divergence_examples() {
    let d = Occupancy::new(1, 2, vec![0.5, 0.5]).unwrap();
    let pi = Occupancy::new(1, 2, vec![0.75, 0.25]).unwrap();
    let q = DivergencePair::quadratic();
    assert!((f_divergence(&pi, &d, &q).unwrap() - 0.625).abs() < 1e-15);
    assert!((f_divergence(&d, &d, &q).unwrap() - 0.5).abs() < 1e-15);
    let p = DivergencePair::polynomial(1.5).unwrap();
    assert!((f_divergence(&d, &d, &p).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    let zero = ValueTable::zeros(1, 2);
    assert_eq!(variational_gap(&pi, &d, &zero, &q).unwrap(), 0.0);
}

#[test]
fn coverage_violation_names_the_pair() {
    let d = Occupancy::new(1, 3, vec![0.5, 0.5, 0.0]).unwrap();
    let pi = Occupancy::new(1, 3, vec![0.5, 0.25, 0.25]).unwrap();
    match f_divergence(&pi, &d, &DivergencePair::quadratic()) {
        Err(AlgaeError::Support { state: 0, action: 2, .. }) => {}
        other => panic!("expected support error, got {other:?}"),
    }
    let both_zero = Occupancy::new(1, 3, vec![0.5, 0.5, 0.0]).unwrap();
    assert!(f_divergence(&both_zero, &d, &DivergencePair::quadratic()).is_ok());
}

#[test]
fn parse_names() {
    assert_eq!("quadratic".parse::<DivergencePair>().unwrap(), DivergencePair::quadratic());
    assert!("polynomial:3".parse::<DivergencePair>().is_ok());
    assert!("polynomial:0.5".parse::<DivergencePair>().is_err());
    assert!("kl".parse::<DivergencePair>().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn variational_gap_bounded_by_divergence(seed in 0u64..10_000, p in 1.2f64..5.0, scale in 0.1f64..4.0) {
        let mut rng = seeded_rng(seed);
        let d_pi = random_occupancy(&mut rng, 3, 3, 0.0);
        let d_d = random_occupancy(&mut rng, 3, 3, 0.0);
        let x = random_values(&mut rng, 3, 3, scale);
        for div in [DivergencePair::quadratic(), DivergencePair::polynomial(p).unwrap()] {
            let df = f_divergence(&d_pi, &d_d, &div).unwrap();
            prop_assert!(variational_gap(&d_pi, &d_d, &x, &div).unwrap() <= df + 1e-9);
            let best: Vec<f64> = d_pi.as_slice().iter().zip(d_d.as_slice()).map(|(a, b)| div.f_prime(a / b)).collect();
            let best = ValueTable::new(3, 3, best).unwrap();
            prop_assert!((variational_gap(&d_pi, &d_d, &best, &div).unwrap() - df).abs() <= 1e-9);
        }
    }

    #[test]
    fn self_divergence_is_f_of_one(seed in 0u64..10_000, p in 1.2f64..5.0) {
        let mut rng = seeded_rng(seed);
        let d = random_occupancy(&mut rng, 4, 2, 0.0);
        let div = DivergencePair::polynomial(p).unwrap();
        prop_assert!((f_divergence(&d, &d, &div).unwrap() - div.f(1.0)).abs() <= 1e-12);
    }
}
