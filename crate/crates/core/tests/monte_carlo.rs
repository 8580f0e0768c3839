//! Monte-Carlo checks of the analytic formulas.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ruc_core::analytics::{
    expected_score, finite_horizon_value, multi_collision_value, score_variance, HorizonStrategy,
    Role,
};
use ruc_core::instances::{random_irreducible, random_irreducible_zero_diagonal, random_simplex};
use ruc_core::linalg::{PayoffMatrix, SimplexVector};
use ruc_core::simulator::{
    default_max_rounds, deviation_probe, monte_carlo, CollisionRule, MonteCarloConfig,
    StrategyAgent,
};
use ruc_core::solver::solve;

fn m(rows: &[&[f64]]) -> PayoffMatrix {
    PayoffMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
}

fn anti() -> PayoffMatrix {
    m(&[&[0.0, 2.0], &[1.0, 0.0]])
}

fn stationary(v: &SimplexVector) -> StrategyAgent {
    StrategyAgent::stationary(v.clone())
}

#[test]
fn uniform_pair_mean_and_variance() {
    let a = anti();
    let u = SimplexVector::uniform(2);
    let cfg = MonteCarloConfig::new(1_000_000, 7, 10_000);
    let r = monte_carlo(&a, &a, &stationary(&u), &stationary(&u), &cfg).unwrap();
    let mean = expected_score(&a, &u, &u).unwrap().to_f64();
    assert_eq!(mean, 1.5);
    assert!((r.max_total.mean - mean).abs() <= 3.0 * r.max_total.std_error, "{:?}", r.max_total);
    let var = score_variance(&a, &u, &u).unwrap();
    assert!((r.max_total.variance - var).abs() <= 4.0 * r.max_total.variance_std_error);
    assert!((r.rounds.mean - 2.0).abs() <= 4.0 * r.rounds.std_error);
    assert_eq!(r.truncation_rate, 0.0);
}

#[test]
fn random_instances_match_formulas() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for k in 0..6 {
        let n = 2 + k % 4;
        let a = random_irreducible(&mut rng, n, 3.0);
        let x = random_simplex(&mut rng, n, 1.0);
        let y = random_simplex(&mut rng, n, 1.0);
        let cfg = MonteCarloConfig::new(200_000, 100 + k as u64, default_max_rounds(&x, &y));
        let r = monte_carlo(&a, &a, &stationary(&x), &stationary(&y), &cfg).unwrap();
        let mean = expected_score(&a, &x, &y).unwrap().to_f64();
        let var = score_variance(&a, &x, &y).unwrap();
        assert!((r.max_total.mean - mean).abs() <= 4.0 * r.max_total.std_error);
        assert!((r.max_total.variance - var).abs() <= 4.0 * r.max_total.variance_std_error);
        assert!((r.rounds.mean - 1.0 / x.dot(&y)).abs() <= 4.0 * r.rounds.std_error);
        if x.dot(&y) >= 0.2 {
            assert!(r.truncation_rate < 1e-6);
        }
    }
}

#[test]
fn multi_collision_scales_the_mean() {
    let a = anti();
    let u = SimplexVector::uniform(2);
    let agent = stationary(&u);
    let one = monte_carlo(&a, &a, &agent, &agent, &MonteCarloConfig::new(100_000, 1, 10_000)).unwrap();
    for w in [2u64, 3, 5] {
        let analytic = multi_collision_value(&a, &u, &u, w).unwrap().to_f64();
        assert_eq!(analytic, w as f64 * 1.5);
        let cfg = MonteCarloConfig::new(100_000, 1 + w, 10_000).with_rule(CollisionRule::Fixed { w });
        let r = monte_carlo(&a, &a, &agent, &agent, &cfg).unwrap();
        assert!((r.max_total.mean - analytic).abs() <= 4.0 * r.max_total.std_error);
        let se = (r.max_total.std_error.powi(2) + (w as f64 * one.max_total.std_error).powi(2)).sqrt();
        assert!((r.max_total.mean - w as f64 * one.max_total.mean).abs() <= 4.0 * se);
    }
    let cfg = MonteCarloConfig::new(100_000, 99, 10_000).with_rule(CollisionRule::Geometric { p: 0.5 });
    let r = monte_carlo(&a, &a, &agent, &agent, &cfg).unwrap();
    assert!((r.max_total.mean - 3.0).abs() <= 4.0 * r.max_total.std_error);
}

#[test]
fn scripted_horizon_matches_truncated_play() {
    let c = m(&[&[1.0, 3.0, 0.5], &[2.0, 0.5, 1.0], &[0.0, 4.0, 2.0]]);
    // reacts to the opponent's last action and to its own
    let f = HorizonStrategy::from_fn(3, 2, &|own: &[usize], opp: &[usize]| match (own.last(), opp.last()) {
        (None, _) => SimplexVector::new(vec![0.5, 0.3, 0.2]).unwrap(),
        (Some(&i), Some(&j)) => {
            let mut w = vec![0.2; 3];
            w[j] += 0.3;
            w[i] += 0.1;
            SimplexVector::normalized(w).unwrap()
        }
        _ => unreachable!(),
    })
    .unwrap();
    let g = HorizonStrategy::from_fn(3, 2, &|_: &[usize], opp: &[usize]| match opp.last() {
        None => SimplexVector::uniform(3),
        Some(&i) => SimplexVector::normalized((0..3).map(|k| if k == i { 0.1 } else { 1.0 }).collect()).unwrap(),
    })
    .unwrap();
    let exact = finite_horizon_value(&c, &f, &g, 2).unwrap();
    let fa = StrategyAgent::horizon(Arc::new(f));
    let ga = StrategyAgent::horizon(Arc::new(g));
    let r = monte_carlo(&c, &c, &fa, &ga, &MonteCarloConfig::new(400_000, 5, 2)).unwrap();
    assert!((r.max_total.mean - exact).abs() <= 4.0 * r.max_total.std_error, "{} vs {exact}", r.max_total.mean);
}

#[test]
fn perron_pair_mean_and_deviation_probes() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let a = random_irreducible_zero_diagonal(&mut rng, 4, 5.0);
    let eq = solve(&a, &a, 1e-10).unwrap();
    let rho = eq.max_value.to_f64();
    let cfg = MonteCarloConfig::new(100_000, 3, default_max_rounds(&eq.max_strategy, &eq.min_strategy));
    let r = monte_carlo(&a, &a, &stationary(&eq.max_strategy), &stationary(&eq.min_strategy), &cfg).unwrap();
    assert!((r.max_total.mean - rho).abs() <= 4.0 * r.max_total.std_error);

    for i in 0..4 {
        let p = deviation_probe(&a, &a, &eq, &stationary(&SimplexVector::pure(4, i)), Role::Max, &cfg).unwrap();
        assert!(p.z_score.abs() <= 4.0, "pure {i}: {p:?}");
    }
    for challenger in [StrategyAgent::copy_last(), StrategyAgent::cycle(), StrategyAgent::anti_coordinate()] {
        for role in [Role::Max, Role::Min] {
            let p = deviation_probe(&a, &a, &eq, &challenger, role, &cfg).unwrap();
            assert!(p.z_score.abs() <= 4.0, "{} as {role:?}: {p:?}", challenger.label);
        }
    }
}

#[test]
fn disjoint_pure_supports_truncate() {
    let a = anti();
    let r = monte_carlo(
        &a,
        &a,
        &stationary(&SimplexVector::pure(2, 0)),
        &stationary(&SimplexVector::pure(2, 1)),
        &MonteCarloConfig::new(10, 1, 100),
    )
    .unwrap();
    assert_eq!(r.truncation_rate, 1.0);
    assert_eq!(r.max_total.mean, 200.0);
    assert!(expected_score(&a, &SimplexVector::pure(2, 0), &SimplexVector::pure(2, 1)).unwrap().is_infinite());
}

#[test]
fn geometric_tail_of_game_length() {
    let a = anti();
    let u = SimplexVector::uniform(2);
    // P(not terminated by round k) = (1/2)^k
    let cfg = MonteCarloConfig::new(200_000, 11, 3);
    let r = monte_carlo(&a, &a, &stationary(&u), &stationary(&u), &cfg).unwrap();
    let se = (0.125f64 * 0.875 / 200_000.0).sqrt();
    assert!((r.truncation_rate - 0.125).abs() <= 4.0 * se, "{}", r.truncation_rate);
}
