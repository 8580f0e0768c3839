use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ruc_core::analytics::{
    best_response_bracket, expected_score, finite_horizon_value, multi_collision_value,
    score_variance, variance_breakdown, GameValue, HorizonStrategy, Role,
};
use ruc_core::handcricket::{
    v1_equilibrium, v1_error_bound, v1_g, v1_payoff_matrix, v1_rho, v1_strategies,
    v2_equilibrium, v2_payoff_matrix, ScoreProfile,
};
use ruc_core::instances::{
    random_irreducible, random_irreducible_zero_diagonal, random_layered_reducible,
    random_simplex,
};
use ruc_core::linalg::{
    build_graph, is_irreducible, perron, ratio_bracket, scc_decompose, DirectedGraph,
    PayoffMatrix, Side, SimplexVector,
};
use ruc_core::simulator::{monte_carlo, MonteCarloConfig, StrategyAgent};
use ruc_core::solver::{certify_pair, solve, solve_irreducible, Branch, Certificate, Uniqueness};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn reachability(n: usize, adj: &[bool]) -> Vec<Vec<bool>> {
    let mut r: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i == j || adj[i * n + j]).collect()).collect();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if r[i][k] && r[k][j] {
                    r[i][j] = true;
                }
            }
        }
    }
    r
}

fn graph_strategy() -> impl Strategy<Value = (usize, Vec<bool>)> {
    (1usize..=6).prop_flat_map(|n| (Just(n), prop::collection::vec(prop::bool::weighted(0.3), n * n)))
}

fn profile_strategy(max_n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.1f64..10.0, 2..=max_n)
}

fn assert_deviation_proof(a: &PayoffMatrix, b: &PayoffMatrix, r: &ruc_core::solver::EquilibriumResult, slack: f64) {
    let n = a.n();
    let (vmax, vmin) = (r.max_value.to_f64(), r.min_value.to_f64());
    for i in 0..n {
        let v = expected_score(a, &SimplexVector::pure(n, i), &r.min_strategy).unwrap();
        assert!(v.to_f64() <= vmax + slack * vmax.max(1.0), "max deviation {i}: {v:?} > {vmax}");
    }
    for j in 0..n {
        let v = expected_score(b, &r.max_strategy, &SimplexVector::pure(n, j)).unwrap();
        assert!(v.to_f64() >= vmin - slack * vmin.max(1.0), "min deviation {j}: {v:?} < {vmin}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn scc_matches_reachability((n, adj) in graph_strategy()) {
        let g = DirectedGraph::from_edges(n, (0..n * n).filter(|&k| adj[k]).map(|k| (k / n, k % n)));
        let scc = scc_decompose(&g);
        let reach = reachability(n, &adj);
        let mut seen = vec![false; n];
        for c in &scc.components {
            for &v in c {
                prop_assert!(!seen[v]);
                seen[v] = true;
            }
        }
        prop_assert!(seen.iter().all(|&s| s));
        prop_assert!(!scc.sources.is_empty());
        for i in 0..n {
            for j in 0..n {
                let same = reach[i][j] && reach[j][i];
                prop_assert_eq!(same, scc.component_of[i] == scc.component_of[j]);
            }
        }
        // condensation edges agree with graph edges and respect reverse topological order
        for (c, succ) in scc.condensation.iter().enumerate() {
            for &d in succ {
                prop_assert!(d < c);
            }
        }
        for (i, j) in g.edges() {
            let (ci, cj) = (scc.component_of[i], scc.component_of[j]);
            if ci != cj {
                prop_assert!(scc.condensation[ci].contains(&cj));
                prop_assert!(!scc.is_source(cj));
            }
        }
    }

    #[test]
    fn irreducibility_is_permutation_invariant(seed in any::<u64>(), n in 1usize..8, keep in 0.0f64..1.0) {
        let mut r = rng(seed);
        let base = random_irreducible(&mut r, n, 3.0);
        let m = PayoffMatrix::from_fn(n, |i, j| {
            if (i * 7 + j * 13 + seed as usize) % 100 < (keep * 100.0) as usize { base.get(i, j) } else { 0.0 }
        }).unwrap();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut r);
        prop_assert_eq!(is_irreducible(&m), is_irreducible(&m.permuted(&perm)));
        let g = build_graph(&m);
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(g.has_edge(i, j), i != j && m.get(i, j) > 0.0);
            }
        }
    }

    #[test]
    fn perron_residual_and_bracket(seed in any::<u64>(), n in 1usize..10) {
        let m = random_irreducible(&mut rng(seed), n, 5.0);
        let tol = 1e-10;
        for side in [Side::Right, Side::Left] {
            let p = perron(&m, side, tol).unwrap();
            prop_assert!(0.0 < p.rho_lower && p.rho_lower <= p.rho_upper);
            prop_assert!(p.vector.has_full_support());
            prop_assert!(p.relative_width() <= tol);
            let mm = if side == Side::Right { m.clone() } else { m.transpose() };
            let b = ratio_bracket(&mm, &p.vector).unwrap();
            prop_assert_eq!((b.alpha, b.beta), (p.rho_lower, p.rho_upper));
            let z = p.rho();
            let v = p.vector.as_slice();
            let mv = mm.mul_vec(v);
            let vmax = v.iter().cloned().fold(0.0, f64::max);
            let res = mv.iter().zip(v).map(|(a, b)| (a - z * b).abs()).fold(0.0, f64::max);
            prop_assert!(res <= tol * z * vmax, "residual {res}");
        }
    }

    #[test]
    fn collatz_wielandt_soundness(seed in any::<u64>(), n in 1usize..8) {
        let mut r = rng(seed);
        let m = random_irreducible(&mut r, n, 5.0);
        let p = perron(&m, Side::Right, 1e-10).unwrap();
        let v = random_simplex(&mut r, n, 0.01);
        let b = ratio_bracket(&m, &v).unwrap();
        prop_assert!(b.alpha <= p.rho_upper && p.rho_lower <= b.beta);
    }

    #[test]
    fn perron_scales(seed in any::<u64>(), n in 1usize..8, c in 0.01f64..100.0) {
        let m = random_irreducible(&mut rng(seed), n, 5.0);
        let p = perron(&m, Side::Right, 1e-12).unwrap();
        let q = perron(&m.scaled(c).unwrap(), Side::Right, 1e-12).unwrap();
        prop_assert!((q.rho() - c * p.rho()).abs() <= 1e-10 * c * p.rho());
        prop_assert!((q.rho_lower - c * p.rho_lower).abs() <= 1e-10 * c * p.rho());
        for k in 0..n {
            prop_assert!((q.vector[k] - p.vector[k]).abs() <= 1e-8 * p.vector[k].max(1e-3));
        }
    }

    #[test]
    fn three_case_totality(seed in any::<u64>(), n in 1usize..7, zx in 0usize..7, zy in 0usize..7) {
        let mut r = rng(seed);
        let c = random_irreducible(&mut r, n, 4.0);
        let mut xs = random_simplex(&mut r, n, 0.0).into_vec();
        let mut ys = random_simplex(&mut r, n, 0.0).into_vec();
        // zero out a prefix/suffix so supports may become disjoint
        for k in 0..zx.min(n - 1) { xs[k] = 0.0; }
        for k in 0..zy.min(n - 1) { ys[n - 1 - k] = 0.0; }
        let x = SimplexVector::normalized(xs).unwrap();
        let y = SimplexVector::normalized(ys).unwrap();
        let disjoint = (0..n).all(|i| x[i] == 0.0 || y[i] == 0.0);
        let positive = (0..n).any(|i| (0..n).any(|j| x[i] > 0.0 && y[j] > 0.0 && c.get(i, j) > 0.0));
        let v = expected_score(&c, &x, &y).unwrap();
        match v {
            GameValue::Finite(f) => { prop_assert!(!disjoint); prop_assert!(f >= 0.0); }
            GameValue::Infinite => prop_assert!(disjoint && positive),
            GameValue::ZeroDegenerate => prop_assert!(disjoint && !positive),
        }
    }

    #[test]
    fn indifference_against_perron_opponent(seed in any::<u64>(), n in 1usize..9) {
        let m = random_irreducible(&mut rng(seed), n, 5.0);
        let p = perron(&m, Side::Right, 1e-11).unwrap();
        let br = best_response_bracket(&m, &p.vector, Role::Max).unwrap();
        prop_assert!(br.beta / br.alpha - 1.0 <= 1e-10);
        let l = perron(&m, Side::Left, 1e-11).unwrap();
        let br = best_response_bracket(&m, &l.vector, Role::Min).unwrap();
        prop_assert!(br.beta / br.alpha - 1.0 <= 1e-10);
    }

    #[test]
    fn breakdown_sums_to_variance(seed in any::<u64>(), n in 1usize..9) {
        let mut r = rng(seed);
        let c = random_irreducible(&mut r, n, 4.0);
        let x = random_simplex(&mut r, n, 0.05);
        let y = random_simplex(&mut r, n, 0.05);
        let v = score_variance(&c, &x, &y).unwrap();
        let b = variance_breakdown(&c, &x, &y).unwrap();
        prop_assert!(v >= 0.0);
        prop_assert!((b.total() - v).abs() <= 1e-12 * v.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn horizon_monotone_and_bounded(seed in any::<u64>(), n in 1usize..5) {
        let mut r = rng(seed);
        let c = random_irreducible(&mut r, n, 4.0);
        let x = random_simplex(&mut r, n, 0.1);
        let y = random_simplex(&mut r, n, 0.1);
        let depth = 6;
        let f = HorizonStrategy::stationary(x.clone(), depth);
        let g = HorizonStrategy::stationary(y.clone(), depth);
        let total = expected_score(&c, &x, &y).unwrap().to_f64();
        let mut prev = 0.0;
        for k in 0..=depth {
            let v = finite_horizon_value(&c, &f, &g, k).unwrap();
            prop_assert!(v >= prev - 1e-12 * total);
            prop_assert!(v <= total * (1.0 + 1e-12));
            prev = v;
        }
    }

    #[test]
    fn scaling_and_multi_collision(seed in any::<u64>(), n in 1usize..8, c in 0.01f64..50.0, w in 0u64..20) {
        let mut r = rng(seed);
        let m = random_irreducible(&mut r, n, 4.0);
        let x = random_simplex(&mut r, n, 0.1);
        let y = random_simplex(&mut r, n, 0.1);
        let base = expected_score(&m, &x, &y).unwrap().to_f64();
        let scaled = expected_score(&m.scaled(c).unwrap(), &x, &y).unwrap().to_f64();
        prop_assert!((scaled - c * base).abs() <= 1e-12 * c * base);
        let one = multi_collision_value(&m, &x, &y, 1).unwrap().to_f64();
        prop_assert_eq!(multi_collision_value(&m, &x, &y, w).unwrap().to_f64(), w as f64 * one);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn irreducible_solution_is_deviation_proof(seed in any::<u64>(), n in 1usize..9) {
        let mut r = rng(seed);
        let a = random_irreducible(&mut r, n, 5.0);
        let b = PayoffMatrix::from_fn(n, |i, j| if a.get(i, j) > 0.0 { a.get(i, j) * r_scale(i, j, seed) } else { 0.0 }).unwrap();
        let res = solve(&a, &b, 1e-10).unwrap();
        prop_assert!(matches!(res.branch, Branch::Irreducible | Branch::SingleAction));
        prop_assert_eq!(res.uniqueness, Uniqueness::Unique);
        assert_deviation_proof(&a, &b, &res, 1e-8);
        // indifference: every max deviation ties
        for i in 0..n {
            let v = expected_score(&a, &SimplexVector::pure(n, i), &res.min_strategy).unwrap().to_f64();
            prop_assert!((v / res.max_value.to_f64() - 1.0).abs() <= 1e-8);
        }
    }

    #[test]
    fn uniqueness_tracks_graph_inclusion(seed in any::<u64>(), n in 2usize..8) {
        let mut r = rng(seed);
        let a = random_irreducible(&mut r, n, 5.0);
        let b = random_irreducible(&mut r, n, 5.0);
        let res = solve_irreducible(&a, &b, 1e-10).unwrap();
        let expected = if build_graph(&a).is_subgraph_of(&build_graph(&b)) { Uniqueness::Unique } else { Uniqueness::NonUnique };
        prop_assert_eq!(res.uniqueness, expected);
    }

    #[test]
    fn reducible_solution_is_deviation_proof(seed in any::<u64>(), n in 2usize..10) {
        let (b, _) = random_layered_reducible(&mut rng(seed), n);
        let res = solve(&b, &b, 1e-10).unwrap();
        prop_assert_eq!(res.branch, Branch::Comet);
        prop_assert_eq!(res.uniqueness, Uniqueness::NonUnique);
        assert_deviation_proof(&b, &b, &res, 1e-8);
        let comet = res.comet.as_ref().unwrap();
        prop_assert!(comet.tail_law_holds());
        prop_assert!(comet.strategy.has_full_support());
        prop_assert_eq!(comet.delta, comet.eps_b / (2.0 * comet.rho_max()));
        // support of y* is predecessor-inclusive in graph(A)
        prop_assert!(build_graph(&b).is_predecessor_inclusive(&res.min_strategy.support_mask()));
    }

    #[test]
    fn comet_cost_separation(seed in any::<u64>(), n in 2usize..12) {
        let mut r = rng(seed);
        let (b, q) = random_layered_reducible(&mut r, n);
        let res = solve(&b, &b, 1e-10).unwrap();
        let comet = res.comet.unwrap();
        prop_assert_eq!(comet.source_roots.len(), q);
        let body = comet.body();
        let (lo, hi) = (comet.rho_min(), comet.rho_max());
        let x = &comet.strategy;
        let cost = |y: &SimplexVector| expected_score(&b, x, y).unwrap().to_f64();
        for j in 0..n {
            let c = cost(&SimplexVector::pure(n, j));
            if body.contains(&j) {
                prop_assert!(c >= lo - 1e-9 && c <= hi + 1e-9, "body {j}: {c} not in [{lo}, {hi}]");
            } else {
                prop_assert!(c > hi, "tail {j}: {c} <= {hi}");
            }
        }
        let inner = random_simplex(&mut r, body.len(), 0.0);
        let c = cost(&SimplexVector::embed(n, &body, &inner));
        prop_assert!(c >= lo - 1e-9 && c <= hi + 1e-9);
    }

    #[test]
    fn certificate_recertifies(seed in any::<u64>(), n in 1usize..9, reducible in any::<bool>()) {
        let mut r = rng(seed);
        let (a, b) = if reducible && n >= 2 {
            let (m, _) = random_layered_reducible(&mut r, n);
            (m.clone(), m)
        } else {
            (random_irreducible(&mut r, n, 5.0), random_irreducible(&mut r, n, 5.0))
        };
        let res = solve(&a, &b, 1e-10).unwrap();
        if res.certificate.is_exact() {
            return Ok(());
        }
        let again: Certificate = certify_pair(&a, &b, &res.max_strategy, &res.min_strategy).unwrap();
        prop_assert!((again.eps() - res.certificate.eps()).abs() <= 1e-9);
        prop_assert!(res.certificate.eps() <= 1e-8);
    }

    #[test]
    fn zero_sum_value_is_stable(seed in any::<u64>(), n in 2usize..8) {
        let a = random_irreducible_zero_diagonal(&mut rng(seed), n, 5.0);
        let coarse = solve(&a, &a, 1e-9).unwrap();
        let fine = solve(&a, &a, 1e-12).unwrap();
        prop_assert!((coarse.max_value.to_f64() - fine.max_value.to_f64()).abs() <= 1e-8 * fine.max_value.to_f64());
    }

    #[test]
    fn g_is_decreasing_and_brackets(s in profile_strategy(10), t1 in 0.0f64..1.0, t2 in 0.0f64..1.0) {
        let p = ScoreProfile::new(s).unwrap();
        let r = p.total();
        let (z1, z2) = (t1.min(t2) * 3.0 * r, t1.max(t2) * 3.0 * r);
        if z1 < z2 {
            prop_assert!(v1_g(&p, z1) > v1_g(&p, z2));
        }
        prop_assert!(v1_g(&p, r - p.max()) >= 1.0 - 1e-15);
        prop_assert!(v1_g(&p, r - p.min()) <= 1.0 + 1e-15);
        let (lo, hi) = v1_rho(&p, 1e-10).unwrap();
        prop_assert!(r - p.max() <= lo && lo <= hi && hi <= r - p.min());
        prop_assert!(hi - lo <= 1e-10 * (r - p.max()));
    }

    #[test]
    fn hand_cricket_cross_solver(s in profile_strategy(8)) {
        let p = ScoreProfile::new(s).unwrap();
        let n = p.len();
        let v1 = v1_equilibrium(&p, 1e-13).unwrap();
        let a1 = v1_payoff_matrix(&p);
        let g1 = solve_irreducible(&a1, &a1, 1e-12).unwrap();
        for i in 0..n {
            prop_assert!((v1.max_strategy[i] - g1.max_strategy[i]).abs() <= 1e-6);
            prop_assert!((v1.min_strategy[i] - g1.min_strategy[i]).abs() <= 1e-6);
        }
        let v2 = v2_equilibrium(&p).unwrap();
        let a2 = v2_payoff_matrix(&p);
        let g2 = solve_irreducible(&a2, &a2, 1e-12).unwrap();
        for i in 0..=n {
            prop_assert!((v2.max_strategy[i] - g2.max_strategy[i]).abs() <= 1e-6);
            prop_assert!((v2.min_strategy[i] - g2.min_strategy[i]).abs() <= 1e-6);
        }
    }

    #[test]
    fn hand_cricket_eigen_identities(s in profile_strategy(8)) {
        let p = ScoreProfile::new(s).unwrap();
        for (res, a) in [
            (v1_equilibrium(&p, 1e-14).unwrap(), v1_payoff_matrix(&p)),
            (v2_equilibrium(&p).unwrap(), v2_payoff_matrix(&p)),
        ] {
            let rho = res.max_value.to_f64();
            let x = res.max_strategy.as_slice();
            let y = res.min_strategy.as_slice();
            let atx = a.tmul_vec(x);
            let ay = a.mul_vec(y);
            for k in 0..a.n() {
                prop_assert!((atx[k] - rho * x[k]).abs() <= 1e-9 * rho.max(1.0));
                prop_assert!((ay[k] - rho * y[k]).abs() <= 1e-9 * rho.max(1.0));
            }
        }
    }

    #[test]
    fn v1_error_bound_dominates_certificate(s in profile_strategy(8), eps in 1e-6f64..0.3, t in -1.0f64..1.0) {
        let p = ScoreProfile::new(s).unwrap();
        let (lo, hi) = v1_rho(&p, 1e-14).unwrap();
        let rho = 0.5 * (lo + hi);
        let rho_hat = rho + t * eps * (p.total() - p.max());
        let (x, y) = v1_strategies(&p, rho_hat).unwrap();
        let a = v1_payoff_matrix(&p);
        let cert = certify_pair(&a, &a, &x, &y).unwrap();
        let (_, max_factor, _) = v1_error_bound(eps).unwrap();
        prop_assert!(cert.eps() <= max_factor - 1.0 + 1e-12, "{} > {}", cert.eps(), max_factor - 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn monte_carlo_is_schedule_independent(seed in any::<u64>(), n in 1usize..5) {
        let mut r = rng(seed);
        let a = random_irreducible(&mut r, n, 4.0);
        let x = random_simplex(&mut r, n, 0.2);
        let y = random_simplex(&mut r, n, 0.2);
        let cfg = MonteCarloConfig::new(10_000, seed, 10_000);
        let max = StrategyAgent::stationary(x);
        let min = StrategyAgent::stationary(y);
        let par = monte_carlo(&a, &a, &max, &min, &cfg).unwrap();
        let seq = monte_carlo(&a, &a, &max, &min, &cfg.sequential()).unwrap();
        prop_assert_eq!(serde_json::to_string(&par).unwrap(), serde_json::to_string(&seq).unwrap());
    }
}

fn r_scale(i: usize, j: usize, seed: u64) -> f64 {
    0.5 + ((i * 31 + j * 17) as u64 ^ seed) as f64 % 7.0 / 4.0
}
