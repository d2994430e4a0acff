use rand::SeedableRng;

use mailbench_core::envs::{
    gridworld_experts, make_gridworld, make_lower_bound_game, make_random_game,
    random_policy_pair, GridworldSpec, GridworldVariant, S1, S2, S3,
};
use mailbench_core::game_core::{response_mdp, InducedMdp, RewardKind};
use mailbench_core::matrix_nash::MatrixGame;
use mailbench_core::seeding::{sample_categorical, StreamRng};
use mailbench_core::{
    best_response, evaluate, induce_mdp, max_visitation, mix_equilibria, nash_gap, occupancy,
    solve_matrix_game, zero_sum_value_iteration, GameDynamics, MarkovGame, Player, PolicyPair,
    StagePolicy,
};

/// Every deterministic policy of an MDP, as `(h, s) -> a` tables.
fn deterministic_policies(mdp: &InducedMdp) -> Vec<StagePolicy> {
    let (hh, ns, na) = (mdp.horizon(), mdp.n_states(), mdp.n_actions());
    let cells = hh * ns;
    let total = na.pow(cells as u32);
    (0..total)
        .map(|mut code| {
            let choice: Vec<usize> = (0..cells)
                .map(|_| {
                    let a = code % na;
                    code /= na;
                    a
                })
                .collect();
            StagePolicy::deterministic(hh, ns, na, &choice).unwrap()
        })
        .collect()
}

#[test]
fn monte_carlo_value_within_three_standard_errors() {
    let game = make_random_game(4, 2, 2, 3, 21).unwrap();
    let pair = random_policy_pair(game.dynamics(), 22).unwrap();
    let exact = evaluate(&game, &pair).unwrap().start_value();
    let d = game.dynamics();
    let mut rng = StreamRng::seed_from_u64(23);
    let n = 1_000_000;
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..n {
        let mut s = sample_categorical(d.initial(), &mut rng);
        let mut ret = 0.0;
        for h in 0..d.horizon() {
            let a = pair.mu.sample(h, s, &mut rng);
            let b = pair.nu.sample(h, s, &mut rng);
            ret += game.reward(h, s, a, b);
            s = sample_categorical(d.next_dist(h, s, a, b), &mut rng);
        }
        sum += ret;
        sq += ret * ret;
    }
    let mean = sum / n as f64;
    let se = ((sq / n as f64 - mean * mean) / n as f64).sqrt();
    assert!((mean - exact).abs() <= 3.0 * se, "mc {mean} exact {exact} se {se}");
}

#[test]
fn zero_reward_game_has_zero_values() {
    let d = GameDynamics::new(1, 2, 2, 2, vec![0.5; 16], vec![0.5, 0.5]).unwrap();
    let game = MarkovGame::new(d, vec![0.0; 8], 1.0).unwrap();
    let eval = evaluate(&game, &PolicyPair::uniform(game.dynamics())).unwrap();
    assert!(eval.stage_values(0).iter().chain(eval.stage_values(1)).all(|v| *v == 0.0));
}

#[test]
fn zero_reward_best_response_picks_first_action() {
    let game = make_random_game(3, 3, 2, 2, 5).unwrap();
    let zero = game.with_reward(vec![0.0; game.reward_table().len()], 1.0).unwrap();
    let mdp = response_mdp(&zero, Player::One, &StagePolicy::uniform_for(zero.dynamics(), Player::Two)).unwrap();
    let br = best_response(&mdp);
    assert_eq!(br.value, 0.0);
    for h in 0..2 {
        for s in 0..3 {
            assert_eq!(br.policy.row(h, s), &[1.0, 0.0, 0.0]);
        }
    }
}

#[test]
fn best_response_matches_enumeration() {
    for seed in 0..5 {
        let game = make_random_game(3, 2, 2, 3, 100 + seed).unwrap();
        let pair = random_policy_pair(game.dynamics(), 200 + seed).unwrap();
        for responder in [Player::One, Player::Two] {
            let mdp = response_mdp(&game, responder, pair.get(responder.opponent())).unwrap();
            let brute = deterministic_policies(&mdp)
                .iter()
                .map(|p| mdp.value(p).unwrap())
                .fold(f64::NEG_INFINITY, f64::max);
            assert!((best_response(&mdp).value - brute).abs() <= 1e-12);
        }
    }
}

#[test]
fn max_visitation_matches_enumeration() {
    let game = make_random_game(4, 2, 2, 2, 31).unwrap();
    let nu = random_policy_pair(game.dynamics(), 32).unwrap().nu;
    let mdp = induce_mdp(game.dynamics(), Player::Two, &nu, vec![0.0; 2 * 4 * 2], RewardKind::Exploration).unwrap();
    let all = deterministic_policies(&mdp);
    for h in 0..2 {
        for s in 0..4 {
            let (best, policy) = max_visitation(&mdp, s, h).unwrap();
            let brute = all
                .iter()
                .map(|p| mdp.state_occupancy(p).unwrap()[h * 4 + s])
                .fold(0.0, f64::max);
            assert!((best - brute).abs() <= 1e-12);
            assert!((mdp.state_occupancy(&policy).unwrap()[h * 4 + s] - best).abs() <= 1e-12);
            assert!((0.0..=1.0).contains(&best));
        }
    }
}

#[test]
fn lower_bound_occupancies_and_reachability() {
    let inst = make_lower_bound_game(0.7, 0.5).unwrap();
    let d = inst.game.dynamics();
    let expert_occ = occupancy(d, &inst.experts).unwrap();
    assert_eq!(expert_occ.state(0, S1), 1.0);
    assert_eq!(expert_occ.state(1, S2), 1.0);
    assert_eq!(expert_occ.state(1, S3), 0.0);

    let mut nu = inst.experts.nu.clone();
    nu.set_row(0, S1, &[0.0, 1.0]).unwrap();
    let deviated = occupancy(d, &PolicyPair::new(inst.experts.mu.clone(), nu).unwrap()).unwrap();
    assert_eq!(deviated.state(1, S3), 1.0);

    let mdp = induce_mdp(d, Player::Two, &inst.experts.nu, vec![0.0; 2 * 3 * 2], RewardKind::Exploration).unwrap();
    for a in 0..2 {
        assert_eq!(mdp.next_dist(0, S1, a), &[0.0, 1.0, 0.0]);
    }
    assert_eq!(max_visitation(&mdp, S3, 1).unwrap().0, 0.0);
    assert_eq!(max_visitation(&mdp, S2, 1).unwrap().0, 1.0);
    assert!(evaluate(&inst.game, &inst.experts).unwrap().start_value().abs() < 1e-15);
}

#[test]
fn induced_transitions_ignore_irrelevant_opponent() {
    // Transitions depend on `a` only; fixing any `nu` must return them unchanged.
    let base = make_random_game(3, 2, 1, 2, 41).unwrap();
    let d0 = base.dynamics();
    let mut p = Vec::new();
    for h in 0..2 {
        for s in 0..3 {
            for a in 0..2 {
                for _ in 0..3 {
                    p.extend_from_slice(d0.next_dist(h, s, a, 0));
                }
            }
        }
    }
    let d = GameDynamics::new(2, 3, 2, 3, p, d0.initial().to_vec()).unwrap();
    let nu = StagePolicy::uniform(2, 3, 3);
    let mdp = induce_mdp(&d, Player::Two, &nu, vec![0.0; 12], RewardKind::Planning).unwrap();
    for h in 0..2 {
        for s in 0..3 {
            for a in 0..2 {
                for (x, y) in mdp.next_dist(h, s, a).iter().zip(d0.next_dist(h, s, a, 0)) {
                    assert!((x - y).abs() <= 1e-15);
                }
                assert!((mdp.next_dist(h, s, a).iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn matrix_solver_examples() {
    let mp = solve_matrix_game(&MatrixGame::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap()).unwrap();
    assert!((mp.row_strategy[0] - 0.5).abs() < 1e-12 && (mp.col_strategy[0] - 0.5).abs() < 1e-12);
    assert!(mp.value.abs() < 1e-12);

    let p2 = solve_matrix_game(&MatrixGame::from_rows(&[vec![3.0, -1.0], vec![-1.0, 1.0]]).unwrap()).unwrap();
    assert!((p2.row_strategy[0] - 1.0 / 3.0).abs() < 1e-12);
    assert!((p2.value - 1.0 / 3.0).abs() < 1e-12);

    let simplified = solve_matrix_game(&MatrixGame::from_rows(&[vec![1.0, 1.0], vec![0.0, -12.0]]).unwrap()).unwrap();
    assert_eq!(simplified.row_strategy, vec![1.0, 0.0]);
    assert!((simplified.value - 1.0).abs() < 1e-12);
}

#[test]
fn value_iteration_on_constructed_games() {
    for delta in [0.0, 0.5, 2.0] {
        let inst = make_lower_bound_game(delta, 0.5).unwrap();
        let eq = zero_sum_value_iteration(&inst.game).unwrap();
        assert!(eq.value.abs() < 1e-12);
        assert_eq!(eq.pair.nu.row(0, S1), &[1.0, 0.0]);
    }
    for seed in 0..20 {
        let game = make_random_game(3, 3, 2, 3, 300 + seed).unwrap();
        let eq = zero_sum_value_iteration(&game).unwrap();
        assert!(nash_gap(&game, &eq.pair).unwrap() <= 1e-6);
    }
}

#[test]
fn value_iteration_matches_maximin_enumeration() {
    // For every deterministic row policy, the column player best-responds;
    // the best such guarantee is the game value when the row player needs no
    // mixing. Mixed values are checked against the per-stage matrix solver.
    for seed in 0..5 {
        let game = make_random_game(2, 2, 2, 2, 400 + seed).unwrap();
        let eq = zero_sum_value_iteration(&game).unwrap();
        let mdp = response_mdp(&game, Player::One, &eq.pair.nu).unwrap();
        let guarantee = deterministic_policies(&mdp)
            .iter()
            .map(|mu| {
                let mdp2 = response_mdp(&game, Player::Two, mu).unwrap();
                -best_response(&mdp2).value
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(guarantee <= eq.value + 1e-9);
        let against_eq = -best_response(&response_mdp(&game, Player::Two, &eq.pair.mu).unwrap()).value;
        assert!((against_eq - eq.value).abs() <= 1e-6);
        assert!((best_response(&mdp).value - eq.value).abs() <= 1e-6);
    }
}

#[test]
fn gridworld_facts() {
    let world = make_gridworld(&GridworldSpec::default()).unwrap();
    assert_eq!(world.codec.n_states(), 73);
    assert_eq!(world.codec.terminal(), 72);
    assert!(zero_sum_value_iteration(&world.game).unwrap().value.abs() < 1e-12);

    let pure = gridworld_experts(&world, GridworldVariant::Pure).unwrap();
    let mixed = gridworld_experts(&world, GridworldVariant::Mixed).unwrap();
    assert!(nash_gap(&world.game, &pure).unwrap() <= 1e-6);
    assert!(nash_gap(&world.game, &mixed).unwrap() <= 1e-6);
    let support = |pair: &PolicyPair, h: usize| {
        let d = occupancy(world.game.dynamics(), pair).unwrap();
        (0..73).filter(|&s| d.state(h, s) > 0.0).count()
    };
    assert!(support(&mixed, 1) > support(&pure, 1));

    // A player-two policy that stays put is exploitable.
    let stay = StagePolicy::constant(8, 73, &[1.0, 0.0, 0.0, 0.0]).unwrap();
    let lazy = PolicyPair::new(pure.mu.clone(), stay).unwrap();
    assert!(nash_gap(&world.game, &lazy).unwrap() > 0.0);

    // Live states are the ordered pairs of distinct cells.
    for s in 0..72 {
        let (p1, p2) = world.codec.decode(s).unwrap();
        assert_eq!(world.codec.encode(p1, p2), Some(s));
        assert_ne!(p1, p2);
    }

    // Reachable joint states never put both agents on one cell.
    let all = PolicyPair::uniform(world.game.dynamics());
    let d = occupancy(world.game.dynamics(), &all).unwrap();
    for h in 0..8 {
        for s in 0..72 {
            if d.state(h, s) > 0.0 {
                let (p1, p2) = world.codec.decode(s).unwrap();
                assert_ne!(p1, p2);
            }
        }
    }
}

#[test]
fn mixing_examples() {
    let world = make_gridworld(&GridworldSpec::default()).unwrap();
    let pure = gridworld_experts(&world, GridworldVariant::Pure).unwrap();
    assert_eq!(mix_equilibria(std::slice::from_ref(&pure), &[1.0]).unwrap(), pure);
    let mixed = gridworld_experts(&world, GridworldVariant::Mixed).unwrap();
    let half = mix_equilibria(&[pure, mixed], &[0.5, 0.5]).unwrap();
    assert!(nash_gap(&world.game, &half).unwrap() <= 1e-6);
}

#[test]
fn simplified_game_gap_examples() {
    let inst = mailbench_core::envs::make_lower_bound_simplified(0.0).unwrap();
    let mut mu = inst.experts.mu.clone();
    mu.set_row(1, S3, &[0.5, 0.5]).unwrap();
    let pair = PolicyPair::new(mu, inst.experts.nu.clone()).unwrap();
    // Markov game gap: the Nash value is 0, player two steers into s3 for -5.5.
    assert!((nash_gap(&inst.game, &pair).unwrap() - 5.5).abs() < 1e-12);
    // Stage-game exploitability at s3: value 1 down to -5.5.
    let m = MatrixGame::from_rows(&[vec![1.0, 1.0], vec![0.0, -12.0]]).unwrap();
    let stage_value = solve_matrix_game(&m).unwrap().value;
    let worst = m.col_payoffs(&[0.5, 0.5]).into_iter().fold(f64::INFINITY, f64::min);
    assert!((stage_value - worst - 6.5).abs() < 1e-12);
}
