use super::{solve_matrix_game, MatrixGame, NashError};
use crate::game_core::{
    best_response, response_mdp, GameError, MarkovGame, Player, PolicyPair, StagePolicy,
};

/// Order in which each player's actions are presented to the stage solver.
/// Changing it changes which equilibrium is picked when several exist.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionOrder {
    pub p1: Vec<usize>,
    pub p2: Vec<usize>,
}

impl ActionOrder {
    pub fn identity(n_p1: usize, n_p2: usize) -> Self {
        Self {
            p1: (0..n_p1).collect(),
            p2: (0..n_p2).collect(),
        }
    }

    /// Both orders rotated left by `k`.
    pub fn rotated(n_p1: usize, n_p2: usize, k: usize) -> Self {
        Self {
            p1: (0..n_p1).map(|i| (i + k) % n_p1).collect(),
            p2: (0..n_p2).map(|i| (i + k) % n_p2).collect(),
        }
    }

    /// Both orders reversed.
    pub fn reversed(n_p1: usize, n_p2: usize) -> Self {
        Self {
            p1: (0..n_p1).rev().collect(),
            p2: (0..n_p2).rev().collect(),
        }
    }

    fn check(&self, n_p1: usize, n_p2: usize) -> Result<(), GameError> {
        let is_perm = |v: &[usize], n: usize| {
            let mut seen = vec![false; n];
            v.len() == n && v.iter().all(|&i| i < n && !std::mem::replace(&mut seen[i], true))
        };
        if is_perm(&self.p1, n_p1) && is_perm(&self.p2, n_p2) {
            Ok(())
        } else {
            Err(GameError::DimensionMismatch(
                "action order is not a permutation of the action set".into(),
            ))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumSolution {
    pub pair: PolicyPair,
    /// `<d0, V*_0>`.
    pub value: f64,
    /// Equilibrium values, layout `(h, s)` for `h in 0..=H`.
    pub values: Vec<f64>,
}

/// Backward induction solving the stage matrix game `Q_h(s, ., .)` at every
/// stage and state.
pub fn zero_sum_value_iteration(game: &MarkovGame) -> Result<EquilibriumSolution, NashError> {
    let order = ActionOrder::identity(game.n_actions(Player::One), game.n_actions(Player::Two));
    zero_sum_value_iteration_ordered(game, &order)
}

pub fn zero_sum_value_iteration_ordered(
    game: &MarkovGame,
    order: &ActionOrder,
) -> Result<EquilibriumSolution, NashError> {
    let (hh, ns) = (game.horizon(), game.n_states());
    let (na, nb) = (game.n_actions(Player::One), game.n_actions(Player::Two));
    order.check(na, nb)?;
    let mut values = vec![0.0; (hh + 1) * ns];
    let mut mu = vec![0.0; hh * ns * na];
    let mut nu = vec![0.0; hh * ns * nb];
    for h in (0..hh).rev() {
        for s in 0..ns {
            let next = &values[(h + 1) * ns..(h + 2) * ns];
            let stage = MatrixGame::new(na, nb, game.stage_matrix(h, s, next))?;
            let sol = solve_matrix_game(&stage.permuted(&order.p1, &order.p2))?;
            for (i, &a) in order.p1.iter().enumerate() {
                mu[(h * ns + s) * na + a] = sol.row_strategy[i];
            }
            for (j, &b) in order.p2.iter().enumerate() {
                nu[(h * ns + s) * nb + b] = sol.col_strategy[j];
            }
            values[h * ns + s] = sol.value;
        }
    }
    let pair = PolicyPair::new(
        StagePolicy::new(hh, ns, na, mu)?,
        StagePolicy::new(hh, ns, nb, nu)?,
    )?;
    let value = game
        .dynamics()
        .initial()
        .iter()
        .zip(&values[..ns])
        .map(|(p, v)| p * v)
        .sum();
    Ok(EquilibriumSolution { pair, value, values })
}

/// `max_mu <d0, V^{mu, nu}> - min_nu <d0, V^{mu, nu}>` for the pair `(mu, nu)`,
/// computed with two exact best responses.
pub fn nash_gap(game: &MarkovGame, pair: &PolicyPair) -> Result<f64, GameError> {
    pair.check_fits(game.dynamics())?;
    let best_for_p1 = best_response(&response_mdp(game, Player::One, &pair.nu)?).value;
    // Player two's response maximizes the negated payoff.
    let worst_for_p1 = -best_response(&response_mdp(game, Player::Two, &pair.mu)?).value;
    Ok(best_for_p1 - worst_for_p1)
}

/// Per-stage, per-state convex combination of policy pairs.
///
/// The result is a Nash equilibrium whenever every input is a
/// subgame-perfect one, since the optimal strategy sets of each stage game
/// are convex. Callers should still check it with [`nash_gap`].
pub fn mix_equilibria(pairs: &[PolicyPair], weights: &[f64]) -> Result<PolicyPair, NashError> {
    if pairs.is_empty()
        || pairs.len() != weights.len()
        || weights.iter().any(|w| !w.is_finite() || *w < 0.0)
        || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12
    {
        return Err(NashError::InvalidWeights);
    }
    let first = &pairs[0];
    if pairs
        .iter()
        .any(|p| !p.mu.same_shape(&first.mu) || !p.nu.same_shape(&first.nu))
    {
        return Err(GameError::DimensionMismatch("policies to mix differ in shape".into()).into());
    }
    let mix = |get: fn(&PolicyPair) -> &StagePolicy| -> Result<StagePolicy, GameError> {
        let base = get(first);
        let mut probs = vec![0.0; base.table().len()];
        for (pair, w) in pairs.iter().zip(weights) {
            for (acc, p) in probs.iter_mut().zip(get(pair).table()) {
                *acc += w * p;
            }
        }
        StagePolicy::new(base.horizon(), base.n_states(), base.n_actions(), probs)
    };
    Ok(PolicyPair::new(mix(|p| &p.mu)?, mix(|p| &p.nu)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game_core::GameDynamics;

    /// H=1, one state, payoff matrix `m`.
    fn one_shot(m: &[Vec<f64>]) -> MarkovGame {
        let (na, nb) = (m.len(), m[0].len());
        let d = GameDynamics::new(1, 1, na, nb, vec![1.0; na * nb], vec![1.0]).unwrap();
        let bound = m.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
        MarkovGame::new(d, m.concat(), bound).unwrap()
    }

    #[test]
    fn one_shot_game_reduces_to_matrix_solver() {
        let g = one_shot(&[vec![2.0, -1.0], vec![-1.0, 1.0]]);
        let eq = zero_sum_value_iteration(&g).unwrap();
        // p = 1/(2 + 1/2) = 0.4, v = (1/2) / (5/2) = 0.2
        assert!((eq.value - 0.2).abs() < 1e-12);
        assert!((eq.pair.mu.prob(0, 0, 0) - 0.4).abs() < 1e-12);
        assert!(nash_gap(&g, &eq.pair).unwrap().abs() < 1e-12);
    }

    #[test]
    fn gap_of_pure_strategies_in_matching_pennies() {
        let g = one_shot(&[vec![1.0, -1.0], vec![-1.0, 1.0]]);
        let pure = StagePolicy::deterministic(1, 1, 2, &[0]).unwrap();
        let pair = PolicyPair::new(pure.clone(), pure).unwrap();
        // Player one can get +1, player two can push to -1.
        assert_eq!(nash_gap(&g, &pair).unwrap(), 2.0);
    }

    #[test]
    fn ordered_solver_rejects_non_permutations() {
        let g = one_shot(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let bad = ActionOrder {
            p1: vec![0, 0],
            p2: vec![0, 1],
        };
        assert!(zero_sum_value_iteration_ordered(&g, &bad).is_err());
    }

    #[test]
    fn reversed_order_selects_other_pure_equilibrium() {
        // Row player indifferent between two dominant rows.
        let g = one_shot(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        let a = zero_sum_value_iteration(&g).unwrap();
        let b = zero_sum_value_iteration_ordered(&g, &ActionOrder::reversed(2, 2)).unwrap();
        assert_eq!(a.pair.mu.row(0, 0), &[1.0, 0.0]);
        assert_eq!(b.pair.mu.row(0, 0), &[0.0, 1.0]);
    }

    #[test]
    fn mixing_checks_weights() {
        let g = one_shot(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        let a = zero_sum_value_iteration(&g).unwrap().pair;
        assert_eq!(
            mix_equilibria(std::slice::from_ref(&a), &[0.5]),
            Err(NashError::InvalidWeights)
        );
        let m = mix_equilibria(&[a.clone(), a], &[0.25, 0.75]).unwrap();
        assert_eq!(m.mu.row(0, 0), &[1.0, 0.0]);
    }
}
