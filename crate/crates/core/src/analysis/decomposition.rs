use super::AnalysisError;
use crate::game_core::{
    best_response_restricted, induce_mdp, optimal_action_mask, response_mdp, MarkovGame, Player,
    PolicyPair, RewardKind,
};
use crate::matrix_nash::nash_gap;

const OPTIMALITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport {
    pub gap: f64,
    /// Per stage, the expected L1 error of player one's estimate under the
    /// worst best response of player two (index 0), and the symmetric term for
    /// player two's estimate (index 1).
    pub stage_errors: Vec<[f64; 2]>,
    /// `2 H` times the sum of all stage errors.
    pub bound: f64,
}

/// Bounds the Nash gap of `estimate` by the expert-vs-estimate L1 errors
/// weighted by the occupancy of best responses played against the experts.
pub fn exploitability_decomposition(
    game: &MarkovGame,
    experts: &PolicyPair,
    estimate: &PolicyPair,
) -> Result<DecompositionReport, AnalysisError> {
    let d = game.dynamics();
    experts.check_fits(d)?;
    estimate.check_fits(d)?;
    let (hh, ns) = (d.horizon(), d.n_states());
    let gap = nash_gap(game, estimate)?;
    let mut stage_errors = vec![[0.0; 2]; hh];
    // Player one's estimate is exploited by player two, and vice versa.
    for (slot, estimated) in [(0usize, Player::One), (1, Player::Two)] {
        let responder = estimated.opponent();
        let mask = optimal_action_mask(
            &response_mdp(game, responder, estimate.get(estimated))?,
            OPTIMALITY_TOL,
        );
        let na = d.n_actions(responder);
        for (h, errs) in stage_errors.iter_mut().enumerate() {
            let mut reward = vec![0.0; hh * ns * na];
            for s in 0..ns {
                let l1 = experts.get(estimated).l1_distance(estimate.get(estimated), h, s);
                reward[(h * ns + s) * na..][..na].iter_mut().for_each(|r| *r = l1);
            }
            let mdp = induce_mdp(d, estimated, experts.get(estimated), reward, RewardKind::Planning)?;
            errs[slot] = best_response_restricted(&mdp, Some(&mask))?.value;
        }
    }
    let total: f64 = stage_errors.iter().flatten().sum();
    Ok(DecompositionReport {
        gap,
        stage_errors,
        bound: 2.0 * hh as f64 * total,
    })
}
