//! Markov-game data model, policies, exact evaluation, occupancy measures,
//! induced single-agent MDPs and best responses.

mod error;
mod eval;
mod game;
mod mdp;
mod policy;

pub use error::GameError;
pub use eval::{evaluate, occupancy, response_mdp, Evaluation, OccupancyTable};
pub use game::{GameDynamics, GameFile, MarkovGame, Player, StageDistribution};
pub use mdp::{
    best_response, best_response_restricted, indicator_reward, induce_mdp, max_visitation,
    optimal_action_mask, BestResponse, InducedMdp, RewardKind,
};
pub use policy::{PolicyPair, StagePolicy};

/// Absolute tolerance for probability rows summing to one.
pub const PROB_TOL: f64 = 1e-12;

pub(crate) fn check_distribution(row: &[f64], what: &str) -> Result<(), GameError> {
    if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(GameError::InvalidDistribution(format!(
            "{what} has a negative or non-finite entry"
        )));
    }
    let total: f64 = row.iter().sum();
    if (total - 1.0).abs() > PROB_TOL {
        return Err(GameError::InvalidDistribution(format!(
            "{what} sums to {total}"
        )));
    }
    Ok(())
}

/// Validates then rescales a row so it sums to one exactly in floating point.
pub(crate) fn normalize_row(row: &mut [f64], what: &str) -> Result<(), GameError> {
    check_distribution(row, what)?;
    let total: f64 = row.iter().sum();
    // Rows already at rounding level are kept, so normalizing is idempotent.
    if (total - 1.0).abs() > row.len() as f64 * f64::EPSILON {
        row.iter_mut().for_each(|p| *p /= total);
    }
    Ok(())
}
