//! Tabular two-player zero-sum Markov games and multi-agent imitation learning.
//!
//! Stages are indexed `0..H` with `V_H = 0`. Rewards are the player-one payoff;
//! player two minimizes it.

pub mod analysis;
pub mod envs;
pub mod game_core;
pub mod imitation;
pub mod mail_algorithms;
pub mod matrix_nash;
pub mod reward_free;
pub mod seeding;

pub use game_core::{
    best_response, evaluate, induce_mdp, max_visitation, occupancy, Evaluation, GameDynamics,
    GameError, InducedMdp, MarkovGame, OccupancyTable, Player, PolicyPair, RewardKind,
    StageDistribution, StagePolicy,
};
pub use matrix_nash::{mix_equilibria, nash_gap, solve_matrix_game, zero_sum_value_iteration};
