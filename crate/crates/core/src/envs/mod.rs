//! Concrete game instances: the three-state lower-bound family, a 3x3
//! two-agent gridworld race, and seeded random games.

mod gridworld;
mod lower_bound;
mod random;

use thiserror::Error;

use crate::game_core::GameError;
use crate::matrix_nash::NashError;

pub use gridworld::{
    gridworld_experts, make_gridworld, Cell, GridAction, GridCodec, Gridworld, GridworldSpec,
    GridworldVariant,
};
pub use lower_bound::{
    lower_bound_rho, make_lower_bound_game, make_lower_bound_simplified, LowerBoundInstance,
    SIMPLIFIED_PAYOFF, S1, S2, S3,
};
pub use random::{make_random_game, random_policy_pair};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("invalid environment parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Nash(#[from] NashError),
}
