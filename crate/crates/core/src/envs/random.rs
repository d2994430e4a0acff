use rand::Rng;
use rand_distr::Exp1;

use super::EnvError;
use crate::game_core::{GameDynamics, MarkovGame, PolicyPair, StagePolicy};
use crate::seeding::stream;

fn dirichlet_ones<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let draws: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|x| x / total).collect()
}

/// Random game with Dirichlet(1) transition rows and initial distribution and
/// rewards uniform on `[-1, 1]`.
pub fn make_random_game(
    n_states: usize,
    n_actions_p1: usize,
    n_actions_p2: usize,
    horizon: usize,
    seed: u64,
) -> Result<MarkovGame, EnvError> {
    if n_states == 0 || n_actions_p1 == 0 || n_actions_p2 == 0 || horizon == 0 {
        return Err(EnvError::InvalidParameter(
            "random game dimensions must be positive".into(),
        ));
    }
    let mut rng = stream(seed, &[n_states as u64, n_actions_p1 as u64, n_actions_p2 as u64, horizon as u64]);
    let rows = horizon * n_states * n_actions_p1 * n_actions_p2;
    let transition: Vec<f64> = (0..rows).flat_map(|_| dirichlet_ones(n_states, &mut rng)).collect();
    let reward: Vec<f64> = (0..rows).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let initial = dirichlet_ones(n_states, &mut rng);
    let dynamics = GameDynamics::new(horizon, n_states, n_actions_p1, n_actions_p2, transition, initial)?;
    Ok(MarkovGame::new(dynamics, reward, 1.0)?)
}

fn random_policy<R: Rng>(horizon: usize, n_states: usize, n_actions: usize, rng: &mut R) -> Result<StagePolicy, EnvError> {
    let table = (0..horizon * n_states).flat_map(|_| dirichlet_ones(n_actions, rng)).collect();
    Ok(StagePolicy::new(horizon, n_states, n_actions, table)?)
}

/// Policy pair with Dirichlet(1) rows for both players.
pub fn random_policy_pair(dynamics: &GameDynamics, seed: u64) -> Result<PolicyPair, EnvError> {
    let (hh, ns) = (dynamics.horizon(), dynamics.n_states());
    let mut rng = stream(seed, &[hh as u64, ns as u64]);
    let mu = random_policy(hh, ns, dynamics.n_actions_p1(), &mut rng)?;
    let nu = random_policy(hh, ns, dynamics.n_actions_p2(), &mut rng)?;
    Ok(PolicyPair::new(mu, nu)?)
}
