//! Offline expert datasets and behavior cloning.

mod dataset;

use crate::game_core::{GameDynamics, GameError, Player, PolicyPair, StageDistribution, StagePolicy};
use crate::seeding::{sample_categorical, StreamRng};
use rand::SeedableRng;

pub use dataset::{DatasetError, DatasetMeta, TrajectoryDataset, Transition};

/// Rolls out `pair` for `n_episodes` full episodes. Both experts are queried
/// at every step.
pub fn collect_trajectories(
    dynamics: &GameDynamics,
    pair: &PolicyPair,
    n_episodes: usize,
    seed: u64,
) -> Result<TrajectoryDataset, GameError> {
    pair.check_fits(dynamics)?;
    let mut rng = StreamRng::seed_from_u64(seed);
    let hh = dynamics.horizon();
    let mut records = Vec::with_capacity(n_episodes * hh);
    for _ in 0..n_episodes {
        let mut s = sample_categorical(dynamics.initial(), &mut rng);
        for h in 0..hh {
            let a = pair.mu.sample(h, s, &mut rng);
            let b = pair.nu.sample(h, s, &mut rng);
            records.push(Transition { h, s, a, b });
            s = sample_categorical(dynamics.next_dist(h, s, a, b), &mut rng);
        }
    }
    let per_episode = [hh as u64, hh as u64];
    Ok(TrajectoryDataset::from_parts(hh, records, per_episode, seed))
}

/// Draws the state of every stage independently from `rho` and labels it
/// with both experts' actions.
pub fn collect_from_state_dist(
    rho: &StageDistribution,
    experts: &PolicyPair,
    n_episodes: usize,
    seed: u64,
) -> Result<TrajectoryDataset, GameError> {
    let hh = rho.horizon();
    if experts.mu.horizon() != hh || experts.mu.n_states() != rho.n_states() {
        return Err(GameError::DimensionMismatch(
            "experts and data distribution disagree on shape".into(),
        ));
    }
    let mut rng = StreamRng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(n_episodes * hh);
    for _ in 0..n_episodes {
        for h in 0..hh {
            let s = sample_categorical(rho.stage(h), &mut rng);
            let a = experts.mu.sample(h, s, &mut rng);
            let b = experts.nu.sample(h, s, &mut rng);
            records.push(Transition { h, s, a, b });
        }
    }
    Ok(TrajectoryDataset::from_parts(hh, records, [hh as u64, hh as u64], seed))
}

/// Behavior-cloned policy together with the visit counts behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalPolicy {
    pub policy: StagePolicy,
    /// Layout `(h, s, a)`.
    pub counts: Vec<u64>,
}

impl EmpiricalPolicy {
    pub fn visits(&self, h: usize, s: usize) -> u64 {
        let na = self.policy.n_actions();
        let start = (h * self.policy.n_states() + s) * na;
        self.counts[start..start + na].iter().sum()
    }

    /// Action frequencies at `s` pooled over all stages, for display only.
    pub fn pooled_over_stages(&self, s: usize) -> Vec<f64> {
        let (ns, na) = (self.policy.n_states(), self.policy.n_actions());
        let mut c = vec![0u64; na];
        for h in 0..self.policy.horizon() {
            for (a, x) in c.iter_mut().enumerate() {
                *x += self.counts[(h * ns + s) * na + a];
            }
        }
        let total: u64 = c.iter().sum();
        if total == 0 {
            return vec![1.0 / na as f64; na];
        }
        c.into_iter().map(|x| x as f64 / total as f64).collect()
    }
}

/// Empirical action frequencies of `player` per `(h, s)`; unvisited pairs get
/// the uniform distribution.
pub fn bc_fit(
    dataset: &TrajectoryDataset,
    player: Player,
    n_states: usize,
    n_actions: usize,
) -> Result<EmpiricalPolicy, GameError> {
    let hh = dataset.horizon();
    let mut counts = vec![0u64; hh * n_states * n_actions];
    for t in dataset.records() {
        let action = match player {
            Player::One => t.a,
            Player::Two => t.b,
        };
        if t.h >= hh || t.s >= n_states || action >= n_actions {
            return Err(GameError::IndexOutOfRange(format!(
                "record (h={}, s={}, action={action}) outside ({hh}, {n_states}, {n_actions})",
                t.h, t.s
            )));
        }
        counts[(t.h * n_states + t.s) * n_actions + action] += 1;
    }
    let mut probs = vec![0.0; counts.len()];
    for (row, c) in probs.chunks_mut(n_actions).zip(counts.chunks(n_actions)) {
        let total: u64 = c.iter().sum();
        if total == 0 {
            row.iter_mut().for_each(|p| *p = 1.0 / n_actions as f64);
        } else {
            for (p, &x) in row.iter_mut().zip(c) {
                *p = x as f64 / total as f64;
            }
        }
    }
    Ok(EmpiricalPolicy {
        policy: StagePolicy::new(hh, n_states, n_actions, probs)?,
        counts,
    })
}

/// Behavior cloning for both players from one dataset.
pub fn bc_fit_pair(dataset: &TrajectoryDataset, dynamics: &GameDynamics) -> Result<PolicyPair, GameError> {
    let ns = dynamics.n_states();
    let mu = bc_fit(dataset, Player::One, ns, dynamics.n_actions_p1())?.policy;
    let nu = bc_fit(dataset, Player::Two, ns, dynamics.n_actions_p2())?.policy;
    PolicyPair::new(mu, nu)
}
