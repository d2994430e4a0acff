use rand::Rng;

use super::{normalize_row, GameDynamics, GameError, Player};
use crate::seeding::sample_categorical;

/// A non-stationary Markov policy `pi_h(. | s)` for one player.
#[derive(Debug, Clone, PartialEq)]
pub struct StagePolicy {
    horizon: usize,
    n_states: usize,
    n_actions: usize,
    /// Layout `(h, s, a)`.
    probs: Vec<f64>,
}

impl StagePolicy {
    pub fn new(
        horizon: usize,
        n_states: usize,
        n_actions: usize,
        mut probs: Vec<f64>,
    ) -> Result<Self, GameError> {
        if horizon == 0 || n_states == 0 || n_actions == 0 {
            return Err(GameError::DimensionMismatch(
                "policy dimensions must be positive".into(),
            ));
        }
        if probs.len() != horizon * n_states * n_actions {
            return Err(GameError::DimensionMismatch(format!(
                "policy table has {} entries, expected {}",
                probs.len(),
                horizon * n_states * n_actions
            )));
        }
        for (i, row) in probs.chunks_mut(n_actions).enumerate() {
            normalize_row(row, &format!("policy row (h={}, s={})", i / n_states, i % n_states))?;
        }
        Ok(Self {
            horizon,
            n_states,
            n_actions,
            probs,
        })
    }

    pub fn uniform(horizon: usize, n_states: usize, n_actions: usize) -> Self {
        let p = 1.0 / n_actions as f64;
        Self {
            horizon,
            n_states,
            n_actions,
            probs: vec![p; horizon * n_states * n_actions],
        }
    }

    /// Uniform policy shaped for `player` in `dynamics`.
    pub fn uniform_for(dynamics: &GameDynamics, player: Player) -> Self {
        Self::uniform(
            dynamics.horizon(),
            dynamics.n_states(),
            dynamics.n_actions(player),
        )
    }

    /// Deterministic policy from one action per `(h, s)`, in `h`-major order.
    pub fn deterministic(
        horizon: usize,
        n_states: usize,
        n_actions: usize,
        choice: &[usize],
    ) -> Result<Self, GameError> {
        if choice.len() != horizon * n_states {
            return Err(GameError::DimensionMismatch(format!(
                "expected {} action choices, got {}",
                horizon * n_states,
                choice.len()
            )));
        }
        let mut probs = vec![0.0; horizon * n_states * n_actions];
        for (i, &a) in choice.iter().enumerate() {
            if a >= n_actions {
                return Err(GameError::IndexOutOfRange(format!("action {a}")));
            }
            probs[i * n_actions + a] = 1.0;
        }
        Ok(Self {
            horizon,
            n_states,
            n_actions,
            probs,
        })
    }

    /// Same row at every stage and state.
    pub fn constant(
        horizon: usize,
        n_states: usize,
        row: &[f64],
    ) -> Result<Self, GameError> {
        Self::new(horizon, n_states, row.len(), row.repeat(horizon * n_states))
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn row(&self, h: usize, s: usize) -> &[f64] {
        let start = (h * self.n_states + s) * self.n_actions;
        &self.probs[start..start + self.n_actions]
    }

    pub fn prob(&self, h: usize, s: usize, a: usize) -> f64 {
        self.probs[(h * self.n_states + s) * self.n_actions + a]
    }

    pub fn set_row(&mut self, h: usize, s: usize, row: &[f64]) -> Result<(), GameError> {
        if row.len() != self.n_actions {
            return Err(GameError::DimensionMismatch(format!(
                "row has {} actions, expected {}",
                row.len(),
                self.n_actions
            )));
        }
        let mut row = row.to_vec();
        normalize_row(&mut row, &format!("policy row (h={h}, s={s})"))?;
        let start = (h * self.n_states + s) * self.n_actions;
        self.probs[start..start + self.n_actions].copy_from_slice(&row);
        Ok(())
    }

    pub fn table(&self) -> &[f64] {
        &self.probs
    }

    pub fn sample<R: Rng + ?Sized>(&self, h: usize, s: usize, rng: &mut R) -> usize {
        sample_categorical(self.row(h, s), rng)
    }

    /// Unhalved L1 distance between the two action distributions at `(h, s)`.
    pub fn l1_distance(&self, other: &StagePolicy, h: usize, s: usize) -> f64 {
        self.row(h, s)
            .iter()
            .zip(other.row(h, s))
            .map(|(p, q)| (p - q).abs())
            .sum()
    }

    pub fn same_shape(&self, other: &StagePolicy) -> bool {
        self.horizon == other.horizon
            && self.n_states == other.n_states
            && self.n_actions == other.n_actions
    }

    /// Checks that the policy fits `player` in `dynamics`.
    pub fn check_fits(&self, dynamics: &GameDynamics, player: Player) -> Result<(), GameError> {
        if self.horizon != dynamics.horizon()
            || self.n_states != dynamics.n_states()
            || self.n_actions != dynamics.n_actions(player)
        {
            return Err(GameError::DimensionMismatch(format!(
                "policy of shape ({}, {}, {}) does not fit {player:?} in a game of shape ({}, {}, {})",
                self.horizon,
                self.n_states,
                self.n_actions,
                dynamics.horizon(),
                dynamics.n_states(),
                dynamics.n_actions(player)
            )));
        }
        Ok(())
    }

    /// Nested `[h][s][a]` form used in JSON files.
    pub fn to_nested(&self) -> Vec<Vec<Vec<f64>>> {
        (0..self.horizon)
            .map(|h| (0..self.n_states).map(|s| self.row(h, s).to_vec()).collect())
            .collect()
    }

    pub fn from_nested(rows: &[Vec<Vec<f64>>]) -> Result<Self, GameError> {
        let horizon = rows.len();
        let n_states = rows.first().map_or(0, Vec::len);
        let n_actions = rows
            .first()
            .and_then(|r| r.first())
            .map_or(0, Vec::len);
        let mut probs = Vec::with_capacity(horizon * n_states * n_actions);
        for stage in rows {
            if stage.len() != n_states {
                return Err(GameError::DimensionMismatch("ragged policy".into()));
            }
            for row in stage {
                if row.len() != n_actions {
                    return Err(GameError::DimensionMismatch("ragged policy".into()));
                }
                probs.extend_from_slice(row);
            }
        }
        Self::new(horizon, n_states, n_actions, probs)
    }

    /// Rows at stages `>= from` replaced by the uniform distribution.
    pub fn uniform_from(&self, from: usize) -> StagePolicy {
        let mut out = self.clone();
        let u = 1.0 / self.n_actions as f64;
        let start = from.min(self.horizon) * self.n_states * self.n_actions;
        out.probs[start..].iter_mut().for_each(|p| *p = u);
        out
    }


}

/// Policies for both players, `mu` for player one and `nu` for player two.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyPair {
    pub mu: StagePolicy,
    pub nu: StagePolicy,
}

impl PolicyPair {
    pub fn new(mu: StagePolicy, nu: StagePolicy) -> Result<Self, GameError> {
        if mu.horizon != nu.horizon || mu.n_states != nu.n_states {
            return Err(GameError::DimensionMismatch(
                "the two policies disagree on horizon or state count".into(),
            ));
        }
        Ok(Self { mu, nu })
    }

    pub fn uniform(dynamics: &GameDynamics) -> Self {
        Self {
            mu: StagePolicy::uniform_for(dynamics, Player::One),
            nu: StagePolicy::uniform_for(dynamics, Player::Two),
        }
    }

    pub fn get(&self, player: Player) -> &StagePolicy {
        match player {
            Player::One => &self.mu,
            Player::Two => &self.nu,
        }
    }

    pub fn check_fits(&self, dynamics: &GameDynamics) -> Result<(), GameError> {
        self.mu.check_fits(dynamics, Player::One)?;
        self.nu.check_fits(dynamics, Player::Two)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_must_be_distributions() {
        assert!(StagePolicy::new(1, 1, 2, vec![0.7, 0.4]).is_err());
        assert!(StagePolicy::new(1, 1, 2, vec![1.0, 0.0]).is_ok());
        let mut p = StagePolicy::uniform(2, 2, 3);
        assert!(p.set_row(1, 1, &[0.2, 0.2, 0.2]).is_err());
        p.set_row(1, 1, &[0.0, 0.5, 0.5]).unwrap();
        assert_eq!(p.prob(1, 1, 2), 0.5);
    }

    #[test]
    fn deterministic_policy_is_one_hot() {
        let p = StagePolicy::deterministic(2, 1, 3, &[2, 0]).unwrap();
        assert_eq!(p.row(0, 0), &[0.0, 0.0, 1.0]);
        assert_eq!(p.row(1, 0), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn nested_round_trip() {
        let p = StagePolicy::new(2, 1, 2, vec![0.25, 0.75, 1.0, 0.0]).unwrap();
        assert_eq!(StagePolicy::from_nested(&p.to_nested()).unwrap(), p);
    }

    #[test]
    fn uniform_from_overwrites_later_stages_only() {
        let p = StagePolicy::deterministic(3, 1, 2, &[1, 1, 1]).unwrap();
        let q = p.uniform_from(1);
        assert_eq!(q.row(0, 0), &[0.0, 1.0]);
        assert_eq!(q.row(1, 0), &[0.5, 0.5]);
        assert_eq!(q.row(2, 0), &[0.5, 0.5]);
    }

    #[test]
    fn l1_distance_is_unhalved() {
        let p = StagePolicy::deterministic(1, 1, 2, &[0]).unwrap();
        let q = StagePolicy::deterministic(1, 1, 2, &[1]).unwrap();
        assert_eq!(p.l1_distance(&q, 0, 0), 2.0);
    }
}
