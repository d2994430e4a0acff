use serde::{Deserialize, Serialize};

use super::{normalize_row, GameError, PROB_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Player {
    /// Maximizer, chooses actions `a`.
    One,
    /// Minimizer, chooses actions `b`.
    Two,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Player::One => 0,
            Player::Two => 1,
        }
    }

    /// Sign that turns a player-one payoff into this player's own payoff.
    pub fn payoff_sign(self) -> f64 {
        match self {
            Player::One => 1.0,
            Player::Two => -1.0,
        }
    }
}

/// Transition structure of a game without its reward.
///
/// Learning algorithms receive only this view, so they cannot read rewards.
#[derive(Debug, Clone, PartialEq)]
pub struct GameDynamics {
    horizon: usize,
    n_states: usize,
    n_actions: [usize; 2],
    /// Layout `(h, s, a, b, s')`.
    transition: Vec<f64>,
    initial: Vec<f64>,
}

impl GameDynamics {
    pub fn new(
        horizon: usize,
        n_states: usize,
        n_actions_p1: usize,
        n_actions_p2: usize,
        mut transition: Vec<f64>,
        mut initial: Vec<f64>,
    ) -> Result<Self, GameError> {
        if horizon == 0 || n_states == 0 || n_actions_p1 == 0 || n_actions_p2 == 0 {
            return Err(GameError::DimensionMismatch(
                "horizon, state and action counts must be positive".into(),
            ));
        }
        let expected = horizon * n_states * n_actions_p1 * n_actions_p2 * n_states;
        if transition.len() != expected {
            return Err(GameError::DimensionMismatch(format!(
                "transition table has {} entries, expected {expected}",
                transition.len()
            )));
        }
        if initial.len() != n_states {
            return Err(GameError::DimensionMismatch(format!(
                "initial distribution has {} entries, expected {n_states}",
                initial.len()
            )));
        }
        normalize_row(&mut initial, "initial distribution")?;
        for (i, row) in transition.chunks_mut(n_states).enumerate() {
            normalize_row(row, &format!("transition row {i}"))?;
        }
        Ok(Self {
            horizon,
            n_states,
            n_actions: [n_actions_p1, n_actions_p2],
            transition,
            initial,
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self, player: Player) -> usize {
        self.n_actions[player.index()]
    }

    pub fn n_actions_p1(&self) -> usize {
        self.n_actions[0]
    }

    pub fn n_actions_p2(&self) -> usize {
        self.n_actions[1]
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    fn joint_index(&self, h: usize, s: usize, a: usize, b: usize) -> usize {
        ((h * self.n_states + s) * self.n_actions[0] + a) * self.n_actions[1] + b
    }

    /// Next-state distribution `P_h(. | s, a, b)`.
    pub fn next_dist(&self, h: usize, s: usize, a: usize, b: usize) -> &[f64] {
        let start = self.joint_index(h, s, a, b) * self.n_states;
        &self.transition[start..start + self.n_states]
    }
}

impl AsRef<GameDynamics> for GameDynamics {
    fn as_ref(&self) -> &GameDynamics {
        self
    }
}

/// A finite-horizon zero-sum Markov game `(H, S, A, B, P, r, d0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovGame {
    dynamics: GameDynamics,
    /// Layout `(h, s, a, b)`, player-one payoff.
    reward: Vec<f64>,
    reward_bound: f64,
}

impl MarkovGame {
    pub fn new(
        dynamics: GameDynamics,
        reward: Vec<f64>,
        reward_bound: f64,
    ) -> Result<Self, GameError> {
        let expected = dynamics.horizon
            * dynamics.n_states
            * dynamics.n_actions[0]
            * dynamics.n_actions[1];
        if reward.len() != expected {
            return Err(GameError::DimensionMismatch(format!(
                "reward table has {} entries, expected {expected}",
                reward.len()
            )));
        }
        if !(reward_bound.is_finite() && reward_bound >= 0.0) {
            return Err(GameError::RewardOutOfRange(format!(
                "reward bound {reward_bound} must be finite and non-negative"
            )));
        }
        if let Some((i, r)) = reward
            .iter()
            .enumerate()
            .find(|(_, r)| !r.is_finite() || r.abs() > reward_bound + PROB_TOL)
        {
            return Err(GameError::RewardOutOfRange(format!(
                "reward entry {i} = {r} exceeds bound {reward_bound}"
            )));
        }
        Ok(Self {
            dynamics,
            reward,
            reward_bound,
        })
    }

    pub fn dynamics(&self) -> &GameDynamics {
        &self.dynamics
    }

    pub fn horizon(&self) -> usize {
        self.dynamics.horizon
    }

    pub fn n_states(&self) -> usize {
        self.dynamics.n_states
    }

    pub fn n_actions(&self, player: Player) -> usize {
        self.dynamics.n_actions(player)
    }

    pub fn reward_bound(&self) -> f64 {
        self.reward_bound
    }

    pub fn reward(&self, h: usize, s: usize, a: usize, b: usize) -> f64 {
        self.reward[self.dynamics.joint_index(h, s, a, b)]
    }

    pub fn reward_table(&self) -> &[f64] {
        &self.reward
    }

    /// Same dynamics, different reward.
    pub fn with_reward(&self, reward: Vec<f64>, reward_bound: f64) -> Result<Self, GameError> {
        Self::new(self.dynamics.clone(), reward, reward_bound)
    }

    /// Stage payoff matrix `M[a][b] = r_h(s, a, b) + sum_s' P(s'|s,a,b) next[s']`, row-major.
    pub fn stage_matrix(&self, h: usize, s: usize, next_values: &[f64]) -> Vec<f64> {
        let (na, nb) = (self.dynamics.n_actions[0], self.dynamics.n_actions[1]);
        let mut m = Vec::with_capacity(na * nb);
        for a in 0..na {
            for b in 0..nb {
                let cont: f64 = self
                    .dynamics
                    .next_dist(h, s, a, b)
                    .iter()
                    .zip(next_values)
                    .map(|(p, v)| p * v)
                    .sum();
                m.push(self.reward(h, s, a, b) + cont);
            }
        }
        m
    }

    pub fn from_file(file: GameFile) -> Result<Self, GameError> {
        let GameFile {
            horizon,
            n_states,
            n_actions_p1,
            n_actions_p2,
            reward_bound,
            initial,
            transition,
            reward,
        } = file;
        let mut flat_p = Vec::new();
        let mut flat_r = Vec::new();
        let shape_err = |what: &str| GameError::Malformed(format!("{what} has the wrong shape"));
        if transition.len() != horizon || reward.len() != horizon {
            return Err(shape_err("stage axis"));
        }
        for (p_h, r_h) in transition.iter().zip(&reward) {
            if p_h.len() != n_states || r_h.len() != n_states {
                return Err(shape_err("state axis"));
            }
            for (p_s, r_s) in p_h.iter().zip(r_h) {
                if p_s.len() != n_actions_p1 || r_s.len() != n_actions_p1 {
                    return Err(shape_err("player-one action axis"));
                }
                for (p_a, r_a) in p_s.iter().zip(r_s) {
                    if p_a.len() != n_actions_p2 || r_a.len() != n_actions_p2 {
                        return Err(shape_err("player-two action axis"));
                    }
                    for row in p_a {
                        if row.len() != n_states {
                            return Err(shape_err("next-state axis"));
                        }
                        flat_p.extend_from_slice(row);
                    }
                    flat_r.extend_from_slice(r_a);
                }
            }
        }
        let dynamics =
            GameDynamics::new(horizon, n_states, n_actions_p1, n_actions_p2, flat_p, initial)?;
        Self::new(dynamics, flat_r, reward_bound)
    }

    pub fn to_file(&self) -> GameFile {
        let d = &self.dynamics;
        let (hh, ns, na, nb) = (d.horizon, d.n_states, d.n_actions[0], d.n_actions[1]);
        let transition = (0..hh)
            .map(|h| {
                (0..ns)
                    .map(|s| {
                        (0..na)
                            .map(|a| (0..nb).map(|b| d.next_dist(h, s, a, b).to_vec()).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let reward = (0..hh)
            .map(|h| {
                (0..ns)
                    .map(|s| {
                        (0..na)
                            .map(|a| (0..nb).map(|b| self.reward(h, s, a, b)).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        GameFile {
            horizon: hh,
            n_states: ns,
            n_actions_p1: na,
            n_actions_p2: nb,
            reward_bound: self.reward_bound,
            initial: d.initial.clone(),
            transition,
            reward,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, GameError> {
        let file: GameFile =
            serde_json::from_str(text).map_err(|e| GameError::Malformed(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("game file serializes")
    }
}

/// On-disk JSON layout of a game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameFile {
    #[serde(rename = "H")]
    pub horizon: usize,
    #[serde(rename = "S")]
    pub n_states: usize,
    #[serde(rename = "A")]
    pub n_actions_p1: usize,
    #[serde(rename = "B")]
    pub n_actions_p2: usize,
    #[serde(rename = "r_max")]
    pub reward_bound: f64,
    #[serde(rename = "d0")]
    pub initial: Vec<f64>,
    /// `P[h][s][a][b][s']`
    #[serde(rename = "P")]
    pub transition: Vec<Vec<Vec<Vec<Vec<f64>>>>>,
    /// `R[h][s][a][b]`
    #[serde(rename = "R")]
    pub reward: Vec<Vec<Vec<Vec<f64>>>>,
}

/// One state distribution per stage, e.g. the data-generating distribution of
/// an offline dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct StageDistribution {
    n_states: usize,
    probs: Vec<f64>,
}

impl StageDistribution {
    pub fn new(horizon: usize, n_states: usize, mut probs: Vec<f64>) -> Result<Self, GameError> {
        if probs.len() != horizon * n_states || horizon == 0 || n_states == 0 {
            return Err(GameError::DimensionMismatch(format!(
                "stage distribution has {} entries, expected {}",
                probs.len(),
                horizon * n_states
            )));
        }
        for (h, row) in probs.chunks_mut(n_states).enumerate() {
            normalize_row(row, &format!("stage distribution at stage {h}"))?;
        }
        Ok(Self { n_states, probs })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, GameError> {
        let n_states = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_states) {
            return Err(GameError::DimensionMismatch("ragged stage distribution".into()));
        }
        Self::new(rows.len(), n_states, rows.concat())
    }

    pub fn horizon(&self) -> usize {
        self.probs.len() / self.n_states
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn stage(&self, h: usize) -> &[f64] {
        &self.probs[h * self.n_states..(h + 1) * self.n_states]
    }

    pub fn prob(&self, h: usize, s: usize) -> f64 {
        self.probs[h * self.n_states + s]
    }
}
