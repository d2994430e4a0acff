use super::mdp::dot;
use super::{induce_mdp, GameDynamics, GameError, InducedMdp, MarkovGame, Player, PolicyPair, RewardKind, StagePolicy};

/// Exact values of a policy pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    n_states: usize,
    n_actions: [usize; 2],
    /// Layout `(h, s)` for `h in 0..=H`, with `V_H = 0`.
    values: Vec<f64>,
    /// Layout `(h, s, a, b)`.
    q: Vec<f64>,
    start_value: f64,
}

impl Evaluation {
    pub fn value(&self, h: usize, s: usize) -> f64 {
        self.values[h * self.n_states + s]
    }

    pub fn stage_values(&self, h: usize) -> &[f64] {
        &self.values[h * self.n_states..(h + 1) * self.n_states]
    }

    pub fn q(&self, h: usize, s: usize, a: usize, b: usize) -> f64 {
        self.q[((h * self.n_states + s) * self.n_actions[0] + a) * self.n_actions[1] + b]
    }

    /// `<d0, V_0>`.
    pub fn start_value(&self) -> f64 {
        self.start_value
    }
}

/// Backward recursion for `V^{mu,nu}` and `Q^{mu,nu}`.
pub fn evaluate(game: &MarkovGame, pair: &PolicyPair) -> Result<Evaluation, GameError> {
    let d = game.dynamics();
    pair.check_fits(d)?;
    let (hh, ns, na, nb) = (d.horizon(), d.n_states(), d.n_actions_p1(), d.n_actions_p2());
    let mut values = vec![0.0; (hh + 1) * ns];
    let mut q = vec![0.0; hh * ns * na * nb];
    for h in (0..hh).rev() {
        let (cur, next) = values.split_at_mut((h + 1) * ns);
        let next = &next[..ns];
        for s in 0..ns {
            let mut v = 0.0;
            for a in 0..na {
                let pa = pair.mu.prob(h, s, a);
                for b in 0..nb {
                    let qv = game.reward(h, s, a, b) + dot(d.next_dist(h, s, a, b), next);
                    q[((h * ns + s) * na + a) * nb + b] = qv;
                    v += pa * pair.nu.prob(h, s, b) * qv;
                }
            }
            cur[h * ns + s] = v;
        }
    }
    let start_value = dot(d.initial(), &values[..ns]);
    Ok(Evaluation {
        n_states: ns,
        n_actions: [na, nb],
        values,
        q,
        start_value,
    })
}

/// Occupancy measures `d_h(s)` and `d_h(s, a, b)`.
///
/// For a single-agent MDP the second action axis has length one.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyTable {
    horizon: usize,
    n_states: usize,
    n_actions: [usize; 2],
    state: Vec<f64>,
    joint: Vec<f64>,
}

impl OccupancyTable {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn state(&self, h: usize, s: usize) -> f64 {
        self.state[h * self.n_states + s]
    }

    pub fn stage(&self, h: usize) -> &[f64] {
        &self.state[h * self.n_states..(h + 1) * self.n_states]
    }

    pub fn joint(&self, h: usize, s: usize, a: usize, b: usize) -> f64 {
        self.joint[((h * self.n_states + s) * self.n_actions[0] + a) * self.n_actions[1] + b]
    }

    /// Marginal over player one's action.
    pub fn action_p1(&self, h: usize, s: usize, a: usize) -> f64 {
        (0..self.n_actions[1]).map(|b| self.joint(h, s, a, b)).sum()
    }

    /// Marginal over player two's action.
    pub fn action_p2(&self, h: usize, s: usize, b: usize) -> f64 {
        (0..self.n_actions[0]).map(|a| self.joint(h, s, a, b)).sum()
    }

    /// Occupancy of a single-agent MDP under `policy`.
    pub fn for_mdp(mdp: &InducedMdp, policy: &StagePolicy) -> Result<Self, GameError> {
        let state = mdp.state_occupancy(policy)?;
        let (ns, na) = (mdp.n_states(), mdp.n_actions());
        let mut joint = vec![0.0; mdp.horizon() * ns * na];
        for h in 0..mdp.horizon() {
            for s in 0..ns {
                for a in 0..na {
                    joint[(h * ns + s) * na + a] = state[h * ns + s] * policy.prob(h, s, a);
                }
            }
        }
        Ok(Self {
            horizon: mdp.horizon(),
            n_states: ns,
            n_actions: [na, 1],
            state,
            joint,
        })
    }
}

/// Forward recursion for the occupancy measure of a policy pair.
pub fn occupancy(dynamics: &GameDynamics, pair: &PolicyPair) -> Result<OccupancyTable, GameError> {
    pair.check_fits(dynamics)?;
    let (hh, ns, na, nb) = (
        dynamics.horizon(),
        dynamics.n_states(),
        dynamics.n_actions_p1(),
        dynamics.n_actions_p2(),
    );
    let mut state = vec![0.0; hh * ns];
    let mut joint = vec![0.0; hh * ns * na * nb];
    state[..ns].copy_from_slice(dynamics.initial());
    for h in 0..hh {
        for s in 0..ns {
            let ds = state[h * ns + s];
            if ds == 0.0 {
                continue;
            }
            for a in 0..na {
                let pa = pair.mu.prob(h, s, a);
                if pa == 0.0 {
                    continue;
                }
                for b in 0..nb {
                    let w = ds * pa * pair.nu.prob(h, s, b);
                    joint[((h * ns + s) * na + a) * nb + b] = w;
                    if w == 0.0 || h + 1 == hh {
                        continue;
                    }
                    for (t, p) in dynamics.next_dist(h, s, a, b).iter().enumerate() {
                        state[(h + 1) * ns + t] += w * p;
                    }
                }
            }
        }
    }
    Ok(OccupancyTable {
        horizon: hh,
        n_states: ns,
        n_actions: [na, nb],
        state,
        joint,
    })
}

impl MarkovGame {
    /// Player-one payoff averaged over the fixed player's policy, layout `(h, s, a_free)`.
    pub fn marginal_reward(&self, fixed: Player, policy: &StagePolicy) -> Result<Vec<f64>, GameError> {
        let d = self.dynamics();
        policy.check_fits(d, fixed)?;
        let (hh, ns, na, nb) = (d.horizon(), d.n_states(), d.n_actions_p1(), d.n_actions_p2());
        let n_free = d.n_actions(fixed.opponent());
        let mut out = vec![0.0; hh * ns * n_free];
        for h in 0..hh {
            for s in 0..ns {
                for a in 0..na {
                    for b in 0..nb {
                        let (x, w) = match fixed {
                            Player::Two => (a, policy.prob(h, s, b)),
                            Player::One => (b, policy.prob(h, s, a)),
                        };
                        out[(h * ns + s) * n_free + x] += w * self.reward(h, s, a, b);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// MDP whose maximization gives `responder`'s best response to `opponent`.
///
/// Rewards are in the responder's own payoff, so for player two the
/// returned value is the negated player-one value.
pub fn response_mdp(
    game: &MarkovGame,
    responder: Player,
    opponent: &StagePolicy,
) -> Result<InducedMdp, GameError> {
    let fixed = responder.opponent();
    let sign = responder.payoff_sign();
    let reward = game
        .marginal_reward(fixed, opponent)?
        .into_iter()
        .map(|r| sign * r)
        .collect();
    induce_mdp(game.dynamics(), fixed, opponent, reward, RewardKind::Planning)
}
