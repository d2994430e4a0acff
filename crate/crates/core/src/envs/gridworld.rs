use serde::{Deserialize, Serialize};

use super::EnvError;
use crate::game_core::{GameDynamics, MarkovGame, PolicyPair};
use crate::matrix_nash::{
    mix_equilibria, nash_gap, zero_sum_value_iteration_ordered, ActionOrder,
};

/// Grid cell, `x` to the right and `y` upwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub x: usize,
    pub y: usize,
}

impl Cell {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }

    fn manhattan(self, other: Cell) -> usize {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridAction {
    Left,
    Right,
    Up,
    Down,
}

impl GridAction {
    pub const ALL: [GridAction; 4] = [Self::Left, Self::Right, Self::Up, Self::Down];

    /// Cell reached on an open grid of side `size`; walls leave the cell unchanged.
    fn apply(self, c: Cell, size: usize) -> Cell {
        match self {
            Self::Left if c.x > 0 => Cell::new(c.x - 1, c.y),
            Self::Right if c.x + 1 < size => Cell::new(c.x + 1, c.y),
            Self::Up if c.y + 1 < size => Cell::new(c.x, c.y + 1),
            Self::Down if c.y > 0 => Cell::new(c.x, c.y - 1),
            _ => c,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridworldSpec {
    pub size: usize,
    pub horizon: usize,
    pub goal: Cell,
    /// Start cells of player one and player two.
    pub start: [Cell; 2],
}

impl Default for GridworldSpec {
    fn default() -> Self {
        Self {
            size: 3,
            horizon: 8,
            goal: Cell::new(2, 2),
            start: [Cell::new(0, 1), Cell::new(1, 0)],
        }
    }
}

impl GridworldSpec {
    pub fn validate(&self) -> Result<(), EnvError> {
        let inside = |c: Cell| c.x < self.size && c.y < self.size;
        let fail = |m: &str| Err(EnvError::InvalidParameter(m.to_string()));
        if self.size < 2 || self.horizon == 0 {
            return fail("grid side must be at least 2 and horizon positive");
        }
        if !inside(self.goal) || !self.start.iter().all(|&c| inside(c)) {
            return fail("goal and start cells must lie on the grid");
        }
        if self.start[0] == self.start[1] {
            return fail("start cells must be distinct");
        }
        if self.start.contains(&self.goal) {
            return fail("agents cannot start on the goal");
        }
        if self.start[0].manhattan(self.goal) != self.start[1].manhattan(self.goal) {
            return fail("both agents must start equally far from the goal");
        }
        Ok(())
    }
}

/// Joint-position encoding: live states are ordered pairs of distinct cells
/// ranked lexicographically by `((x1, y1), (x2, y2))`; the absorbing terminal
/// state comes last.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCodec {
    pairs: Vec<(Cell, Cell)>,
}

impl GridCodec {
    pub fn new(size: usize) -> Self {
        let cells: Vec<Cell> = (0..size)
            .flat_map(|x| (0..size).map(move |y| Cell::new(x, y)))
            .collect();
        let pairs = cells
            .iter()
            .flat_map(|&a| cells.iter().filter(move |&&b| b != a).map(move |&b| (a, b)))
            .collect();
        Self { pairs }
    }

    pub fn n_states(&self) -> usize {
        self.pairs.len() + 1
    }

    pub fn terminal(&self) -> usize {
        self.pairs.len()
    }

    pub fn encode(&self, p1: Cell, p2: Cell) -> Option<usize> {
        self.pairs.binary_search(&(p1, p2)).ok()
    }

    /// `None` for the terminal state.
    pub fn decode(&self, state: usize) -> Option<(Cell, Cell)> {
        self.pairs.get(state).copied()
    }
}

#[derive(Debug, Clone)]
pub struct Gridworld {
    pub spec: GridworldSpec,
    pub game: MarkovGame,
    pub codec: GridCodec,
}

impl Gridworld {
    pub fn start_state(&self) -> usize {
        self.codec
            .encode(self.spec.start[0], self.spec.start[1])
            .expect("validated start cells")
    }
}

/// Outcome of one simultaneous move from live positions `(p1, p2)`.
///
/// A move into the other agent's current cell is blocked; if both agents
/// target the same free cell both stay. An agent reaching the goal alone wins.
fn resolve(spec: &GridworldSpec, p1: Cell, p2: Cell, a: GridAction, b: GridAction) -> (Cell, Cell, f64) {
    let mut t1 = a.apply(p1, spec.size);
    let mut t2 = b.apply(p2, spec.size);
    if t1 == p2 {
        t1 = p1;
    }
    if t2 == p1 {
        t2 = p2;
    }
    if t1 == t2 {
        t1 = p1;
        t2 = p2;
    }
    let reward = match (t1 == spec.goal, t2 == spec.goal) {
        (true, false) => 1.0,
        (false, true) => -1.0,
        _ => 0.0,
    };
    (t1, t2, reward)
}

pub fn make_gridworld(spec: &GridworldSpec) -> Result<Gridworld, EnvError> {
    spec.validate()?;
    let codec = GridCodec::new(spec.size);
    let ns = codec.n_states();
    let na = GridAction::ALL.len();
    let mut stage_p = Vec::with_capacity(ns * na * na * ns);
    let mut stage_r = Vec::with_capacity(ns * na * na);
    for s in 0..ns {
        for a in GridAction::ALL {
            for b in GridAction::ALL {
                let mut next = vec![0.0; ns];
                let (target, reward) = match codec.decode(s) {
                    Some((p1, p2)) if p1 != spec.goal && p2 != spec.goal => {
                        let (q1, q2, r) = resolve(spec, p1, p2, a, b);
                        if q1 == spec.goal || q2 == spec.goal {
                            (codec.terminal(), r)
                        } else {
                            (codec.encode(q1, q2).expect("distinct cells"), r)
                        }
                    }
                    // Positions on the goal are never entered; treat them like the terminal.
                    _ => (codec.terminal(), 0.0),
                };
                next[target] = 1.0;
                stage_p.extend(next);
                stage_r.push(reward);
            }
        }
    }
    let mut initial = vec![0.0; ns];
    initial[codec.encode(spec.start[0], spec.start[1]).expect("validated")] = 1.0;
    let dynamics = GameDynamics::new(
        spec.horizon,
        ns,
        na,
        na,
        stage_p.repeat(spec.horizon),
        initial,
    )?;
    let game = MarkovGame::new(dynamics, stage_r.repeat(spec.horizon), 1.0)?;
    Ok(Gridworld {
        spec: spec.clone(),
        game,
        codec,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridworldVariant {
    /// The deterministic equilibrium found by value iteration.
    Pure,
    /// Uniform per-state mixture of the distinct deterministic equilibria
    /// obtained under different action orders.
    Mixed,
}

/// Expert pair for a gridworld variant, checked to be an equilibrium.
pub fn gridworld_experts(world: &Gridworld, variant: GridworldVariant) -> Result<PolicyPair, EnvError> {
    let n = GridAction::ALL.len();
    let orders: Vec<ActionOrder> = match variant {
        GridworldVariant::Pure => vec![ActionOrder::identity(n, n)],
        GridworldVariant::Mixed => {
            let mut v: Vec<ActionOrder> = (0..n).map(|k| ActionOrder::rotated(n, n, k)).collect();
            v.push(ActionOrder::reversed(n, n));
            v
        }
    };
    let mut found: Vec<PolicyPair> = Vec::new();
    for order in &orders {
        let eq = zero_sum_value_iteration_ordered(&world.game, order)?;
        if !found.contains(&eq.pair) {
            found.push(eq.pair);
        }
    }
    let weights = vec![1.0 / found.len() as f64; found.len()];
    let pair = mix_equilibria(&found, &weights)?;
    let gap = nash_gap(&world.game, &pair)?;
    if gap > 1e-6 {
        return Err(EnvError::InvalidParameter(format!(
            "expert pair is not an equilibrium (gap {gap})"
        )));
    }
    Ok(pair)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codec_round_trips_and_orders_lexicographically() {
        let codec = GridCodec::new(3);
        assert_eq!(codec.n_states(), 73);
        assert_eq!(codec.terminal(), 72);
        for s in 0..72 {
            let (a, b) = codec.decode(s).unwrap();
            assert_ne!(a, b);
            assert_eq!(codec.encode(a, b), Some(s));
        }
        assert_eq!(codec.decode(0), Some((Cell::new(0, 0), Cell::new(0, 1))));
        assert_eq!(codec.decode(72), None);
        assert_eq!(codec.encode(Cell::new(1, 1), Cell::new(1, 1)), None);
    }

    #[test]
    fn walls_and_agents_block_moves() {
        let spec = GridworldSpec::default();
        // Walking into the left wall.
        let (q1, _, _) = resolve(&spec, Cell::new(0, 1), Cell::new(2, 0), GridAction::Left, GridAction::Left);
        assert_eq!(q1, Cell::new(0, 1));
        // Walking into the other agent.
        let (q1, q2, _) = resolve(&spec, Cell::new(0, 0), Cell::new(1, 0), GridAction::Right, GridAction::Up);
        assert_eq!(q1, Cell::new(0, 0));
        assert_eq!(q2, Cell::new(1, 1));
        // Both targeting the same free cell.
        let (q1, q2, _) = resolve(&spec, Cell::new(0, 1), Cell::new(1, 0), GridAction::Right, GridAction::Up);
        assert_eq!((q1, q2), (Cell::new(0, 1), Cell::new(1, 0)));
    }

    #[test]
    fn reaching_goal_alone_wins() {
        let spec = GridworldSpec::default();
        let (_, _, r) = resolve(&spec, Cell::new(2, 1), Cell::new(0, 0), GridAction::Up, GridAction::Up);
        assert_eq!(r, 1.0);
        let (_, _, r) = resolve(&spec, Cell::new(0, 0), Cell::new(1, 2), GridAction::Up, GridAction::Right);
        assert_eq!(r, -1.0);
        // Simultaneous arrival is blocked by the shared-cell rule.
        let (_, _, r) = resolve(&spec, Cell::new(2, 1), Cell::new(1, 2), GridAction::Up, GridAction::Right);
        assert_eq!(r, 0.0);
    }

    #[test]
    fn terminal_absorbs_with_zero_reward() {
        let world = make_gridworld(&GridworldSpec::default()).unwrap();
        let t = world.codec.terminal();
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(world.game.dynamics().next_dist(3, t, a, b)[t], 1.0);
                assert_eq!(world.game.reward(3, t, a, b), 0.0);
            }
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut spec = GridworldSpec::default();
        spec.start = [Cell::new(0, 1), Cell::new(0, 1)];
        assert!(make_gridworld(&spec).is_err());
        spec.start = [Cell::new(0, 0), Cell::new(1, 0)];
        assert!(make_gridworld(&spec).is_err());
        spec.start = [Cell::new(5, 0), Cell::new(1, 0)];
        assert!(make_gridworld(&spec).is_err());
    }
}
