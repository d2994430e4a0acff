use rand::{Rng, SeedableRng};

use crate::game_core::{GameError, InducedMdp, StagePolicy};
use crate::seeding::StreamRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QLearningConfig {
    pub iterations: usize,
    pub epsilon: f64,
}

impl Default for QLearningConfig {
    fn default() -> Self {
        Self {
            iterations: 100,
            epsilon: 0.1,
        }
    }
}

fn greedy(row: &[f64]) -> usize {
    let mut best = 0;
    for (a, &q) in row.iter().enumerate() {
        if q > row[best] {
            best = a;
        }
    }
    best
}

/// Episodic epsilon-greedy Q-learning with optimistic initialization
/// `Q_h = H - h` and step size `1 / visits`. The MDP is used only as a
/// simulator. Returns the final greedy policy.
pub fn qlearning_planner(
    mdp: &InducedMdp,
    cfg: &QLearningConfig,
    seed: u64,
) -> Result<StagePolicy, GameError> {
    if !(0.0..=1.0).contains(&cfg.epsilon) {
        return Err(GameError::IndexOutOfRange(format!(
            "exploration rate {} outside [0, 1]",
            cfg.epsilon
        )));
    }
    let (hh, ns, na) = (mdp.horizon(), mdp.n_states(), mdp.n_actions());
    let mut rng = StreamRng::seed_from_u64(seed);
    let mut q: Vec<f64> = (0..hh * ns * na)
        .map(|i| (hh - i / (ns * na)) as f64)
        .collect();
    let mut visits = vec![0u32; hh * ns * na];
    for _ in 0..cfg.iterations {
        let mut s = mdp.sample_initial(&mut rng);
        for h in 0..hh {
            let row = (h * ns + s) * na;
            let a = if rng.random::<f64>() < cfg.epsilon {
                rng.random_range(0..na)
            } else {
                greedy(&q[row..row + na])
            };
            let t = mdp.step(h, s, a, &mut rng);
            let future = if h + 1 < hh {
                let next = ((h + 1) * ns + t) * na;
                q[next..next + na].iter().copied().fold(f64::NEG_INFINITY, f64::max)
            } else {
                0.0
            };
            let idx = row + a;
            visits[idx] += 1;
            q[idx] += (mdp.reward(h, s, a) + future - q[idx]) / visits[idx] as f64;
            s = t;
        }
    }
    let choice: Vec<usize> = q.chunks(na).map(greedy).collect();
    StagePolicy::deterministic(hh, ns, na, &choice)
}
