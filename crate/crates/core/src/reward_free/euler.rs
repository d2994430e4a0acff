use rand::SeedableRng;

use crate::game_core::{GameError, InducedMdp, StagePolicy};
use crate::seeding::StreamRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerConfig {
    /// Number of episodes, and of returned policies.
    pub n_episodes: usize,
    /// Overall failure probability.
    pub delta: f64,
}

impl EulerConfig {
    pub fn new(n_episodes: usize, delta: f64) -> Result<Self, GameError> {
        if n_episodes == 0 || !(delta > 0.0 && delta < 1.0) {
            return Err(GameError::IndexOutOfRange(format!(
                "EULER needs at least one episode and delta in (0, 1), got {n_episodes} and {delta}"
            )));
        }
        Ok(Self { n_episodes, delta })
    }
}

/// Confidence constants derived from the configuration and the MDP size.
struct Constants {
    log_bonus: f64,
    b_p: f64,
    b_v: f64,
    j: f64,
}

impl Constants {
    fn new(cfg: &EulerConfig, mdp: &InducedMdp) -> Self {
        let horizon = mdp.horizon() as f64;
        let sa = (mdp.n_states() * mdp.n_actions()) as f64;
        let delta_split = cfg.delta / 7.0;
        let n = cfg.n_episodes as f64;
        let log_conf = (4.0 * sa * n / delta_split).ln();
        // The bonus uses the total step count `T = N H`.
        let log_bonus = (4.0 * sa * n * horizon / delta_split).ln();
        Self {
            log_bonus,
            b_p: horizon * (2.0 * log_conf).sqrt(),
            b_v: (2.0 * log_conf).sqrt(),
            j: horizon / 3.0 * log_conf,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EulerRun {
    /// The policy played in each episode; the first is uniform.
    pub policies: Vec<StagePolicy>,
    /// `<d0, upper V_0>` after each episode's update.
    pub optimistic_values: Vec<f64>,
}

/// Optimistic model-based exploration with Bernstein-type bonuses.
///
/// The reward is known; transitions are learned from sampled episodes. The
/// MDP is used only as a simulator.
pub fn euler(mdp: &InducedMdp, cfg: &EulerConfig, seed: u64) -> Result<EulerRun, GameError> {
    let (hh, ns, na) = (mdp.horizon(), mdp.n_states(), mdp.n_actions());
    let c = Constants::new(cfg, mdp);
    let mut rng = StreamRng::seed_from_u64(seed);
    // Layout (h, s, a, s') and (h, s, a).
    let mut next_counts = vec![0u32; hh * ns * na * ns];
    let mut visits = vec![0u32; hh * ns * na];
    let mut policy = StagePolicy::uniform(hh, ns, na);
    let mut policies = Vec::with_capacity(cfg.n_episodes);
    let mut optimistic_values = Vec::with_capacity(cfg.n_episodes);
    let mut upper = vec![0.0; (hh + 1) * ns];
    let mut lower = vec![0.0; (hh + 1) * ns];
    let mut p_hat = vec![0.0; ns];
    for _ in 0..cfg.n_episodes {
        policies.push(policy.clone());
        let mut s = mdp.sample_initial(&mut rng);
        for h in 0..hh {
            let a = policy.sample(h, s, &mut rng);
            let t = mdp.step(h, s, a, &mut rng);
            visits[(h * ns + s) * na + a] += 1;
            next_counts[((h * ns + s) * na + a) * ns + t] += 1;
            s = t;
        }

        let mut choice = vec![0usize; hh * ns];
        for h in (0..hh).rev() {
            let cap = (hh - h) as f64;
            for s in 0..ns {
                let mut best = (0usize, f64::NEG_INFINITY, 0.0);
                for a in 0..na {
                    let idx = (h * ns + s) * na + a;
                    let n = visits[idx];
                    let r = mdp.reward(h, s, a);
                    let (q_up, q_low) = if n == 0 {
                        (cap, 0.0)
                    } else {
                        let nf = n as f64;
                        for (t, p) in p_hat.iter_mut().enumerate() {
                            *p = next_counts[idx * ns + t] as f64 / nf;
                        }
                        let next_up = &upper[(h + 1) * ns..(h + 2) * ns];
                        let next_low = &lower[(h + 1) * ns..(h + 2) * ns];
                        let mean_up: f64 = p_hat.iter().zip(next_up).map(|(p, v)| p * v).sum();
                        let second: f64 = p_hat.iter().zip(next_up).map(|(p, v)| p * v * v).sum();
                        let var = (second - mean_up * mean_up).max(0.0);
                        let mean_low: f64 = p_hat.iter().zip(next_low).map(|(p, v)| p * v).sum();
                        let spread: f64 = p_hat
                            .iter()
                            .zip(next_up.iter().zip(next_low))
                            .map(|(p, (u, l))| p * (u - l).powi(2))
                            .sum::<f64>()
                            .sqrt();
                        let bonus = (2.0 * var * c.log_bonus / nf).sqrt()
                            + hh as f64 * c.log_bonus / (3.0 * (nf - 1.0).max(1.0));
                        let big = bonus
                            + ((4.0 * c.j + c.b_p) / nf.sqrt() + c.b_v * spread) / nf.sqrt();
                        ((r + mean_up + big).min(cap), (r + mean_low - big).max(0.0))
                    };
                    if q_up > best.1 {
                        best = (a, q_up, q_low);
                    }
                }
                choice[h * ns + s] = best.0;
                upper[h * ns + s] = best.1;
                lower[h * ns + s] = best.2;
            }
        }
        policy = StagePolicy::deterministic(hh, ns, na, &choice)?;
        optimistic_values.push(
            mdp.initial().iter().zip(&upper[..ns]).map(|(p, v)| p * v).sum(),
        );
    }
    Ok(EulerRun {
        policies,
        optimistic_values,
    })
}
