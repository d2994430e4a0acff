use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use super::{euler, qlearning_planner, EulerConfig, QLearningConfig};
use crate::game_core::{
    indicator_reward, induce_mdp, max_visitation, GameDynamics, GameError, InducedMdp, Player,
    RewardKind, StagePolicy,
};
use crate::imitation::{TrajectoryDataset, Transition};
use crate::seeding::{derive_seed, sample_categorical, StreamRng};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlannerBackend {
    /// EULER with the given failure probability; yields `n0` policies per target.
    Euler { delta: f64 },
    /// Q-learning; its greedy policy is repeated `n0` times per target.
    QLearning(QLearningConfig),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarmupConfig {
    /// Policies per `(state, stage)` target.
    pub n0: usize,
    pub backend: PlannerBackend,
    /// Emit uniform policies without interacting when a target is unreachable
    /// under the known model.
    pub skip_unreachable: bool,
}

impl WarmupConfig {
    pub fn new(n0: usize, backend: PlannerBackend) -> Self {
        Self {
            n0,
            backend,
            skip_unreachable: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolicyTag {
    pub target_state: usize,
    pub target_stage: usize,
    pub member: usize,
}

/// Exploration policies for the free player, `n0` per `(state, stage)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicySet {
    pub free_player: Player,
    pub policies: Vec<StagePolicy>,
    pub tags: Vec<PolicyTag>,
    /// Environment episodes consumed.
    pub episodes: u64,
    /// Queries to the fixed expert, charged as `episodes * H`.
    pub expert_queries: u64,
}

impl PolicySet {
    pub fn len(&self) -> usize {
        self.policies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.policies.is_empty()
    }
}

fn expert_mdp(dynamics: &GameDynamics, fixed: Player, expert: &StagePolicy) -> Result<InducedMdp, GameError> {
    let n = dynamics.horizon() * dynamics.n_states() * dynamics.n_actions(fixed.opponent());
    induce_mdp(dynamics, fixed, expert, vec![0.0; n], RewardKind::Exploration)
}

/// Lifts a policy on the first `h` stages to the full horizon, uniform from
/// stage `h` on.
fn extend_uniform(short: &StagePolicy, horizon: usize, target_stage: usize) -> StagePolicy {
    let (ns, na) = (short.n_states(), short.n_actions());
    let mut probs = vec![1.0 / na as f64; horizon * ns * na];
    let keep = target_stage * ns * na;
    probs[..keep].copy_from_slice(&short.table()[..keep]);
    StagePolicy::new(horizon, ns, na, probs).expect("rows copied from a valid policy")
}

/// For every `(s, h)`, solves the reachability problem for `s` at stage `h`
/// in the MDP induced by the fixed expert, and keeps the resulting policies
/// with every stage from `h` on made uniform.
///
/// Targets run in parallel on independent streams derived from `seed`, and
/// are merged in `(s, h)` order.
pub fn warmup(
    dynamics: &GameDynamics,
    fixed: Player,
    expert: &StagePolicy,
    cfg: &WarmupConfig,
    seed: u64,
) -> Result<PolicySet, GameError> {
    if cfg.n0 == 0 {
        return Err(GameError::IndexOutOfRange("warm-up needs at least one policy per target".into()));
    }
    let base = expert_mdp(dynamics, fixed, expert)?;
    let (hh, ns, na) = (base.horizon(), base.n_states(), base.n_actions());
    let targets: Vec<(usize, usize)> = (0..ns).flat_map(|s| (0..hh).map(move |h| (s, h))).collect();
    let per_target: Vec<Result<(Vec<StagePolicy>, u64), GameError>> = targets
        .par_iter()
        .map(|&(s, h)| {
            if cfg.skip_unreachable && max_visitation(&base, s, h)?.0 == 0.0 {
                return Ok((vec![StagePolicy::uniform(hh, ns, na); cfg.n0], 0));
            }
            let problem = base
                .with_reward(indicator_reward(hh, ns, na, s, h), RewardKind::Exploration)?
                .truncated(h + 1)?;
            let stream = derive_seed(seed, &[s as u64, h as u64]);
            match cfg.backend {
                PlannerBackend::Euler { delta } => {
                    let run = euler(&problem, &EulerConfig::new(cfg.n0, delta)?, stream)?;
                    let pols = run.policies.iter().map(|p| extend_uniform(p, hh, h)).collect();
                    Ok((pols, cfg.n0 as u64))
                }
                PlannerBackend::QLearning(q) => {
                    let greedy = qlearning_planner(&problem, &q, stream)?;
                    Ok((vec![extend_uniform(&greedy, hh, h); cfg.n0], q.iterations as u64))
                }
            }
        })
        .collect();
    let mut set = PolicySet {
        free_player: fixed.opponent(),
        policies: Vec::with_capacity(targets.len() * cfg.n0),
        tags: Vec::with_capacity(targets.len() * cfg.n0),
        episodes: 0,
        expert_queries: 0,
    };
    for (&(s, h), result) in targets.iter().zip(per_target) {
        let (pols, episodes) = result?;
        set.episodes += episodes;
        for (member, p) in pols.into_iter().enumerate() {
            set.policies.push(p);
            set.tags.push(PolicyTag {
                target_state: s,
                target_stage: h,
                member,
            });
        }
    }
    set.expert_queries = set.episodes * hh as u64;
    Ok(set)
}

/// State-action distribution of the uniform mixture over a policy set,
/// `p_h(s, a) = |set|^-1 sum_pi d_h^pi(s) pi_h(a | s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureDistribution {
    n_states: usize,
    n_actions: usize,
    probs: Vec<f64>,
}

impl MixtureDistribution {
    pub fn prob(&self, h: usize, s: usize, a: usize) -> f64 {
        self.probs[(h * self.n_states + s) * self.n_actions + a]
    }

    pub fn stage_total(&self, h: usize) -> f64 {
        let w = self.n_states * self.n_actions;
        self.probs[h * w..(h + 1) * w].iter().sum()
    }
}

pub fn mixture_distribution(
    dynamics: &GameDynamics,
    fixed: Player,
    expert: &StagePolicy,
    set: &PolicySet,
) -> Result<MixtureDistribution, GameError> {
    if set.is_empty() {
        return Err(GameError::IndexOutOfRange("empty policy set".into()));
    }
    let mdp = expert_mdp(dynamics, fixed, expert)?;
    let (hh, ns, na) = (mdp.horizon(), mdp.n_states(), mdp.n_actions());
    // Copies and uniform fallbacks repeat a lot; evaluate each distinct policy once.
    let mut distinct: HashMap<Vec<u64>, (usize, usize)> = HashMap::new();
    for (i, p) in set.policies.iter().enumerate() {
        let key = p.table().iter().map(|x| x.to_bits()).collect();
        distinct.entry(key).or_insert((i, 0)).1 += 1;
    }
    let mut groups: Vec<(usize, usize)> = distinct.into_values().collect();
    groups.sort_unstable();
    let mut probs = vec![0.0; hh * ns * na];
    let scale = 1.0 / set.len() as f64;
    for (index, count) in groups {
        let policy = &set.policies[index];
        let d = mdp.state_occupancy(policy)?;
        let w = count as f64 * scale;
        for h in 0..hh {
            for s in 0..ns {
                let ds = d[h * ns + s];
                if ds == 0.0 {
                    continue;
                }
                for a in 0..na {
                    probs[(h * ns + s) * na + a] += w * ds * policy.prob(h, s, a);
                }
            }
        }
    }
    Ok(MixtureDistribution {
        n_states: ns,
        n_actions: na,
        probs,
    })
}

/// `n_episodes` rollouts, each with a policy drawn uniformly from `set` for
/// the free player while `fixed` plays `expert`. Only the fixed expert is
/// queried.
pub fn collect_exploratory(
    dynamics: &GameDynamics,
    fixed: Player,
    expert: &StagePolicy,
    set: &PolicySet,
    n_episodes: usize,
    seed: u64,
) -> Result<TrajectoryDataset, GameError> {
    expert.check_fits(dynamics, fixed)?;
    if set.is_empty() || set.free_player != fixed.opponent() {
        return Err(GameError::DimensionMismatch(
            "policy set is empty or belongs to the wrong player".into(),
        ));
    }
    let mut rng = StreamRng::seed_from_u64(seed);
    let hh = dynamics.horizon();
    let mut records = Vec::with_capacity(n_episodes * hh);
    for _ in 0..n_episodes {
        let explorer = &set.policies[rng.random_range(0..set.len())];
        let mut s = sample_categorical(dynamics.initial(), &mut rng);
        for h in 0..hh {
            let x = explorer.sample(h, s, &mut rng);
            let y = expert.sample(h, s, &mut rng);
            let (a, b) = match fixed {
                Player::One => (y, x),
                Player::Two => (x, y),
            };
            records.push(Transition { h, s, a, b });
            s = sample_categorical(dynamics.next_dist(h, s, a, b), &mut rng);
        }
    }
    let mut per_episode = [0u64; 2];
    per_episode[fixed.index()] = hh as u64;
    Ok(TrajectoryDataset::from_parts(hh, records, per_episode, seed))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageEntry {
    pub state: usize,
    pub stage: usize,
    pub max_visitation: f64,
    /// `max_a max_visitation / p_h(s, a)`.
    pub worst_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub entries: Vec<CoverageEntry>,
    /// `2 S A H` with `A` the free player's action count.
    pub bound: f64,
}

impl CoverageReport {
    pub fn worst_ratio(&self) -> f64 {
        self.entries.iter().map(|e| e.worst_ratio).fold(0.0, f64::max)
    }

    pub fn satisfied(&self) -> bool {
        self.worst_ratio() <= self.bound
    }
}

/// Ratio of the best reachable state-action occupancy to the mixture mass,
/// over every `(s, h)` the free player can reach with probability at least
/// `delta`.
pub fn coverage_report(
    dynamics: &GameDynamics,
    fixed: Player,
    expert: &StagePolicy,
    mixture: &MixtureDistribution,
    delta: f64,
) -> Result<CoverageReport, GameError> {
    let mdp = expert_mdp(dynamics, fixed, expert)?;
    let (hh, ns, na) = (mdp.horizon(), mdp.n_states(), mdp.n_actions());
    let mut entries = Vec::new();
    for s in 0..ns {
        for h in 0..hh {
            let (reach, _) = max_visitation(&mdp, s, h)?;
            if reach < delta {
                continue;
            }
            // Choosing the action at stage h freely, max_pi d_h(s, a) = max_pi d_h(s).
            let worst_ratio = (0..na)
                .map(|a| match mixture.prob(h, s, a) {
                    p if p > 0.0 => reach / p,
                    _ => f64::INFINITY,
                })
                .fold(0.0, f64::max);
            entries.push(CoverageEntry {
                state: s,
                stage: h,
                max_visitation: reach,
                worst_ratio,
            });
        }
    }
    Ok(CoverageReport {
        entries,
        bound: 2.0 * (ns * na * hh) as f64,
    })
}
