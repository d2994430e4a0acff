use rand::{Rng, SeedableRng};

use super::{QueryLedger, QueryPhase};
use crate::game_core::{
    best_response, induce_mdp, GameDynamics, GameError, InducedMdp, Player, PolicyPair,
    RewardKind, StagePolicy,
};
use crate::seeding::{derive_seed, label_key, sample_categorical, StreamRng};

/// Upper bound of `||mu - mu_E||^2`, used where no expert draw exists yet.
const MAX_UNCERTAINTY: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IterateChoice {
    /// A uniformly drawn iterate, as analysed.
    Sampled,
    Last,
    Average,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerPlanner {
    /// Exact value iteration on the uncertainty reward estimated from all
    /// paired expert draws so far; unseen states get the maximal reward.
    ModelBased,
    /// Optimistic Q-learning for `inner_episodes` episodes, drawing a fresh
    /// pair of expert actions at every visited state.
    QLearning,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MurmailConfig {
    pub iterations: usize,
    pub step_size: f64,
    pub inner_episodes: usize,
    pub batch: usize,
    pub output: IterateChoice,
    pub planner: InnerPlanner,
    pub seed: u64,
}

impl Default for MurmailConfig {
    fn default() -> Self {
        Self {
            iterations: 100,
            step_size: 50.0,
            inner_episodes: 10,
            batch: 100,
            output: IterateChoice::Sampled,
            planner: InnerPlanner::ModelBased,
            seed: 0,
        }
    }
}

impl MurmailConfig {
    /// Budget-counted queries per iteration under the model-based planner.
    pub fn queries_per_iteration(&self) -> u64 {
        2 * self.batch as u64 * 3
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MurmailOutput {
    pub pair: PolicyPair,
    pub ledger: QueryLedger,
    pub iterations: usize,
    /// One-based index of the returned iterate when it was sampled.
    pub chosen_iteration: Option<usize>,
}

/// Running statistics of paired expert draws at each `(h, s)`.
struct PairedDraws {
    n_actions: usize,
    pairs: Vec<u32>,
    collisions: Vec<u32>,
    /// First-draw action counts, layout `(h, s, a)`.
    first: Vec<u32>,
}

impl PairedDraws {
    fn new(cells: usize, n_actions: usize) -> Self {
        Self {
            n_actions,
            pairs: vec![0; cells],
            collisions: vec![0; cells],
            first: vec![0; cells * n_actions],
        }
    }

    fn record(&mut self, cell: usize, a: usize, a2: usize) {
        self.pairs[cell] += 1;
        self.collisions[cell] += u32::from(a == a2);
        self.first[cell * self.n_actions + a] += 1;
    }

    /// Sample mean of `1{A = A'} - 2 m(A) + ||m||^2` for the learner row `m`.
    fn uncertainty(&self, cell: usize, m: &[f64]) -> f64 {
        let n = self.pairs[cell];
        if n == 0 {
            return MAX_UNCERTAINTY;
        }
        let counts = &self.first[cell * self.n_actions..(cell + 1) * self.n_actions];
        let cross: f64 = m.iter().zip(counts).map(|(p, &c)| p * c as f64).sum();
        let norm: f64 = m.iter().map(|p| p * p).sum();
        let est = (self.collisions[cell] as f64 - 2.0 * cross) / n as f64 + norm;
        est.clamp(0.0, MAX_UNCERTAINTY)
    }
}

fn softmax_rows(logits: &[f64], shape: (usize, usize, usize)) -> StagePolicy {
    let (hh, ns, na) = shape;
    let mut probs = Vec::with_capacity(logits.len());
    for row in logits.chunks(na) {
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = row.iter().map(|x| (x - m).exp()).collect();
        let z: f64 = w.iter().sum();
        probs.extend(w.into_iter().map(|x| x / z));
    }
    StagePolicy::new(hh, ns, na, probs).expect("softmax rows are distributions")
}

/// One learner's exponentiated-gradient state.
struct Side<'a> {
    learner: Player,
    expert: &'a StagePolicy,
    logits: Vec<f64>,
    policy: StagePolicy,
    draws: PairedDraws,
    history: Vec<StagePolicy>,
}

impl<'a> Side<'a> {
    fn new(dynamics: &GameDynamics, learner: Player, expert: &'a StagePolicy) -> Self {
        let policy = StagePolicy::uniform_for(dynamics, learner);
        let cells = dynamics.horizon() * dynamics.n_states();
        Self {
            learner,
            expert,
            logits: vec![0.0; policy.table().len()],
            draws: PairedDraws::new(cells, dynamics.n_actions(learner)),
            history: Vec::new(),
            policy,
        }
    }

    fn shape(&self) -> (usize, usize, usize) {
        (self.policy.horizon(), self.policy.n_states(), self.policy.n_actions())
    }

    /// Opponent policy that steers towards states where the learner is most
    /// uncertain about its expert.
    fn plan(
        &mut self,
        dynamics: &GameDynamics,
        cfg: &MurmailConfig,
        ledger: &mut QueryLedger,
        rng: &mut StreamRng,
    ) -> Result<StagePolicy, GameError> {
        let (hh, ns, _) = self.shape();
        let responder = self.learner.opponent();
        let nr = dynamics.n_actions(responder);
        let mut reward = vec![0.0; hh * ns * nr];
        for h in 0..hh {
            for s in 0..ns {
                let u = self.draws.uncertainty(h * ns + s, self.policy.row(h, s));
                reward[(h * ns + s) * nr..][..nr].iter_mut().for_each(|r| *r = u);
            }
        }
        let mdp = induce_mdp(dynamics, self.learner, &self.policy, reward, RewardKind::Planning)?;
        match cfg.planner {
            InnerPlanner::ModelBased => Ok(best_response(&mdp).policy),
            InnerPlanner::QLearning => self.plan_by_sampling(&mdp, cfg, ledger, rng),
        }
    }

    fn plan_by_sampling(
        &self,
        mdp: &InducedMdp,
        cfg: &MurmailConfig,
        ledger: &mut QueryLedger,
        rng: &mut StreamRng,
    ) -> Result<StagePolicy, GameError> {
        let (hh, ns, na) = (mdp.horizon(), mdp.n_states(), mdp.n_actions());
        let mut q: Vec<f64> = (0..hh * ns * na)
            .map(|i| MAX_UNCERTAINTY * (hh - i / (ns * na)) as f64)
            .collect();
        let mut visits = vec![0u32; q.len()];
        let argmax = |row: &[f64]| {
            (0..row.len()).fold(0, |best, a| if row[a] > row[best] { a } else { best })
        };
        for _ in 0..cfg.inner_episodes {
            let mut s = mdp.sample_initial(rng);
            for h in 0..hh {
                let base = (h * ns + s) * na;
                let x = argmax(&q[base..base + na]);
                let e1 = self.expert.sample(h, s, rng);
                let e2 = self.expert.sample(h, s, rng);
                ledger.add(QueryPhase::InnerPlanner, self.learner, 2);
                let m = self.policy.row(h, s);
                let r = f64::from(u8::from(e1 == e2)) - 2.0 * m[e1] + m.iter().map(|p| p * p).sum::<f64>();
                let t = mdp.step(h, s, x, rng);
                let future = if h + 1 < hh {
                    let nb = ((h + 1) * ns + t) * na;
                    q[nb..nb + na].iter().copied().fold(f64::NEG_INFINITY, f64::max)
                } else {
                    0.0
                };
                visits[base + x] += 1;
                q[base + x] += (r + future - q[base + x]) / visits[base + x] as f64;
                s = t;
            }
        }
        let choice: Vec<usize> = q.chunks(na).map(argmax).collect();
        StagePolicy::deterministic(hh, ns, na, &choice)
    }
}

fn sample_stage_state(
    dynamics: &GameDynamics,
    learner: Player,
    policy: &StagePolicy,
    opponent: &StagePolicy,
    rng: &mut StreamRng,
) -> (usize, usize) {
    let target = rng.random_range(0..dynamics.horizon());
    let mut s = sample_categorical(dynamics.initial(), rng);
    for h in 0..target {
        let x = policy.sample(h, s, rng);
        let y = opponent.sample(h, s, rng);
        let (a, b) = match learner {
            Player::One => (x, y),
            Player::Two => (y, x),
        };
        s = sample_categorical(dynamics.next_dist(h, s, a, b), rng);
    }
    (target, s)
}

fn iterate_step(
    side: &mut Side<'_>,
    dynamics: &GameDynamics,
    cfg: &MurmailConfig,
    ledger: &mut QueryLedger,
    rng: &mut StreamRng,
) -> Result<(), GameError> {
    let (_, ns, na) = side.shape();
    side.history.push(side.policy.clone());
    let steer = side.plan(dynamics, cfg, ledger, rng)?;
    let mut grad = vec![0.0; side.logits.len()];
    for _ in 0..cfg.batch {
        let (h, s) = sample_stage_state(dynamics, side.learner, &side.policy, &steer, rng);
        let e1 = side.expert.sample(h, s, rng);
        let e2 = side.expert.sample(h, s, rng);
        side.draws.record(h * ns + s, e1, e2);
        let label = side.expert.sample(h, s, rng);
        let base = (h * ns + s) * na;
        for (a, g) in grad[base..base + na].iter_mut().enumerate() {
            *g += side.policy.prob(h, s, a) - f64::from(u8::from(a == label));
        }
    }
    ledger.add(QueryPhase::UncertaintyReward, side.learner, 2 * cfg.batch as u64);
    ledger.add(QueryPhase::GradientSample, side.learner, cfg.batch as u64);
    let scale = cfg.step_size / cfg.batch as f64;
    for (l, g) in side.logits.iter_mut().zip(&grad) {
        *l -= scale * g;
    }
    side.policy = softmax_rows(&side.logits, side.shape());
    Ok(())
}

fn output_policy(side: &Side<'_>, choice: IterateChoice, done: usize, sampled: usize) -> Result<StagePolicy, GameError> {
    let (hh, ns, na) = side.shape();
    match choice {
        IterateChoice::Last => Ok(side.policy.clone()),
        IterateChoice::Sampled => Ok(side.history[sampled - 1].clone()),
        IterateChoice::Average => {
            let sum: Vec<f64> = side.history[..done]
                .iter()
                .fold(vec![0.0; hh * ns * na], |mut acc, p| {
                    acc.iter_mut().zip(p.table()).for_each(|(x, y)| *x += y);
                    acc
                });
            StagePolicy::new(hh, ns, na, sum.into_iter().map(|x| x / done as f64).collect())
        }
    }
}

/// Runs MURMAIL and reports the output after each number of iterations in
/// `checkpoints` (ascending, each at least one).
pub fn murmail_checkpoints(
    dynamics: &GameDynamics,
    experts: &PolicyPair,
    cfg: &MurmailConfig,
    checkpoints: &[usize],
) -> Result<Vec<MurmailOutput>, GameError> {
    experts.check_fits(dynamics)?;
    if cfg.batch == 0 || cfg.step_size.is_nan() || cfg.step_size <= 0.0 || checkpoints.contains(&0)
        || checkpoints.windows(2).any(|w| w[0] > w[1])
    {
        return Err(GameError::IndexOutOfRange(
            "batch and step size must be positive and checkpoints ascending and positive".into(),
        ));
    }
    let last = checkpoints.last().copied().unwrap_or(0);
    let mut rng = StreamRng::seed_from_u64(derive_seed(cfg.seed, &[label_key("murmail")]));
    let mut mu_side = Side::new(dynamics, Player::One, &experts.mu);
    let mut nu_side = Side::new(dynamics, Player::Two, &experts.nu);
    let mut ledger = QueryLedger::new();
    let mut outputs = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().peekable();
    for k in 1..=last {
        iterate_step(&mut mu_side, dynamics, cfg, &mut ledger, &mut rng)?;
        iterate_step(&mut nu_side, dynamics, cfg, &mut ledger, &mut rng)?;
        while next.peek() == Some(&&k) {
            next.next();
            let mut pick = StreamRng::seed_from_u64(derive_seed(cfg.seed, &[label_key("iterate"), k as u64]));
            let sampled = pick.random_range(1..=k);
            outputs.push(MurmailOutput {
                pair: PolicyPair::new(
                    output_policy(&mu_side, cfg.output, k, sampled)?,
                    output_policy(&nu_side, cfg.output, k, sampled)?,
                )?,
                ledger: ledger.clone(),
                iterations: k,
                chosen_iteration: (cfg.output == IterateChoice::Sampled).then_some(sampled),
            });
        }
    }
    Ok(outputs)
}

pub fn murmail(
    dynamics: &GameDynamics,
    experts: &PolicyPair,
    cfg: &MurmailConfig,
) -> Result<MurmailOutput, GameError> {
    if cfg.iterations == 0 {
        return Err(GameError::IndexOutOfRange("MURMAIL needs at least one iteration".into()));
    }
    Ok(murmail_checkpoints(dynamics, experts, cfg, &[cfg.iterations])?
        .pop()
        .expect("one checkpoint requested"))
}
