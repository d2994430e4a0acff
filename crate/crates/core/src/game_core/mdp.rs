use rand::Rng;

use super::{check_distribution, GameDynamics, GameError, Player, StagePolicy};
use crate::seeding::sample_categorical;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewardKind {
    /// Rewards restricted to {0, 1}, used for reachability problems.
    Exploration,
    /// Arbitrary bounded rewards, e.g. a marginalized game payoff.
    Planning,
}

/// Single-agent MDP seen by one player when the opponent's policy is fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedMdp {
    horizon: usize,
    n_states: usize,
    n_actions: usize,
    /// Layout `(h, s, a, s')`.
    transition: Vec<f64>,
    /// Layout `(h, s, a)`.
    reward: Vec<f64>,
    initial: Vec<f64>,
    kind: RewardKind,
}

fn check_reward(reward: &[f64], expected: usize, kind: RewardKind) -> Result<(), GameError> {
    if reward.len() != expected {
        return Err(GameError::DimensionMismatch(format!(
            "reward table has {} entries, expected {expected}",
            reward.len()
        )));
    }
    match kind {
        RewardKind::Exploration => {
            if let Some(r) = reward.iter().find(|r| **r != 0.0 && **r != 1.0) {
                return Err(GameError::RewardOutOfRange(format!(
                    "exploration reward {r} is not 0 or 1"
                )));
            }
        }
        RewardKind::Planning => {
            if reward.iter().any(|r| !r.is_finite()) {
                return Err(GameError::RewardOutOfRange("non-finite reward".into()));
            }
        }
    }
    Ok(())
}

impl InducedMdp {
    pub fn new(
        horizon: usize,
        n_states: usize,
        n_actions: usize,
        transition: Vec<f64>,
        reward: Vec<f64>,
        initial: Vec<f64>,
        kind: RewardKind,
    ) -> Result<Self, GameError> {
        if horizon == 0 || n_states == 0 || n_actions == 0 {
            return Err(GameError::DimensionMismatch("MDP dimensions must be positive".into()));
        }
        if transition.len() != horizon * n_states * n_actions * n_states {
            return Err(GameError::DimensionMismatch(format!(
                "transition table has {} entries, expected {}",
                transition.len(),
                horizon * n_states * n_actions * n_states
            )));
        }
        if initial.len() != n_states {
            return Err(GameError::DimensionMismatch("initial distribution length".into()));
        }
        check_distribution(&initial, "initial distribution")?;
        for row in transition.chunks(n_states) {
            check_distribution(row, "induced transition row")?;
        }
        check_reward(&reward, horizon * n_states * n_actions, kind)?;
        Ok(Self {
            horizon,
            n_states,
            n_actions,
            transition,
            reward,
            initial,
            kind,
        })
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

    pub fn kind(&self) -> RewardKind {
        self.kind
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn next_dist(&self, h: usize, s: usize, a: usize) -> &[f64] {
        let start = ((h * self.n_states + s) * self.n_actions + a) * self.n_states;
        &self.transition[start..start + self.n_states]
    }

    pub fn reward(&self, h: usize, s: usize, a: usize) -> f64 {
        self.reward[(h * self.n_states + s) * self.n_actions + a]
    }

    pub fn reward_table(&self) -> &[f64] {
        &self.reward
    }

    /// Same transitions with a new reward.
    pub fn with_reward(&self, reward: Vec<f64>, kind: RewardKind) -> Result<Self, GameError> {
        check_reward(&reward, self.reward.len(), kind)?;
        Ok(Self {
            reward,
            kind,
            ..self.clone()
        })
    }

    /// The first `horizon` stages only.
    pub fn truncated(&self, horizon: usize) -> Result<Self, GameError> {
        if horizon == 0 || horizon > self.horizon {
            return Err(GameError::IndexOutOfRange(format!(
                "cannot truncate horizon {} to {horizon}",
                self.horizon
            )));
        }
        let per_stage = self.n_states * self.n_actions;
        Ok(Self {
            horizon,
            transition: self.transition[..horizon * per_stage * self.n_states].to_vec(),
            reward: self.reward[..horizon * per_stage].to_vec(),
            ..self.clone()
        })
    }

    fn check_policy(&self, policy: &StagePolicy) -> Result<(), GameError> {
        if policy.horizon() != self.horizon
            || policy.n_states() != self.n_states
            || policy.n_actions() != self.n_actions
        {
            return Err(GameError::DimensionMismatch(
                "policy shape does not match the MDP".into(),
            ));
        }
        Ok(())
    }

    /// State values `V_h(s)` for `h in 0..=H`, layout `(h, s)`.
    pub fn evaluate(&self, policy: &StagePolicy) -> Result<Vec<f64>, GameError> {
        self.check_policy(policy)?;
        let ns = self.n_states;
        let mut v = vec![0.0; (self.horizon + 1) * ns];
        for h in (0..self.horizon).rev() {
            let (cur, next) = v.split_at_mut((h + 1) * ns);
            let next = &next[..ns];
            for s in 0..ns {
                cur[h * ns + s] = policy
                    .row(h, s)
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| **p > 0.0)
                    .map(|(a, p)| p * self.q_value(h, s, a, next))
                    .sum();
            }
        }
        Ok(v)
    }

    /// Expected return from the initial distribution.
    pub fn value(&self, policy: &StagePolicy) -> Result<f64, GameError> {
        let v = self.evaluate(policy)?;
        Ok(dot(&self.initial, &v[..self.n_states]))
    }

    /// State occupancy `d_h(s)`, layout `(h, s)`.
    pub fn state_occupancy(&self, policy: &StagePolicy) -> Result<Vec<f64>, GameError> {
        self.check_policy(policy)?;
        let ns = self.n_states;
        let mut d = vec![0.0; self.horizon * ns];
        d[..ns].copy_from_slice(&self.initial);
        for h in 0..self.horizon.saturating_sub(1) {
            let (cur, next) = d.split_at_mut((h + 1) * ns);
            let cur = &cur[h * ns..];
            let next = &mut next[..ns];
            for s in 0..ns {
                if cur[s] == 0.0 {
                    continue;
                }
                for (a, p) in policy.row(h, s).iter().enumerate() {
                    if *p == 0.0 {
                        continue;
                    }
                    let w = cur[s] * p;
                    for (t, q) in self.next_dist(h, s, a).iter().enumerate() {
                        next[t] += w * q;
                    }
                }
            }
        }
        Ok(d)
    }

    pub fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_categorical(&self.initial, rng)
    }

    pub fn step<R: Rng + ?Sized>(&self, h: usize, s: usize, a: usize, rng: &mut R) -> usize {
        sample_categorical(self.next_dist(h, s, a), rng)
    }

    pub(crate) fn q_value(&self, h: usize, s: usize, a: usize, next_values: &[f64]) -> f64 {
        self.reward(h, s, a) + dot(self.next_dist(h, s, a), next_values)
    }
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Builds the MDP faced by the free player when `fixed` plays `policy`.
///
/// `reward` has layout `(h, s, a_free)`.
pub fn induce_mdp(
    dynamics: &GameDynamics,
    fixed: Player,
    policy: &StagePolicy,
    reward: Vec<f64>,
    kind: RewardKind,
) -> Result<InducedMdp, GameError> {
    policy.check_fits(dynamics, fixed)?;
    let free = fixed.opponent();
    let (hh, ns) = (dynamics.horizon(), dynamics.n_states());
    let n_free = dynamics.n_actions(free);
    let n_fixed = dynamics.n_actions(fixed);
    let mut transition = vec![0.0; hh * ns * n_free * ns];
    for h in 0..hh {
        for s in 0..ns {
            let row = policy.row(h, s);
            for x in 0..n_free {
                let out = &mut transition[((h * ns + s) * n_free + x) * ns..][..ns];
                for (y, &w) in row.iter().enumerate().take(n_fixed) {
                    if w == 0.0 {
                        continue;
                    }
                    let (a, b) = match free {
                        Player::One => (x, y),
                        Player::Two => (y, x),
                    };
                    for (o, p) in out.iter_mut().zip(dynamics.next_dist(h, s, a, b)) {
                        *o += w * p;
                    }
                }
            }
        }
    }
    InducedMdp::new(
        hh,
        ns,
        n_free,
        transition,
        reward,
        dynamics.initial().to_vec(),
        kind,
    )
}

/// Reward table equal to one at `(target_stage, target_state)` for every action.
pub fn indicator_reward(
    horizon: usize,
    n_states: usize,
    n_actions: usize,
    target_state: usize,
    target_stage: usize,
) -> Vec<f64> {
    let mut r = vec![0.0; horizon * n_states * n_actions];
    let start = (target_stage * n_states + target_state) * n_actions;
    r[start..start + n_actions].iter_mut().for_each(|x| *x = 1.0);
    r
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestResponse {
    /// Deterministic optimal policy, ties broken by lowest action index.
    pub policy: StagePolicy,
    /// Expected optimal return from the initial distribution.
    pub value: f64,
    /// Optimal state values, layout `(h, s)` for `h in 0..=H`.
    pub values: Vec<f64>,
    /// Optimal action values, layout `(h, s, a)`.
    pub q: Vec<f64>,
}

/// Exact backward induction maximizing the MDP reward.
pub fn best_response(mdp: &InducedMdp) -> BestResponse {
    best_response_restricted(mdp, None).expect("unrestricted best response always exists")
}

/// Backward induction where only actions with `allowed[(h, s, a)]` may be chosen.
///
/// Errors when some `(h, s)` has no allowed action.
pub fn best_response_restricted(
    mdp: &InducedMdp,
    allowed: Option<&[bool]>,
) -> Result<BestResponse, GameError> {
    let (hh, ns, na) = (mdp.horizon, mdp.n_states, mdp.n_actions);
    if let Some(mask) = allowed {
        if mask.len() != hh * ns * na {
            return Err(GameError::DimensionMismatch("action mask length".into()));
        }
    }
    let mut values = vec![0.0; (hh + 1) * ns];
    let mut q = vec![0.0; hh * ns * na];
    let mut choice = vec![0usize; hh * ns];
    for h in (0..hh).rev() {
        let (cur, next) = values.split_at_mut((h + 1) * ns);
        let next = &next[..ns];
        for s in 0..ns {
            let mut best: Option<(usize, f64)> = None;
            for a in 0..na {
                let qa = mdp.q_value(h, s, a, next);
                q[(h * ns + s) * na + a] = qa;
                let ok = allowed.is_none_or(|m| m[(h * ns + s) * na + a]);
                if ok && best.is_none_or(|(_, v)| qa > v) {
                    best = Some((a, qa));
                }
            }
            let (a, v) = best.ok_or_else(|| {
                GameError::IndexOutOfRange(format!("no allowed action at stage {h}, state {s}"))
            })?;
            choice[h * ns + s] = a;
            cur[h * ns + s] = v;
        }
    }
    let policy = StagePolicy::deterministic(hh, ns, na, &choice)?;
    let value = dot(&mdp.initial, &values[..ns]);
    Ok(BestResponse {
        policy,
        value,
        values,
        q,
    })
}

/// Mask of actions whose optimal action value is within `tol` of the state optimum.
pub fn optimal_action_mask(mdp: &InducedMdp, tol: f64) -> Vec<bool> {
    let br = best_response(mdp);
    let (ns, na) = (mdp.n_states, mdp.n_actions);
    br.q.iter()
        .enumerate()
        .map(|(i, &qa)| {
            let hs = i / na;
            let (h, s) = (hs / ns, hs % ns);
            qa >= br.values[h * ns + s] - tol
        })
        .collect()
}

/// Largest probability of being in `target_state` at `target_stage`, and a
/// deterministic policy attaining it.
pub fn max_visitation(
    mdp: &InducedMdp,
    target_state: usize,
    target_stage: usize,
) -> Result<(f64, StagePolicy), GameError> {
    if target_stage >= mdp.horizon || target_state >= mdp.n_states {
        return Err(GameError::IndexOutOfRange(format!(
            "target (s={target_state}, h={target_stage}) outside horizon {} with {} states",
            mdp.horizon, mdp.n_states
        )));
    }
    let reward = indicator_reward(
        mdp.horizon,
        mdp.n_states,
        mdp.n_actions,
        target_state,
        target_stage,
    );
    let indicator = mdp.with_reward(reward, RewardKind::Exploration)?;
    let br = best_response(&indicator);
    Ok((br.value, br.policy))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two states, two actions, H=2: action 1 moves to state 1, action 0 stays.
    fn chain() -> InducedMdp {
        let ns = 2;
        let mut p = Vec::new();
        for _h in 0..2 {
            for s in 0..ns {
                // action 0: stay
                let mut stay = vec![0.0; ns];
                stay[s] = 1.0;
                p.extend(stay);
                // action 1: go to state 1
                p.extend([0.0, 1.0]);
            }
        }
        let reward = vec![0.0, 0.0, 0.5, 0.5, 0.0, 0.0, 1.0, 1.0];
        InducedMdp::new(2, 2, 2, p, reward, vec![1.0, 0.0], RewardKind::Planning).unwrap()
    }

    #[test]
    fn best_response_matches_hand_dp() {
        let br = best_response(&chain());
        // Stage 1: in state 1 reward 1, in state 0 reward 0.
        // Stage 0 from state 0: action 1 gives 0 + 1 = 1, action 0 gives 0 + 0.
        assert_eq!(br.value, 1.0);
        assert_eq!(br.policy.row(0, 0), &[0.0, 1.0]);
        // Ties at stage 1 broken towards action 0.
        assert_eq!(br.policy.row(1, 1), &[1.0, 0.0]);
    }

    #[test]
    fn max_visitation_finds_reaching_policy() {
        let (p, pol) = max_visitation(&chain(), 1, 1).unwrap();
        assert_eq!(p, 1.0);
        let d = chain().state_occupancy(&pol).unwrap();
        assert_eq!(d[2 + 1], 1.0);
        let (p0, _) = max_visitation(&chain(), 1, 0).unwrap();
        assert_eq!(p0, 0.0);
        assert!(max_visitation(&chain(), 0, 2).is_err());
    }

    #[test]
    fn exploration_rewards_must_be_binary() {
        let m = chain();
        assert!(m
            .with_reward(vec![0.5; 8], RewardKind::Exploration)
            .is_err());
    }

    #[test]
    fn restricted_response_respects_mask() {
        let m = chain();
        let mut mask = vec![true; 8];
        mask[1] = false; // forbid action 1 at (h=0, s=0)
        let br = best_response_restricted(&m, Some(&mask)).unwrap();
        assert_eq!(br.value, 0.0);
        mask[0] = false;
        assert!(best_response_restricted(&m, Some(&mask)).is_err());
    }

    #[test]
    fn truncation_keeps_leading_stages() {
        let t = chain().truncated(1).unwrap();
        assert_eq!(t.horizon(), 1);
        assert_eq!(best_response(&t).value, 0.0);
    }
}
