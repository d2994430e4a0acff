use super::{QueryLedger, QueryPhase};
use crate::game_core::{GameDynamics, GameError, Player, PolicyPair};
use crate::imitation::{bc_fit, TrajectoryDataset};
use crate::reward_free::{collect_exploratory, warmup, PolicySet, WarmupConfig};
use crate::seeding::{derive_seed, label_key};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MailWarmConfig {
    pub warmup: WarmupConfig,
    /// Exploratory trajectories collected against each expert.
    pub n_trajectories: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MailWarmOutput {
    pub pair: PolicyPair,
    pub ledger: QueryLedger,
}

/// Warm-up policy sets for both sides, reusable across data budgets.
#[derive(Debug, Clone)]
pub struct MailWarmSession {
    /// Player one's exploration policies, played against player two's expert.
    against_nu: PolicySet,
    /// Player two's exploration policies, played against player one's expert.
    against_mu: PolicySet,
    warmup_ledger: QueryLedger,
    seed: u64,
}

impl MailWarmSession {
    pub fn prepare(
        dynamics: &GameDynamics,
        experts: &PolicyPair,
        cfg: &WarmupConfig,
        seed: u64,
    ) -> Result<Self, GameError> {
        experts.check_fits(dynamics)?;
        let against_nu = warmup(
            dynamics,
            Player::Two,
            &experts.nu,
            cfg,
            derive_seed(seed, &[label_key("warmup"), 2]),
        )?;
        let against_mu = warmup(
            dynamics,
            Player::One,
            &experts.mu,
            cfg,
            derive_seed(seed, &[label_key("warmup"), 1]),
        )?;
        let mut warmup_ledger = QueryLedger::new();
        warmup_ledger.add(QueryPhase::Warmup, Player::Two, against_nu.expert_queries);
        warmup_ledger.add(QueryPhase::Warmup, Player::One, against_mu.expert_queries);
        Ok(Self {
            against_nu,
            against_mu,
            warmup_ledger,
            seed,
        })
    }

    pub fn warmup_ledger(&self) -> &QueryLedger {
        &self.warmup_ledger
    }

    /// Exploratory datasets labelled by player two's and player one's expert,
    /// in that order. Smaller budgets are prefixes of larger ones.
    pub fn collect(
        &self,
        dynamics: &GameDynamics,
        experts: &PolicyPair,
        n_trajectories: usize,
    ) -> Result<(TrajectoryDataset, TrajectoryDataset), GameError> {
        let nu_data = collect_exploratory(
            dynamics,
            Player::Two,
            &experts.nu,
            &self.against_nu,
            n_trajectories,
            derive_seed(self.seed, &[label_key("explore"), 2]),
        )?;
        let mu_data = collect_exploratory(
            dynamics,
            Player::One,
            &experts.mu,
            &self.against_mu,
            n_trajectories,
            derive_seed(self.seed, &[label_key("explore"), 1]),
        )?;
        Ok((nu_data, mu_data))
    }

    /// Behavior cloning on the two datasets, with the full query ledger.
    pub fn fit(
        &self,
        dynamics: &GameDynamics,
        nu_data: &TrajectoryDataset,
        mu_data: &TrajectoryDataset,
    ) -> Result<MailWarmOutput, GameError> {
        let ns = dynamics.n_states();
        let nu = bc_fit(nu_data, Player::Two, ns, dynamics.n_actions_p2())?.policy;
        let mu = bc_fit(mu_data, Player::One, ns, dynamics.n_actions_p1())?.policy;
        let mut ledger = self.warmup_ledger.clone();
        ledger.add(QueryPhase::Exploration, Player::Two, nu_data.queries(Player::Two));
        ledger.add(QueryPhase::Exploration, Player::One, mu_data.queries(Player::One));
        Ok(MailWarmOutput {
            pair: PolicyPair::new(mu, nu)?,
            ledger,
        })
    }
}

/// Warm-up, exploratory collection against each fixed expert, then behavior
/// cloning of each expert on the data it labelled.
pub fn mail_warm(
    dynamics: &GameDynamics,
    experts: &PolicyPair,
    cfg: &MailWarmConfig,
) -> Result<MailWarmOutput, GameError> {
    let session = MailWarmSession::prepare(dynamics, experts, &cfg.warmup, cfg.seed)?;
    let (nu_data, mu_data) = session.collect(dynamics, experts, cfg.n_trajectories)?;
    session.fit(dynamics, &nu_data, &mu_data)
}
