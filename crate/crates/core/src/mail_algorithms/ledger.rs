use std::collections::BTreeMap;

use serde::Serialize;

use crate::game_core::Player;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum QueryPhase {
    /// Expert actions recorded in an offline dataset.
    OfflineData,
    /// Reward-free exploration before any data is kept.
    Warmup,
    /// Expert labels on exploratory trajectories.
    Exploration,
    /// Paired draws estimating the uncertainty reward.
    UncertaintyReward,
    /// Single draws feeding the policy update.
    GradientSample,
    /// Draws consumed by a sample-based inner planner.
    InnerPlanner,
}

impl QueryPhase {
    /// Warm-up interaction is reported separately from the query budget.
    pub fn counts_toward_budget(self) -> bool {
        !matches!(self, QueryPhase::Warmup)
    }
}

/// Expert queries per phase and per queried expert.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct QueryLedger {
    counts: BTreeMap<(QueryPhase, Player), u64>,
}

impl QueryLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, phase: QueryPhase, expert: Player, n: u64) {
        *self.counts.entry((phase, expert)).or_insert(0) += n;
    }

    pub fn get(&self, phase: QueryPhase, expert: Player) -> u64 {
        self.counts.get(&(phase, expert)).copied().unwrap_or(0)
    }

    pub fn phase_total(&self, phase: QueryPhase) -> u64 {
        self.counts
            .iter()
            .filter(|((p, _), _)| *p == phase)
            .map(|(_, n)| n)
            .sum()
    }

    /// Queries that count toward the experiment budget.
    pub fn budget_total(&self) -> u64 {
        self.counts
            .iter()
            .filter(|((p, _), _)| p.counts_toward_budget())
            .map(|(_, n)| n)
            .sum()
    }

    pub fn warmup_total(&self) -> u64 {
        self.phase_total(QueryPhase::Warmup)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn merge(&mut self, other: &QueryLedger) {
        for (&(phase, expert), &n) in &other.counts {
            self.add(phase, expert, n);
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (QueryPhase, Player, u64)> + '_ {
        self.counts.iter().map(|(&(p, e), &n)| (p, e, n))
    }
}
