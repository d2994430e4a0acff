//! Reward-free exploration against a fixed expert: reachability planners,
//! the warm-up policy set, its state-action mixture and exploratory data
//! collection.

mod euler;
mod qlearning;
mod warmup;

pub use euler::{euler, EulerConfig, EulerRun};
pub use qlearning::{qlearning_planner, QLearningConfig};
pub use warmup::{
    collect_exploratory, coverage_report, mixture_distribution, warmup, CoverageEntry,
    CoverageReport, MixtureDistribution, PlannerBackend, PolicySet, PolicyTag, WarmupConfig,
};
