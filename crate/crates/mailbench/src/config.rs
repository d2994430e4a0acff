use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use mailbench_core::envs::GridworldVariant;
use mailbench_core::mail_algorithms::{InnerPlanner, IterateChoice};
use mailbench_core::reward_free::{PlannerBackend, QLearningConfig, WarmupConfig};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    LowerboundBc,
    GridworldCompare,
    CoverageAudit,
    FormulaSuite,
}

impl ExperimentId {
    pub fn name(self) -> &'static str {
        match self {
            Self::LowerboundBc => "lowerbound-bc",
            Self::GridworldCompare => "gridworld-compare",
            Self::CoverageAudit => "coverage-audit",
            Self::FormulaSuite => "formula-suite",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendName {
    Euler,
    Qlearning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputName {
    Sampled,
    Last,
    Average,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlannerName {
    ModelBased,
    Qlearning,
}

fn default_n0() -> usize {
    25
}
fn default_backend() -> BackendName {
    BackendName::Qlearning
}
fn default_ql_iterations() -> usize {
    100
}
fn default_epsilon() -> f64 {
    0.1
}
fn default_euler_delta() -> f64 {
    0.05
}
fn default_true() -> bool {
    true
}
fn default_step_size() -> f64 {
    50.0
}
fn default_inner() -> usize {
    10
}
fn default_batch() -> usize {
    100
}
fn default_output() -> OutputName {
    OutputName::Sampled
}
fn default_planner() -> PlannerName {
    PlannerName::ModelBased
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AlgorithmSpec {
    Bc,
    MailWarm {
        #[serde(default = "default_n0")]
        n0: usize,
        #[serde(default = "default_backend")]
        backend: BackendName,
        #[serde(default = "default_ql_iterations")]
        qlearning_iterations: usize,
        #[serde(default = "default_epsilon")]
        epsilon: f64,
        #[serde(default = "default_euler_delta")]
        euler_delta: f64,
        #[serde(default = "default_true")]
        skip_unreachable: bool,
    },
    Murmail {
        #[serde(default = "default_step_size")]
        step_size: f64,
        #[serde(default = "default_inner")]
        inner_episodes: usize,
        #[serde(default = "default_batch")]
        batch: usize,
        #[serde(default = "default_output")]
        output: OutputName,
        #[serde(default = "default_planner")]
        planner: PlannerName,
    },
}

impl AlgorithmSpec {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Bc => "bc",
            Self::MailWarm { .. } => "mail-warm",
            Self::Murmail { .. } => "murmail",
        }
    }

    pub fn default_mail_warm() -> Self {
        Self::MailWarm {
            n0: default_n0(),
            backend: default_backend(),
            qlearning_iterations: default_ql_iterations(),
            epsilon: default_epsilon(),
            euler_delta: default_euler_delta(),
            skip_unreachable: true,
        }
    }

    pub fn default_murmail() -> Self {
        Self::Murmail {
            step_size: default_step_size(),
            inner_episodes: default_inner(),
            batch: default_batch(),
            output: default_output(),
            planner: default_planner(),
        }
    }

    /// Warm-up settings when this is a MAIL-WARM spec.
    pub fn warmup_config(&self) -> Option<WarmupConfig> {
        match *self {
            Self::MailWarm {
                n0,
                backend,
                qlearning_iterations,
                epsilon,
                euler_delta,
                skip_unreachable,
            } => {
                let backend = match backend {
                    BackendName::Euler => PlannerBackend::Euler { delta: euler_delta },
                    BackendName::Qlearning => PlannerBackend::QLearning(QLearningConfig {
                        iterations: qlearning_iterations,
                        epsilon,
                    }),
                };
                Some(WarmupConfig {
                    n0,
                    backend,
                    skip_unreachable,
                })
            }
            _ => None,
        }
    }
}

pub(crate) fn iterate_choice(o: OutputName) -> IterateChoice {
    match o {
        OutputName::Sampled => IterateChoice::Sampled,
        OutputName::Last => IterateChoice::Last,
        OutputName::Average => IterateChoice::Average,
    }
}

pub(crate) fn inner_planner(p: PlannerName) -> InnerPlanner {
    match p {
        PlannerName::ModelBased => InnerPlanner::ModelBased,
        PlannerName::Qlearning => InnerPlanner::QLearning,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowerboundOptions {
    /// Data mass on `s3` at the second stage, one environment per value.
    pub rho_s3: Vec<f64>,
}

impl Default for LowerboundOptions {
    fn default() -> Self {
        Self {
            rho_s3: vec![1.0, 0.5, 0.25, 0.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridworldOptions {
    pub horizon: usize,
    pub variants: Vec<GridworldVariant>,
}

impl Default for GridworldOptions {
    fn default() -> Self {
        Self {
            horizon: 8,
            variants: vec![GridworldVariant::Pure, GridworldVariant::Mixed],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageOptions {
    pub delta: f64,
    /// Perturbation of the lower-bound game audited.
    pub lowerbound_delta: f64,
    pub random_states: usize,
    pub random_actions: usize,
    pub random_horizon: usize,
}

impl Default for CoverageOptions {
    fn default() -> Self {
        Self {
            delta: 0.05,
            lowerbound_delta: 0.5,
            random_states: 4,
            random_actions: 2,
            random_horizon: 3,
        }
    }
}

fn default_n_seeds() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    /// Expert-query budgets at which the Nash gap is recorded.
    #[serde(default)]
    pub checkpoints: Vec<u64>,
    #[serde(default = "default_n_seeds")]
    pub n_seeds: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub algorithms: Vec<AlgorithmSpec>,
    #[serde(default)]
    pub lowerbound: LowerboundOptions,
    #[serde(default)]
    pub gridworld: GridworldOptions,
    #[serde(default)]
    pub coverage: CoverageOptions,
    /// Record wall-clock milliseconds; the CSV is then no longer byte-stable.
    #[serde(default)]
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Built-in configuration for an experiment id.
    pub fn preset(experiment: ExperimentId) -> Self {
        let mut cfg = Self {
            experiment,
            checkpoints: Vec::new(),
            n_seeds: default_n_seeds(),
            master_seed: 0,
            algorithms: Vec::new(),
            lowerbound: LowerboundOptions::default(),
            gridworld: GridworldOptions::default(),
            coverage: CoverageOptions::default(),
            timing: false,
        };
        match experiment {
            ExperimentId::LowerboundBc => {
                cfg.n_seeds = 100;
                cfg.algorithms = vec![AlgorithmSpec::Bc];
                cfg.checkpoints = vec![4, 8, 16, 40, 80, 160, 400];
            }
            ExperimentId::GridworldCompare => {
                cfg.algorithms = vec![
                    AlgorithmSpec::Bc,
                    AlgorithmSpec::default_mail_warm(),
                    AlgorithmSpec::default_murmail(),
                ];
                cfg.checkpoints = vec![2_000, 10_000, 30_000, 100_000, 200_000];
            }
            ExperimentId::CoverageAudit => {
                cfg.n_seeds = 5;
                cfg.algorithms = vec![AlgorithmSpec::MailWarm {
                    n0: 50,
                    backend: BackendName::Qlearning,
                    qlearning_iterations: default_ql_iterations(),
                    epsilon: default_epsilon(),
                    euler_delta: default_euler_delta(),
                    skip_unreachable: true,
                }];
            }
            ExperimentId::FormulaSuite => cfg.n_seeds = 1,
        }
        cfg
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.n_seeds == 0 {
            return bad("n_seeds must be positive");
        }
        if self.checkpoints.contains(&0) || self.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return bad("checkpoints must be positive and strictly increasing");
        }
        let needs_budget = matches!(
            self.experiment,
            ExperimentId::LowerboundBc | ExperimentId::GridworldCompare
        );
        if needs_budget && (self.checkpoints.is_empty() || self.algorithms.is_empty()) {
            return bad("this experiment needs checkpoints and algorithms");
        }
        if self.lowerbound.rho_s3.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return bad("rho_s3 values must be probabilities");
        }
        if !(self.coverage.delta > 0.0 && self.coverage.delta < 1.0) {
            return bad("coverage delta must lie in (0, 1)");
        }
        for alg in &self.algorithms {
            match alg {
                AlgorithmSpec::MailWarm { n0, epsilon, euler_delta, .. } => {
                    if *n0 == 0 || !(0.0..=1.0).contains(epsilon) || !(*euler_delta > 0.0 && *euler_delta < 1.0) {
                        return bad("mail-warm needs n0 >= 1, epsilon in [0, 1], euler_delta in (0, 1)");
                    }
                }
                AlgorithmSpec::Murmail { step_size, batch, .. } => {
                    if *batch == 0 || step_size.is_nan() || *step_size <= 0.0 {
                        return bad("murmail needs a positive batch and step size");
                    }
                }
                AlgorithmSpec::Bc => {}
            }
        }
        Ok(())
    }
}
