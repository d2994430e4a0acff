use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use mailbench_core::analysis::AnalysisError;
use mailbench_core::envs::{
    gridworld_experts, make_gridworld, make_lower_bound_game, make_lower_bound_simplified,
    make_random_game, EnvError, GridworldSpec, GridworldVariant, S3,
};
use mailbench_core::imitation::{bc_fit_pair, collect_from_state_dist, collect_trajectories, TrajectoryDataset};
use mailbench_core::mail_algorithms::{murmail_checkpoints, MailWarmSession, MurmailConfig};
use mailbench_core::reward_free::{coverage_report, mixture_distribution, warmup, WarmupConfig};
use mailbench_core::seeding::{derive_seed, label_key};
use mailbench_core::{
    nash_gap, GameError, MarkovGame, Player, PolicyPair, StageDistribution,
};

use crate::config::{inner_planner, iterate_choice, AlgorithmSpec, ExperimentConfig, ExperimentId};
use crate::formulas::formula_suite;
use crate::records::{summarize, write_csv, ExperimentRecord, Summary, GAP_FLOOR};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("io failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("summary serialization failed: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Invariant(String),
}

/// Everything an experiment produces, in deterministic order.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<ExperimentRecord>,
    pub summary: Summary,
    /// Main CSV text: the record table, or the experiment's own table for
    /// the audit and formula experiments.
    pub csv: String,
}

impl RunOutput {
    /// Writes `<experiment>.csv` and `<experiment>-summary.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), RunError> {
        std::fs::create_dir_all(dir)?;
        let stem = &self.summary.experiment;
        std::fs::write(dir.join(format!("{stem}.csv")), &self.csv)?;
        let mut json = serde_json::to_string_pretty(&self.summary)?;
        json.push('\n');
        std::fs::write(dir.join(format!("{stem}-summary.json")), json)?;
        Ok(())
    }
}

enum DataSource {
    /// Full expert rollouts.
    Rollouts,
    /// Per-stage states drawn from a fixed distribution.
    StateDist(StageDistribution),
}

struct Env {
    name: String,
    game: MarkovGame,
    experts: PolicyPair,
    data: DataSource,
    /// Whether to record the episode where `s3` is first seen at stage one.
    track_s3: bool,
}

impl Env {
    fn collect(&self, n: usize, seed: u64) -> Result<TrajectoryDataset, GameError> {
        match &self.data {
            DataSource::Rollouts => collect_trajectories(self.game.dynamics(), &self.experts, n, seed),
            DataSource::StateDist(rho) => collect_from_state_dist(rho, &self.experts, n, seed),
        }
    }
}

struct TaskResult {
    records: Vec<ExperimentRecord>,
    extras: Vec<(String, f64)>,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    cfg.validate().map_err(|e| RunError::Invariant(e.to_string()))?;
    info!("running {} with {} seeds", cfg.experiment.name(), cfg.n_seeds);
    match cfg.experiment {
        ExperimentId::LowerboundBc | ExperimentId::GridworldCompare => run_budget_sweep(cfg),
        ExperimentId::CoverageAudit => run_coverage(cfg),
        ExperimentId::FormulaSuite => run_formulas(cfg),
    }
}

fn rho_label(r: f64) -> String {
    format!("lowerbound-rho{r}")
}

fn build_envs(cfg: &ExperimentConfig) -> Result<Vec<Env>, RunError> {
    let mut envs = Vec::new();
    match cfg.experiment {
        ExperimentId::LowerboundBc => {
            for &r in &cfg.lowerbound.rho_s3 {
                let inst = make_lower_bound_simplified(r)?;
                envs.push(Env {
                    name: rho_label(r),
                    game: inst.game,
                    experts: inst.experts,
                    data: DataSource::StateDist(inst.rho),
                    track_s3: true,
                });
            }
        }
        ExperimentId::GridworldCompare => {
            let spec = GridworldSpec {
                horizon: cfg.gridworld.horizon,
                ..GridworldSpec::default()
            };
            let world = make_gridworld(&spec)?;
            for &variant in &cfg.gridworld.variants {
                let name = match variant {
                    GridworldVariant::Pure => "gridworld1",
                    GridworldVariant::Mixed => "gridworld2",
                };
                envs.push(Env {
                    name: name.into(),
                    game: world.game.clone(),
                    experts: gridworld_experts(&world, variant)?,
                    data: DataSource::Rollouts,
                    track_s3: false,
                });
            }
        }
        _ => unreachable!("only budget sweeps build environments"),
    }
    Ok(envs)
}

/// Seed of one `(env, algorithm, seed)` task.
pub fn task_seed(master: u64, env: &str, algorithm: &str, seed: u64) -> u64 {
    derive_seed(master, &[label_key(env), label_key(algorithm), seed])
}

fn run_budget_sweep(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let envs = build_envs(cfg)?;
    let mut tasks = Vec::new();
    for env in &envs {
        for alg in &cfg.algorithms {
            for seed in 0..cfg.n_seeds as u64 {
                tasks.push((env, alg, seed));
            }
        }
    }
    let results: Vec<TaskResult> = tasks
        .par_iter()
        .map(|&(env, alg, seed)| run_task(cfg, env, alg, seed))
        .collect::<Result<_, _>>()?;
    let mut records = Vec::new();
    let mut extras: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in results {
        records.extend(r.records);
        for (k, v) in r.extras {
            extras.entry(k).or_default().push(v);
        }
    }
    let mut csv = Vec::new();
    write_csv(&mut csv, &records)?;
    let mut extra_means: BTreeMap<String, f64> = BTreeMap::new();
    for (k, v) in extras {
        extra_means.insert(format!("{k}/count"), v.len() as f64);
        extra_means.insert(format!("{k}/mean"), v.iter().sum::<f64>() / v.len() as f64);
    }
    Ok(RunOutput {
        summary: Summary {
            experiment: cfg.experiment.name().into(),
            master_seed: cfg.master_seed,
            n_seeds: cfg.n_seeds,
            cells: summarize(&records),
            extras: extra_means,
        },
        csv: String::from_utf8(csv).expect("csv writer emits utf-8"),
        records,
    })
}

/// Distinct positive values of `budget / unit`, ascending.
fn budget_steps(checkpoints: &[u64], unit: u64) -> Vec<usize> {
    let mut steps: Vec<usize> = checkpoints.iter().map(|&c| (c / unit) as usize).filter(|&n| n > 0).collect();
    steps.dedup();
    if steps.len() < checkpoints.len() {
        warn!("some checkpoints fall below one unit of {unit} queries or collapse together");
    }
    steps
}

fn run_task(cfg: &ExperimentConfig, env: &Env, alg: &AlgorithmSpec, seed: u64) -> Result<TaskResult, RunError> {
    let started = Instant::now();
    let tseed = task_seed(cfg.master_seed, &env.name, alg.label(), seed);
    let dynamics = env.game.dynamics();
    let hh = dynamics.horizon() as u64;
    let mut records = Vec::new();
    let mut extras = Vec::new();
    let mut push = |queries: u64, pair: &PolicyPair| -> Result<(), RunError> {
        let gap = nash_gap(&env.game, pair)?;
        if gap < GAP_FLOOR {
            return Err(RunError::Invariant(format!("negative Nash gap {gap} in {}", env.name)));
        }
        records.push(ExperimentRecord {
            env: env.name.clone(),
            algorithm: alg.label().into(),
            seed,
            expert_queries: queries,
            nash_gap: gap.max(0.0),
            wall_ms: cfg.timing.then(|| started.elapsed().as_millis() as u64),
        });
        Ok(())
    };
    match alg {
        AlgorithmSpec::Bc => {
            let steps = budget_steps(&cfg.checkpoints, 2 * hh);
            let Some(&n_max) = steps.last() else {
                return Ok(TaskResult { records, extras });
            };
            let data = env.collect(n_max, tseed)?;
            if env.track_s3 {
                if let Some(first) = data.first_visit(1, S3) {
                    extras.push((format!("first_s3/{}", env.name), first as f64));
                }
            }
            for n in steps {
                let prefix = data.truncated(n);
                let pair = bc_fit_pair(&prefix, dynamics)?;
                push(prefix.total_queries(), &pair)?;
            }
        }
        AlgorithmSpec::MailWarm { .. } => {
            let wcfg = alg.warmup_config().expect("mail-warm spec");
            let session = MailWarmSession::prepare(dynamics, &env.experts, &wcfg, tseed)?;
            extras.push((
                format!("warmup_queries/{}/mail-warm", env.name),
                session.warmup_ledger().warmup_total() as f64,
            ));
            let steps = budget_steps(&cfg.checkpoints, 2 * hh);
            let Some(&n_max) = steps.last() else {
                return Ok(TaskResult { records, extras });
            };
            let (nu_data, mu_data) = session.collect(dynamics, &env.experts, n_max)?;
            for n in steps {
                let out = session.fit(dynamics, &nu_data.truncated(n), &mu_data.truncated(n))?;
                push(out.ledger.budget_total(), &out.pair)?;
            }
        }
        &AlgorithmSpec::Murmail {
            step_size,
            inner_episodes,
            batch,
            output,
            planner,
        } => {
            let mcfg = MurmailConfig {
                iterations: 1,
                step_size,
                inner_episodes,
                batch,
                output: iterate_choice(output),
                planner: inner_planner(planner),
                seed: tseed,
            };
            let steps = budget_steps(&cfg.checkpoints, mcfg.queries_per_iteration());
            if steps.is_empty() {
                return Ok(TaskResult { records, extras });
            }
            for out in murmail_checkpoints(dynamics, &env.experts, &mcfg, &steps)? {
                push(out.ledger.budget_total(), &out.pair)?;
            }
        }
    }
    Ok(TaskResult { records, extras })
}

#[derive(Debug, Clone, Serialize)]
struct CoverageRow {
    env: String,
    fixed_player: u8,
    seed: u64,
    state: usize,
    stage: usize,
    max_visitation: f64,
    worst_ratio: f64,
    bound: f64,
}

fn run_coverage(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let wcfg: WarmupConfig = cfg
        .algorithms
        .iter()
        .find_map(AlgorithmSpec::warmup_config)
        .unwrap_or_else(|| AlgorithmSpec::default_mail_warm().warmup_config().expect("mail-warm"));
    let opts = &cfg.coverage;
    let lb = make_lower_bound_game(opts.lowerbound_delta, 0.5)?;
    let random_game = make_random_game(
        opts.random_states,
        opts.random_actions,
        opts.random_actions,
        opts.random_horizon,
        derive_seed(cfg.master_seed, &[label_key("random-game")]),
    )?;
    let random_experts = mailbench_core::zero_sum_value_iteration(&random_game)
        .map_err(|e| RunError::Invariant(e.to_string()))?
        .pair;
    let envs = [
        ("lowerbound".to_string(), lb.game, lb.experts),
        (format!("random{}", opts.random_states), random_game, random_experts),
    ];
    let mut tasks = Vec::new();
    for env in &envs {
        for fixed in [Player::Two, Player::One] {
            for seed in 0..cfg.n_seeds as u64 {
                tasks.push((env, fixed, seed));
            }
        }
    }
    let results: Vec<(Vec<CoverageRow>, bool)> = tasks
        .par_iter()
        .map(|&((name, game, experts), fixed, seed)| -> Result<_, RunError> {
            let dynamics = game.dynamics();
            let expert = experts.get(fixed);
            let side = format!("fixed{}", fixed.index() + 1);
            let tseed = task_seed(cfg.master_seed, name, &side, seed);
            let set = warmup(dynamics, fixed, expert, &wcfg, tseed)?;
            let mixture = mixture_distribution(dynamics, fixed, expert, &set)?;
            let report = coverage_report(dynamics, fixed, expert, &mixture, opts.delta)?;
            let rows = report
                .entries
                .iter()
                .map(|e| CoverageRow {
                    env: name.clone(),
                    fixed_player: fixed.index() as u8 + 1,
                    seed,
                    state: e.state,
                    stage: e.stage,
                    max_visitation: e.max_visitation,
                    worst_ratio: e.worst_ratio,
                    bound: report.bound,
                })
                .collect();
            Ok((rows, report.satisfied()))
        })
        .collect::<Result<_, _>>()?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut extras = BTreeMap::new();
    let mut violations = 0usize;
    for (rows, ok) in &results {
        violations += usize::from(!ok);
        for row in rows {
            w.serialize(row)?;
            let key = format!("worst_ratio/{}/fixed{}", row.env, row.fixed_player);
            let slot = extras.entry(key).or_insert(0.0f64);
            *slot = slot.max(row.worst_ratio);
            extras.insert(format!("bound/{}/fixed{}", row.env, row.fixed_player), row.bound);
        }
    }
    extras.insert("audits".into(), results.len() as f64);
    extras.insert("violations".into(), violations as f64);
    let bytes = w.into_inner().map_err(|e| RunError::Io(e.into_error()))?;
    Ok(RunOutput {
        records: Vec::new(),
        summary: Summary {
            experiment: cfg.experiment.name().into(),
            master_seed: cfg.master_seed,
            n_seeds: cfg.n_seeds,
            cells: Vec::new(),
            extras,
        },
        csv: String::from_utf8(bytes).expect("csv writer emits utf-8"),
    })
}

fn run_formulas(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let report = formula_suite();
    let mut extras = BTreeMap::new();
    extras.insert("checks".into(), report.checks.len() as f64);
    extras.insert("passed".into(), report.passed_count() as f64);
    Ok(RunOutput {
        records: Vec::new(),
        summary: Summary {
            experiment: cfg.experiment.name().into(),
            master_seed: cfg.master_seed,
            n_seeds: cfg.n_seeds,
            cells: Vec::new(),
            extras,
        },
        csv: report.to_csv()?,
    })
}
