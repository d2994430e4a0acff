//! Acceptance gate: every criterion prints one PASS or FAIL line with its
//! measured quantities and runtime. Failing criteria listed in
//! `EXPECTED_FAILURES` are reported as FAIL but do not fail the run; any
//! other failure, or an expected failure that starts passing, does.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use mailbench::config::ExperimentConfig;
use mailbench::formulas::{class_grid, eps_grid, nu_exploitability_dp};
use mailbench::runner::task_seed;
use mailbench::{run_experiment, ExperimentId};
use mailbench_core::analysis::{
    class_exploitability_narrow, class_exploitability_wide, concentrability,
    exploitability_decomposition, minimizer_weight, nash_mean_chi2,
    restricted_strategy, surrogate_minimizer, surrogate_minimizer_by_grid,
    tv_concentration_bound,
};
use mailbench_core::envs::{
    gridworld_experts, make_gridworld, make_lower_bound_game, make_lower_bound_simplified,
    make_random_game, random_policy_pair, GridworldSpec, GridworldVariant, S2, S3,
};
use mailbench_core::imitation::{bc_fit, bc_fit_pair, collect_from_state_dist, collect_trajectories};
use mailbench_core::mail_algorithms::{murmail, MailWarmSession, MurmailConfig};
use mailbench_core::matrix_nash::MatrixGame;
use mailbench_core::reward_free::{
    coverage_report, mixture_distribution, warmup, PlannerBackend, QLearningConfig, WarmupConfig,
};
use mailbench_core::seeding::{derive_seed, label_key};
use mailbench_core::{
    nash_gap, solve_matrix_game, zero_sum_value_iteration, GameDynamics, Player, PolicyPair,
    StagePolicy,
};

/// Master seed shared with the shipped experiment configs.
const MASTER: u64 = 7;

/// Criteria that fail on a faithful implementation, with the reason.
const EXPECTED_FAILURES: &[(u32, &str)] = &[(
    3,
    "the exact divergence between the equilibrium means is eps^2/(2(2+eps)^3), \
     which drops below 9 eps^2/300 once eps exceeds about 0.554",
)];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn criterion_1() -> Outcome {
    let mut worst = 0.0f64;
    for delta in [0.0, 0.2, 1.0, 2.0] {
        let m = MatrixGame::from_rows(&[vec![1.0 + delta, -1.0], vec![-1.0, 1.0]]).unwrap();
        let sol = solve_matrix_game(&m).unwrap();
        let p = 1.0 / (2.0 + delta / 2.0);
        let v = (delta / 2.0) / (2.0 + delta / 2.0);
        worst = worst
            .max((sol.row_strategy[0] - p).abs())
            .max((sol.col_strategy[0] - p).abs())
            .max((sol.value - v).abs());
    }
    outcome(worst <= 1e-9, format!("max error {worst:.2e} over 4 perturbations"))
}

fn criterion_2() -> Outcome {
    let mut worst = 0.0f64;
    for (eps, w) in class_grid() {
        let q = restricted_strategy(eps, w);
        worst = worst
            .max((class_exploitability_wide(eps, w) - nu_exploitability_dp(2.0 * eps, q)).abs())
            .max((class_exploitability_narrow(eps, w) - nu_exploitability_dp(eps, q)).abs());
    }
    outcome(worst <= 1e-9, format!("25 (eps, weight) points, max error {worst:.2e}"))
}

fn criterion_3() -> Outcome {
    let mut below = Vec::new();
    let mut above = 0;
    for eps in eps_grid() {
        let chi2 = nash_mean_chi2(eps).unwrap();
        if chi2 < 9.0 * eps * eps / 300.0 {
            below.push(eps);
        }
        if chi2 > 16.0 * eps * eps / 128.0 {
            above += 1;
        }
    }
    let detail = format!(
        "lower bound violated at {} of 99 points (first eps = {:?}), upper bound violated at {above}",
        below.len(),
        below.first()
    );
    outcome(below.is_empty() && above == 0, detail)
}

fn criterion_4() -> Outcome {
    let mut grid_err = 0.0f64;
    let mut weight_err = 0.0f64;
    for eps in [0.1, 0.5, 0.9] {
        let q_star = surrogate_minimizer(eps);
        grid_err = grid_err.max((surrogate_minimizer_by_grid(eps, 1_000_000) - q_star).abs());
        let beta = (eps + 1.0) / (eps + 2.0);
        weight_err = weight_err
            .max((restricted_strategy(eps, beta) - q_star).abs())
            .max((minimizer_weight(eps) - beta).abs());
    }
    outcome(
        grid_err <= 1e-5 && weight_err <= 1e-12,
        format!("grid error {grid_err:.2e}, weight error {weight_err:.2e}"),
    )
}

fn criterion_5() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for rho_s3 in [0.5, 0.25, 0.0] {
        let inst = make_lower_bound_game(0.5, rho_s3).unwrap();
        let report = concentrability(&inst.game, &inst.experts, &inst.rho).unwrap();
        let want_expert = 1.0 / inst.rho.prob(1, S2);
        let want_dev = if rho_s3 > 0.0 { 1.0 / inst.rho.prob(1, S3) } else { f64::INFINITY };
        let dev_ok = if want_dev.is_infinite() {
            report.c_deviation.is_infinite()
        } else {
            (report.c_deviation - want_dev).abs() <= 1e-9
        };
        ok &= (report.c_expert - want_expert).abs() <= 1e-9 && dev_ok;
        parts.push(format!(
            "rho(s3)={rho_s3}: expert {} deviation {}",
            report.c_expert, report.c_deviation
        ));
    }
    outcome(ok, parts.join("; "))
}

fn criterion_6() -> Outcome {
    const SEEDS: u64 = 100;
    const SAMPLES: usize = 200;
    let mut ok = true;
    let mut parts = Vec::new();
    for rho_s3 in [1.0, 0.5, 0.25, 0.0] {
        let inst = make_lower_bound_simplified(rho_s3).unwrap();
        let dynamics = inst.game.dynamics();
        let env = format!("lowerbound-rho{rho_s3}");
        let mut firsts = Vec::new();
        let mut late_nonzero = 0;
        let mut min_gap = f64::INFINITY;
        let mut max_gap = f64::NEG_INFINITY;
        for seed in 0..SEEDS {
            let data = collect_from_state_dist(&inst.rho, &inst.experts, SAMPLES, task_seed(MASTER, &env, "bc", seed))
                .unwrap();
            let first = data.first_visit(1, S3);
            if let Some(k) = first {
                firsts.push(k as f64);
            }
            for n in 1..=SAMPLES {
                let pair = bc_fit_pair(&data.truncated(n), dynamics).unwrap();
                let gap = nash_gap(&inst.game, &pair).unwrap();
                min_gap = min_gap.min(gap);
                max_gap = max_gap.max(gap);
                if first.is_some_and(|k| n >= k) && gap.abs() > 1e-12 {
                    late_nonzero += 1;
                }
            }
        }
        if rho_s3 > 0.0 {
            let mean = firsts.iter().sum::<f64>() / firsts.len() as f64;
            let target = 1.0 / rho_s3;
            let rel = (mean - target).abs() / target;
            ok &= firsts.len() == SEEDS as usize && rel <= 0.15 && late_nonzero == 0;
            parts.push(format!("rho={rho_s3}: mean first s3 {mean:.2} vs {target} ({:.1}%), {late_nonzero} nonzero gaps after it", 100.0 * rel));
        } else {
            ok &= firsts.is_empty() && min_gap >= 1.0 && (max_gap - min_gap).abs() <= 1e-12;
            parts.push(format!("rho=0: gap in [{min_gap}, {max_gap}]"));
        }
    }
    outcome(ok, parts.join("; "))
}

fn criterion_7() -> Outcome {
    let cfg = WarmupConfig::new(50, PlannerBackend::QLearning(QLearningConfig::default()));
    let lb = make_lower_bound_game(0.5, 0.5).unwrap();
    let random = make_random_game(4, 2, 2, 3, derive_seed(MASTER, &[label_key("random-game")])).unwrap();
    let random_experts = zero_sum_value_iteration(&random).unwrap().pair;
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, dynamics, experts) in [
        ("lower-bound", lb.game.dynamics(), &lb.experts),
        ("random4", random.dynamics(), &random_experts),
    ] {
        for fixed in [Player::Two, Player::One] {
            let expert = experts.get(fixed);
            let seed = derive_seed(MASTER, &[label_key(name), fixed.index() as u64]);
            let set = warmup(dynamics, fixed, expert, &cfg, seed).unwrap();
            let mixture = mixture_distribution(dynamics, fixed, expert, &set).unwrap();
            let report = coverage_report(dynamics, fixed, expert, &mixture, 0.05).unwrap();
            ok &= !report.entries.is_empty() && report.satisfied();
            parts.push(format!(
                "{name}/fixed{}: worst {:.3} <= {}",
                fixed.index() + 1,
                report.worst_ratio(),
                report.bound
            ));
        }
    }
    outcome(ok, parts.join("; "))
}

fn criterion_8() -> Outcome {
    let mut worst_slack = f64::INFINITY;
    for i in 0..10 {
        let game = make_random_game(3, 2, 2, 3, derive_seed(MASTER, &[label_key("decomposition"), i])).unwrap();
        let experts = zero_sum_value_iteration(&game).unwrap().pair;
        let estimate = random_policy_pair(game.dynamics(), derive_seed(MASTER, &[label_key("estimate"), i])).unwrap();
        let report = exploitability_decomposition(&game, &experts, &estimate).unwrap();
        worst_slack = worst_slack.min(report.bound - report.gap);
    }
    outcome(worst_slack >= -1e-9, format!("min (bound - gap) over 10 games {worst_slack:.4}"))
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn criterion_9() -> Outcome {
    const SEEDS: u64 = 10;
    const TOTAL: u64 = 200_000;
    let world = make_gridworld(&GridworldSpec::default()).unwrap();
    let value = zero_sum_value_iteration(&world.game).unwrap().value;
    let experts = gridworld_experts(&world, GridworldVariant::Pure).unwrap();
    let dynamics = world.game.dynamics();
    let hh = dynamics.horizon() as u64;
    let (mut bc, mut warm, mut mur) = (Vec::new(), Vec::new(), Vec::new());
    let wcfg = WarmupConfig::new(25, PlannerBackend::QLearning(QLearningConfig::default()));
    for seed in 0..SEEDS {
        let data = collect_trajectories(dynamics, &experts, 10_000, task_seed(MASTER, "gridworld1", "bc", seed)).unwrap();
        bc.push(nash_gap(&world.game, &bc_fit_pair(&data, dynamics).unwrap()).unwrap());

        // Warm-up queries count against the total here.
        let session = MailWarmSession::prepare(dynamics, &experts, &wcfg, task_seed(MASTER, "gridworld1", "mail-warm", seed)).unwrap();
        let remaining = TOTAL - session.warmup_ledger().warmup_total();
        let (nu_data, mu_data) = session.collect(dynamics, &experts, (remaining / (2 * hh)) as usize).unwrap();
        let out = session.fit(dynamics, &nu_data, &mu_data).unwrap();
        assert!(out.ledger.total() <= TOTAL);
        warm.push(nash_gap(&world.game, &out.pair).unwrap());

        let mcfg = MurmailConfig {
            seed: task_seed(MASTER, "gridworld1", "murmail", seed),
            ..Default::default()
        };
        let mcfg = MurmailConfig {
            iterations: (TOTAL / mcfg.queries_per_iteration()) as usize,
            ..mcfg
        };
        let out = murmail(dynamics, &experts, &mcfg).unwrap();
        assert!(out.ledger.total() <= TOTAL);
        mur.push(nash_gap(&world.game, &out.pair).unwrap());
    }
    let (bc, warm, mur) = (mean(&bc), mean(&warm), mean(&mur));
    outcome(
        value.abs() <= 1e-9 && bc >= 0.2 && warm <= 0.1 && warm <= mur,
        format!("value {value}, bc {bc:.4}, mail-warm {warm:.4}, murmail {mur:.4} at {TOTAL} total queries"),
    )
}

fn criterion_10() -> Outcome {
    const TRIALS: u64 = 500;
    const DELTA: f64 = 0.05;
    let truth = [0.1, 0.2, 0.3, 0.4];
    let n_actions = truth.len();
    let dynamics = GameDynamics::new(1, 1, 1, n_actions, vec![1.0; n_actions], vec![1.0]).unwrap();
    let experts = PolicyPair::new(
        StagePolicy::uniform(1, 1, 1),
        StagePolicy::new(1, 1, n_actions, truth.to_vec()).unwrap(),
    )
    .unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [100usize, 1000] {
        let bound = tv_concentration_bound(n_actions, n, DELTA);
        let mut violations = 0;
        for t in 0..TRIALS {
            let data = collect_trajectories(&dynamics, &experts, n, derive_seed(MASTER, &[label_key("tv"), n as u64, t])).unwrap();
            let fit = bc_fit(&data, Player::Two, 1, n_actions).unwrap();
            let l1: f64 = fit.policy.row(0, 0).iter().zip(truth).map(|(p, q)| (p - q).abs()).sum();
            if l1 > bound {
                violations += 1;
            }
        }
        let rate = violations as f64 / TRIALS as f64;
        ok &= rate <= DELTA + 0.02;
        parts.push(format!("n={n}: violation rate {rate:.3} (bound {bound:.3})"));
    }
    outcome(ok, parts.join("; "))
}

fn small_config(id: ExperimentId) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::preset(id);
    cfg.master_seed = MASTER;
    match id {
        ExperimentId::LowerboundBc => cfg.n_seeds = 20,
        ExperimentId::GridworldCompare => {
            cfg.n_seeds = 2;
            cfg.checkpoints = vec![1_200, 6_000];
        }
        ExperimentId::CoverageAudit => cfg.n_seeds = 2,
        ExperimentId::FormulaSuite => {}
    }
    cfg
}

fn criterion_11() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    for id in [
        ExperimentId::LowerboundBc,
        ExperimentId::GridworldCompare,
        ExperimentId::CoverageAudit,
        ExperimentId::FormulaSuite,
    ] {
        let cfg = small_config(id);
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        let c = serial.install(|| run_experiment(&cfg)).unwrap();
        let same = a.csv == b.csv && a.csv == c.csv && a.summary == b.summary;
        ok &= same && !a.csv.is_empty();
        parts.push(format!("{}: {} bytes {}", id.name(), a.csv.len(), if same { "identical" } else { "DIFFER" }));
    }
    // Through the binary as well.
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(&config, serde_json::to_string(&small_config(ExperimentId::LowerboundBc)).unwrap()).unwrap();
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_mailbench"))
            .arg("run")
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        ok &= status.status.success();
        outputs.push(std::fs::read(out.join("lowerbound-bc.csv")).unwrap_or_default());
    }
    let cli_same = !outputs[0].is_empty() && outputs[0] == outputs[1];
    ok &= cli_same;
    parts.push(format!("cli rerun {}", if cli_same { "identical" } else { "DIFFER" }));
    outcome(ok, parts.join("; "))
}

/// Number, description, time limit and check.
type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        (1, "perturbed matching pennies equilibrium", Duration::from_secs(1), criterion_1),
        (2, "exploitability closed forms vs DP", Duration::from_secs(1), criterion_2),
        (3, "chi-square bound on the equilibrium means", Duration::from_secs(1), criterion_3),
        (4, "restricted strategy class minimizer", Duration::from_secs(5), criterion_4),
        (5, "concentrability on the lower-bound game", Duration::from_secs(1), criterion_5),
        (6, "BC on the simplified lower-bound game", Duration::from_secs(30), criterion_6),
        (7, "warm-up coverage certificate", Duration::from_secs(60), criterion_7),
        (8, "Nash gap decomposition", Duration::from_secs(30), criterion_8),
        (9, "gridworld end to end", Duration::from_secs(15 * 60), criterion_9),
        (10, "BC total-variation concentration", Duration::from_secs(60), criterion_10),
        (11, "determinism", Duration::from_secs(10 * 60), criterion_11),
    ];
    let mut unexpected = Vec::new();
    for (id, name, limit, run) in criteria {
        let started = Instant::now();
        let out = run();
        let elapsed = started.elapsed();
        let passed = out.passed && elapsed <= limit;
        let expected = EXPECTED_FAILURES.iter().find(|(e, _)| *e == id);
        let mark = if passed { "PASS" } else { "FAIL" };
        println!(
            "[{mark}] criterion {id}: {name}: {} ({:.2} s, limit {} s)",
            out.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
        match (passed, expected) {
            (false, Some((_, why))) => println!("       known failure: {why}"),
            (false, None) => unexpected.push(format!("criterion {id} failed")),
            (true, Some(_)) => unexpected.push(format!("criterion {id} passed but is listed as a known failure")),
            (true, None) => {}
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: all criteria behave as recorded");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {}", unexpected.join(", "));
        ExitCode::FAILURE
    }
}
