use rand::{Rng, SeedableRng};
use serde::Serialize;

use mailbench_core::analysis::{
    chi2_bernoulli, class_exploitability_narrow, class_exploitability_wide, kl_bernoulli,
    minimizer_weight, mu_exploitability, nash_mean_chi2, nu_exploitability, perturbed_mp_nash,
    restricted_strategy, surrogate_minimizer, surrogate_minimizer_by_grid, two_game_surrogate,
};
use mailbench_core::envs::{make_lower_bound_game, make_lower_bound_simplified, S3};
use mailbench_core::game_core::response_mdp;
use mailbench_core::matrix_nash::MatrixGame;
use mailbench_core::seeding::StreamRng;
use mailbench_core::{
    best_response, nash_gap, solve_matrix_game, zero_sum_value_iteration, GameDynamics, MarkovGame,
    Player, StagePolicy,
};

const TOL: f64 = 1e-9;
pub const DELTAS: [f64; 4] = [0.0, 0.2, 1.0, 2.0];

/// Test-only mutations proving the checks can fail.
#[derive(Debug, Clone, Copy, Default)]
pub struct SuiteHooks {
    /// Evaluate the perturbed matching pennies closed form at `-delta`.
    pub flip_delta_sign: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            passed,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FormulaReport {
    pub checks: Vec<Check>,
}

impl FormulaReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn passed_count(&self) -> usize {
        self.checks.iter().filter(|c| c.passed).count()
    }

    pub fn find(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_table(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let mut out = String::new();
        for c in &self.checks {
            let mark = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("{mark}  {:<width$}  {}\n", c.name, c.detail));
        }
        out.push_str(&format!("{}/{} checks passed\n", self.passed_count(), self.checks.len()));
        out
    }

    pub fn to_csv(&self) -> csv::Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        for c in &self.checks {
            w.serialize(c)?;
        }
        let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
    }
}

pub fn formula_suite() -> FormulaReport {
    formula_suite_with(SuiteHooks::default())
}

pub fn formula_suite_with(hooks: SuiteHooks) -> FormulaReport {
    FormulaReport {
        checks: vec![
            perturbed_mp_vs_solver(hooks),
            lower_bound_markov_value(),
            stage_value_at_s3(),
            nu_exploitability_vs_dp(),
            mu_exploitability_vs_dp(),
            class_wide_vs_dp(),
            class_narrow_vs_dp(),
            chi2_closed_expression(),
            chi2_lower_bound(),
            chi2_upper_bound(),
            kl_below_chi2(),
            surrogate_grid_minimizer(),
            minimizer_weight_exact(),
            surrogate_convexity(),
            simplified_response_value(),
        ],
    }
}

/// One-state, one-stage game with the given payoff matrix.
pub fn single_state_game(payoff: [[f64; 2]; 2]) -> MarkovGame {
    let dynamics = GameDynamics::new(1, 1, 2, 2, vec![1.0; 4], vec![1.0]).expect("valid dynamics");
    let bound = payoff.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    MarkovGame::new(dynamics, payoff.iter().flatten().copied().collect(), bound).expect("valid game")
}

pub fn perturbed_mp(delta: f64) -> MarkovGame {
    single_state_game([[1.0 + delta, -1.0], [-1.0, 1.0]])
}

fn bernoulli_policy(p: f64) -> StagePolicy {
    StagePolicy::new(1, 1, 2, vec![p, 1.0 - p]).expect("valid row")
}

/// Row player's best-response gain over the value against `Ber(q)`, by DP.
pub fn nu_exploitability_dp(delta: f64, q: f64) -> f64 {
    let game = perturbed_mp(delta);
    let br = best_response(&response_mdp(&game, Player::One, &bernoulli_policy(q)).expect("shapes match"));
    br.value - zero_sum_value_iteration(&game).expect("solvable").value
}

/// Column player's best-response push below the value against `Ber(p)`, by DP.
pub fn mu_exploitability_dp(delta: f64, p: f64) -> f64 {
    let game = perturbed_mp(delta);
    let br = best_response(&response_mdp(&game, Player::Two, &bernoulli_policy(p)).expect("shapes match"));
    zero_sum_value_iteration(&game).expect("solvable").value + br.value
}

/// The 5 x 5 grid of `(eps, weight)` used by the class checks.
pub fn class_grid() -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for eps in [0.1, 0.3, 0.5, 0.7, 0.9] {
        for w in [0.0, 0.25, 0.5, 0.75, 1.0] {
            out.push((eps, w));
        }
    }
    out
}

/// The 99 interior points `0.01, ..., 0.99`.
pub fn eps_grid() -> Vec<f64> {
    (1..100).map(|i| i as f64 / 100.0).collect()
}

/// Divergence between the two equilibrium means as printed in the source.
pub fn printed_chi2_expression(eps: f64) -> f64 {
    eps * eps * (eps - 4.0).powi(2) / ((8.0 + 2.0 * eps) * (4.0 + eps) * (4.0 + 2.0 * eps))
}

fn perturbed_mp_vs_solver(hooks: SuiteHooks) -> Check {
    let mut worst = 0.0f64;
    for delta in DELTAS {
        let m = MatrixGame::from_rows(&[vec![1.0 + delta, -1.0], vec![-1.0, 1.0]]).expect("2x2");
        let sol = solve_matrix_game(&m).expect("solvable");
        let arg = if hooks.flip_delta_sign { -delta } else { delta };
        let (p, v) = perturbed_mp_nash(arg);
        worst = worst
            .max((sol.row_strategy[0] - p).abs())
            .max((sol.col_strategy[0] - p).abs())
            .max((sol.value - v).abs());
    }
    Check::new("perturbed_mp_nash_vs_solver", worst <= TOL, format!("max error {worst:.3e}"))
}

fn lower_bound_markov_value() -> Check {
    let mut worst = 0.0f64;
    for delta in DELTAS {
        let inst = make_lower_bound_game(delta, 0.5).expect("valid delta");
        let v = zero_sum_value_iteration(&inst.game).expect("solvable").value;
        let gap = nash_gap(&inst.game, &inst.experts).expect("shapes match");
        worst = worst.max(v.abs()).max(gap.abs());
    }
    Check::new("lower_bound_value_zero", worst <= TOL, format!("max |value|, |expert gap| {worst:.3e}"))
}

fn stage_value_at_s3() -> Check {
    let mut worst = 0.0f64;
    for delta in DELTAS {
        let inst = make_lower_bound_game(delta, 0.5).expect("valid delta");
        let sol = zero_sum_value_iteration(&inst.game).expect("solvable");
        // s3 persists for the last stage only, so its value is one stage game.
        let ns = inst.game.n_states();
        worst = worst.max((sol.values[ns + S3] - perturbed_mp_nash(delta).1).abs());
    }
    Check::new("s3_stage_value", worst <= TOL, format!("max error {worst:.3e}"))
}

fn exploitability_sweep(f: impl Fn(f64, f64) -> f64, g: impl Fn(f64, f64) -> f64) -> f64 {
    let mut worst = 0.0f64;
    for delta in DELTAS {
        for i in 0..=20 {
            let x = i as f64 / 20.0;
            worst = worst.max((f(delta, x) - g(delta, x)).abs());
        }
    }
    worst
}

fn nu_exploitability_vs_dp() -> Check {
    let worst = exploitability_sweep(nu_exploitability, nu_exploitability_dp);
    Check::new("nu_exploitability_vs_dp", worst <= TOL, format!("max error {worst:.3e}"))
}

fn mu_exploitability_vs_dp() -> Check {
    let worst = exploitability_sweep(mu_exploitability, mu_exploitability_dp);
    Check::new("mu_exploitability_vs_dp", worst <= TOL, format!("max error {worst:.3e}"))
}

fn class_wide_vs_dp() -> Check {
    let worst = class_grid()
        .into_iter()
        .map(|(e, w)| (class_exploitability_wide(e, w) - nu_exploitability_dp(2.0 * e, restricted_strategy(e, w))).abs())
        .fold(0.0, f64::max);
    Check::new("class_exploitability_wide_vs_dp", worst <= TOL, format!("25 points, max error {worst:.3e}"))
}

fn class_narrow_vs_dp() -> Check {
    let worst = class_grid()
        .into_iter()
        .map(|(e, w)| (class_exploitability_narrow(e, w) - nu_exploitability_dp(e, restricted_strategy(e, w))).abs())
        .fold(0.0, f64::max);
    Check::new("class_exploitability_narrow_vs_dp", worst <= TOL, format!("25 points, max error {worst:.3e}"))
}

fn chi2_closed_expression() -> Check {
    let mut worst = 0.0f64;
    for eps in [0.1, 0.5] {
        let exact = nash_mean_chi2(eps).expect("interior means");
        worst = worst.max((exact - printed_chi2_expression(eps)).abs());
    }
    Check::new(
        "chi2_printed_expression",
        worst <= 1e-12,
        format!("max |exact - printed| {worst:.3e}; exact is eps^2/(2(2+eps)^3)"),
    )
}

fn chi2_lower_bound() -> Check {
    let failing: Vec<f64> = eps_grid()
        .into_iter()
        .filter(|&e| nash_mean_chi2(e).expect("interior means") < 9.0 * e * e / 300.0)
        .collect();
    let detail = match failing.first() {
        None => "holds on all 99 points".to_string(),
        Some(first) => format!("{} of 99 points violate it, from eps = {first}", failing.len()),
    };
    Check::new("chi2_lower_bound", failing.is_empty(), detail)
}

fn chi2_upper_bound() -> Check {
    let violations = eps_grid()
        .into_iter()
        .filter(|&e| nash_mean_chi2(e).expect("interior means") > 16.0 * e * e / 128.0)
        .count();
    Check::new("chi2_upper_bound", violations == 0, format!("{violations} of 99 points violate it"))
}

fn kl_below_chi2() -> Check {
    let mut rng = StreamRng::seed_from_u64(0x6b6c);
    let mut violations = 0;
    for _ in 0..10_000 {
        let r = rng.random_range(0.01..0.99);
        let s = rng.random_range(0.01..0.99);
        if kl_bernoulli(r, s).expect("interior") > chi2_bernoulli(r, s).expect("interior") + 1e-15 {
            violations += 1;
        }
    }
    Check::new("kl_below_chi2", violations == 0, format!("{violations} of 10000 random pairs violate it"))
}

fn surrogate_grid_minimizer() -> Check {
    let worst = [0.1, 0.5, 0.9]
        .into_iter()
        .map(|e| (surrogate_minimizer_by_grid(e, 1_000_000) - surrogate_minimizer(e)).abs())
        .fold(0.0, f64::max);
    Check::new("surrogate_minimizer_grid", worst <= 1e-5, format!("max error {worst:.3e}"))
}

fn minimizer_weight_exact() -> Check {
    let worst = [0.1, 0.5, 0.9]
        .into_iter()
        .map(|e| (restricted_strategy(e, minimizer_weight(e)) - surrogate_minimizer(e)).abs())
        .fold(0.0, f64::max);
    Check::new("minimizer_weight_reproduces_minimizer", worst <= 1e-12, format!("max error {worst:.3e}"))
}

fn surrogate_convexity() -> Check {
    let mut violations = 0;
    for eps in [0.1, 0.5, 0.9] {
        for i in 0..=200 {
            for j in (i + 2..=200).step_by(7) {
                let (x, y) = (i as f64 / 200.0, j as f64 / 200.0);
                let mid = two_game_surrogate(eps, 0.5 * (x + y));
                let chord = 0.5 * (two_game_surrogate(eps, x) + two_game_surrogate(eps, y));
                if mid > chord + 1e-12 {
                    violations += 1;
                }
            }
        }
    }
    Check::new("surrogate_convexity", violations == 0, format!("{violations} midpoint violations"))
}

fn simplified_response_value() -> Check {
    let inst = make_lower_bound_simplified(0.0).expect("valid rho");
    let mut mu = inst.experts.mu.clone();
    mu.set_row(1, S3, &[0.5, 0.5]).expect("valid row");
    // Player two steers into s3 and answers the uniform row with b2.
    let br = best_response(&response_mdp(&inst.game, Player::Two, &mu).expect("shapes match"));
    let player_one_value = -br.value;
    Check::new(
        "simplified_uniform_row_response",
        (player_one_value + 5.5).abs() <= TOL,
        format!("player-one value under the best response {player_one_value}"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_lists_enough_distinct_checks() {
        let report = formula_suite();
        let mut names: Vec<&str> = report.checks.iter().map(|c| c.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        assert!(names.len() >= 12);
    }

    #[test]
    fn sign_flip_breaks_the_equilibrium_check() {
        let clean = formula_suite();
        let flipped = formula_suite_with(SuiteHooks { flip_delta_sign: true });
        assert!(clean.find("perturbed_mp_nash_vs_solver").unwrap().passed);
        assert!(!flipped.find("perturbed_mp_nash_vs_solver").unwrap().passed);
    }

    #[test]
    fn csv_has_header_and_one_row_per_check() {
        let report = formula_suite();
        let text = report.to_csv().unwrap();
        assert!(text.starts_with("name,passed,detail\n"));
        assert_eq!(text.lines().count(), report.checks.len() + 1);
    }
}
