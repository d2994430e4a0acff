use serde::{Serialize, Serializer};

use super::AnalysisError;
use crate::game_core::{
    best_response_restricted, indicator_reward, induce_mdp, max_visitation, optimal_action_mask,
    response_mdp, GameDynamics, MarkovGame, Player, PolicyPair, RewardKind, StageDistribution,
    StagePolicy,
};

/// Tolerance for membership in the optimal action set of a best response.
const OPTIMALITY_TOL: f64 = 1e-9;

fn serialize_ratio<S: Serializer>(x: &f64, ser: S) -> Result<S::Ok, S::Error> {
    if x.is_infinite() {
        ser.serialize_str("inf")
    } else {
        ser.serialize_f64(*x)
    }
}

/// Occupancy-to-data ratio at one `(h, s)` for one deviating player.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioEntry {
    pub deviator: Player,
    pub stage: usize,
    pub state: usize,
    /// Largest occupancy over best responses to the opponent's expert.
    pub best_response_visit: f64,
    /// Largest occupancy over all responses to the opponent's expert.
    pub any_response_visit: f64,
    pub data_prob: f64,
    #[serde(serialize_with = "serialize_ratio")]
    pub best_response_ratio: f64,
    #[serde(serialize_with = "serialize_ratio")]
    pub any_response_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrabilityReport {
    /// Max ratio over best responses to each expert.
    #[serde(serialize_with = "serialize_ratio")]
    pub c_expert: f64,
    /// Max ratio over every unilateral deviation from each expert; an upper
    /// bound on the coefficient taken over all policy pairs.
    #[serde(serialize_with = "serialize_ratio")]
    pub c_deviation: f64,
    pub entries: Vec<RatioEntry>,
}

impl ConcentrabilityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let fmt = |x: f64| if x.is_infinite() { "inf".to_string() } else { format!("{x}") };
        let mut out = String::from(
            "deviator,stage,state,best_response_visit,any_response_visit,data_prob,best_response_ratio,any_response_ratio\n",
        );
        for e in &self.entries {
            out.push_str(&format!(
                "{:?},{},{},{},{},{},{},{}\n",
                e.deviator,
                e.stage,
                e.state,
                e.best_response_visit,
                e.any_response_visit,
                e.data_prob,
                fmt(e.best_response_ratio),
                fmt(e.any_response_ratio)
            ));
        }
        out
    }
}

/// `visit / data`, with `0 / 0 = 0` and `x / 0 = inf` for `x > 0`.
fn ratio(visit: f64, data: f64) -> f64 {
    if visit <= 0.0 {
        0.0
    } else if data <= 0.0 {
        f64::INFINITY
    } else {
        visit / data
    }
}

/// Coverage of the data distribution `rho` relative to the occupancies of
/// unilateral deviations from the expert pair.
///
/// Best responses are represented by policies restricted to optimal actions
/// everywhere; this set reaches every occupancy a best response can reach,
/// since a best response may only deviate from optimal actions at states it
/// never visits.
pub fn concentrability(
    game: &MarkovGame,
    experts: &PolicyPair,
    rho: &StageDistribution,
) -> Result<ConcentrabilityReport, AnalysisError> {
    let (hh, ns) = (game.horizon(), game.n_states());
    if rho.horizon() != hh || rho.n_states() != ns {
        return Err(AnalysisError::Domain(
            "data distribution shape does not match the game".into(),
        ));
    }
    experts.check_fits(game.dynamics())?;
    let mut entries = Vec::new();
    for deviator in [Player::One, Player::Two] {
        let opponent = experts.get(deviator.opponent());
        let mdp = response_mdp(game, deviator, opponent)?;
        let mask = optimal_action_mask(&mdp, OPTIMALITY_TOL);
        let na = mdp.n_actions();
        for h in 0..hh {
            for s in 0..ns {
                let indicator = mdp.with_reward(indicator_reward(hh, ns, na, s, h), RewardKind::Exploration)?;
                let best = best_response_restricted(&indicator, Some(&mask))?.value;
                let (any, _) = max_visitation(&mdp, s, h)?;
                let data = rho.prob(h, s);
                entries.push(RatioEntry {
                    deviator,
                    stage: h,
                    state: s,
                    best_response_visit: best,
                    any_response_visit: any,
                    data_prob: data,
                    best_response_ratio: ratio(best, data),
                    any_response_ratio: ratio(any, data),
                });
            }
        }
    }
    let c_expert = entries.iter().map(|e| e.best_response_ratio).fold(0.0, f64::max);
    let c_deviation = entries.iter().map(|e| e.any_response_ratio).fold(0.0, f64::max);
    Ok(ConcentrabilityReport {
        c_expert,
        c_deviation,
        entries,
    })
}

/// `(state, stage)` pairs the free player can reach with probability at least
/// `delta` while `fixed` plays `expert`.
pub fn significant_states(
    dynamics: &GameDynamics,
    fixed: Player,
    expert: &StagePolicy,
    delta: f64,
) -> Result<Vec<(usize, usize)>, AnalysisError> {
    let (hh, ns) = (dynamics.horizon(), dynamics.n_states());
    let na = dynamics.n_actions(fixed.opponent());
    let mdp = induce_mdp(
        dynamics,
        fixed,
        expert,
        vec![0.0; hh * ns * na],
        RewardKind::Exploration,
    )?;
    let mut out = Vec::new();
    for s in 0..ns {
        for h in 0..hh {
            if max_visitation(&mdp, s, h)?.0 >= delta {
                out.push((s, h));
            }
        }
    }
    Ok(out)
}
