use super::EnvError;
use crate::analysis::perturbed_mp_nash;
use crate::game_core::{GameDynamics, MarkovGame, PolicyPair, StageDistribution, StagePolicy};

pub const S1: usize = 0;
pub const S2: usize = 1;
pub const S3: usize = 2;

const HORIZON: usize = 2;
const N_STATES: usize = 3;

/// Payoff at `s3` in the simplified variant. Its pure saddle point is
/// `(a1, b1)` with value 1; a uniform row player facing `b2` gets -5.5.
pub const SIMPLIFIED_PAYOFF: [[f64; 2]; 2] = [[1.0, 1.0], [0.0, -12.0]];

/// A lower-bound game together with its expert pair and the stage
/// distribution an offline dataset is drawn from.
#[derive(Debug, Clone)]
pub struct LowerBoundInstance {
    pub game: MarkovGame,
    pub experts: PolicyPair,
    pub rho: StageDistribution,
}

/// `rho_0 = s1`, `rho_1 = (1 - rho_s3) s2 + rho_s3 s3`.
pub fn lower_bound_rho(rho_s3: f64) -> Result<StageDistribution, EnvError> {
    if !(0.0..=1.0).contains(&rho_s3) {
        return Err(EnvError::InvalidParameter(format!(
            "rho(s3) = {rho_s3} is not a probability"
        )));
    }
    Ok(StageDistribution::from_rows(&[
        vec![1.0, 0.0, 0.0],
        vec![0.0, 1.0 - rho_s3, rho_s3],
    ])?)
}

/// Player two alone moves `s1 -> s2` (action b1) or `s1 -> s3` (action b2);
/// every other transition is a self-loop. Only `s3` pays, with `payoff`.
fn build(payoff: [[f64; 2]; 2]) -> Result<MarkovGame, EnvError> {
    let mut p = Vec::with_capacity(HORIZON * N_STATES * 4 * N_STATES);
    let mut r = Vec::with_capacity(HORIZON * N_STATES * 4);
    for h in 0..HORIZON {
        for s in 0..N_STATES {
            for row in &payoff {
                for (b, &pay) in row.iter().enumerate() {
                    let mut next = [0.0; N_STATES];
                    let target = if h == 0 && s == S1 {
                        if b == 0 {
                            S2
                        } else {
                            S3
                        }
                    } else {
                        s
                    };
                    next[target] = 1.0;
                    p.extend(next);
                    r.push(if s == S3 { pay } else { 0.0 });
                }
            }
        }
    }
    let dynamics = GameDynamics::new(HORIZON, N_STATES, 2, 2, p, vec![1.0, 0.0, 0.0])?;
    let bound = payoff.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(MarkovGame::new(dynamics, r, bound)?)
}

fn experts(mu_s3: [f64; 2], nu_s3: [f64; 2]) -> Result<PolicyPair, EnvError> {
    let mut mu = StagePolicy::uniform(HORIZON, N_STATES, 2);
    let mut nu = StagePolicy::uniform(HORIZON, N_STATES, 2);
    for h in 0..HORIZON {
        mu.set_row(h, S3, &mu_s3)?;
        nu.set_row(h, S3, &nu_s3)?;
        nu.set_row(h, S1, &[1.0, 0.0])?;
    }
    Ok(PolicyPair::new(mu, nu)?)
}

/// Three-state game whose `s3` payoff is perturbed matching pennies
/// `[[1 + delta, -1], [-1, 1]]`. Experts play the stage Nash strategy at `s3`
/// and player two's expert always moves to `s2`.
pub fn make_lower_bound_game(delta: f64, rho_s3: f64) -> Result<LowerBoundInstance, EnvError> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(EnvError::InvalidParameter(format!(
            "perturbation {delta} must be finite and non-negative"
        )));
    }
    let (p, _) = perturbed_mp_nash(delta);
    let game = build([[1.0 + delta, -1.0], [-1.0, 1.0]])?;
    Ok(LowerBoundInstance {
        game,
        experts: experts([p, 1.0 - p], [p, 1.0 - p])?,
        rho: lower_bound_rho(rho_s3)?,
    })
}

/// Variant with payoff [`SIMPLIFIED_PAYOFF`] at `s3`, a pure row expert and
/// a uniform column expert there.
pub fn make_lower_bound_simplified(rho_s3: f64) -> Result<LowerBoundInstance, EnvError> {
    Ok(LowerBoundInstance {
        game: build(SIMPLIFIED_PAYOFF)?,
        experts: experts([1.0, 0.0], [0.5, 0.5])?,
        rho: lower_bound_rho(rho_s3)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game_core::occupancy;
    use crate::matrix_nash::nash_gap;

    #[test]
    fn experts_are_an_equilibrium() {
        for delta in [0.0, 0.2, 1.0, 2.0] {
            let inst = make_lower_bound_game(delta, 0.5).unwrap();
            let gap = nash_gap(&inst.game, &inst.experts).unwrap();
            assert!(gap.abs() < 1e-12, "delta={delta}: gap {gap}");
        }
        let inst = make_lower_bound_simplified(0.5).unwrap();
        assert!(nash_gap(&inst.game, &inst.experts).unwrap().abs() < 1e-12);
    }

    #[test]
    fn expert_play_never_reaches_s3() {
        let inst = make_lower_bound_game(0.5, 0.5).unwrap();
        let d = occupancy(inst.game.dynamics(), &inst.experts).unwrap();
        assert_eq!(d.state(1, S2), 1.0);
        assert_eq!(d.state(1, S3), 0.0);
    }

    #[test]
    fn rho_must_be_probability() {
        assert!(make_lower_bound_game(0.1, 1.5).is_err());
        assert!(make_lower_bound_game(-0.1, 0.5).is_err());
        let rho = lower_bound_rho(0.25).unwrap();
        assert_eq!(rho.prob(1, S2), 0.75);
    }
}
