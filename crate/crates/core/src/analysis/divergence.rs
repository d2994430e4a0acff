use super::AnalysisError;

fn check_open_unit(x: f64, name: &str) -> Result<(), AnalysisError> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(AnalysisError::Domain(format!("{name} = {x} must lie in (0, 1)")))
    }
}

/// `chi^2(Ber(r) || Ber(s)) = (r - s)^2 / (s (1 - s))`.
pub fn chi2_bernoulli(r: f64, s: f64) -> Result<f64, AnalysisError> {
    check_open_unit(r, "r")?;
    check_open_unit(s, "s")?;
    Ok((r - s).powi(2) / (s * (1.0 - s)))
}

/// `KL(Ber(r) || Ber(s))`.
pub fn kl_bernoulli(r: f64, s: f64) -> Result<f64, AnalysisError> {
    check_open_unit(r, "r")?;
    check_open_unit(s, "s")?;
    Ok(r * (r / s).ln() + (1.0 - r) * ((1.0 - r) / (1.0 - s)).ln())
}

/// Two-point testing lower bound `(eps / 30) exp(-n kl)`.
pub fn hypothesis_lower_bound(eps: f64, n: f64, kl: f64) -> f64 {
    eps / 30.0 * (-n * kl).exp()
}

/// Equilibrium first-action probabilities of the `delta = 2 eps` and
/// `delta = eps` games.
pub fn nash_means(eps: f64) -> (f64, f64) {
    (
        0.5 - 2.0 * eps / (8.0 + 4.0 * eps),
        0.5 - eps / (8.0 + 2.0 * eps),
    )
}

/// Chi-square divergence between the two equilibrium means.
pub fn nash_mean_chi2(eps: f64) -> Result<f64, AnalysisError> {
    let (r, s) = nash_means(eps);
    chi2_bernoulli(r, s)
}

/// High-probability L1 deviation of an empirical distribution on `support`
/// points from `n` samples: `sqrt(2 support ln(1/delta) / n)`.
pub fn tv_concentration_bound(support: usize, n: usize, delta: f64) -> f64 {
    (2.0 * support as f64 * (1.0 / delta).ln() / n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divergences_vanish_on_equal_arguments() {
        assert_eq!(chi2_bernoulli(0.3, 0.3).unwrap(), 0.0);
        assert!(kl_bernoulli(0.3, 0.3).unwrap().abs() < 1e-16);
    }

    #[test]
    fn divergences_reject_boundary() {
        assert!(chi2_bernoulli(0.0, 0.5).is_err());
        assert!(kl_bernoulli(0.5, 1.0).is_err());
    }

    #[test]
    fn kl_matches_hand_value() {
        // KL(Ber(0.5) || Ber(0.25)) = 0.5 ln 2 + 0.5 ln(2/3)
        let expected = 0.5 * 2f64.ln() + 0.5 * (2.0f64 / 3.0).ln();
        assert!((kl_bernoulli(0.5, 0.25).unwrap() - expected).abs() < 1e-15);
    }
}
