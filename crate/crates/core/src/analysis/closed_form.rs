//! Perturbed matching pennies `[[1 + delta, -1], [-1, 1]]` and the
//! restricted strategy class interpolating between the equilibria of
//! `delta = 2 eps` and `delta = eps`.

/// Equilibrium probability of the first action (identical for both players)
/// and the game value.
pub fn perturbed_mp_nash(delta: f64) -> (f64, f64) {
    let denom = 2.0 + delta / 2.0;
    (1.0 / denom, (delta / 2.0) / denom)
}

/// How much player one gains over the value against a column player who
/// plays the first action with probability `q`.
pub fn nu_exploitability(delta: f64, q: f64) -> f64 {
    let (_, v) = perturbed_mp_nash(delta);
    ((2.0 + delta) * q - 1.0).max(1.0 - 2.0 * q) - v
}

/// How much player two pushes below the value against a row player who
/// plays the first action with probability `p`.
pub fn mu_exploitability(delta: f64, p: f64) -> f64 {
    let (_, v) = perturbed_mp_nash(delta);
    v - ((2.0 + delta) * p - 1.0).min(1.0 - 2.0 * p)
}

/// Strategy `1/2 - (w 2eps/(8+4eps) + (1-w) eps/(8+2eps))`: weight `w = 1`
/// gives the equilibrium of `delta = 2 eps`, `w = 0` that of `delta = eps`.
pub fn restricted_strategy(eps: f64, weight: f64) -> f64 {
    0.5 - (weight * 2.0 * eps / (8.0 + 4.0 * eps) + (1.0 - weight) * eps / (8.0 + 2.0 * eps))
}

/// Column-player exploitability of the restricted strategy in the game with
/// `delta = 2 eps`.
pub fn class_exploitability_wide(eps: f64, weight: f64) -> f64 {
    let a = 2.0 * eps * (1.0 + eps) * (1.0 - weight) / ((4.0 + eps) * (2.0 + eps));
    let b = -2.0 * eps * (1.0 - weight) / ((2.0 + eps) * (4.0 + eps));
    a.max(b)
}

/// Column-player exploitability of the restricted strategy in the game with
/// `delta = eps`.
pub fn class_exploitability_narrow(eps: f64, weight: f64) -> f64 {
    let a = -weight * eps / (4.0 + eps);
    let b = 2.0 * eps * weight / ((2.0 + eps) * (4.0 + eps));
    a.max(b)
}

/// Larger of the two exploitabilities that bind at the crossing point, as a
/// function of the column strategy `q`.
pub fn two_game_surrogate(eps: f64, q: f64) -> f64 {
    let wide = (2.0 + 2.0 * eps) * q - 1.0 - eps / (2.0 + eps);
    let narrow = 1.0 - 2.0 * q - (eps / 2.0) / (2.0 + eps / 2.0);
    wide.max(narrow)
}

/// Minimizer of [`two_game_surrogate`] where its two branches cross.
pub fn surrogate_minimizer(eps: f64) -> f64 {
    (2.0 + eps / (2.0 + eps) - eps / (4.0 + eps)) / (2.0 * (2.0 + eps))
}

/// Weight of the restricted strategy that lands on [`surrogate_minimizer`].
pub fn minimizer_weight(eps: f64) -> f64 {
    (eps + 1.0) / (eps + 2.0)
}

/// Grid search of [`two_game_surrogate`] over `[0, 1]` with `resolution` steps.
pub fn surrogate_minimizer_by_grid(eps: f64, resolution: usize) -> f64 {
    let steps = resolution.max(1);
    (0..=steps)
        .map(|i| i as f64 / steps as f64)
        .map(|q| (q, two_game_surrogate(eps, q)))
        .fold((0.0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
        .0
}
