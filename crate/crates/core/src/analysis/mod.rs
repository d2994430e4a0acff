//! Closed-form quantities for perturbed matching pennies, Bernoulli
//! divergences, concentrability coefficients and the per-stage error
//! decomposition of the Nash gap.

mod closed_form;
mod concentrability;
mod decomposition;
mod divergence;

use thiserror::Error;

use crate::game_core::GameError;

pub use closed_form::{
    class_exploitability_narrow, class_exploitability_wide, minimizer_weight, mu_exploitability,
    nu_exploitability, perturbed_mp_nash, restricted_strategy, surrogate_minimizer,
    surrogate_minimizer_by_grid, two_game_surrogate,
};
pub use concentrability::{
    concentrability, significant_states, ConcentrabilityReport, RatioEntry,
};
pub use decomposition::{exploitability_decomposition, DecompositionReport};
pub use divergence::{
    chi2_bernoulli, hypothesis_lower_bound, kl_bernoulli, nash_mean_chi2, nash_means,
    tv_concentration_bound,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error(transparent)]
    Game(#[from] GameError),
}
