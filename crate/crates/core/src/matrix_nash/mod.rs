//! Zero-sum matrix-game solver, Markov-game value iteration, Nash gap and
//! equilibrium mixing.

mod markov;
mod simplex;
mod support;

use thiserror::Error;

use crate::game_core::GameError;

pub use markov::{
    mix_equilibria, nash_gap, zero_sum_value_iteration, zero_sum_value_iteration_ordered,
    ActionOrder, EquilibriumSolution,
};
pub use simplex::solve_by_simplex;
pub use support::solve_by_support_enumeration;

/// Equilibrium check tolerance on deviation payoffs.
pub const NASH_TOL: f64 = 1e-9;

/// Largest side handled by support enumeration; larger games use the simplex method.
pub const SUPPORT_ENUMERATION_LIMIT: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NashError {
    #[error("payoff matrix is empty, ragged or non-finite")]
    InvalidMatrix,
    #[error("no equilibrium found within tolerance")]
    NoEquilibrium,
    #[error("mixing weights must be non-negative and sum to one")]
    InvalidWeights,
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Payoff matrix for the row player (maximizer), row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixGame {
    rows: usize,
    cols: usize,
    payoff: Vec<f64>,
}

impl MatrixGame {
    pub fn new(rows: usize, cols: usize, payoff: Vec<f64>) -> Result<Self, NashError> {
        if rows == 0 || cols == 0 || payoff.len() != rows * cols || payoff.iter().any(|x| !x.is_finite()) {
            return Err(NashError::InvalidMatrix);
        }
        Ok(Self { rows, cols, payoff })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, NashError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(NashError::InvalidMatrix);
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.payoff[i * self.cols + j]
    }

    /// Payoff of each row against the column mixture `y`.
    pub fn row_payoffs(&self, y: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.at(i, j) * y[j]).sum())
            .collect()
    }

    /// Payoff of each column against the row mixture `x`.
    pub fn col_payoffs(&self, x: &[f64]) -> Vec<f64> {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| x[i] * self.at(i, j)).sum())
            .collect()
    }

    pub fn expected(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter().zip(self.row_payoffs(y)).map(|(p, r)| p * r).sum()
    }

    fn scale(&self) -> f64 {
        self.payoff.iter().fold(1.0f64, |m, x| m.max(x.abs()))
    }

    /// Same game with rows and columns reordered: entry `(i, j)` of the result
    /// is entry `(row_order[i], col_order[j])` of `self`.
    pub fn permuted(&self, row_order: &[usize], col_order: &[usize]) -> MatrixGame {
        let mut payoff = Vec::with_capacity(self.payoff.len());
        for &i in row_order {
            for &j in col_order {
                payoff.push(self.at(i, j));
            }
        }
        MatrixGame {
            rows: self.rows,
            cols: self.cols,
            payoff,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NashSolution {
    pub row_strategy: Vec<f64>,
    pub col_strategy: Vec<f64>,
    pub value: f64,
}

impl NashSolution {
    /// Best deviation gain of the row player plus that of the column player.
    pub fn duality_gap(&self, game: &MatrixGame) -> f64 {
        let best_row = game
            .row_payoffs(&self.col_strategy)
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        let best_col = game
            .col_payoffs(&self.row_strategy)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        best_row - best_col
    }
}

/// Solves a zero-sum matrix game, exactly up to floating point.
///
/// Games up to 4x4 use support enumeration over square supports; larger ones
/// use the simplex method. The returned pair is verified against unilateral
/// deviations.
pub fn solve_matrix_game(game: &MatrixGame) -> Result<NashSolution, NashError> {
    if game.rows <= SUPPORT_ENUMERATION_LIMIT && game.cols <= SUPPORT_ENUMERATION_LIMIT {
        solve_by_support_enumeration(game)
    } else {
        solve_by_simplex(game)
    }
}

pub(crate) fn verify(game: &MatrixGame, mut x: Vec<f64>, mut y: Vec<f64>) -> Option<NashSolution> {
    let tol = NASH_TOL * 0.1 * game.scale();
    for v in [&mut x, &mut y] {
        if v.iter().any(|p| !p.is_finite() || *p < -tol) {
            return None;
        }
        v.iter_mut().for_each(|p| *p = p.max(0.0));
        let total: f64 = v.iter().sum();
        if total <= 0.0 {
            return None;
        }
        v.iter_mut().for_each(|p| *p /= total);
    }
    let sol = NashSolution {
        value: game.expected(&x, &y),
        row_strategy: x,
        col_strategy: y,
    };
    (sol.duality_gap(game) <= tol).then_some(sol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perturbed_pennies(delta: f64) -> MatrixGame {
        MatrixGame::from_rows(&[vec![1.0 + delta, -1.0], vec![-1.0, 1.0]]).unwrap()
    }

    #[test]
    fn matching_pennies_is_uniform_with_value_zero() {
        let sol = solve_matrix_game(&perturbed_pennies(0.0)).unwrap();
        assert!((sol.value).abs() < 1e-12);
        assert!((sol.row_strategy[0] - 0.5).abs() < 1e-12);
        assert!((sol.col_strategy[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pure_saddle_point_found_first() {
        let g = MatrixGame::from_rows(&[vec![1.0, 1.0], vec![0.0, -12.0]]).unwrap();
        let sol = solve_matrix_game(&g).unwrap();
        assert_eq!(sol.row_strategy, vec![1.0, 0.0]);
        assert_eq!(sol.value, 1.0);
    }

    #[test]
    fn rejects_bad_matrices() {
        assert_eq!(MatrixGame::new(0, 1, vec![]), Err(NashError::InvalidMatrix));
        assert_eq!(
            MatrixGame::new(1, 1, vec![f64::NAN]),
            Err(NashError::InvalidMatrix)
        );
        assert!(MatrixGame::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn permuted_game_reorders_entries() {
        let g = MatrixGame::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let p = g.permuted(&[1, 0], &[1, 0]);
        assert_eq!(p.at(0, 0), 4.0);
        assert_eq!(p.at(1, 0), 2.0);
    }
}
