use super::{verify, MatrixGame, NashError, NashSolution};

const PIVOT_EPS: f64 = 1e-12;

/// Solves the game through the linear program
/// `max sum(w)  s.t.  M' w <= 1, w >= 0`, where `M'` is the payoff shifted to be
/// strictly positive. The column strategy is the normalized primal solution and
/// the row strategy the normalized dual, read off the slack reduced costs.
/// Bland's rule prevents cycling.
pub fn solve_by_simplex(game: &MatrixGame) -> Result<NashSolution, NashError> {
    let (m, n) = (game.rows(), game.cols());
    let min_entry = (0..m)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| game.at(i, j))
        .fold(f64::INFINITY, f64::min);
    let shift = 1.0 - min_entry;
    let width = n + m + 1;
    // Constraint rows followed by the objective row.
    let mut t = vec![vec![0.0; width]; m + 1];
    for (i, row) in t.iter_mut().take(m).enumerate() {
        for (j, cell) in row.iter_mut().take(n).enumerate() {
            *cell = game.at(i, j) + shift;
        }
        row[n + i] = 1.0;
        row[width - 1] = 1.0;
    }
    t[m][..n].iter_mut().for_each(|x| *x = -1.0);
    let mut basis: Vec<usize> = (n..n + m).collect();

    let max_pivots = 50 * (m + n) * (m + n);
    for _ in 0..max_pivots {
        let Some(col) = (0..n + m).find(|&j| t[m][j] < -PIVOT_EPS) else {
            return finish(game, &t, &basis, shift);
        };
        let mut pivot: Option<(usize, f64)> = None;
        for (i, row) in t.iter().take(m).enumerate() {
            if row[col] > PIVOT_EPS {
                let ratio = row[width - 1] / row[col];
                let better = match pivot {
                    None => true,
                    Some((p, r)) => {
                        ratio < r - PIVOT_EPS || (ratio <= r + PIVOT_EPS && basis[i] < basis[p])
                    }
                };
                if better {
                    pivot = Some((i, ratio));
                }
            }
        }
        // The feasible region is bounded because every entry of M' is positive.
        let (row, _) = pivot.ok_or(NashError::NoEquilibrium)?;
        let p = t[row][col];
        t[row].iter_mut().for_each(|x| *x /= p);
        let pivot_row = t[row].clone();
        for (i, r) in t.iter_mut().enumerate() {
            if i == row || r[col] == 0.0 {
                continue;
            }
            let f = r[col];
            for (x, pv) in r.iter_mut().zip(&pivot_row) {
                *x -= f * pv;
            }
        }
        basis[row] = col;
    }
    Err(NashError::NoEquilibrium)
}

fn finish(
    game: &MatrixGame,
    t: &[Vec<f64>],
    basis: &[usize],
    shift: f64,
) -> Result<NashSolution, NashError> {
    let (m, n) = (game.rows(), game.cols());
    let width = n + m + 1;
    let z = t[m][width - 1];
    if z <= 0.0 {
        return Err(NashError::NoEquilibrium);
    }
    let mut y = vec![0.0; n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            y[b] = t[i][width - 1] / z;
        }
    }
    let x: Vec<f64> = (0..m).map(|i| t[m][n + i] / z).collect();
    let sol = verify(game, x, y).ok_or(NashError::NoEquilibrium)?;
    debug_assert!((sol.value - (1.0 / z - shift)).abs() < 1e-6);
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::super::solve_by_support_enumeration;
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn agrees_with_support_enumeration_on_random_games() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..300 {
            let m = rng.random_range(1..=4);
            let n = rng.random_range(1..=4);
            let payoff = (0..m * n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let g = MatrixGame::new(m, n, payoff).unwrap();
            let a = solve_by_simplex(&g).unwrap();
            let b = solve_by_support_enumeration(&g).unwrap();
            assert!(
                (a.value - b.value).abs() < 1e-9,
                "trial {trial}: simplex {} vs support {}",
                a.value,
                b.value
            );
        }
    }

    #[test]
    fn solves_larger_games() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let (m, n) = (7, 6);
            let payoff = (0..m * n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let g = MatrixGame::new(m, n, payoff).unwrap();
            let sol = solve_by_simplex(&g).unwrap();
            assert!(sol.duality_gap(&g) <= 1e-9);
        }
    }
}
