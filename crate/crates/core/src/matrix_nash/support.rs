use super::{verify, MatrixGame, NashError, NashSolution};

/// Solves `a x = b` in place by Gaussian elimination with partial pivoting.
/// Returns `None` when the system is numerically singular.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a
        .iter()
        .flatten()
        .fold(1.0f64, |m, x| m.max(x.abs()));
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Some(x)
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] != i + n - k) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Strategy on `support` that makes the opponent indifferent over `other`.
///
/// `entry(i, j)` is the payoff with `i` in `support` and `j` in `other`.
fn equalizer(
    support: &[usize],
    other: &[usize],
    len: usize,
    entry: impl Fn(usize, usize) -> f64,
) -> Option<Vec<f64>> {
    let k = support.len();
    // Unknowns: weights on the support, then the common payoff.
    let mut a = vec![vec![0.0; k + 1]; k + 1];
    let mut b = vec![0.0; k + 1];
    for (r, &j) in other.iter().enumerate() {
        for (c, &i) in support.iter().enumerate() {
            a[r][c] = entry(i, j);
        }
        a[r][k] = -1.0;
    }
    a[k][..k].iter_mut().for_each(|x| *x = 1.0);
    b[k] = 1.0;
    let sol = solve_linear(a, b)?;
    let mut full = vec![0.0; len];
    for (c, &i) in support.iter().enumerate() {
        full[i] = sol[c];
    }
    Some(full)
}

/// Enumerates square supports in increasing size, then lexicographically, and
/// returns the first pair of equalizing strategies that survives the deviation
/// check. Pure saddle points are therefore preferred.
pub fn solve_by_support_enumeration(game: &MatrixGame) -> Result<NashSolution, NashError> {
    let (m, n) = (game.rows(), game.cols());
    for k in 1..=m.min(n) {
        let row_sets = subsets(m, k);
        let col_sets = subsets(n, k);
        for rs in &row_sets {
            for cs in &col_sets {
                let Some(x) = equalizer(rs, cs, m, |i, j| game.at(i, j)) else {
                    continue;
                };
                let Some(y) = equalizer(cs, rs, n, |j, i| game.at(i, j)) else {
                    continue;
                };
                if let Some(sol) = verify(game, x, y) {
                    return Ok(sol);
                }
            }
        }
    }
    Err(NashError::NoEquilibrium)
}
