//! Hungarian (Kuhn–Munkres) algorithm, O(n³) potential/augmenting-path form.

/// Minimum-cost assignment on a rectangular cost matrix. Every row (or
/// column, whichever side is smaller) is matched; the result lists matched
/// `(row, col)` pairs in ascending row order.
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let rows = cost.len();
    if rows == 0 || cost[0].is_empty() {
        return Vec::new();
    }
    let cols = cost[0].len();
    debug_assert!(cost.iter().all(|r| r.len() == cols), "ragged cost matrix");
    debug_assert!(
        cost.iter().flatten().all(|c| c.is_finite()),
        "costs must be finite"
    );

    let mut pairs = if rows <= cols {
        solve(cost, rows, cols, false)
    } else {
        // Transpose so the matched side is the rows.
        let t: Vec<Vec<f64>> =
            (0..cols).map(|j| (0..rows).map(|i| cost[i][j]).collect()).collect();
        solve(&t, cols, rows, true)
    };
    pairs.sort_unstable();
    pairs
}

/// Total cost of an assignment.
pub fn assignment_cost(cost: &[Vec<f64>], pairs: &[(usize, usize)]) -> f64 {
    pairs.iter().map(|&(r, c)| cost[r][c]).sum()
}

/// Core solver; requires `n ≤ m`. Matrix access is transposed when the
/// caller flipped the instance.
fn solve(a: &[Vec<f64>], n: usize, m: usize, transposed: bool) -> Vec<(usize, usize)> {
    const INF: f64 = f64::INFINITY;
    // Potentials over rows/cols; p[j] is the row matched to column j
    // (1-indexed, 0 = unmatched).
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![INF; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = INF;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = a[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        // Walk the augmenting path back.
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut pairs = Vec::with_capacity(n);
    for j in 1..=m {
        if p[j] != 0 {
            if transposed {
                pairs.push((j - 1, p[j] - 1));
            } else {
                pairs.push((p[j] - 1, j - 1));
            }
        }
    }
    pairs
}
