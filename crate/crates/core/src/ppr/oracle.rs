//! Direct linear solve of the personalized PageRank fixed point, for
//! verifying the iterative solvers on small graphs.
//!
//! Builds the dense matrix from an edge list on its own and solves
//! `(I - alpha * T) x = (1 - alpha) * e_target` by Gaussian elimination with
//! partial pivoting.

use crate::error::{Error, Result};

pub const MAX_ORACLE_NODES: usize = 200;

/// `edges` are undirected `(a, b, weight)` triples; mass on isolated nodes
/// moves to `target`.
pub fn solve_dense_oracle(n: usize, edges: &[(usize, usize, f64)], target: usize, alpha: f64) -> Result<Vec<f64>> {
    if n > MAX_ORACLE_NODES {
        return Err(Error::Oracle(format!("{n} nodes exceed the oracle limit of {MAX_ORACLE_NODES}")));
    }
    if target >= n {
        return Err(Error::Oracle(format!("target {target} out of range")));
    }
    let mut adj = vec![vec![0.0f64; n]; n];
    for &(a, b, w) in edges {
        adj[a][b] += w;
        adj[b][a] += w;
    }
    // walk[j][i]: probability of moving from i to j
    let mut walk = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        let s: f64 = (0..n).map(|j| adj[i][j]).sum();
        if s == 0.0 {
            walk[target][i] = 1.0;
        } else {
            for j in 0..n {
                walk[j][i] = adj[i][j] / s;
            }
        }
    }
    let mut a = vec![vec![0.0f64; n + 1]; n];
    for j in 0..n {
        for i in 0..n {
            a[j][i] = if i == j { 1.0 } else { 0.0 } - alpha * walk[j][i];
        }
        a[j][n] = if j == target { 1.0 - alpha } else { 0.0 };
    }
    gaussian_solve(a)
}

/// Solves the augmented system `[A | b]`.
pub fn gaussian_solve(mut a: Vec<Vec<f64>>) -> Result<Vec<f64>> {
    let n = a.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        if a[pivot][col].abs() < 1e-300 {
            return Err(Error::Oracle(format!("singular system at column {col}")));
        }
        a.swap(col, pivot);
        for row in (col + 1)..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..=n {
                    a[row][k] -= f * a[col][k];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = ((row + 1)..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (a[row][n] - s) / a[row][row];
    }
    Ok(x)
}
