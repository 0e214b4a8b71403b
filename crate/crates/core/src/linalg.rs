//! Tiny dense linear solves for the fixed-size projection systems.

use crate::error::{Error, Result};

/// Solve `m x = b` for a small square system by Gaussian elimination with
/// partial pivoting. `m` is row-major `n x n`. Returns the solution together
/// with a 1-norm condition estimate (computed from the explicit inverse,
/// which is cheap at these sizes).
pub fn solve_dense(m: &[f64], b: &[f64], n: usize) -> Result<(Vec<f64>, f64)> {
    assert_eq!(m.len(), n * n);
    assert_eq!(b.len(), n);

    // Augment with b and the identity so one elimination yields both the
    // solution and the inverse.
    let cols = n + 1 + n;
    let mut aug = vec![0.0; n * cols];
    for r in 0..n {
        aug[r * cols..r * cols + n].copy_from_slice(&m[r * n..(r + 1) * n]);
        aug[r * cols + n] = b[r];
        aug[r * cols + n + 1 + r] = 1.0;
    }

    let norm_m = one_norm(m, n);
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r1, &r2| {
                aug[r1 * cols + col]
                    .abs()
                    .partial_cmp(&aug[r2 * cols + col].abs())
                    .expect("finite matrix entries")
            })
            .expect("non-empty column");
        let pivot = aug[pivot_row * cols + col];
        if pivot.abs() <= f64::EPSILON * norm_m.max(1.0) {
            return Err(Error::ResonantK2(format!(
                "projection system singular at column {col} (pivot {pivot:.3e})"
            )));
        }
        if pivot_row != col {
            for c in 0..cols {
                aug.swap(pivot_row * cols + c, col * cols + c);
            }
        }
        let inv_p = 1.0 / aug[col * cols + col];
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = aug[r * cols + col] * inv_p;
            if factor == 0.0 {
                continue;
            }
            for c in col..cols {
                aug[r * cols + c] -= factor * aug[col * cols + c];
            }
        }
    }

    let mut x = vec![0.0; n];
    let mut inv = vec![0.0; n * n];
    for r in 0..n {
        let d = aug[r * cols + r];
        x[r] = aug[r * cols + n] / d;
        for c in 0..n {
            inv[r * n + c] = aug[r * cols + n + 1 + c] / d;
        }
    }
    let cond = norm_m * one_norm(&inv, n);
    Ok((x, cond))
}

fn one_norm(m: &[f64], n: usize) -> f64 {
    (0..n)
        .map(|c| (0..n).map(|r| m[r * n + c].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Max-norm relative residual `||m x - b||_inf / ||b||_inf`.
pub fn residual_inf(m: &[f64], x: &[f64], b: &[f64], n: usize) -> f64 {
    let scale = b.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())).max(1e-300);
    (0..n)
        .map(|r| {
            let mx: f64 = (0..n).map(|c| m[r * n + c] * x[c]).sum();
            (mx - b[r]).abs()
        })
        .fold(0.0, f64::max)
        / scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_known_system() {
        let m = [2.0, 1.0, -1.0, -3.0, -1.0, 2.0, -2.0, 1.0, 2.0];
        let b = [8.0, -11.0, -3.0];
        let (x, cond) = solve_dense(&m, &b, 3).unwrap();
        for (got, want) in x.iter().zip([2.0, 3.0, -1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(cond > 1.0 && cond < 1e3);
        assert!(residual_inf(&m, &x, &b, 3) < 1e-14);
    }

    #[test]
    fn rejects_singular() {
        let m = [1.0, 2.0, 2.0, 4.0];
        let b = [1.0, 2.0];
        assert!(matches!(solve_dense(&m, &b, 2), Err(Error::ResonantK2(_))));
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        let m = [0.0, 1.0, 1.0, 0.0];
        let b = [3.0, 7.0];
        let (x, _) = solve_dense(&m, &b, 2).unwrap();
        assert_eq!(x, vec![7.0, 3.0]);
    }
}
