//! Matrices whose definiteness drives the rate proofs, and the Gram
//! factorization behind the worst-case Polyak instance.

use super::sequences::{seq_a_stepweights, wallis_ratio};
use crate::error::{Error, Result};
use crate::linalg::SymMatrix;

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidArgument("N must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// The `N×N` matrix of the Polyak-rate quadratic form (1-based):
/// `Q_kk = 2a_k a_{k−1} − a_k²`, `Q_ij = (a_{min−1} − a_min) a_max`, with
/// `a` from [`seq_a_stepweights`]. It is a Stieltjes matrix, hence
/// positive definite.
pub fn matrix_q_polyak(n: usize) -> Result<SymMatrix> {
    let a = seq_a_stepweights(n)?.a;
    Ok(SymMatrix::from_fn(n, |i, j| {
        // zero-based (i, j) is entry (i + 1, j + 1); here i <= j
        let (lo, hi) = (i + 1, j + 1);
        if lo == hi {
            2.0 * a[lo] * a[lo - 1] - a[lo] * a[lo]
        } else {
            (a[lo - 1] - a[lo]) * a[hi]
        }
    }))
}

/// `A = Q − e_{N+1}e_{N+1}ᵀ` of order `N+1` with `a_k = 1/(N+1−k)`
/// (`a_{N+1} = a_N`), `Q_kk = 2a_{k−1} − a_0`, `Q_ij = a_{min−1} − a_min`.
/// Each row is weakly diagonally dominant, so `A` is positive semidefinite
/// (and singular).
pub fn matrix_a_adaptive(n: usize) -> Result<SymMatrix> {
    check_n(n)?;
    let a: Vec<f64> = (0..=n + 1)
        .map(|k| 1.0 / (n + 1 - k.min(n)) as f64)
        .collect();
    let order = n + 1;
    Ok(SymMatrix::from_fn(order, |i, j| {
        // zero-based with i <= j, so the 1-based min index is i + 1
        let m = i + 1;
        if i == j {
            let corner = if m == order { 1.0 } else { 0.0 };
            2.0 * a[m - 1] - a[0] - corner
        } else {
            a[m - 1] - a[m]
        }
    }))
}

/// Gram data for the worst-case Polyak instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GramSystem {
    /// `[[1, c eᵀ], [c e, Q]]`, order `N+2`.
    pub a_matrix: SymMatrix,
    /// `Q_kk = 1`, `Q_ij = 1 − a_min(i,j)`, order `N+1`.
    pub q: SymMatrix,
    /// `a_k = Π_{i=N+1−k}^N 4i²/(4i²−1)` for `k = 1..=N` at positions `0..N`.
    pub a: Vec<f64>,
    /// `1/√(2N+1)`
    pub c: f64,
    /// `y_k = Π_{i=N+1−k}^N (2i+1)/(2i)`, `y_{N+1} = y_N`; solves `Qy = e`.
    pub y: Vec<f64>,
}

pub fn matrix_a_gram(n: usize) -> Result<GramSystem> {
    check_n(n)?;
    let mut a = Vec::with_capacity(n);
    let mut ln_acc = 0.0;
    for k in 1..=n {
        ln_acc += wallis_ratio(n + 1 - k).ln();
        a.push(ln_acc.exp());
    }
    let c = 1.0 / ((2 * n + 1) as f64).sqrt();
    let q = SymMatrix::from_fn(n + 1, |i, j| if i == j { 1.0 } else { 1.0 - a[i.min(j)] });
    let a_matrix = SymMatrix::from_fn(n + 2, |i, j| match (i, j) {
        (0, 0) => 1.0,
        (0, _) => c,
        _ => q.get(i - 1, j - 1),
    });
    let mut y = seq_a_stepweights(n)?.p;
    y.push(y[n - 1]);
    Ok(GramSystem {
        a_matrix,
        q,
        a,
        c,
        y,
    })
}
