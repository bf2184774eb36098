//! Small dense linear algebra: symmetric matrices, Cholesky, triangular
//! solves, cyclic Jacobi eigenvalues and log-space products.
//!
//! Vectors are plain `[f64]` slices. Matrices here are small (order at most a
//! few hundred), so everything is dense and allocation-happy.

#![allow(clippy::needless_range_loop)]

use crate::error::{Error, Result};

/// Default sweep budget for [`symmetric_eigenvalues`].
pub const MAX_JACOBI_SWEEPS: usize = 100;

/// Cholesky pivots at or below this fraction of the largest diagonal entry are
/// treated as a failure of positive definiteness.
pub const PIVOT_RELATIVE_THRESHOLD: f64 = 1e-13;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

/// `a - b`
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `y + alpha * x`
pub fn axpy(y: &[f64], alpha: f64, x: &[f64]) -> Vec<f64> {
    debug_assert_eq!(x.len(), y.len());
    y.iter().zip(x).map(|(yi, xi)| yi + alpha * xi).collect()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|v| v.is_finite())
}

/// Dense symmetric matrix storing only the upper triangle, so
/// `get(i, j) == get(j, i)` holds exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    order: usize,
    // packed upper triangle, row-major
    data: Vec<f64>,
}

impl SymMatrix {
    /// Builds the matrix by evaluating `entry(i, j)` for `i <= j`.
    pub fn from_fn(order: usize, mut entry: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(order * (order + 1) / 2);
        for i in 0..order {
            for j in i..order {
                data.push(entry(i, j));
            }
        }
        Self { order, data }
    }

    pub fn identity(order: usize) -> Self {
        Self::from_fn(order, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    /// Builds from full rows, rejecting input that is not exactly symmetric.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            if !all_finite(row) {
                return Err(Error::NonFinite("matrix entries"));
            }
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::InvalidArgument(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j]))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.order && j < self.order, "index out of range");
        self.data[self.packed(i, j)]
    }

    fn packed(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        // rows 0..i hold n + (n - 1) + ... + (n - i + 1) entries
        i * self.order - i * i.saturating_sub(1) / 2 + (j - i)
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.data)
    }

    pub fn max_diagonal(&self) -> f64 {
        (0..self.order).fold(f64::NEG_INFINITY, |m, i| m.max(self.get(i, i)))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.order, x.len())?;
        Ok((0..self.order)
            .map(|i| (0..self.order).map(|j| self.get(i, j) * x[j]).sum())
            .collect())
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.order)
            .map(|i| (0..self.order).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Largest entrywise difference against another matrix of the same order.
    pub fn max_abs_diff(&self, other: &SymMatrix) -> Result<f64> {
        check_dim(self.order, other.order)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }
}

/// Upper-triangular matrix; the strict lower part is always zero.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperTriangular {
    order: usize,
    // dense row-major
    data: Vec<f64>,
}

impl UpperTriangular {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            check_dim(n, row.len())?;
            if row[..i].iter().any(|&v| v != 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "row {i} has nonzero entries below the diagonal"
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Self { order: n, data })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.order + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.order).map(|i| self.get(i, j)).collect()
    }

    /// `RᵀR`
    pub fn gram(&self) -> SymMatrix {
        SymMatrix::from_fn(self.order, |i, j| {
            (0..=i.min(j))
                .map(|k| self.get(k, i) * self.get(k, j))
                .sum()
        })
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Upper Cholesky factor `R` with `RᵀR = S`.
pub fn cholesky_upper(s: &SymMatrix) -> Result<UpperTriangular> {
    let n = s.order();
    if n == 0 {
        return Err(Error::InvalidArgument(
            "matrix order must be positive".into(),
        ));
    }
    let threshold = PIVOT_RELATIVE_THRESHOLD * s.max_diagonal().max(0.0);
    let mut r = vec![0.0; n * n];
    for j in 0..n {
        let pivot = s.get(j, j) - (0..j).map(|k| r[k * n + j] * r[k * n + j]).sum::<f64>();
        if pivot.is_nan() || pivot <= threshold {
            return Err(Error::NotPositiveDefinite { index: j, pivot });
        }
        let rjj = pivot.sqrt();
        r[j * n + j] = rjj;
        for i in j + 1..n {
            let acc = s.get(j, i) - (0..j).map(|k| r[k * n + j] * r[k * n + i]).sum::<f64>();
            r[j * n + i] = acc / rjj;
        }
    }
    Ok(UpperTriangular { order: n, data: r })
}

/// Solves `Rᵀx = b` by forward substitution.
pub fn solve_upper_transposed(r: &UpperTriangular, b: &[f64]) -> Result<Vec<f64>> {
    let n = r.order();
    check_dim(n, b.len())?;
    let mut x = vec![0.0; n];
    for i in 0..n {
        let d = r.get(i, i);
        if d == 0.0 {
            return Err(Error::SingularMatrix { index: i });
        }
        let acc = b[i] - (0..i).map(|k| r.get(k, i) * x[k]).sum::<f64>();
        x[i] = acc / d;
    }
    Ok(x)
}

/// All eigenvalues of `s` in ascending order, by cyclic Jacobi rotations.
///
/// Iterates until the off-diagonal Frobenius mass drops below `tol`, which by
/// Weyl's inequality bounds the absolute error of every returned eigenvalue.
pub fn symmetric_eigenvalues(s: &SymMatrix, tol: f64) -> Result<Vec<f64>> {
    symmetric_eigenvalues_with_budget(s, tol, MAX_JACOBI_SWEEPS)
}

pub fn symmetric_eigenvalues_with_budget(
    s: &SymMatrix,
    tol: f64,
    max_sweeps: usize,
) -> Result<Vec<f64>> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let n = s.order();
    let mut a = s.to_rows();
    let off_mass = |a: &[Vec<f64>]| -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    acc += a[i][j] * a[i][j];
                }
            }
        }
        acc.sqrt()
    };

    let mut off = off_mass(&a);
    let mut sweeps = 0;
    while off >= tol {
        if sweeps == max_sweeps {
            return Err(Error::NoConvergence { sweeps, off });
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k][p];
                    let akq = a[k][q];
                    let new_kp = c * akp - sn * akq;
                    let new_kq = sn * akp + c * akq;
                    a[k][p] = new_kp;
                    a[p][k] = new_kp;
                    a[k][q] = new_kq;
                    a[q][k] = new_kq;
                }
                a[p][p] -= t * apq;
                a[q][q] += t * apq;
                a[p][q] = 0.0;
                a[q][p] = 0.0;
            }
        }
        sweeps += 1;
        off = off_mass(&a);
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eig.sort_by(|x, y| x.total_cmp(y));
    Ok(eig)
}

/// Smallest eigenvalue, accurate to `tol` in absolute terms.
pub fn min_eigenvalue(s: &SymMatrix, tol: f64) -> Result<f64> {
    let eig = symmetric_eigenvalues(s, tol)?;
    eig.first()
        .copied()
        .ok_or_else(|| Error::InvalidArgument("matrix order must be positive".into()))
}

/// `Σ exponent·ln(base)`; the caller exponentiates.
pub fn log_product(terms: &[(f64, f64)]) -> Result<f64> {
    terms
        .iter()
        .enumerate()
        .try_fold(0.0, |acc, (index, &(base, exponent))| {
            if base > 0.0 && base.is_finite() {
                Ok(acc + exponent * base.ln())
            } else {
                Err(Error::NonPositiveBase { index, base })
            }
        })
}
