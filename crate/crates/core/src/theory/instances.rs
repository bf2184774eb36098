//! Explicit instances on which the rate bounds hold with equality.

use super::matrices::matrix_a_gram;
use super::rates::{rate_altproj, rate_polyak};
use crate::error::{Error, Result};
use crate::feasibility::FeasibilityInstance;
use crate::linalg::{cholesky_upper, solve_upper_transposed, SymMatrix};
use crate::oracles::{AffinePiece, PiecewiseAffine, PiecewiseAffineOracle, ProjectableSet};

/// Gram residual allowed when assembling the worst-case Polyak instance.
pub const GRAM_TOLERANCE: f64 = 1e-10;

/// A worst-case function for the Polyak step together with its start point.
#[derive(Debug, Clone, PartialEq)]
pub struct TightInstance {
    pub function: PiecewiseAffine,
    pub x1: Vec<f64>,
    pub x_star: Vec<f64>,
    pub f_star: f64,
    /// Values `f(x^1), ..., f(x^{N+1})` along the Polyak trajectory.
    pub levels: Vec<f64>,
    pub predicted_last_value: f64,
}

impl TightInstance {
    /// Oracle with `f* = 0` and unit subgradient bound.
    pub fn oracle(&self) -> PiecewiseAffineOracle {
        PiecewiseAffineOracle::new(self.function.clone())
            .with_optimal_value(self.f_star)
            .with_subgradient_bound(1.0)
    }

    pub fn horizon(&self) -> usize {
        self.levels.len() - 1
    }
}

/// Builds the `(N+1)`-dimensional function on which `N` Polyak steps from
/// `x¹` (with `‖x¹‖ = 1`) end at exactly `rate_polyak(N, 1, 1)`.
///
/// With `GᵀG = [[1, c eᵀ], [c e, Q]]`, the pieces are `<g^k, x>` for the
/// columns `g^1..g^{N+1}` of the Cholesky factor of `Q`, plus the zero
/// piece; `x¹` is the first column of `G`, and the minimizer is the origin.
pub fn build_polyak_tight_instance(n: usize) -> Result<TightInstance> {
    let gram = matrix_a_gram(n)?;
    let r = cholesky_upper(&gram.q)?;
    let x1 = solve_upper_transposed(&r, &vec![gram.c; n + 1])?;

    let dim = n + 1;
    // GᵀG must reproduce the prescribed inner products
    let g_cols: Vec<Vec<f64>> = std::iter::once(x1.clone())
        .chain((0..dim).map(|j| r.column(j)))
        .collect();
    let gtg = SymMatrix::from_fn(n + 2, |i, j| crate::linalg::dot(&g_cols[i], &g_cols[j]));
    let residual = gtg.max_abs_diff(&gram.a_matrix)?;
    if residual > GRAM_TOLERANCE {
        return Err(Error::InvalidArgument(format!(
            "Gram factorization residual {residual:e} exceeds tolerance"
        )));
    }

    let mut pieces: Vec<AffinePiece> = g_cols[1..]
        .iter()
        .map(|g| AffinePiece::new(g.clone(), 0.0))
        .collect();
    pieces.push(AffinePiece::new(vec![0.0; dim], 0.0));
    let function = PiecewiseAffine::new(dim, pieces)?;

    // f^{k+1} = a_k f^k with f^1 = c
    let mut levels = Vec::with_capacity(n + 1);
    levels.push(gram.c);
    for k in 1..=n {
        levels.push(levels[k - 1] * gram.a[k - 1]);
    }
    debug_assert!(levels.windows(2).all(|w| w[0] < w[1]));

    Ok(TightInstance {
        function,
        x1,
        x_star: vec![0.0; dim],
        f_star: 0.0,
        levels,
        predicted_last_value: rate_polyak(n, 1.0, 1.0)?,
    })
}

/// Two lines through the origin in the plane on which alternating
/// projection attains its rate exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct AltProjInstance {
    /// `x₂ = x₁/√(2N)`
    pub c1: ProjectableSet,
    /// `x₂ = 0`
    pub c2: ProjectableSet,
    pub x1: Vec<f64>,
    pub x_star: Vec<f64>,
    pub predicted: f64,
}

impl AltProjInstance {
    pub fn as_feasibility(&self) -> FeasibilityInstance {
        FeasibilityInstance {
            sets: vec![self.c1.clone(), self.c2.clone()],
            x1: self.x1.clone(),
            known_solution: Some(self.x_star.clone()),
            radius: Some(1.0),
        }
    }
}

pub fn build_altproj_tight_instance(n: usize) -> Result<AltProjInstance> {
    let predicted = rate_altproj(n, 1.0)?;
    let slope = 1.0 / ((2 * n) as f64).sqrt();
    Ok(AltProjInstance {
        c1: ProjectableSet::hyperplane(vec![-slope, 1.0], 0.0)?,
        c2: ProjectableSet::hyperplane(vec![0.0, 1.0], 0.0)?,
        x1: vec![1.0, 0.0],
        x_star: vec![0.0, 0.0],
        predicted,
    })
}

/// `N+1` coordinate hyperplanes `x_i = R/√(N+1)` with `x¹ = 0`: every method
/// that moves only along projection residuals stays at max-distance
/// `R/√(N+1)` for its first `N+1` iterates.
pub fn build_feasibility_resisting_instance(n: usize, radius: f64) -> Result<FeasibilityInstance> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "R = {radius} must be positive"
        )));
    }
    let dim = n + 1;
    let level = radius / (dim as f64).sqrt();
    let sets = (0..dim)
        .map(|i| {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            ProjectableSet::hyperplane(e, level)
        })
        .collect::<Result<Vec<_>>>()?;
    FeasibilityInstance::new(sets, vec![0.0; dim], Some(vec![level; dim]), Some(radius))
}
