//! First-order oracles and exact projections.
//!
//! The function class used throughout is the max of affine pieces,
//! `f(x) = max_k offset_k + <slope_k, x>`. Subgradients are selected by a
//! fixed rule (the active piece with the smallest index) so worst-case
//! trajectories are reproducible.
//!
//! Piece and set indices are zero-based.

use crate::error::{Error, Result};
use crate::linalg::{all_finite, dot, norm, norm_sq, sub};

/// Relative tolerance deciding which pieces count as active.
pub const ACTIVE_TOLERANCE: f64 = 1e-12;

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffinePiece {
    pub slope: Vec<f64>,
    pub offset: f64,
}

impl AffinePiece {
    pub fn new(slope: Vec<f64>, offset: f64) -> Self {
        Self { slope, offset }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.offset + dot(&self.slope, x)
    }
}

/// Pointwise maximum of finitely many affine functions.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseAffine {
    dimension: usize,
    pieces: Vec<AffinePiece>,
}

impl PiecewiseAffine {
    pub fn new(dimension: usize, pieces: Vec<AffinePiece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::NoPieces);
        }
        if dimension == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        for piece in &pieces {
            check_dim(dimension, piece.slope.len())?;
            if !all_finite(&piece.slope) || !piece.offset.is_finite() {
                return Err(Error::NonFinite("piece"));
            }
        }
        Ok(Self { dimension, pieces })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    /// Function value and the ascending list of active piece indices.
    pub fn eval(&self, x: &[f64]) -> Result<(f64, Vec<usize>)> {
        check_dim(self.dimension, x.len())?;
        let values: Vec<f64> = self.pieces.iter().map(|p| p.value(x)).collect();
        let value = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let cutoff = value - ACTIVE_TOLERANCE * (1.0 + value.abs());
        let active = values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v >= cutoff)
            .map(|(k, _)| k)
            .collect();
        Ok((value, active))
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.eval(x).map(|(v, _)| v)
    }

    /// Slope of the lowest-index active piece.
    pub fn subgradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.value_and_subgradient(x).map(|(_, g)| g)
    }

    pub fn value_and_subgradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (value, active) = self.eval(x)?;
        // the maximizing piece is always active, so `active` is nonempty
        Ok((value, self.pieces[active[0]].slope.clone()))
    }

    /// Largest slope norm; a valid bound on every subgradient.
    pub fn max_slope_norm(&self) -> f64 {
        self.pieces.iter().fold(0.0, |m, p| m.max(norm(&p.slope)))
    }
}

/// Evaluates `f(x)` together with one subgradient.
pub trait SubgradientOracle {
    fn dimension(&self) -> usize;

    fn value_and_subgradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)>;

    /// Known optimal value `f*`, if any.
    fn optimal_value(&self) -> Option<f64> {
        None
    }

    /// Declared bound `B` on subgradient norms, if any.
    fn subgradient_bound(&self) -> Option<f64> {
        None
    }
}

/// A piecewise-affine function with optional `f*` and `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseAffineOracle {
    pub function: PiecewiseAffine,
    pub f_star: Option<f64>,
    pub bound: Option<f64>,
}

impl PiecewiseAffineOracle {
    pub fn new(function: PiecewiseAffine) -> Self {
        Self {
            function,
            f_star: None,
            bound: None,
        }
    }

    pub fn with_optimal_value(mut self, f_star: f64) -> Self {
        self.f_star = Some(f_star);
        self
    }

    pub fn with_subgradient_bound(mut self, bound: f64) -> Self {
        self.bound = Some(bound);
        self
    }
}

impl SubgradientOracle for PiecewiseAffineOracle {
    fn dimension(&self) -> usize {
        self.function.dimension()
    }

    fn value_and_subgradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.function.value_and_subgradient(x)
    }

    fn optimal_value(&self) -> Option<f64> {
        self.f_star
    }

    fn subgradient_bound(&self) -> Option<f64> {
        self.bound
    }
}

/// `max_i d_{C_i}(x)`: 1-Lipschitz, optimal value 0 when the sets intersect.
///
/// The subgradient at a point outside the chosen set `C` is the unit vector
/// `(x - Π_C(x)) / d_C(x)`; at a feasible point it is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxDistanceOracle {
    sets: Vec<ProjectableSet>,
    dimension: usize,
}

impl MaxDistanceOracle {
    pub fn new(sets: Vec<ProjectableSet>, dimension: usize) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::EmptySetList);
        }
        for set in &sets {
            if let Some(d) = set.dimension() {
                check_dim(dimension, d)?;
            }
        }
        Ok(Self { sets, dimension })
    }
}

impl SubgradientOracle for MaxDistanceOracle {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn value_and_subgradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (index, d) = max_distance_set(&self.sets, x)?;
        if d == 0.0 {
            return Ok((0.0, vec![0.0; x.len()]));
        }
        let p = self.sets[index].project(x)?;
        let g = sub(x, &p).into_iter().map(|v| v / d).collect();
        Ok((d, g))
    }

    fn optimal_value(&self) -> Option<f64> {
        Some(0.0)
    }

    fn subgradient_bound(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// Convex sets with closed-form Euclidean projections.
#[derive(Debug, Clone, PartialEq)]
pub enum ProjectableSet {
    WholeSpace,
    /// `{x : <normal, x> = offset}`
    Hyperplane {
        normal: Vec<f64>,
        offset: f64,
    },
    /// `{x : <normal, x> <= offset}`
    Halfspace {
        normal: Vec<f64>,
        offset: f64,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
}

impl ProjectableSet {
    pub fn hyperplane(normal: Vec<f64>, offset: f64) -> Result<Self> {
        Self::check_normal(&normal, offset)?;
        Ok(Self::Hyperplane { normal, offset })
    }

    pub fn halfspace(normal: Vec<f64>, offset: f64) -> Result<Self> {
        Self::check_normal(&normal, offset)?;
        Ok(Self::Halfspace { normal, offset })
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::InvalidSet("ball center has dimension zero".into()));
        }
        if !all_finite(&center) || !radius.is_finite() {
            return Err(Error::NonFinite("ball"));
        }
        if radius < 0.0 {
            return Err(Error::InvalidSet(format!(
                "ball radius {radius} is negative"
            )));
        }
        Ok(Self::Ball { center, radius })
    }

    fn check_normal(normal: &[f64], offset: f64) -> Result<()> {
        if !all_finite(normal) || !offset.is_finite() {
            return Err(Error::NonFinite("hyperplane"));
        }
        if normal.is_empty() || norm_sq(normal) == 0.0 {
            return Err(Error::InvalidSet("normal vector must be nonzero".into()));
        }
        Ok(())
    }

    /// Ambient dimension; `None` for the whole space.
    pub fn dimension(&self) -> Option<usize> {
        match self {
            Self::WholeSpace => None,
            Self::Hyperplane { normal, .. } | Self::Halfspace { normal, .. } => Some(normal.len()),
            Self::Ball { center, .. } => Some(center.len()),
        }
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        match self.dimension() {
            Some(d) => check_dim(d, x.len()),
            None => Ok(()),
        }
    }

    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        Ok(match self {
            Self::WholeSpace => x.to_vec(),
            Self::Hyperplane { normal, offset } => {
                let t = (dot(normal, x) - offset) / norm_sq(normal);
                x.iter().zip(normal).map(|(xi, ai)| xi - t * ai).collect()
            }
            Self::Halfspace { normal, offset } => {
                let excess = dot(normal, x) - offset;
                if excess > 0.0 {
                    let t = excess / norm_sq(normal);
                    x.iter().zip(normal).map(|(xi, ai)| xi - t * ai).collect()
                } else {
                    x.to_vec()
                }
            }
            Self::Ball { center, radius } => {
                let diff = sub(x, center);
                let d = norm(&diff);
                if d > *radius {
                    let scale = radius / d;
                    center
                        .iter()
                        .zip(&diff)
                        .map(|(ci, di)| ci + scale * di)
                        .collect()
                } else {
                    x.to_vec()
                }
            }
        })
    }

    /// `‖x − Π(x)‖`
    pub fn distance(&self, x: &[f64]) -> Result<f64> {
        let p = self.project(x)?;
        Ok(norm(&sub(x, &p)))
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool> {
        Ok(self.distance(x)? <= tol)
    }
}

/// Index of the farthest set (ties go to the smallest index) and its distance.
pub fn max_distance_set(sets: &[ProjectableSet], x: &[f64]) -> Result<(usize, f64)> {
    if sets.is_empty() {
        return Err(Error::EmptySetList);
    }
    let mut best = (0, f64::NEG_INFINITY);
    for (i, set) in sets.iter().enumerate() {
        let d = set.distance(x)?;
        if d > best.1 {
            best = (i, d);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn abs_function() -> PiecewiseAffine {
        PiecewiseAffine::new(
            1,
            vec![
                AffinePiece::new(vec![1.0], 0.0),
                AffinePiece::new(vec![-1.0], 0.0),
            ],
        )
        .unwrap()
    }

    /// The N = 1 worst-case function, written out by hand from the Gram
    /// columns (1, 0) and (-1/3, 2√2/3).
    fn tight_n1() -> PiecewiseAffine {
        PiecewiseAffine::new(
            2,
            vec![
                AffinePiece::new(vec![1.0, 0.0], 0.0),
                AffinePiece::new(vec![-1.0 / 3.0, 2.0 * 2f64.sqrt() / 3.0], 0.0),
                AffinePiece::new(vec![0.0, 0.0], 0.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn constructor_validation() {
        assert_eq!(PiecewiseAffine::new(1, vec![]), Err(Error::NoPieces));
        assert!(matches!(
            PiecewiseAffine::new(2, vec![AffinePiece::new(vec![1.0], 0.0)]),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 1
            })
        ));
        assert!(PiecewiseAffine::new(1, vec![AffinePiece::new(vec![f64::NAN], 0.0)]).is_err());
        assert!(ProjectableSet::hyperplane(vec![0.0, 0.0], 1.0).is_err());
        assert!(ProjectableSet::halfspace(vec![], 1.0).is_err());
        assert!(ProjectableSet::ball(vec![0.0], -1.0).is_err());
    }

    #[test]
    fn eval_abs() {
        let f = abs_function();
        assert_eq!(f.eval(&[0.0]).unwrap(), (0.0, vec![0, 1]));
        assert_eq!(f.subgradient(&[0.0]).unwrap(), vec![1.0]);
        assert_eq!(f.subgradient(&[-2.0]).unwrap(), vec![-1.0]);
        assert!(matches!(
            f.eval(&[0.0, 1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn eval_tight_n1() {
        let f = tight_n1();
        let x1 = [1.0 / 3f64.sqrt(), 2.0 / 6f64.sqrt()];
        let (v, active) = f.eval(&x1).unwrap();
        assert_abs_diff_eq!(v, 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_eq!(active, vec![0, 1]);
        assert_eq!(f.subgradient(&x1).unwrap(), vec![1.0, 0.0]);

        let (v, active) = f.eval(&[0.0, 2.0 / 6f64.sqrt()]).unwrap();
        assert_abs_diff_eq!(v, 4.0 / (3.0 * 3f64.sqrt()), epsilon = 1e-15);
        assert_eq!(active, vec![1]);
    }

    #[test]
    fn projections() {
        let h = ProjectableSet::hyperplane(vec![1.0, 0.0], 0.0).unwrap();
        assert_eq!(h.project(&[3.0, 4.0]).unwrap(), vec![0.0, 4.0]);

        // the line x₂ = x₁/√2
        let c1 = ProjectableSet::hyperplane(vec![-1.0 / 2f64.sqrt(), 1.0], 0.0).unwrap();
        let p = c1.project(&[1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(p[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 2f64.sqrt() / 3.0, epsilon = 1e-15);

        let b = ProjectableSet::ball(vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(b.project(&[0.0, 2.0]).unwrap(), vec![0.0, 1.0]);
        assert_eq!(b.project(&[0.5, 0.0]).unwrap(), vec![0.5, 0.0]);

        let hs = ProjectableSet::halfspace(vec![0.0, 2.0], 2.0).unwrap();
        assert_eq!(hs.project(&[1.0, 3.0]).unwrap(), vec![1.0, 1.0]);
        assert_eq!(hs.project(&[1.0, -3.0]).unwrap(), vec![1.0, -3.0]);

        assert_eq!(
            ProjectableSet::WholeSpace.project(&[7.0]).unwrap(),
            vec![7.0]
        );
        assert!(b.project(&[1.0]).is_err());
    }

    #[test]
    fn distances() {
        let h = ProjectableSet::hyperplane(vec![0.0, 1.0], 0.0).unwrap();
        assert_eq!(h.distance(&[5.0, 0.0]).unwrap(), 0.0);

        let c1 = ProjectableSet::hyperplane(vec![-1.0 / 2f64.sqrt(), 1.0], 0.0).unwrap();
        assert_abs_diff_eq!(
            c1.distance(&[2.0 / 3.0, 0.0]).unwrap(),
            0.384_900_179_459_750_5,
            epsilon = 1e-15
        );

        let level = 1.0 / 2f64.sqrt();
        let r1 = ProjectableSet::hyperplane(vec![1.0, 0.0], level).unwrap();
        assert_abs_diff_eq!(r1.distance(&[0.0, 0.0]).unwrap(), level, epsilon = 1e-15);
    }

    #[test]
    fn farthest_set() {
        let level = 1.0 / 2f64.sqrt();
        let resisting = vec![
            ProjectableSet::hyperplane(vec![1.0, 0.0], level).unwrap(),
            ProjectableSet::hyperplane(vec![0.0, 1.0], level).unwrap(),
        ];
        assert_eq!(
            max_distance_set(&resisting, &[0.0, 0.0]).unwrap(),
            (0, level)
        );

        let sets = vec![
            ProjectableSet::hyperplane(vec![1.0, 0.0], 1.0).unwrap(),
            ProjectableSet::hyperplane(vec![0.0, 1.0], 5.0).unwrap(),
        ];
        assert_eq!(max_distance_set(&sets, &[0.0, 0.0]).unwrap(), (1, 5.0));
        assert_eq!(max_distance_set(&sets[..1], &[0.0, 0.0]).unwrap(), (0, 1.0));
        assert_eq!(max_distance_set(&[], &[0.0]), Err(Error::EmptySetList));
    }

    #[test]
    fn max_distance_oracle_unit_subgradient() {
        let sets = vec![
            ProjectableSet::hyperplane(vec![1.0, 0.0], 1.0).unwrap(),
            ProjectableSet::ball(vec![0.0, 3.0], 1.0).unwrap(),
        ];
        let oracle = MaxDistanceOracle::new(sets, 2).unwrap();
        let (d, g) = oracle.value_and_subgradient(&[0.0, 0.0]).unwrap();
        assert_eq!(d, 2.0);
        assert_abs_diff_eq!(g[0], 0.0);
        assert_abs_diff_eq!(g[1], -1.0);
        assert_eq!(oracle.optimal_value(), Some(0.0));
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        const DIM: usize = 3;

        fn point() -> impl Strategy<Value = Vec<f64>> {
            proptest::collection::vec(-5.0f64..5.0, DIM)
        }

        fn function() -> impl Strategy<Value = PiecewiseAffine> {
            proptest::collection::vec((point(), -3.0f64..3.0), 1..8).prop_map(|pieces| {
                PiecewiseAffine::new(
                    DIM,
                    pieces
                        .into_iter()
                        .map(|(s, o)| AffinePiece::new(s, o))
                        .collect(),
                )
                .unwrap()
            })
        }

        fn set() -> impl Strategy<Value = ProjectableSet> {
            prop_oneof![
                Just(ProjectableSet::WholeSpace),
                (point(), -2.0f64..2.0)
                    .prop_filter("nonzero normal", |(a, _)| norm(a) > 1e-3)
                    .prop_map(|(a, b)| ProjectableSet::hyperplane(a, b).unwrap()),
                (point(), -2.0f64..2.0)
                    .prop_filter("nonzero normal", |(a, _)| norm(a) > 1e-3)
                    .prop_map(|(a, b)| ProjectableSet::halfspace(a, b).unwrap()),
                (point(), 0.0f64..3.0).prop_map(|(c, r)| ProjectableSet::ball(c, r).unwrap()),
            ]
        }

        proptest! {
            #[test]
            fn subgradient_inequality(f in function(), x in point(), y in point()) {
                let (fx, g) = f.value_and_subgradient(&x).unwrap();
                let fy = f.value(&y).unwrap();
                prop_assert!(fy >= fx + dot(&g, &sub(&y, &x)) - 1e-9);
            }

            #[test]
            fn projection_nonexpansive(s in set(), x in point(), y in point()) {
                let px = s.project(&x).unwrap();
                let py = s.project(&y).unwrap();
                prop_assert!(norm(&sub(&px, &py)) <= norm(&sub(&x, &y)) + 1e-12);
            }

            #[test]
            fn projection_idempotent(s in set(), x in point()) {
                let p = s.project(&x).unwrap();
                let pp = s.project(&p).unwrap();
                prop_assert!(norm(&sub(&p, &pp)) <= 1e-12);
                prop_assert!(s.distance(&p).unwrap() <= 1e-12);
            }
        }
    }
}
