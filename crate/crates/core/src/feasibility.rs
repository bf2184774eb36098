//! Projection methods for finding a point in an intersection of convex sets.

use crate::error::{Error, Result};
use crate::linalg::{all_finite, axpy, distance, sub};
use crate::oracles::{max_distance_set, ProjectableSet};
use crate::solvers::FEASIBILITY_TOLERANCE;

/// Sets to intersect, a starting point, and optionally a known common point.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityInstance {
    pub sets: Vec<ProjectableSet>,
    pub x1: Vec<f64>,
    pub known_solution: Option<Vec<f64>>,
    /// Upper bound on `‖x¹ − x*‖`.
    pub radius: Option<f64>,
}

impl FeasibilityInstance {
    pub fn new(
        sets: Vec<ProjectableSet>,
        x1: Vec<f64>,
        known_solution: Option<Vec<f64>>,
        radius: Option<f64>,
    ) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::EmptySetList);
        }
        if !all_finite(&x1) {
            return Err(Error::NonFinite("starting point"));
        }
        for set in &sets {
            if let Some(d) = set.dimension() {
                if d != x1.len() {
                    return Err(Error::DimensionMismatch {
                        expected: x1.len(),
                        found: d,
                    });
                }
            }
        }
        if let Some(sol) = &known_solution {
            if sol.len() != x1.len() {
                return Err(Error::DimensionMismatch {
                    expected: x1.len(),
                    found: sol.len(),
                });
            }
            for (i, set) in sets.iter().enumerate() {
                let d = set.distance(sol)?;
                if d > FEASIBILITY_TOLERANCE {
                    return Err(Error::InvalidArgument(format!(
                        "known solution is at distance {d:e} from set {i}"
                    )));
                }
            }
        }
        if let Some(r) = radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "radius {r} must be positive"
                )));
            }
        }
        Ok(Self {
            sets,
            x1,
            known_solution,
            radius,
        })
    }

    pub fn dimension(&self) -> usize {
        self.x1.len()
    }

    /// The declared radius, else the distance from `x¹` to the known solution.
    pub fn radius_bound(&self) -> Option<f64> {
        self.radius
            .or_else(|| self.known_solution.as_ref().map(|s| distance(&self.x1, s)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GreedyVariant {
    /// Full projection onto the farthest set.
    Plain,
    /// Projection step damped by `(N + 1 − k)/(N + 1)`.
    Adaptive,
    /// Step `1/(k + 1)` plus momentum `(k − 1)/(k + 1) (x^k − x^{k−1})`.
    Momentum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasRecord {
    /// 1-based iteration index.
    pub k: usize,
    pub x: Vec<f64>,
    /// Zero-based index of the set projected onto.
    pub index: usize,
    /// Tracked distance at `x^k`: `max_i d_{C_i}` for greedy runs, `d_{C₁}`
    /// for alternating projection.
    pub distance: f64,
    /// Projection of `x^k` onto the chosen set.
    pub projection: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasTrace {
    pub records: Vec<FeasRecord>,
    pub final_x: Vec<f64>,
    pub final_distance: f64,
}

impl FeasTrace {
    /// `x^1, ..., x^{N+1}`
    pub fn iterates(&self) -> impl Iterator<Item = &[f64]> {
        self.records
            .iter()
            .map(|r| r.x.as_slice())
            .chain(std::iter::once(self.final_x.as_slice()))
    }

    /// Tracked distances at `x^1, ..., x^{N+1}`.
    pub fn distances(&self) -> impl Iterator<Item = f64> + '_ {
        self.records
            .iter()
            .map(|r| r.distance)
            .chain(std::iter::once(self.final_distance))
    }

    /// True when iterate `k` has at most `k − 1` coordinates with magnitude
    /// above `threshold`, for every `k`.
    pub fn support_grows_by_at_most_one(&self, threshold: f64) -> bool {
        self.iterates()
            .enumerate()
            .all(|(i, x)| x.iter().filter(|v| v.abs() > threshold).count() <= i)
    }
}

/// Greedy projection method: each step moves toward the farthest set.
pub fn greedy_method(
    inst: &FeasibilityInstance,
    n: usize,
    variant: GreedyVariant,
) -> Result<FeasTrace> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "iteration count must be positive".into(),
        ));
    }
    if inst.sets.is_empty() {
        return Err(Error::EmptySetList);
    }
    let horizon = (n + 1) as f64;
    let mut records = Vec::with_capacity(n);
    let mut prev = inst.x1.clone();
    let mut x = inst.x1.clone();
    for k in 1..=n {
        let (index, d) = max_distance_set(&inst.sets, &x)?;
        let projection = inst.sets[index].project(&x)?;
        let residual = sub(&x, &projection);
        let kf = k as f64;
        let next = match variant {
            GreedyVariant::Plain => projection.clone(),
            GreedyVariant::Adaptive => axpy(&x, -(horizon - kf) / horizon, &residual),
            GreedyVariant::Momentum => {
                let step = axpy(&x, -1.0 / (kf + 1.0), &residual);
                axpy(&step, (kf - 1.0) / (kf + 1.0), &sub(&x, &prev))
            }
        };
        records.push(FeasRecord {
            k,
            x: x.clone(),
            index,
            distance: d,
            projection,
        });
        prev = std::mem::replace(&mut x, next);
    }
    let (_, final_distance) = max_distance_set(&inst.sets, &x)?;
    Ok(FeasTrace {
        records,
        final_x: x,
        final_distance,
    })
}

/// `x^{k+1} = Π_{C₂}(Π_{C₁}(x^k))` starting from `x¹ ∈ C₂`.
pub fn alternating_projection(
    c1: &ProjectableSet,
    c2: &ProjectableSet,
    x1: &[f64],
    n: usize,
) -> Result<FeasTrace> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "iteration count must be positive".into(),
        ));
    }
    let start = c2.distance(x1)?;
    if start > FEASIBILITY_TOLERANCE {
        return Err(Error::InfeasibleStart { distance: start });
    }
    let mut records = Vec::with_capacity(n);
    let mut x = x1.to_vec();
    for k in 1..=n {
        let y = c1.project(&x)?;
        let d = distance(&x, &y);
        let next = c2.project(&y)?;
        records.push(FeasRecord {
            k,
            x,
            index: 0,
            distance: d,
            projection: y,
        });
        x = next;
    }
    let final_distance = c1.distance(&x)?;
    Ok(FeasTrace {
        records,
        final_x: x,
        final_distance,
    })
}
