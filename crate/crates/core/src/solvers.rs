//! Projected subgradient method with pluggable step sizes, and the Polyak
//! method with a momentum term.

use crate::error::{Error, Result};
use crate::linalg::{all_finite, axpy, distance, norm_sq, sub};
use crate::oracles::{ProjectableSet, SubgradientOracle};

/// A starting point farther than this from the feasible set is rejected.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-10;

/// `f(x) - f*` at or below `OPTIMALITY_TOLERANCE * (1 + |f*|)` counts as optimal.
pub const OPTIMALITY_TOLERANCE: f64 = 1e-15;

/// `f(x) - f*` below `-INCONSISTENCY_TOLERANCE * (1 + |f*|)` means the declared
/// optimal value is wrong.
pub const INCONSISTENCY_TOLERANCE: f64 = 1e-9;

/// Squared subgradient norms at or below this are treated as zero.
pub const ZERO_SUBGRADIENT_SQ: f64 = 1e-24;

#[derive(Debug, Clone, PartialEq)]
pub enum StepSchedule {
    /// Constant step `h`.
    Fixed(f64),
    /// Prescribed steps `h_1, ..., h_N`.
    FixedList(Vec<f64>),
    /// `t (f(x) - f*) / ‖g‖²` with `t` in `(0, 2)`.
    PolyakT(f64),
    /// `(f(x) - f*) / ‖g‖²`
    Polyak,
    /// `(N + 1 - k)(f(x) - f*) / ((N + 1)‖g‖²)`
    AdaptivePolyak,
    /// `R (N + 1 - k) / (‖g‖ (N + 1)^{3/2})` for a known radius `R`.
    PreSizedOptimal(f64),
}

impl StepSchedule {
    /// Whether the schedule uses the optimal value `f*`.
    pub fn needs_optimal_value(&self) -> bool {
        matches!(self, Self::PolyakT(_) | Self::Polyak | Self::AdaptivePolyak)
    }

    /// Checks parameter ranges for a run of `n` steps.
    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSchedule(msg));
        match self {
            Self::Fixed(h) if !(h.is_finite() && *h > 0.0) => {
                bad(format!("step {h} must be positive"))
            }
            Self::FixedList(list) if list.len() < n => {
                bad(format!("{} steps given for {n} iterations", list.len()))
            }
            Self::FixedList(list) if list.iter().any(|h| !(h.is_finite() && *h >= 0.0)) => {
                bad("steps must be nonnegative and finite".into())
            }
            Self::PolyakT(t) if !(*t > 0.0 && *t < 2.0) => {
                bad(format!("t = {t} is outside (0, 2)"))
            }
            Self::PreSizedOptimal(r) if !(r.is_finite() && *r > 0.0) => {
                bad(format!("radius {r} must be positive"))
            }
            _ => Ok(()),
        }
    }
}

fn optimality_slack(f_star: f64) -> f64 {
    OPTIMALITY_TOLERANCE * (1.0 + f_star.abs())
}

/// Step size `h_k` for iteration `k` (1-based) of an `n`-step run.
///
/// Polyak-family schedules return 0 when `f_k` is already optimal.
/// `PreSizedOptimal` returns 0 for a zero subgradient since the point is then
/// a global minimizer.
pub fn step_size(
    schedule: &StepSchedule,
    k: usize,
    n: usize,
    f_k: f64,
    f_star: Option<f64>,
    g_norm_sq: f64,
) -> Result<f64> {
    if k == 0 || k > n {
        return Err(Error::BadIndices { k, n });
    }
    let remaining = (n + 1 - k) as f64;
    let horizon = (n + 1) as f64;
    let polyak = |t: f64| -> Result<f64> {
        let f_star = f_star.ok_or(Error::MissingOptimalValue)?;
        let gap = f_k - f_star;
        if gap <= optimality_slack(f_star) {
            return Ok(0.0);
        }
        if g_norm_sq <= ZERO_SUBGRADIENT_SQ {
            return Err(Error::ZeroSubgradient { k, gap });
        }
        Ok(t * gap / g_norm_sq)
    };
    match schedule {
        StepSchedule::Fixed(h) => Ok(*h),
        StepSchedule::FixedList(list) => list.get(k - 1).copied().ok_or(Error::LengthMismatch {
            expected: n,
            found: list.len(),
        }),
        StepSchedule::PolyakT(t) => polyak(*t),
        StepSchedule::Polyak => polyak(1.0),
        StepSchedule::AdaptivePolyak => polyak(remaining / horizon),
        StepSchedule::PreSizedOptimal(radius) => {
            if g_norm_sq <= ZERO_SUBGRADIENT_SQ {
                Ok(0.0)
            } else {
                Ok(radius * remaining / (g_norm_sq.sqrt() * horizon.powi(3).sqrt()))
            }
        }
    }
}

/// One iteration of a solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// 1-based iteration index.
    pub k: usize,
    pub x: Vec<f64>,
    pub f: f64,
    pub g: Vec<f64>,
    pub h: f64,
    /// Momentum displacement added in this step (momentum method only).
    pub momentum: Option<Vec<f64>>,
}

/// Complete record of an `N`-step run: `x^1..x^N` with their oracle answers
/// and steps, plus the last iterate `x^{N+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub records: Vec<StepRecord>,
    pub final_x: Vec<f64>,
    pub final_f: f64,
}

impl RunTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `x^1, ..., x^{N+1}`
    pub fn iterates(&self) -> impl Iterator<Item = &[f64]> {
        self.records
            .iter()
            .map(|r| r.x.as_slice())
            .chain(std::iter::once(self.final_x.as_slice()))
    }

    /// Largest deviation between the recorded iterates and those obtained by
    /// replaying the recorded steps from `x^1`.
    pub fn replay_error(&self, feasible: &ProjectableSet) -> Result<f64> {
        let Some(first) = self.records.first() else {
            return Ok(0.0);
        };
        let mut x = first.x.clone();
        let mut worst: f64 = 0.0;
        for (i, r) in self.records.iter().enumerate() {
            worst = worst.max(distance(&x, &r.x));
            let mut y = axpy(&x, -r.h, &r.g);
            if let Some(m) = &r.momentum {
                y = axpy(&y, 1.0, m);
            }
            x = feasible.project(&y)?;
            let next = self
                .records
                .get(i + 1)
                .map_or(self.final_x.as_slice(), |n| n.x.as_slice());
            worst = worst.max(distance(&x, next));
        }
        Ok(worst)
    }
}

fn check_start<O: SubgradientOracle + ?Sized>(
    oracle: &O,
    feasible: &ProjectableSet,
    x1: &[f64],
    n: usize,
) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "iteration count must be positive".into(),
        ));
    }
    if x1.len() != oracle.dimension() {
        return Err(Error::DimensionMismatch {
            expected: oracle.dimension(),
            found: x1.len(),
        });
    }
    if !all_finite(x1) {
        return Err(Error::NonFinite("starting point"));
    }
    let d = feasible.distance(x1)?;
    if d > FEASIBILITY_TOLERANCE {
        return Err(Error::InfeasibleStart { distance: d });
    }
    Ok(())
}

/// Returns the optimality gap, or an error when the oracle answers below
/// its own declared optimum.
fn gap(k: usize, value: f64, f_star: f64) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::NonFinite("function value"));
    }
    let gap = value - f_star;
    if gap < -INCONSISTENCY_TOLERANCE * (1.0 + f_star.abs()) {
        return Err(Error::InconsistentOptimalValue { k, value, f_star });
    }
    Ok(gap)
}

/// Runs exactly `n` steps of `x^{k+1} = Π_X(x^k − h_k g^k)`.
///
/// When `f*` is known and `f(x^k)` reaches it, the iterate is frozen and the
/// remaining records repeat `x^k` with a zero step.
pub fn subgradient_method<O: SubgradientOracle + ?Sized>(
    oracle: &O,
    feasible: &ProjectableSet,
    x1: &[f64],
    n: usize,
    schedule: &StepSchedule,
) -> Result<RunTrace> {
    check_start(oracle, feasible, x1, n)?;
    schedule.validate(n)?;
    let f_star = oracle.optimal_value();
    if schedule.needs_optimal_value() && f_star.is_none() {
        return Err(Error::MissingOptimalValue);
    }

    let mut records = Vec::with_capacity(n);
    let mut x = x1.to_vec();
    let mut frozen: Option<(f64, Vec<f64>)> = None;
    for k in 1..=n {
        if let Some((f, g)) = &frozen {
            records.push(StepRecord {
                k,
                x: x.clone(),
                f: *f,
                g: g.clone(),
                h: 0.0,
                momentum: None,
            });
            continue;
        }
        let (f, g) = oracle.value_and_subgradient(&x)?;
        let at_optimum = match f_star {
            Some(fs) => gap(k, f, fs)? <= optimality_slack(fs),
            None => false,
        };
        if at_optimum {
            records.push(StepRecord {
                k,
                x: x.clone(),
                f,
                g: g.clone(),
                h: 0.0,
                momentum: None,
            });
            frozen = Some((f, g));
            continue;
        }
        let h = step_size(schedule, k, n, f, f_star, norm_sq(&g))?;
        let next = feasible.project(&axpy(&x, -h, &g))?;
        records.push(StepRecord {
            k,
            x,
            f,
            g,
            h,
            momentum: None,
        });
        x = next;
    }
    let final_f = match frozen {
        Some((f, _)) => f,
        None => oracle.value_and_subgradient(&x)?.0,
    };
    Ok(RunTrace {
        records,
        final_x: x,
        final_f,
    })
}

/// Polyak step with a momentum term; needs both `f*` and `B` from the oracle.
///
/// `x^{k+1} = Π_X(x^k − (f(x^k) − f*)/((k + 1)B²) g^k + (k − 1)/(k + 1) (x^k − x^{k−1}))`
/// with `x^0 = x^1`. Freezes at an optimal iterate like [`subgradient_method`].
pub fn momentum_polyak_method<O: SubgradientOracle + ?Sized>(
    oracle: &O,
    feasible: &ProjectableSet,
    x1: &[f64],
    n: usize,
) -> Result<RunTrace> {
    let f_star = oracle.optimal_value().ok_or(Error::MissingOptimalValue)?;
    let bound = oracle
        .subgradient_bound()
        .ok_or(Error::MissingSubgradientBound)?;
    if !(bound > 0.0 && bound.is_finite()) {
        return Err(Error::MissingSubgradientBound);
    }
    check_start(oracle, feasible, x1, n)?;

    let mut records = Vec::with_capacity(n);
    let mut prev = x1.to_vec();
    let mut x = x1.to_vec();
    let mut frozen: Option<(f64, Vec<f64>)> = None;
    for k in 1..=n {
        let zero = vec![0.0; x.len()];
        if let Some((f, g)) = &frozen {
            records.push(StepRecord {
                k,
                x: x.clone(),
                f: *f,
                g: g.clone(),
                h: 0.0,
                momentum: Some(zero),
            });
            continue;
        }
        let (f, g) = oracle.value_and_subgradient(&x)?;
        let gap = gap(k, f, f_star)?;
        if gap <= optimality_slack(f_star) {
            records.push(StepRecord {
                k,
                x: x.clone(),
                f,
                g: g.clone(),
                h: 0.0,
                momentum: Some(zero),
            });
            frozen = Some((f, g));
            continue;
        }
        let kf = k as f64;
        let h = gap / ((kf + 1.0) * bound * bound);
        let weight = (kf - 1.0) / (kf + 1.0);
        let momentum: Vec<f64> = sub(&x, &prev).into_iter().map(|d| weight * d).collect();
        let y = axpy(&axpy(&x, -h, &g), 1.0, &momentum);
        let next = feasible.project(&y)?;
        records.push(StepRecord {
            k,
            x: x.clone(),
            f,
            g,
            h,
            momentum: Some(momentum),
        });
        prev = std::mem::replace(&mut x, next);
    }
    let final_f = match frozen {
        Some((f, _)) => f,
        None => oracle.value_and_subgradient(&x)?.0,
    };
    Ok(RunTrace {
        records,
        final_x: x,
        final_f,
    })
}

/// `‖x^{k+1} − x*‖ ≤ ‖x^k − x*‖ + tol` along the whole sequence.
pub fn is_fejer_monotone<'a>(
    iterates: impl IntoIterator<Item = &'a [f64]>,
    x_star: &[f64],
    tol: f64,
) -> bool {
    let mut last: Option<f64> = None;
    for x in iterates {
        let d = distance(x, x_star);
        if let Some(prev) = last {
            if d > prev + tol {
                return false;
            }
        }
        last = Some(d);
    }
    true
}
