//! Weighted last-iterate inequality for a recorded run.
//!
//! For multipliers `0 < v_0 ≤ … ≤ v_{N+1}` and any trace of the projected
//! subgradient method,
//!
//! ```text
//! Σ_{k=1}^{N+1} (h_k v_k v_{k−1} − (v_k − v_{k−1}) Σ_{i>k} h_i v_i) f(x^k) − v_0 Σ_k h_k v_k f*
//!     ≤ v_0²/2 ‖x¹ − x*‖² + ½ Σ_k h_k² v_k² ‖g^k‖²
//! ```
//!
//! where `h_{N+1}` is free. The checker reports `RHS − LHS`.

use super::sequences::{ln_polyak_growth, seq_a_stepweights};
use crate::error::{Error, Result};
use crate::linalg::{distance, norm_sq};
use crate::oracles::SubgradientOracle;
use crate::solvers::RunTrace;

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    /// `v_0, ..., v_{N+1}`
    pub v: Vec<f64>,
    pub h_last: f64,
    pub slack: f64,
}

impl Certificate {
    pub fn holds(&self, tol: f64) -> bool {
        self.slack >= -tol
    }
}

fn check_multipliers(v: &[f64], h_last: f64) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) || !h_last.is_finite() {
        return Err(Error::NonFinite("multipliers"));
    }
    if v[0] <= 0.0 {
        return Err(Error::BadMultipliers("multipliers must be positive".into()));
    }
    if v.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::BadMultipliers(
            "multipliers not nondecreasing".into(),
        ));
    }
    if h_last <= 0.0 {
        return Err(Error::BadMultipliers("h_last must be positive".into()));
    }
    Ok(())
}

/// Evaluates the inequality on `trace`, querying `oracle` at `x^{N+1}` for
/// the final term.
pub fn certificate_lemma1<O: SubgradientOracle + ?Sized>(
    oracle: &O,
    trace: &RunTrace,
    v: &[f64],
    h_last: f64,
    x_star: &[f64],
    f_star: f64,
) -> Result<Certificate> {
    let n = trace.len();
    if n == 0 {
        return Err(Error::InvalidArgument("trace has no steps".into()));
    }
    if v.len() != n + 2 {
        return Err(Error::LengthMismatch {
            expected: n + 2,
            found: v.len(),
        });
    }
    if x_star.len() != trace.final_x.len() {
        return Err(Error::DimensionMismatch {
            expected: trace.final_x.len(),
            found: x_star.len(),
        });
    }
    check_multipliers(v, h_last)?;

    let (f_last, g_last) = oracle.value_and_subgradient(&trace.final_x)?;
    // 1-based entries k = 1..=N+1 live at position k - 1
    let mut f: Vec<f64> = trace.records.iter().map(|r| r.f).collect();
    let mut h: Vec<f64> = trace.records.iter().map(|r| r.h).collect();
    let mut g_sq: Vec<f64> = trace.records.iter().map(|r| norm_sq(&r.g)).collect();
    f.push(f_last);
    h.push(h_last);
    g_sq.push(norm_sq(&g_last));

    let mut lhs = 0.0;
    let mut rhs = 0.5 * v[0] * v[0] * distance(&trace.records[0].x, x_star).powi(2);
    let mut hv_sum = 0.0;
    let mut tail = 0.0; // Σ_{i>k} h_i v_i
    for k in (1..=n + 1).rev() {
        let hk = h[k - 1];
        let vk = v[k];
        let coef = hk * vk * v[k - 1] - (vk - v[k - 1]) * tail;
        lhs += coef * f[k - 1];
        rhs += 0.5 * hk * hk * vk * vk * g_sq[k - 1];
        tail += hk * vk;
        hv_sum += hk * vk;
    }
    lhs -= v[0] * hv_sum * f_star;

    Ok(Certificate {
        v: v.to_vec(),
        h_last,
        slack: rhs - lhs,
    })
}

/// The multipliers behind the Polyak-step rate:
/// `v_0 = √B / (R²(2N+1))^{1/4} · Π(4i²/(4i²−1))^{i/2}`, `v_k = v_0 a_k`,
/// `v_{N+1} = v_N`, and `h_{N+1} = 1/v_N²`.
pub fn polyak_certificate_multipliers(n: usize, b: f64, r: f64) -> Result<(Vec<f64>, f64)> {
    if !(b > 0.0 && b.is_finite() && r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "B = {b} and R = {r} must be positive"
        )));
    }
    let a = seq_a_stepweights(n)?.a;
    let ln_v0 = 0.5 * b.ln() - 0.25 * (r * r * (2 * n + 1) as f64).ln() + 0.5 * ln_polyak_growth(n);
    let v0 = ln_v0.exp();
    let mut v: Vec<f64> = a.iter().map(|ak| v0 * ak).collect();
    let vn = v[n];
    v.push(vn);
    Ok((v, 1.0 / (vn * vn)))
}
