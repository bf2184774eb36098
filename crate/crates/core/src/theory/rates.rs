//! Closed-form last-iterate rates.

use super::sequences::ln_polyak_growth;
use crate::error::{Error, Result};
use crate::linalg::log_product;

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{name} = {v} must be positive"
        )))
    }
}

/// Bound for the Polyak step after `N` steps:
/// `BR/√(2N+1) · Π_{i=1}^N (4i²/(4i²−1))^i`. Attained by
/// [`build_polyak_tight_instance`](super::build_polyak_tight_instance).
pub fn rate_polyak(n: usize, b: f64, r: f64) -> Result<f64> {
    check_positive("B", b)?;
    check_positive("R", r)?;
    let ln = ln_polyak_growth(n) - 0.5 * ((2 * n + 1) as f64).ln();
    Ok(b * r * ln.exp())
}

/// `BR/√(N+1)`, shared by the adaptive Polyak, momentum and pre-sized
/// schedules; no black-box method can do better on this class.
pub fn rate_optimal(n: usize, b: f64, r: f64) -> Result<f64> {
    check_positive("B", b)?;
    check_positive("R", r)?;
    Ok(b * r / ((n + 1) as f64).sqrt())
}

/// `d_{C₁}(x^{N+1}) ≤ R (2N/(2N+1))^N / √(2N+1)` for alternating projection.
///
/// The factor `(2N/(2N+1))^N` falls from `2/3` at `N = 1` toward `1/√e`, so
/// replacing it by `4/9` does not give an upper bound.
pub fn rate_altproj(n: usize, r: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "N must be at least 1 for alternating projection".into(),
        ));
    }
    check_positive("R", r)?;
    let two_n = (2 * n) as f64;
    let ln = log_product(&[(two_n / (two_n + 1.0), n as f64), (two_n + 1.0, -0.5)])?;
    Ok(r * ln.exp())
}
