//! Products of ratios that control the Polyak-step rate constants.
//!
//! Every product is formed in log space.

use crate::error::{Error, Result};
use crate::linalg::log_product;

/// `4i² / (4i² − 1)`
pub(crate) fn wallis_ratio(i: usize) -> f64 {
    let s = 4.0 * (i as f64) * (i as f64);
    s / (s - 1.0)
}

/// `(2i + 1) / (2i)`
fn odd_over_even(i: usize) -> f64 {
    let i = i as f64;
    (2.0 * i + 1.0) / (2.0 * i)
}

fn product(terms: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    let terms: Vec<(f64, f64)> = terms.into_iter().collect();
    // every base here is a ratio of positive integers
    log_product(&terms).expect("positive bases").exp()
}

/// `(2k + 1)/(2k) · Π_{i=k+1}^N (4i² − 1)/(4i²)`, which lies in `(1, 2)` for
/// `1 ≤ k < N`.
pub fn wallis_factor(k: usize, n: usize) -> Result<f64> {
    if k == 0 || k > n {
        return Err(Error::BadIndices { k, n });
    }
    let head = odd_over_even(k).ln();
    let tail: f64 = (k + 1..=n).map(|i| -wallis_ratio(i).ln()).sum();
    Ok((head + tail).exp())
}

/// Step-weight sequences of the Polyak rate analysis for horizon `N`.
///
/// `a[k]` holds `a_k` for `k = 0..=N`; `p`, `q`, `y` hold entries `1..=N`
/// at positions `0..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SequencePack {
    pub n: usize,
    pub a: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub y: Vec<f64>,
}

/// `a_k = Π_{i=N+1−k}^N (2i+1)/(2i) · (4i²/(4i²−1))^{N+1−i−k}`, `a_0 = 1`,
/// together with
/// `p_k = Π_{i=N+1−k}^N (2i+1)/(2i)`,
/// `q_k = Π_{i=N+2−k}^N 2i/(2i−1)` and
/// `y_k = Π_{i=N+1−k}^N (4i²/(4i²−1))^{i+k−N−1}`.
pub fn seq_a_stepweights(n: usize) -> Result<SequencePack> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    let nf = n as i64;
    let mut a = vec![1.0];
    let mut p = Vec::with_capacity(n);
    let mut q = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for k in 1..=n {
        let lo = n + 1 - k;
        let kf = k as i64;
        a.push(product((lo..=n).flat_map(|i| {
            let e = (nf + 1 - i as i64 - kf) as f64;
            [(odd_over_even(i), 1.0), (wallis_ratio(i), e)]
        })));
        p.push(product((lo..=n).map(|i| (odd_over_even(i), 1.0))));
        q.push(product((lo + 1..=n).map(|i| {
            let i = i as f64;
            (2.0 * i / (2.0 * i - 1.0), 1.0)
        })));
        y.push(product(
            (lo..=n).map(|i| (wallis_ratio(i), (i as i64 + kf - nf - 1) as f64)),
        ));
    }
    Ok(SequencePack { n, a, p, q, y })
}

/// `ln Π_{i=1}^N (4i²/(4i²−1))^i`, the growth constant of the Polyak rate.
pub fn ln_polyak_growth(n: usize) -> f64 {
    (1..=n).map(|i| i as f64 * wallis_ratio(i).ln()).sum()
}

/// `a_{4N} / a_N` for `a_N = Π_{i=1}^N (4i²/(4i²−1))^i`, which tends to
/// `4^{1/4} = √2` since `a_N` grows like `N^{1/4}`.
pub fn growth_ratio_check(n: usize) -> Result<f64> {
    if n < 10 {
        return Err(Error::InvalidArgument(format!(
            "N = {n} must be at least 10"
        )));
    }
    Ok((ln_polyak_growth(4 * n) - ln_polyak_growth(n)).exp())
}
