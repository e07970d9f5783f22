//! Top-k (2-k-symmetric gauge) norms, k-support norms and the level sets of
//! the l0 pseudonorm.
//!
//! `topk_norm(x, k)` is the largest Euclidean norm of a restriction `x_K`
//! with `|K| <= k`; it is attained on the `k` largest magnitudes. Its dual
//! norm is the k-support norm. Between them sits the l0 characterization
//!
//! ```text
//! l0(x) <= k  <=>  topk_norm(x, k) == |x|
//! ```
//!
//! which is what [`level_set_contains`] and [`l0_via_norm_chain`] evaluate,
//! with a relative tolerance standing in for the exact equality.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vector::{project, SupportSet, Vector, VectorError};

/// Default relative tolerance for `topk_norm(x, k) == |x|`.
pub const DEFAULT_REL_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum NormError {
    #[error("k = {k} out of range {min}..={max}")]
    KOutOfRange { k: usize, min: usize, max: usize },
    #[error(transparent)]
    Vector(#[from] VectorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "k", rename_all = "snake_case")]
pub enum NormKind {
    Euclidean,
    /// `k = 0` is the constant zero functional.
    TopK(usize),
    KSupport(usize),
}

impl NormKind {
    pub fn eval(&self, x: &Vector) -> Result<f64, NormError> {
        match *self {
            NormKind::Euclidean => Ok(x.norm()),
            NormKind::TopK(k) => topk_norm(x, k),
            NormKind::KSupport(k) => ksupport_norm(x, k),
        }
    }
}

fn check_k(k: usize, min: usize, d: usize) -> Result<(), NormError> {
    if k < min || k > d {
        Err(NormError::KOutOfRange { k, min, max: d })
    } else {
        Ok(())
    }
}

/// Squares of the entries, largest first.
pub(crate) fn sorted_squares(x: &[f64]) -> Vec<f64> {
    let mut squares: Vec<f64> = x.iter().map(|v| v * v).collect();
    squares.sort_unstable_by(|a, b| b.total_cmp(a));
    squares
}

/// `topk_norm(x, j)` for every `j` in `0..=d`, sharing one sort.
///
/// Entry `j` is bitwise identical to `topk_norm(x, j)`.
pub fn topk_chain(x: &Vector) -> Vec<f64> {
    let squares = sorted_squares(x.as_slice());
    let mut out = Vec::with_capacity(squares.len() + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for s in squares {
        acc += s;
        out.push(acc.sqrt());
    }
    out
}

/// The 2-k-symmetric gauge norm: square root of the sum of the `k` largest
/// squared magnitudes. `k = 0` gives 0.
pub fn topk_norm(x: &Vector, k: usize) -> Result<f64, NormError> {
    check_k(k, 0, x.dim())?;
    let squares = sorted_squares(x.as_slice());
    Ok(squares[..k].iter().fold(0.0, |acc, s| acc + s).sqrt())
}

/// The k-support norm, dual of [`topk_norm`], for `1 <= k <= d`.
///
/// With magnitudes sorted as `z_1 >= .. >= z_d` and `z_0 = +inf`, there is an
/// index `r` in `0..k` with
///
/// ```text
/// z_{k-r-1} > (z_{k-r} + .. + z_d) / (r + 1) >= z_{k-r}
/// ```
///
/// and then `|x|_sp^2 = z_1^2 + .. + z_{k-r-1}^2 + (z_{k-r} + .. + z_d)^2 / (r + 1)`.
/// `k = 1` is the l1 norm and `k = d` the Euclidean norm; both are returned
/// directly.
pub fn ksupport_norm(x: &Vector, k: usize) -> Result<f64, NormError> {
    let d = x.dim();
    check_k(k, 1, d)?;
    if k == d {
        return Ok(x.norm());
    }
    let mut mags: Vec<f64> = x.as_slice().iter().map(|v| v.abs()).collect();
    mags.sort_unstable_by(|a, b| b.total_cmp(a));
    if k == 1 {
        return Ok(mags.iter().fold(0.0, |acc, m| acc + m));
    }

    // tail_sums[h] = z[h] + .. + z[d-1] (0-based)
    let mut tail_sums = vec![0.0; d + 1];
    for h in (0..d).rev() {
        tail_sums[h] = tail_sums[h + 1] + mags[h];
    }
    let value_sq = |head: usize| {
        let r = (k - 1 - head) as f64;
        let head_sq = mags[..head].iter().fold(0.0, |acc, m| acc + m * m);
        head_sq + tail_sums[head] * tail_sums[head] / (r + 1.0)
    };

    // Scan head sizes k-1, k-2, .., 0 (that is r = 0, 1, .., k-1). Ties make
    // neighbouring r equally valid, so the comparisons are non-strict.
    let mut best: Option<(f64, usize)> = None;
    for head in (0..k).rev() {
        let r = (k - 1 - head) as f64;
        let avg = tail_sums[head] / (r + 1.0);
        let upper_ok = head == 0 || mags[head - 1] >= avg;
        let lower_ok = avg >= mags[head];
        if upper_ok && lower_ok {
            return Ok(value_sq(head).sqrt());
        }
        let violation = (if upper_ok { 0.0 } else { avg - mags[head - 1] })
            + (if lower_ok { 0.0 } else { mags[head] - avg });
        if best.is_none_or(|(v, _)| violation < v) {
            best = Some((violation, head));
        }
    }
    // Only reachable through rounding at a boundary; the least-violated
    // split is then within rounding of the exact one.
    let (_, head) = best.expect("k >= 1 gives at least one candidate");
    Ok(value_sq(head).sqrt())
}

/// `min { j : topk_norm(x, j) == |x| }` after zeroing entries with
/// `|x_i| <= zero_tol`, equality taken at relative tolerance `rel_tol`.
pub fn l0_via_norm_chain(x: &Vector, zero_tol: f64, rel_tol: f64) -> usize {
    let cleaned: Vec<f64> = x
        .as_slice()
        .iter()
        .map(|&v| if v.abs() > zero_tol { v } else { 0.0 })
        .collect();
    let cleaned = Vector::new(cleaned).expect("same shape as a valid vector");
    let chain = topk_chain(&cleaned);
    let full = chain[cleaned.dim()];
    chain
        .iter()
        .position(|&n| n >= (1.0 - rel_tol) * full)
        .expect("j = d always satisfies the test")
}

/// Membership of `x` in the level set `{ l0 <= k }`, tested as
/// `topk_norm(x, k) >= (1 - rel_tol) |x|`.
pub fn level_set_contains(x: &Vector, k: usize, rel_tol: f64) -> Result<bool, NormError> {
    let top = topk_norm(x, k)?;
    Ok(top >= (1.0 - rel_tol) * x.norm())
}

/// Support function of `B_K = { x : supp(x) in K, |x| <= 1 }`, that is `|y_K|`.
#[allow(non_snake_case)]
pub fn support_fn_ball_K(y: &Vector, k: &SupportSet) -> Result<f64, NormError> {
    Ok(project(y, k)?.norm())
}
