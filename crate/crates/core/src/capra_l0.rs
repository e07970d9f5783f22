//! Capra conjugates and biconjugates of the l0 pseudonorm and of its level
//! set indicators.
//!
//! With `c` the Capra coupling and `|.|_(k)` the top-k norm (`|.|_(0) = 0`):
//!
//! ```text
//! (delta_{l0 <= k})^c   = |.|_(k)
//! (delta_{l0 <= k})^cc' = delta_{l0 <= k}
//! l0^c                  = max_{l = 0..d} ( |.|_(l) - l )
//! l0^cc'                = l0
//! ```
//!
//! The first three are closed forms. The last is evaluated numerically as a
//! supremum over `y`: along the ray `y = lambda x` the objective is
//!
//! ```text
//! phi(lambda) = lambda |x| - max(0, max_j lambda |x|_(j) - j)
//! ```
//!
//! which increases to `l0(x)` as `lambda -> +inf`. A geometric ladder of
//! `lambda` values plus seeded coordinate-ascent restarts gives a lower bound
//! of the biconjugate; the conjugacy inequality caps it by `l0(x)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::samples::geometric_ladder;
use crate::norms::{level_set_contains, topk_chain, topk_norm, NormError};
use crate::vector::{dot, l0, Vector};
use crate::xreal::XReal;

/// Absolute tolerance for "biconjugate equals l0" on integer targets.
pub const DEFAULT_INTEGER_TOL: f64 = 1e-4;
/// Relative gap below which two magnitudes count as tied.
pub const TIE_REL_GAP: f64 = 1e-9;
/// Tolerance on `|x| = 1` for points expected on the unit sphere.
pub const SPHERE_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CapraError {
    #[error("the ray construction needs a nonzero vector")]
    ZeroVector,
    #[error("lambda must be positive, got {0}")]
    NonPositiveLambda(f64),
    #[error("point is not on the unit sphere: |x| = {0}")]
    NotOnSphere(f64),
    #[error(transparent)]
    Norm(#[from] NormError),
}

/// Parameters of the ray + restart search for `sup_y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchParams {
    pub lambda_max: f64,
    pub restarts: usize,
    pub seed: u64,
    /// Coordinate ascent stops when the step falls below
    /// `min_step_rel * max(1, |y|)`.
    pub min_step_rel: f64,
    /// Objective evaluations allowed per restart.
    pub max_evals: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            lambda_max: 1e6,
            restarts: 32,
            seed: 0,
            min_step_rel: 1e-10,
            max_evals: 4000,
        }
    }
}

/// Closed form against numerical value for one conjugate evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjugateReport {
    pub input: Vector,
    pub function: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub closed_form: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<f64>,
    /// `|closed_form - oracle|`, present whenever `oracle` is.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    pub samples: usize,
    /// Near-tied magnitudes make the `lambda -> inf` limit slow; such inputs
    /// are flagged rather than failed.
    pub ill_conditioned: bool,
}

impl ConjugateReport {
    pub fn new(
        input: Vector,
        function: impl Into<String>,
        k: Option<usize>,
        closed_form: f64,
        oracle: Option<f64>,
        samples: usize,
    ) -> Self {
        let ill_conditioned = has_near_ties(&input);
        ConjugateReport {
            gap: oracle.map(|o| (closed_form - o).abs()),
            input,
            function: function.into(),
            k,
            closed_form,
            oracle,
            samples,
            ill_conditioned,
        }
    }
}

/// True when two nonzero magnitudes of `x` agree to relative [`TIE_REL_GAP`].
pub fn has_near_ties(x: &Vector) -> bool {
    let mut mags: Vec<f64> = x
        .as_slice()
        .iter()
        .map(|v| v.abs())
        .filter(|&m| m > 0.0)
        .collect();
    mags.sort_unstable_by(|a, b| b.total_cmp(a));
    mags.windows(2).any(|w| w[0] - w[1] < TIE_REL_GAP * w[0])
}

/// `(delta_{l0 <= k})^c (y) = |y|_(k)`, for either sign of the coupling.
pub fn conj_levelset_indicator(y: &Vector, k: usize) -> Result<f64, CapraError> {
    Ok(topk_norm(y, k)?)
}

/// `(delta_{l0 <= k})^cc' (x)`: `0` on the level set, `+inf` off it.
pub fn biconj_levelset_indicator(x: &Vector, k: usize, rel_tol: f64) -> Result<XReal, CapraError> {
    Ok(if level_set_contains(x, k, rel_tol)? {
        XReal::ZERO
    } else {
        XReal::PosInf
    })
}

/// `l0^c (y) = max_{l = 0..d} ( |y|_(l) - l )`.
pub fn conj_l0(y: &Vector) -> f64 {
    topk_chain(y)
        .iter()
        .enumerate()
        .map(|(l, n)| n - l as f64)
        .fold(0.0, f64::max)
}

/// The value of the biconjugate objective on the ray `y = lambda x`:
/// `lambda |x| - max(0, max_j lambda |x|_(j) - j)`.
pub fn phi_ray(x: &Vector, lambda: f64) -> Result<f64, CapraError> {
    if x.is_zero() {
        return Err(CapraError::ZeroVector);
    }
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(CapraError::NonPositiveLambda(lambda));
    }
    let chain = topk_chain(x);
    let full = chain[x.dim()];
    let escape = chain
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, n)| lambda * n - j as f64)
        .fold(0.0, f64::max);
    Ok(lambda * full - escape)
}

/// Smallest gap `|x| - |x|_(j)` over `j < l0(x)`, the quantity that sets how
/// large `lambda` must be for `phi(lambda)` to reach `l0(x)`. `None` for
/// `x = 0`.
pub fn ray_gap(x: &Vector) -> Option<f64> {
    let l = l0(x, 0.0);
    if l == 0 {
        return None;
    }
    let chain = topk_chain(x);
    Some(chain[x.dim()] - chain[l - 1])
}

/// Which pairing the outer supremum uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pairing {
    /// `<x, y> / |x|`
    Capra,
    /// `<x, y>`
    Fenchel,
}

/// Outcome of the ray + restart search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchOutcome {
    pub value: f64,
    /// Maximizing dual point found.
    pub argmax: Vector,
    /// `(lambda, objective at lambda x)` for each ladder rung.
    pub ladder: Vec<(f64, f64)>,
    /// Which restart produced `value`, `None` when the ladder did.
    pub best_restart: Option<usize>,
    pub evaluations: usize,
}

fn objective(pairing: Pairing, x: &Vector, x_norm: f64, y: &Vector) -> f64 {
    let pair = match pairing {
        Pairing::Capra => dot(x.as_slice(), y.as_slice()) / x_norm,
        Pairing::Fenchel => dot(x.as_slice(), y.as_slice()),
    };
    pair - conj_l0(y)
}

/// Coordinate ascent with a shrinking step. Returns the final point, its
/// value and the number of evaluations.
fn coordinate_ascent(
    f: impl Fn(&Vector) -> f64,
    start: Vector,
    params: &SearchParams,
) -> (Vector, f64, usize) {
    let mut y = start.into_inner();
    let mut best = f(&Vector::new(y.clone()).expect("finite start"));
    let mut evals = 1;
    let mut step = 0.5 * (y.iter().map(|v| v * v).sum::<f64>().sqrt()).max(1.0);
    'outer: loop {
        let scale = y.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
        if step < params.min_step_rel * scale {
            break;
        }
        let mut improved = false;
        for i in 0..y.len() {
            for dir in [1.0, -1.0] {
                if evals >= params.max_evals {
                    break 'outer;
                }
                let old = y[i];
                y[i] = old + dir * step;
                let cand = Vector::new(y.clone()).expect("finite step");
                let v = f(&cand);
                evals += 1;
                if v > best {
                    best = v;
                    improved = true;
                    break;
                }
                y[i] = old;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (Vector::new(y).expect("finite iterate"), best, evals)
}

fn search(x: &Vector, pairing: Pairing, params: &SearchParams) -> SearchOutcome {
    let x_norm = x.norm();
    let f = |y: &Vector| objective(pairing, x, x_norm, y);

    let mut ladder = Vec::new();
    let mut best_value = f64::NEG_INFINITY;
    let mut best_lambda = 1.0;
    for lambda in geometric_ladder(params.lambda_max) {
        let value = match pairing {
            Pairing::Capra => phi_ray(x, lambda).expect("x != 0 and lambda > 0"),
            Pairing::Fenchel => f(&x.scale(lambda)),
        };
        ladder.push((lambda, value));
        if value > best_value {
            best_value = value;
            best_lambda = lambda;
        }
    }
    let ladder_best = x.scale(best_lambda);
    let mut evaluations = ladder.len();

    // Restart 0 polishes the best ladder point; the others start from
    // gaussian directions at log-uniform scales up to lambda_max.
    let restarts: Vec<(Vector, f64, usize)> = (0..params.restarts)
        .into_par_iter()
        .map(|r| {
            let start = if r == 0 {
                ladder_best.clone()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
                rng.set_stream(r as u64);
                let g: Vec<f64> = (0..x.dim()).map(|_| StandardNormal.sample(&mut rng)).collect();
                let scale = params
                    .lambda_max
                    .max(1.0)
                    .powf(rng.random::<f64>());
                let g = Vector::new(g).expect("gaussian draws are finite");
                let n = g.norm().max(f64::MIN_POSITIVE);
                g.scale(scale / n)
            };
            coordinate_ascent(f, start, params)
        })
        .collect();

    let mut argmax = ladder_best;
    let mut best_restart = None;
    // Deterministic reduction keyed by (value, restart index): first index
    // wins ties.
    for (r, (y, value, evals)) in restarts.into_iter().enumerate() {
        evaluations += evals;
        if value > best_value {
            best_value = value;
            argmax = y;
            best_restart = Some(r);
        }
    }
    SearchOutcome {
        value: best_value,
        argmax,
        ladder,
        best_restart,
        evaluations,
    }
}

/// The Capra biconjugate of l0 at `x`, evaluated by the ray + restart search.
pub fn biconj_l0(x: &Vector, params: &SearchParams) -> f64 {
    biconj_l0_search(x, params).map_or(0.0, |s| s.value)
}

/// Full search record for [`biconj_l0`]; `None` for `x = 0`, where the
/// biconjugate is `0` (attained at `y = 0`, with every other term `<= 0`).
pub fn biconj_l0_search(x: &Vector, params: &SearchParams) -> Option<SearchOutcome> {
    if x.is_zero() {
        None
    } else {
        Some(search(x, Pairing::Capra, params))
    }
}

/// [`biconj_l0`] against `l0(x)`.
pub fn biconj_l0_report(x: &Vector, params: &SearchParams) -> ConjugateReport {
    let (value, samples) = match biconj_l0_search(x, params) {
        Some(s) => (s.value, s.evaluations),
        None => (0.0, 1),
    };
    ConjugateReport::new(
        x.clone(),
        "biconjugate_l0",
        None,
        l0(x, 0.0) as f64,
        Some(value),
        samples,
    )
}

/// The Fenchel conjugate of `y -> max_l (|y|_(l) - l)` at a unit vector `x`,
/// which coincides with `l0(x)` on the sphere.
pub fn l0_on_sphere_via_fenchel(x: &Vector, params: &SearchParams) -> Result<f64, CapraError> {
    let n = x.norm();
    if (n - 1.0).abs() > SPHERE_TOL {
        return Err(CapraError::NotOnSphere(n));
    }
    Ok(search(x, Pairing::Fenchel, params).value)
}

/// `l0^c (y)` in closed form, optionally against a sampled value.
pub fn conj_l0_report(y: &Vector, grid: Option<(f64, usize)>) -> ConjugateReport {
    ConjugateReport::new(
        y.clone(),
        "conjugate_l0",
        None,
        conj_l0(y),
        grid.map(|g| g.0),
        grid.map_or(0, |g| g.1),
    )
}

/// Primal points at which the sampled Capra conjugate of l0 attains the
/// closed form at `y`: the origin and, for each `l`, the restriction of `y`
/// to its `l` largest magnitudes, normalized.
pub fn conj_l0_maximizers(y: &Vector) -> Vec<Vector> {
    let d = y.dim();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| y.as_slice()[b].abs().total_cmp(&y.as_slice()[a].abs()));
    let mut out = vec![Vector::zeros(d)];
    let mut entries = vec![0.0; d];
    for &i in &order {
        if y.as_slice()[i] == 0.0 {
            break;
        }
        entries[i] = y.as_slice()[i];
        let v = Vector::new(entries.clone()).expect("finite");
        out.push(v.scale(1.0 / v.norm()));
    }
    out
}

/// A unit vector with exactly `k` nonzero entries within `O(eps)` of the
/// unit vector `x`, where `l0(x) <= k`: the first `k - l0(x)` zero
/// coordinates are set to `eps` and the result is renormalized.
pub fn level_curve_approximant(x: &Vector, k: usize, eps: f64) -> Result<Vector, CapraError> {
    let current = l0(x, 0.0);
    if k < current || k > x.dim() {
        return Err(NormError::KOutOfRange {
            k,
            min: current,
            max: x.dim(),
        }
        .into());
    }
    let mut entries = x.as_slice().to_vec();
    let mut missing = k - current;
    for e in entries.iter_mut() {
        if missing == 0 {
            break;
        }
        if *e == 0.0 {
            *e = eps;
            missing -= 1;
        }
    }
    let v = Vector::new(entries).expect("finite");
    Ok(v.scale(1.0 / v.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(e: &[f64]) -> Vector {
        Vector::new(e.to_vec()).unwrap()
    }

    fn quick() -> SearchParams {
        SearchParams {
            restarts: 4,
            ..SearchParams::default()
        }
    }

    #[test]
    fn levelset_conjugate_examples() {
        let y = v(&[3.0, 0.0, -4.0]);
        assert_eq!(conj_levelset_indicator(&y, 1).unwrap(), 4.0);
        assert_eq!(conj_levelset_indicator(&y, 0).unwrap(), 0.0);
        assert_eq!(conj_levelset_indicator(&y, 3).unwrap(), 5.0);
        assert!(conj_levelset_indicator(&y, 4).is_err());
    }

    #[test]
    fn levelset_biconjugate_examples() {
        let x = v(&[3.0, 0.0, -4.0]);
        assert_eq!(biconj_levelset_indicator(&x, 2, 1e-9).unwrap(), XReal::ZERO);
        assert_eq!(biconj_levelset_indicator(&x, 1, 1e-9).unwrap(), XReal::PosInf);
        assert_eq!(
            biconj_levelset_indicator(&v(&[0.0, 0.0]), 0, 1e-9).unwrap(),
            XReal::ZERO
        );
    }

    #[test]
    fn conj_l0_examples() {
        assert_eq!(conj_l0(&v(&[0.0, 0.0])), 0.0);
        assert_eq!(conj_l0(&v(&[2.0, 0.0])), 1.0);
        assert!((conj_l0(&v(&[10.0, 10.0])) - (200f64.sqrt() - 2.0)).abs() < 1e-12);
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi_ray(&v(&[1.0, 0.0]), 10.0).unwrap(), 1.0);
        let p = phi_ray(&v(&[0.6, 0.8]), 1000.0).unwrap();
        assert!((p - 2.0).abs() < 1e-9);
        assert!(matches!(
            phi_ray(&v(&[0.0, 0.0]), 1.0),
            Err(CapraError::ZeroVector)
        ));
        assert!(matches!(
            phi_ray(&v(&[1.0, 0.0]), 0.0),
            Err(CapraError::NonPositiveLambda(_))
        ));
    }

    #[test]
    fn phi_matches_rewritten_form() {
        // min{ lambda |x|_(l), min_{j<l} lambda(|x|_(l) - |x|_(j)) + j, l }
        let x = v(&[0.5, 0.0, -2.0, 1.0]);
        let chain = topk_chain(&x);
        let l = 3;
        for lambda in [0.1, 0.7, 1.0, 3.0, 50.0] {
            let mut m = (lambda * chain[l]).min(l as f64);
            for j in 1..l {
                m = m.min(lambda * (chain[l] - chain[j]) + j as f64);
            }
            assert!((phi_ray(&x, lambda).unwrap() - m).abs() < 1e-12, "lambda {lambda}");
        }
    }

    #[test]
    fn phi_increases_to_l0() {
        let x = v(&[0.3, -1.2, 0.0]);
        let mut prev = f64::NEG_INFINITY;
        for lambda in geometric_ladder(1e6) {
            let p = phi_ray(&x, lambda).unwrap();
            assert!(p >= prev - 1e-9);
            prev = p;
        }
        assert!((prev - 2.0).abs() < 1e-6);
    }

    #[test]
    fn biconjugate_examples() {
        assert_eq!(biconj_l0(&v(&[0.0, 0.0, 0.0]), &quick()), 0.0);
        let b = biconj_l0(&v(&[3.0, 0.0, -4.0]), &quick());
        assert!((b - 2.0).abs() < 1e-4, "{b}");
        let s = 1.0 / 3f64.sqrt();
        let b = biconj_l0(&v(&[s, s, s]), &quick());
        assert!((b - 3.0).abs() < 1e-4, "{b}");
    }

    #[test]
    fn search_is_deterministic() {
        let x = v(&[0.4, -0.1, 0.9]);
        let p = SearchParams {
            seed: 11,
            restarts: 6,
            ..SearchParams::default()
        };
        let a = biconj_l0_search(&x, &p).unwrap();
        let b = biconj_l0_search(&x, &p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sphere_examples() {
        let p = quick();
        assert!((l0_on_sphere_via_fenchel(&v(&[1.0, 0.0, 0.0]), &p).unwrap() - 1.0).abs() < 1e-4);
        assert!((l0_on_sphere_via_fenchel(&v(&[0.6, 0.8, 0.0]), &p).unwrap() - 2.0).abs() < 1e-4);
        let h = v(&[0.5, 0.5, 0.5, 0.5]);
        assert!((l0_on_sphere_via_fenchel(&h, &p).unwrap() - 4.0).abs() < 1e-4);
        assert!(matches!(
            l0_on_sphere_via_fenchel(&v(&[1.0, 1.0]), &p),
            Err(CapraError::NotOnSphere(_))
        ));
    }

    #[test]
    fn maximizers_reach_the_closed_form() {
        let y = v(&[0.5, -3.0, 0.0, 2.0]);
        let pts = conj_l0_maximizers(&y);
        assert_eq!(pts.len(), 4);
        let c = crate::engine::capra_coupling();
        let best = pts
            .iter()
            .map(|x| c.eval(x, &y).finite().unwrap() - l0(x, 0.0) as f64)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((best - conj_l0(&y)).abs() < 1e-12);
    }

    #[test]
    fn ties_are_flagged() {
        assert!(has_near_ties(&v(&[1.0, -1.0, 0.0])));
        assert!(!has_near_ties(&v(&[1.0, 0.5, 0.0, 0.0])));
        let r = biconj_l0_report(&v(&[2.0, 2.0]), &quick());
        assert!(r.ill_conditioned);
        assert!(r.gap.unwrap() < 1e-4);
    }

    #[test]
    fn approximant_lands_on_level_curve() {
        let x = v(&[0.6, 0.0, 0.8, 0.0]);
        let mut prev = f64::INFINITY;
        for p in 1..=8 {
            let eps = 10f64.powi(-p);
            let a = level_curve_approximant(&x, 4, eps).unwrap();
            assert_eq!(l0(&a, 0.0), 4);
            let dist = a.sub(&x).unwrap().norm();
            assert!(dist < prev);
            prev = dist;
        }
        assert!(prev < 1e-7);
        assert!(level_curve_approximant(&x, 1, 0.1).is_err());
    }

    #[test]
    fn ray_gap_examples() {
        assert_eq!(ray_gap(&v(&[0.0, 0.0])), None);
        assert_eq!(ray_gap(&v(&[3.0, 0.0, -4.0])), Some(1.0));
    }
}
