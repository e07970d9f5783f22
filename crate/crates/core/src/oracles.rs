//! Brute-force reference computations.
//!
//! Nothing here calls into the norm code it is used to check: subset norms
//! are re-derived from the entries, dual norms are maximized directly, and
//! the Moreau laws are evaluated case by case over a probe set.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use thiserror::Error;

use crate::norms::{ksupport_norm, level_set_contains, NormError};
use crate::vector::{SupportSet, Vector};
use crate::xreal::{inf_fold, sup_fold, XReal};

/// Largest dimension for exhaustive subset enumeration.
pub const MAX_ENUM_DIM: usize = 20;
/// Largest dimension for the dual-norm and hull oracles.
pub const MAX_DUAL_DIM: usize = 6;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("dimension {dim} exceeds the oracle limit {max}")]
    DimensionGuard { dim: usize, max: usize },
    #[error("k = {k} out of range {min}..={max}")]
    KOutOfRange { k: usize, min: usize, max: usize },
    #[error("point is not on the unit sphere: |x| = {0}")]
    NotOnSphere(f64),
    #[error(transparent)]
    Norm(#[from] NormError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    Subset(SupportSet),
    Point(Vector),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub value: f64,
    pub witness: Witness,
    pub evaluations: usize,
    /// Subsets are visited in lexicographic order and the first maximizer
    /// is kept.
    pub tie_break: &'static str,
}

const FIRST_LEXICOGRAPHIC: &str = "first-lexicographic";

fn guard(dim: usize, max: usize) -> Result<(), OracleError> {
    if dim > max {
        Err(OracleError::DimensionGuard { dim, max })
    } else {
        Ok(())
    }
}

/// `|x_K|` with the squares accumulated largest first.
fn subset_norm(x: &[f64], subset: &[usize]) -> f64 {
    let mut squares: Vec<f64> = subset.iter().map(|&i| x[i] * x[i]).collect();
    squares.sort_unstable_by(|a, b| b.total_cmp(a));
    squares.iter().fold(0.0, |acc, s| acc + s).sqrt()
}

/// `max_{|K| = k} |x_K|` by enumerating every `k`-subset.
pub fn topk_norm_bruteforce(x: &Vector, k: usize) -> Result<OracleResult, OracleError> {
    let d = x.dim();
    guard(d, MAX_ENUM_DIM)?;
    if k > d {
        return Err(OracleError::KOutOfRange { k, min: 0, max: d });
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut evaluations = 0;
    for subset in (0..d).combinations(k) {
        let value = subset_norm(x.as_slice(), &subset);
        evaluations += 1;
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, subset));
        }
    }
    let (value, subset) = best.expect("at least one k-subset");
    Ok(OracleResult {
        value,
        witness: Witness::Subset(SupportSet::from_indices(d, &subset).expect("indices < d")),
        evaluations,
        tie_break: FIRST_LEXICOGRAPHIC,
    })
}

/// Seeded starts for the interior ascent route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualBudget {
    pub starts: usize,
    pub seed: u64,
}

impl Default for DualBudget {
    fn default() -> Self {
        DualBudget { starts: 3, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualNormOracle {
    pub result: OracleResult,
    /// Best `|x_K|` over `k`-subsets: `sup <x, y>` over the slices `B_K`.
    pub route_subsets: f64,
    /// Best value reached by the interior ascent.
    pub route_ascent: f64,
}

/// `sup { <x, y> : |y|_(k) <= 1 }`, the k-support norm of `x`, by two routes:
///
/// * the slices `B_K = { y : supp(y) in K, |y| <= 1 }`, which lie in the
///   top-k ball and give `max_K |x_K|`;
/// * a log-barrier Newton ascent over the top-k ball written as the
///   intersection of the cylinders `sum_{i in K} y_i^2 <= 1`, `|K| = k`.
///
/// Every iterate is feasible, so both routes are lower bounds; the barrier
/// path ends within `1e-12 |x|_1` of the supremum.
pub fn dual_norm_bruteforce(
    x: &Vector,
    k: usize,
    budget: DualBudget,
) -> Result<DualNormOracle, OracleError> {
    let d = x.dim();
    guard(d, MAX_DUAL_DIM)?;
    if k < 1 || k > d {
        return Err(OracleError::KOutOfRange { k, min: 1, max: d });
    }
    let xs = x.as_slice();
    let subsets: Vec<Vec<usize>> = (0..d).combinations(k).collect();

    let mut route_subsets = f64::NEG_INFINITY;
    let mut subset_witness = Vector::zeros(d);
    for s in &subsets {
        let n = subset_norm(xs, s);
        if n > route_subsets {
            route_subsets = n;
            let mut y = vec![0.0; d];
            if n > 0.0 {
                for &i in s {
                    y[i] = xs[i] / n;
                }
            }
            subset_witness = Vector::new(y).expect("finite");
        }
    }
    let mut evaluations = subsets.len();

    let mut route_ascent = f64::NEG_INFINITY;
    let mut ascent_witness = Vector::zeros(d);
    for start in 0..budget.starts.max(1) {
        let y0 = if start == 0 {
            vec![0.0; d]
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
            rng.set_stream(start as u64);
            let g: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
            let load = max_cylinder_load(&g, &subsets);
            // land strictly inside: max load 1/4
            let s = if load > 0.0 { 0.5 / load.sqrt() } else { 0.0 };
            g.iter().map(|v| v * s).collect()
        };
        let (y, evals) = barrier_ascent(xs, &subsets, y0);
        evaluations += evals;
        let value: f64 = xs.iter().zip(&y).map(|(a, b)| a * b).sum();
        if value > route_ascent {
            route_ascent = value;
            ascent_witness = Vector::new(y).expect("finite iterate");
        }
    }

    let (value, witness) = if route_ascent > route_subsets {
        (route_ascent, ascent_witness)
    } else {
        (route_subsets, subset_witness)
    };
    Ok(DualNormOracle {
        result: OracleResult {
            value,
            witness: Witness::Point(witness),
            evaluations,
            tie_break: FIRST_LEXICOGRAPHIC,
        },
        route_subsets,
        route_ascent,
    })
}

/// `max_K sum_{i in K} y_i^2`, i.e. the squared top-k norm from the
/// cylinder description.
fn max_cylinder_load(y: &[f64], subsets: &[Vec<usize>]) -> f64 {
    subsets
        .iter()
        .map(|s| s.iter().map(|&i| y[i] * y[i]).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Maximizes `<x, y>` over `{ sum_{i in K} y_i^2 <= 1 for all K }` from a
/// strictly feasible start. Returns the last iterate and the number of
/// Newton steps taken.
fn barrier_ascent(x: &[f64], subsets: &[Vec<usize>], start: Vec<f64>) -> (Vec<f64>, usize) {
    let d = x.len();
    let m = subsets.len() as f64;
    let scale: f64 = x.iter().map(|v| v.abs()).sum();
    if scale == 0.0 {
        return (start, 0);
    }
    let slacks = |y: &[f64]| -> Option<Vec<f64>> {
        let s: Vec<f64> = subsets
            .iter()
            .map(|k| 1.0 - k.iter().map(|&i| y[i] * y[i]).sum::<f64>())
            .collect();
        s.iter().all(|&v| v > 0.0).then_some(s)
    };
    let merit = |y: &[f64], t: f64| -> Option<f64> {
        let s = slacks(y)?;
        let lin: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
        Some(t * lin + s.iter().map(|v| v.ln()).sum::<f64>())
    };

    let mut y = start;
    let mut steps = 0;
    // Central path: the gap to the optimum is at most m / t.
    let mut t = m / scale;
    let target_gap = 1e-12 * scale;
    loop {
        for _ in 0..100 {
            let s = slacks(&y).expect("iterates stay strictly feasible");
            let mut grad = DVector::from_iterator(d, x.iter().map(|v| t * v));
            let mut neg_hess = DMatrix::<f64>::zeros(d, d);
            for (subset, &sk) in subsets.iter().zip(&s) {
                for &i in subset {
                    grad[i] -= 2.0 * y[i] / sk;
                    neg_hess[(i, i)] += 2.0 / sk;
                    for &j in subset {
                        neg_hess[(i, j)] += 4.0 * y[i] * y[j] / (sk * sk);
                    }
                }
            }
            let Some(chol) = neg_hess.cholesky() else {
                break;
            };
            let step = chol.solve(&grad);
            let decrement = grad.dot(&step);
            steps += 1;
            if decrement < 1e-14 {
                break;
            }
            let current = merit(&y, t).expect("feasible");
            let mut alpha = 1.0;
            let mut moved = false;
            while alpha > 1e-12 {
                let cand: Vec<f64> = y.iter().zip(step.iter()).map(|(a, b)| a + alpha * b).collect();
                if let Some(v) = merit(&cand, t) {
                    if v >= current + 0.25 * alpha * decrement {
                        y = cand;
                        moved = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !moved {
                break;
            }
        }
        if m / t < target_gap {
            break;
        }
        t *= 8.0;
    }
    (y, steps)
}

/// Outcome of [`hull_membership_sampled`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HullMembership {
    /// `|x|_sp(k) <= 1 + tol`: membership in the k-support unit ball.
    pub member: bool,
    /// `l0(x) <= k` via the top-k characterization.
    pub level_set: bool,
    /// Largest `<x, y>` over sampled unit vectors `y` of the top-k norm.
    pub sampled_support: f64,
    /// A sampled `y` separates `x` from the ball.
    pub separated: bool,
}

impl HullMembership {
    /// On the sphere the two memberships coincide, and a separating sample
    /// can only exist for non-members.
    pub fn consistent(&self) -> bool {
        self.member == self.level_set && !(self.member && self.separated)
    }
}

/// Tests a unit vector `x` for membership in the k-support unit ball and
/// cross-checks against the l0 level set and a sampled support test.
pub fn hull_membership_sampled(
    x: &Vector,
    k: usize,
    n_samples: usize,
    seed: u64,
    tol: f64,
) -> Result<HullMembership, OracleError> {
    let d = x.dim();
    guard(d, MAX_DUAL_DIM)?;
    let n = x.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt();
    if (n - 1.0).abs() > 1e-9 {
        return Err(OracleError::NotOnSphere(n));
    }
    let member = ksupport_norm(x, k)? <= 1.0 + tol;
    let level_set = level_set_contains(x, k, crate::norms::DEFAULT_REL_TOL)?;

    let subsets: Vec<Vec<usize>> = (0..d).combinations(k).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sampled_support = f64::NEG_INFINITY;
    for _ in 0..n_samples {
        let g: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        let load = max_cylinder_load(&g, &subsets).sqrt();
        if load == 0.0 {
            continue;
        }
        let v: f64 = x.as_slice().iter().zip(&g).map(|(a, b)| a * b / load).sum();
        sampled_support = sampled_support.max(v);
    }
    Ok(HullMembership {
        member,
        level_set,
        sampled_support,
        separated: sampled_support > 1.0 + tol,
    })
}

/// One identity or inequality of the Moreau additions checked over the
/// probe set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LawCheck {
    pub law: &'static str,
    pub cases: usize,
    pub violations: usize,
    /// First few failing cases, for diagnostics.
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MoreauLawTable {
    pub probes: Vec<XReal>,
    pub laws: Vec<LawCheck>,
}

impl MoreauLawTable {
    pub fn total_violations(&self) -> usize {
        self.laws.iter().map(|l| l.violations).sum()
    }

    pub fn total_cases(&self) -> usize {
        self.laws.iter().map(|l| l.cases).sum()
    }
}

/// The probe set `{-inf, -1, 0, 1, +inf}`.
pub fn probes() -> Vec<XReal> {
    vec![
        XReal::NegInf,
        XReal::Finite(-1.0),
        XReal::Finite(0.0),
        XReal::Finite(1.0),
        XReal::PosInf,
    ]
}

struct LawBuilder {
    law: &'static str,
    cases: usize,
    failures: Vec<String>,
    violations: usize,
}

impl LawBuilder {
    fn new(law: &'static str) -> Self {
        LawBuilder {
            law,
            cases: 0,
            failures: Vec::new(),
            violations: 0,
        }
    }

    fn check(&mut self, ok: bool, case: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.violations += 1;
            if self.failures.len() < 5 {
                self.failures.push(case());
            }
        }
    }

    fn finish(self) -> LawCheck {
        LawCheck {
            law: self.law,
            cases: self.cases,
            violations: self.violations,
            failures: self.failures,
        }
    }
}

/// Nonempty subfamilies of the probe set, as the index sets of the sup/inf
/// laws.
fn families(p: &[XReal]) -> Vec<Vec<XReal>> {
    (1u32..(1 << p.len()))
        .map(|mask| {
            p.iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, v)| *v)
                .collect()
        })
        .collect()
}

/// Evaluates every law of the lower and upper additions over
/// `{-inf, -1, 0, 1, +inf}` (pairs, triples, quadruples, and nonempty
/// subfamilies for the sup/inf laws).
pub fn moreau_law_table() -> MoreauLawTable {
    let p = probes();
    let fam = families(&p);
    let mut laws = Vec::new();
    let lo = |a: XReal, b: XReal| a.low_add(b);
    let up = |a: XReal, b: XReal| a.upp_add(b);

    let mut l = LawBuilder::new("lower_addition_mixed_infinities");
    l.check(
        lo(XReal::PosInf, XReal::NegInf) == XReal::NegInf
            && lo(XReal::NegInf, XReal::PosInf) == XReal::NegInf,
        || "(+inf) + (-inf)".into(),
    );
    laws.push(l.finish());

    let mut l = LawBuilder::new("upper_addition_mixed_infinities");
    l.check(
        up(XReal::PosInf, XReal::NegInf) == XReal::PosInf
            && up(XReal::NegInf, XReal::PosInf) == XReal::PosInf,
        || "(+inf) + (-inf)".into(),
    );
    laws.push(l.finish());

    let mut l = LawBuilder::new("extends_usual_addition");
    for &u in &p {
        for &v in &p {
            if let (Some(a), Some(b)) = (u.finite(), v.finite()) {
                let s = XReal::Finite(a + b);
                l.check(lo(u, v) == s && up(u, v) == s, || format!("{u}, {v}"));
            } else if !(u == XReal::PosInf && v == XReal::NegInf
                || u == XReal::NegInf && v == XReal::PosInf)
            {
                let s = XReal::from_f64(u.to_f64() + v.to_f64());
                l.check(lo(u, v) == s && up(u, v) == s, || format!("{u}, {v}"));
            }
        }
    }
    laws.push(l.finish());

    let mut comm_lo = LawBuilder::new("lower_commutative");
    let mut comm_up = LawBuilder::new("upper_commutative");
    for &u in &p {
        for &v in &p {
            comm_lo.check(lo(u, v) == lo(v, u), || format!("{u}, {v}"));
            comm_up.check(up(u, v) == up(v, u), || format!("{u}, {v}"));
        }
    }
    laws.push(comm_lo.finish());
    laws.push(comm_up.finish());

    let mut assoc_lo = LawBuilder::new("lower_associative");
    let mut assoc_up = LawBuilder::new("upper_associative");
    for &u in &p {
        for &v in &p {
            for &w in &p {
                assoc_lo.check(lo(lo(u, v), w) == lo(u, lo(v, w)), || {
                    format!("{u}, {v}, {w}")
                });
                assoc_up.check(up(up(u, v), w) == up(u, up(v, w)), || {
                    format!("{u}, {v}, {w}")
                });
            }
        }
    }
    laws.push(assoc_lo.finish());
    laws.push(assoc_up.finish());

    let mut mono_lo = LawBuilder::new("lower_addition_monotone");
    let mut mono_up = LawBuilder::new("upper_addition_monotone");
    for &u in &p {
        for &u2 in p.iter().filter(|&&u2| u <= u2) {
            for &v in &p {
                for &v2 in p.iter().filter(|&&v2| v <= v2) {
                    mono_lo.check(lo(u, v) <= lo(u2, v2), || format!("{u}<={u2}, {v}<={v2}"));
                    mono_up.check(up(u, v) <= up(u2, v2), || format!("{u}<={u2}, {v}<={v2}"));
                }
            }
        }
    }
    laws.push(mono_lo.finish());
    laws.push(mono_up.finish());

    let mut minus_lo = LawBuilder::new("lower_addition_of_negatives");
    let mut minus_up = LawBuilder::new("upper_addition_of_negatives");
    for &u in &p {
        for &v in &p {
            minus_lo.check(lo(-u, -v) <= -lo(u, v), || format!("{u}, {v}"));
            minus_up.check(up(-u, -v) >= -up(u, v), || format!("{u}, {v}"));
        }
    }
    laws.push(minus_lo.finish());
    laws.push(minus_up.finish());

    let mut sub_lo = LawBuilder::new("lower_subtraction_le_zero");
    let mut sub_up = LawBuilder::new("upper_subtraction_ge_zero");
    for &u in &p {
        sub_lo.check(lo(-u, u) <= XReal::ZERO, || format!("{u}"));
        sub_up.check(up(-u, u) >= XReal::ZERO, || format!("{u}"));
    }
    laws.push(sub_lo.finish());
    laws.push(sub_up.finish());

    // sup/inf over finite families A, B of probe values
    let mut sup_lo = LawBuilder::new("lower_addition_of_sups");
    let mut inf_lo = LawBuilder::new("lower_addition_of_infs");
    let mut inf_up = LawBuilder::new("upper_addition_of_infs");
    let mut sup_up = LawBuilder::new("upper_addition_of_sups");
    for a in &fam {
        for b in &fam {
            let pairs_lo: Vec<XReal> = a
                .iter()
                .flat_map(|&x| b.iter().map(move |&y| lo(x, y)))
                .collect();
            let pairs_up: Vec<XReal> = a
                .iter()
                .flat_map(|&x| b.iter().map(move |&y| up(x, y)))
                .collect();
            let (sa, sb) = (sup_fold(a.clone()), sup_fold(b.clone()));
            let (ia, ib) = (inf_fold(a.clone()), inf_fold(b.clone()));
            sup_lo.check(lo(sa, sb) == sup_fold(pairs_lo.clone()), || {
                format!("{a:?} {b:?}")
            });
            inf_lo.check(lo(ia, ib) <= inf_fold(pairs_lo), || format!("{a:?} {b:?}"));
            inf_up.check(up(ia, ib) == inf_fold(pairs_up.clone()), || {
                format!("{a:?} {b:?}")
            });
            sup_up.check(up(sa, sb) >= sup_fold(pairs_up), || format!("{a:?} {b:?}"));
        }
    }
    laws.push(sup_lo.finish());
    laws.push(inf_lo.finish());
    laws.push(inf_up.finish());
    laws.push(sup_up.finish());

    let mut const_lo = LawBuilder::new("lower_addition_inf_with_constant");
    let mut const_up = LawBuilder::new("upper_addition_sup_with_constant");
    for a in &fam {
        for &t in &p {
            if t < XReal::PosInf {
                let rhs = inf_fold(a.iter().map(|&x| lo(x, t)));
                const_lo.check(lo(inf_fold(a.clone()), t) == rhs, || format!("{a:?}, t={t}"));
            }
            if t > XReal::NegInf {
                let rhs = sup_fold(a.iter().map(|&x| up(x, t)));
                const_up.check(up(sup_fold(a.clone()), t) == rhs, || format!("{a:?}, t={t}"));
            }
        }
    }
    laws.push(const_lo.finish());
    laws.push(const_up.finish());

    let mut leq = LawBuilder::new("lower_leq_upper");
    let mut dual = LawBuilder::new("negation_exchanges_additions");
    for &u in &p {
        for &v in &p {
            leq.check(lo(u, v) <= up(u, v), || format!("{u}, {v}"));
            dual.check(
                -up(u, v) == lo(-u, -v) && -lo(u, v) == up(-u, -v),
                || format!("{u}, {v}"),
            );
        }
    }
    laws.push(leq.finish());
    laws.push(dual.finish());

    let mut mixed = LawBuilder::new("mixed_associativity_inequality");
    let mut strict = LawBuilder::new("mixed_associativity_strict_cases");
    for &u in &p {
        for &v in &p {
            for &w in &p {
                let lhs = lo(up(u, v), w);
                let rhs = up(u, lo(v, w));
                mixed.check(lhs <= rhs, || format!("{u}, {v}, {w}"));
                let predicted = (u == XReal::PosInf && w == XReal::NegInf)
                    || (u == XReal::NegInf && w == XReal::PosInf && v.is_finite());
                strict.check((lhs < rhs) == predicted, || format!("{u}, {v}, {w}"));
            }
        }
    }
    laws.push(mixed.finish());
    laws.push(strict.finish());

    let mut cmp1 = LawBuilder::new("comparison_with_zero");
    for &u in &p {
        for &v in &p {
            let a = lo(u, -v) <= XReal::ZERO;
            let b = u <= v;
            let c = XReal::ZERO <= up(v, -u);
            cmp1.check(a == b && b == c, || format!("{u}, {v}"));
        }
    }
    laws.push(cmp1.finish());

    let mut cmp2 = LawBuilder::new("comparison_moving_terms_right");
    let mut cmp3 = LawBuilder::new("comparison_moving_terms_left");
    for &u in &p {
        for &v in &p {
            for &w in &p {
                let a = lo(u, -v) <= w;
                let b = u <= up(v, w);
                let c = lo(u, -w) <= v;
                cmp2.check(a == b && b == c, || format!("{u}, {v}, {w}"));
                let a = w <= up(v, -u);
                let b = lo(u, w) <= v;
                let c = u <= up(v, -w);
                cmp3.check(a == b && b == c, || format!("{u}, {v}, {w}"));
            }
        }
    }
    laws.push(cmp2.finish());
    laws.push(cmp3.finish());

    let mut inv = LawBuilder::new("negation_involutive");
    for &u in &p {
        inv.check(-(-u) == u, || format!("{u}"));
    }
    laws.push(inv.finish());

    MoreauLawTable { probes: p, laws }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(e: &[f64]) -> Vector {
        Vector::new(e.to_vec()).unwrap()
    }

    #[test]
    fn topk_bruteforce_examples() {
        let r = topk_norm_bruteforce(&v(&[3.0, 0.0, -4.0]), 2).unwrap();
        assert_eq!(r.value, 5.0);
        assert_eq!(r.witness, Witness::Subset(SupportSet::from_indices(3, &[0, 2]).unwrap()));
        assert_eq!(r.evaluations, 3);

        let x = v(&[0.3, -2.0, 1.1]);
        let r = topk_norm_bruteforce(&x, 3).unwrap();
        assert_eq!(r.value, x.norm());
        assert_eq!(r.witness, Witness::Subset(SupportSet::full(3).unwrap()));

        let r = topk_norm_bruteforce(&v(&[1.0, 1.0]), 1).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.witness, Witness::Subset(SupportSet::from_indices(2, &[0]).unwrap()));
    }

    #[test]
    fn topk_bruteforce_guards() {
        assert!(matches!(
            topk_norm_bruteforce(&Vector::zeros(21), 1),
            Err(OracleError::DimensionGuard { .. })
        ));
        assert!(topk_norm_bruteforce(&v(&[1.0]), 2).is_err());
        let r = topk_norm_bruteforce(&v(&[1.0, 2.0]), 0).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn dual_bruteforce_examples() {
        let x = v(&[3.0, -4.0]);
        let o = dual_norm_bruteforce(&x, 1, DualBudget::default()).unwrap();
        assert!((o.result.value - 7.0).abs() < 1e-9, "{}", o.result.value);
        assert_eq!(o.route_subsets, 4.0);
        let o = dual_norm_bruteforce(&x, 2, DualBudget::default()).unwrap();
        assert!((o.result.value - 5.0).abs() < 1e-9);
        for k in 1..=3 {
            let o = dual_norm_bruteforce(&v(&[1.0, 0.0, 0.0]), k, DualBudget::default()).unwrap();
            assert_eq!(o.route_subsets, 1.0);
            assert!((o.result.value - 1.0).abs() < 1e-9);
        }
        assert!(dual_norm_bruteforce(&Vector::zeros(7), 1, DualBudget::default()).is_err());
    }

    #[test]
    fn dual_witness_reproduces_value() {
        let x = v(&[0.7, -1.3, 0.2, 2.1]);
        let o = dual_norm_bruteforce(&x, 2, DualBudget::default()).unwrap();
        let Witness::Point(y) = &o.result.witness else {
            panic!("point witness expected")
        };
        let back = x.dot(y).unwrap();
        assert!((back - o.result.value).abs() <= 1e-10 * o.result.value.abs());
        let subsets: Vec<Vec<usize>> = (0..4).combinations(2).collect();
        assert!(max_cylinder_load(y.as_slice(), &subsets) <= 1.0);
    }

    #[test]
    fn hull_examples() {
        let h = hull_membership_sampled(&v(&[0.6, 0.8, 0.0]), 2, 500, 1, 1e-9).unwrap();
        assert!(h.member && h.level_set && h.consistent());
        let s = 1.0 / 3f64.sqrt();
        let h = hull_membership_sampled(&v(&[s, s, s]), 2, 500, 1, 1e-9).unwrap();
        assert!(!h.member && !h.level_set && h.consistent());
        let h = hull_membership_sampled(&v(&[1.0, 0.0, 0.0]), 1, 500, 1, 1e-9).unwrap();
        assert!(h.member && h.level_set && h.consistent());
        assert!(matches!(
            hull_membership_sampled(&v(&[1.0, 1.0]), 1, 10, 1, 1e-9),
            Err(OracleError::NotOnSphere(_))
        ));
    }

    #[test]
    fn law_table_has_no_violations() {
        let t = moreau_law_table();
        for law in &t.laws {
            assert_eq!(law.violations, 0, "{}: {:?}", law.law, law.failures);
            assert!(law.cases > 0, "{}", law.law);
        }
        let strict = t
            .laws
            .iter()
            .find(|l| l.law == "mixed_associativity_strict_cases")
            .unwrap();
        assert_eq!(strict.cases, 125);
    }
}
