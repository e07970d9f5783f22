//! Verification suites and the JSON report they produce.
//!
//! Each check is a seeded, deterministic experiment that either passes or
//! fails and records the worst gap it observed. Checks run in parallel; the
//! report lists them in a fixed order, so two runs with the same seed and
//! configuration differ only in `generated_at` and `runtime_ms`.

use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capra_l0::{
    self, biconj_l0_search, conj_l0, conj_l0_maximizers, conj_levelset_indicator, phi_ray,
    SearchParams,
};
use crate::engine::{
    self, biconjugate, capra_coupling, conjugate, dual_bound, fenchel_coupling,
    infimal_postcomposition, make_one_sided_linear, reverse_conjugate, samples,
    support_function_sampled, MappingTheta, SampledFunction,
};
use crate::norms::{
    ksupport_norm, l0_via_norm_chain, level_set_contains, topk_chain, topk_norm, DEFAULT_REL_TOL,
};
use crate::oracles::{self, dual_norm_bruteforce, hull_membership_sampled, DualBudget};
use crate::vector::{l0, normalization, project, SupportSet, Vector};
use crate::xreal::XReal;

pub const SCHEMA: &str = "capra-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Moreau,
    Norms,
    Engine,
    Theorem,
    All,
}

impl Suite {
    fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Moreau => "moreau",
            Suite::Norms => "norms",
            Suite::Engine => "engine",
            Suite::Theorem => "theorem",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "moreau" => Ok(Suite::Moreau),
            "norms" => Ok(Suite::Norms),
            "engine" => Ok(Suite::Engine),
            "theorem" => Ok(Suite::Theorem),
            "all" => Ok(Suite::All),
            other => Err(format!("unknown suite {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub id: &'static str,
    /// The identity under test, or "plumbing".
    pub reference: &'static str,
    pub status: Status,
    pub cases: usize,
    pub worst_gap: f64,
    pub runtime_ms: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub schema: &'static str,
    pub suite: Suite,
    pub seed: u64,
    pub dims: Vec<usize>,
    pub generated_at: String,
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.summary.failed == 0
    }
}

/// Sizes of the verification experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyConfig {
    pub dims: Vec<usize>,
    /// Random inputs per dimension for the cheap checks; the expensive ones
    /// use a fraction of it.
    pub samples: usize,
    pub search: SearchParams,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            dims: vec![1, 2, 3, 4, 6],
            samples: 200,
            search: SearchParams {
                restarts: 8,
                ..SearchParams::default()
            },
        }
    }
}

/// What a check function reports back.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub cases: usize,
    pub failures: usize,
    pub worst_gap: f64,
    pub detail: String,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            cases: 0,
            failures: 0,
            worst_gap: 0.0,
            detail: String::new(),
        }
    }

    fn record(&mut self, ok: bool, gap: f64, what: impl FnOnce() -> String) {
        self.cases += 1;
        if gap.is_nan() || gap > self.worst_gap {
            self.worst_gap = if gap.is_nan() { f64::INFINITY } else { gap };
        }
        if !ok {
            self.failures += 1;
            if self.detail.is_empty() {
                self.detail = what();
            }
        }
    }
}

/// Seed of one check, mixed from the master seed and the check id.
pub fn check_seed(master: u64, id: &str) -> u64 {
    // FNV-1a over the id, then a splitmix64 finalizer
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in id.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut z = master ^ h;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Random inputs shared by the suites.
pub mod gen {
    use super::*;

    /// Entries uniform in `[-1, 1]`.
    pub fn dense(rng: &mut impl Rng, d: usize) -> Vector {
        Vector::new((0..d).map(|_| rng.random_range(-1.0..=1.0)).collect()).expect("finite")
    }

    /// Random support (possibly empty) with magnitudes in `[0.1, 1]` and
    /// random signs.
    pub fn sparse(rng: &mut impl Rng, d: usize) -> Vector {
        let size = rng.random_range(0..=d);
        sparse_with_support(rng, d, size)
    }

    /// Exactly `size` nonzero entries at random positions.
    pub fn sparse_with_support(rng: &mut impl Rng, d: usize, size: usize) -> Vector {
        let mut idx: Vec<usize> = (0..d).collect();
        for i in 0..size {
            let j = rng.random_range(i..d);
            idx.swap(i, j);
        }
        let mut e = vec![0.0; d];
        for &i in &idx[..size] {
            let m: f64 = rng.random_range(0.1..=1.0);
            e[i] = if rng.random_bool(0.5) { m } else { -m };
        }
        Vector::new(e).expect("finite")
    }

    /// True when the sorted nonzero magnitudes are separated by at least
    /// `rel` relative gap.
    pub fn well_separated(x: &Vector, rel: f64) -> bool {
        let mut m: Vec<f64> = x
            .as_slice()
            .iter()
            .map(|v| v.abs())
            .filter(|&v| v > 0.0)
            .collect();
        m.sort_unstable_by(|a, b| b.total_cmp(a));
        m.windows(2).all(|w| w[0] - w[1] >= rel * w[0])
    }

    /// A random sampled function on `n` points in `R^d`, including a few
    /// power-of-two ray copies (their normalizations coincide bitwise) and
    /// points sharing coordinates.
    pub fn sampled_function(rng: &mut impl Rng, d: usize, n: usize) -> SampledFunction {
        let mut pts: Vec<Vector> = Vec::new();
        while pts.len() < n {
            let x = sparse(rng, d);
            if x.is_zero() && pts.iter().any(|p| p.is_zero()) {
                continue;
            }
            let copies = if rng.random_bool(0.3) { 2 } else { 0 };
            for c in 0..=copies {
                let p = x.scale(2f64.powi(c));
                if pts.len() < n && !pts.iter().any(|q| q.same_point(&p)) {
                    pts.push(p);
                }
            }
        }
        let values = (0..n)
            .map(|_| match rng.random_range(0..10) {
                0 => XReal::PosInf,
                1 => XReal::NegInf,
                _ => XReal::from_f64(rng.random_range(-2.0..2.0)),
            })
            .collect();
        SampledFunction::new(pts, values).expect("distinct points")
    }
}

type CheckFn = fn(&VerifyConfig, &mut ChaCha8Rng) -> Outcome;

struct CheckDef {
    id: &'static str,
    reference: &'static str,
    suite: Suite,
    run: CheckFn,
}

const CHECKS: &[CheckDef] = &[
    CheckDef {
        id: "moreau.laws",
        reference: "moreau-lower-upper-additions",
        suite: Suite::Moreau,
        run: check_moreau_laws,
    },
    CheckDef {
        id: "norms.topk_bruteforce",
        reference: "topk-norm-as-max-over-subsets",
        suite: Suite::Norms,
        run: check_topk_bruteforce,
    },
    CheckDef {
        id: "norms.topk_chain",
        reference: "topk-norm-monotone-chain",
        suite: Suite::Norms,
        run: check_topk_chain,
    },
    CheckDef {
        id: "norms.ksupport_dual",
        reference: "ksupport-norm-is-dual-of-topk",
        suite: Suite::Norms,
        run: check_ksupport_dual,
    },
    CheckDef {
        id: "norms.l0_characterization",
        reference: "l0-level-set-via-topk",
        suite: Suite::Norms,
        run: check_l0_characterization,
    },
    CheckDef {
        id: "norms.orthogonal_decomposition",
        reference: "orthogonal-decomposition",
        suite: Suite::Norms,
        run: check_orthogonal_decomposition,
    },
    CheckDef {
        id: "norms.sphere_hull",
        reference: "sphere-ksupport-ball-is-level-set",
        suite: Suite::Norms,
        run: check_sphere_hull,
    },
    CheckDef {
        id: "engine.one_sided_conjugate",
        reference: "one-sided-linear-conjugate",
        suite: Suite::Engine,
        run: check_one_sided_conjugate,
    },
    CheckDef {
        id: "engine.one_sided_reverse",
        reference: "one-sided-linear-reverse-conjugate",
        suite: Suite::Engine,
        run: check_one_sided_reverse,
    },
    CheckDef {
        id: "engine.characteristic_support",
        reference: "one-sided-linear-characteristic-function",
        suite: Suite::Engine,
        run: check_characteristic_support,
    },
    CheckDef {
        id: "engine.biconjugate_ceiling",
        reference: "biconjugate-below-function",
        suite: Suite::Engine,
        run: check_biconjugate_ceiling,
    },
    CheckDef {
        id: "engine.dual_bound",
        reference: "weak-duality",
        suite: Suite::Engine,
        run: check_dual_bound,
    },
    CheckDef {
        id: "engine.order_reversal",
        reference: "conjugation-reverses-order",
        suite: Suite::Engine,
        run: check_order_reversal,
    },
    CheckDef {
        id: "theorem.levelset_conjugate",
        reference: "capra-conjugate-of-levelset-indicator",
        suite: Suite::Theorem,
        run: check_levelset_conjugate,
    },
    CheckDef {
        id: "theorem.levelset_biconjugate",
        reference: "capra-biconjugate-of-levelset-indicator",
        suite: Suite::Theorem,
        run: check_levelset_biconjugate,
    },
    CheckDef {
        id: "theorem.conjugate_l0",
        reference: "capra-conjugate-of-l0",
        suite: Suite::Theorem,
        run: check_conjugate_l0,
    },
    CheckDef {
        id: "theorem.biconjugate_l0",
        reference: "capra-biconjugate-of-l0",
        suite: Suite::Theorem,
        run: check_biconjugate_l0,
    },
    CheckDef {
        id: "theorem.sphere_fenchel",
        reference: "l0-on-sphere-is-convex-lsc",
        suite: Suite::Theorem,
        run: check_sphere_fenchel,
    },
    CheckDef {
        id: "theorem.ray_invariance",
        reference: "l0-invariant-along-rays",
        suite: Suite::Theorem,
        run: check_ray_invariance,
    },
    CheckDef {
        id: "theorem.level_curve_closure",
        reference: "sphere-level-curve-closure",
        suite: Suite::Theorem,
        run: check_level_curve_closure,
    },
];

/// Ids of the checks a suite runs, in report order.
pub fn check_ids(suite: Suite) -> Vec<&'static str> {
    CHECKS
        .iter()
        .filter(|c| suite.includes(c.suite))
        .map(|c| c.id)
        .collect()
}

/// Runs `suite` and assembles the report.
pub fn run_suite(suite: Suite, seed: u64, config: &VerifyConfig) -> VerificationReport {
    let selected: Vec<&CheckDef> = CHECKS.iter().filter(|c| suite.includes(c.suite)).collect();
    let checks: Vec<CheckRecord> = selected
        .par_iter()
        .map(|c| {
            let start = Instant::now();
            let mut rng = ChaCha8Rng::seed_from_u64(check_seed(seed, c.id));
            let out = (c.run)(config, &mut rng);
            let status = if out.failures == 0 && out.cases > 0 {
                Status::Pass
            } else {
                Status::Fail
            };
            let detail = if out.cases == 0 {
                "no cases for the configured dimensions".to_string()
            } else if out.failures > 0 {
                format!("{} of {} cases failed; first: {}", out.failures, out.cases, out.detail)
            } else {
                format!("{} cases", out.cases)
            };
            CheckRecord {
                id: c.id,
                reference: c.reference,
                status,
                cases: out.cases,
                worst_gap: out.worst_gap,
                runtime_ms: start.elapsed().as_secs_f64() * 1e3,
                detail,
            }
        })
        .collect();
    let passed = checks.iter().filter(|c| c.status == Status::Pass).count();
    VerificationReport {
        schema: SCHEMA,
        suite,
        seed,
        dims: config.dims.clone(),
        generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        summary: Summary {
            total: checks.len(),
            passed,
            failed: checks.len() - passed,
        },
        checks,
    }
}

fn dims_in(config: &VerifyConfig, lo: usize, hi: usize) -> Vec<usize> {
    config
        .dims
        .iter()
        .copied()
        .filter(|d| (lo..=hi).contains(d))
        .collect()
}

fn l0x(x: &Vector) -> XReal {
    XReal::from_f64(l0(x, 0.0) as f64)
}

fn xreal_gap(a: XReal, b: XReal) -> f64 {
    match (a, b) {
        (XReal::Finite(p), XReal::Finite(q)) => (p - q).abs(),
        _ if a == b => 0.0,
        _ => f64::INFINITY,
    }
}

fn check_moreau_laws(_: &VerifyConfig, _: &mut ChaCha8Rng) -> Outcome {
    let table = oracles::moreau_law_table();
    let mut out = Outcome::new();
    for law in &table.laws {
        for i in 0..law.cases {
            let bad = i < law.violations;
            out.record(!bad, if bad { 1.0 } else { 0.0 }, || {
                format!("{}: {:?}", law.law, law.failures)
            });
        }
    }
    out
}

fn check_topk_bruteforce(config: &VerifyConfig, rng: &mut ChaCha8Rng) -> Outcome {
    let mut out = Outcome::new();
    for d in dims_in(config, 1, 10) {
        for _ in 0..config.samples {
            let x = gen::dense(rng, d);
            for k in 0..=d {
                let fast = topk_norm(&x, k).expect("k in range");
                let brute = oracles::topk_norm_bruteforce(&x, k).expect("d <= 10");
                out.record(fast.to_bits() == brute.value.to_bits(), (fast - brute.value).abs(), || {
                    format!("x={x} k={k}: {fast} vs {}", brute.value)
                });
            }
        }
    }
    out
}

fn check_topk_chain(config: &VerifyConfig, rng: &mut ChaCha8Rng) -> Outcome {
    let mut out = Outcome::new();
    for d in dims_in(config, 1, usize::MAX) {
        for _ in 0..config.samples {
            let x = gen::dense(rng, d);
            let chain = topk_chain(&x);
            let monotone = chain.windows(2).all(|w| w[0] <= w[1]);
            let ends = chain[d] == x.norm() && chain[1] == x.as_slice().iter().fold(0.0, |m: f64, v| m.max(v.abs()));
            out.record(monotone && ends, 0.0, || format!("x={x} chain={chain:?}"));
        }
    }
    out
}

fn check_ksupport_dual(config: &VerifyConfig, rng: &mut ChaCha8Rng) -> Outcome {
    let mut out = Outcome::new();
    let n = (config.samples / 10).max(5);
    for d in dims_in(config, 2, oracles::MAX_DUAL_DIM) {
        for _ in 0..n {
            let x = gen::dense(rng, d);
            for k in 1..=d {
                let closed = ksupport_norm(&x, k).expect("k in range");
                let o = dual_norm_bruteforce(&x, k, DualBudget { starts: 2, seed: rng.random() })
                    .expect("d <= 6");
                let rel = (closed - o.result.value).abs() / closed.max(f64::MIN_POSITIVE);
                let bracket = o.route_subsets <= closed && closed <= o.result.value + 1e-6;
                out.record(rel <= 1e-6 && bracket, rel, || {
                    format!("x={x} k={k}: closed {closed} vs oracle {}", o.result.value)
                });
            }
        }
    }
    out
}

fn check_l0_characterization(config: &VerifyConfig, rng: &mut ChaCha8Rng) -> Outcome {
    let mut out = Outcome::new();
    for d in dims_in(config, 1, usize::MAX) {
        for _ in 0..config.samples {
            let x = gen::sparse(rng, d);
            let l = l0(&x, 0.0);
            let mut ok = l == l0_via_norm_chain(&x, 0.0, DEFAULT_REL_TOL);
            for k in 0..=d {
                ok &= level_set_contains(&x, k, DEFAULT_REL_TOL).expect("k in range") == (l <= k);
            }
            // strict increase up to l, constant after
            let chain = topk_chain(&x);
            ok &= (1..=l).all(|j| chain[j] > chain[j - 1]);
            ok &= (l..=d).all(|j| chain[j] == chain[d]);
            // ray invariance
            ok &= l0(&x.scale(-3.7), 0.0) == l && l0(&normalization(&x), 0.0) == l;
            out.record(ok, 0.0, || format!("x={x}"));
        }
    }
    out
}

fn check_orthogonal_decomposition(config: &VerifyConfig, rng: &mut ChaCha8Rng) -> Outcome {
    let mut out = Outcome::new();
    for d in dims_in(config, 1, 64) {
        for _ in 0..config.samples {
            let x = gen::dense(rng, d);
            let mask = rng.random::<u64>() & SupportSet::full(d).expect("d <= 64").mask();
            let k = SupportSet::from_mask(d, mask).expect("masked");
            let xk = project(&x, &k).expect("dims");
            let xc = project(&x, &k.complement()).expect("dims");
            let sum_ok = xk.add(&xc).expect("dims") == x;
            let inner = xk.dot(&xc).expect("dims");
            let n2 = x.norm().powi(2);
            let rel = (n2 - xk.norm().powi(2) - xc.norm().powi(2)).abs() / n2.max(f64::MIN_POSITIVE);
            out.record(sum_ok && inner == 0.0 && rel <= 1e-12, rel, || format!("x={x} K={k}"));
        }
    }
    out
}

fn check_sphere_hull(config: &VerifyConfig, rng: &mut ChaCha8Rng) -> Outcome {
    let mut out = Outcome::new();
    let n = (config.samples / 10).max(5);
    for d in dims_in(config, 1, oracles::MAX_DUAL_DIM) {
        for _ in 0..n {
            let size = rng.random_range(1..=d);
            let x = normalization(&gen::sparse_with_support(rng, d, size));
            for k in 1..=d {
                let h = hull_membership_sampled(&x, k, 200, rng.random(), 1e-9).expect("unit, d <= 6");
                let expected = size <= k;
                out.record(h.consistent() && h.member == expected, 0.0, || {
                    format!("x={x} k={k}: {h:?}")
                });
            }
        }
    }
    out
}

fn thetas(d: usize, rng: &mut ChaCha8Rng) -> Vec<MappingTheta> {
    let keep = rng.random::<u64>() & SupportSet::full(d).expect("small d").mask();
    vec![
        MappingTheta::identity(),
        MappingTheta::normalization(),
        MappingTheta::coordinate_zeroing(SupportSet::from_mask(d, keep).expect("masked")),
    ]
}

fn check_one_sided_conjugate(config: &VerifyConfig, rng: &mut ChaCha8Rng) -> Outcome {
    let mut out = Outcome::new();
    let n = (config.samples / 10).max(5);
    for d in dims_in(config, 1, 4) {
        for _ in 0..n {
            let size = rng.random_range(1..=64);
            let f = gen::sampled_function(rng, d, size);
            let ys = samples::uniform_ball(d, 16, 3.0, rng.random());
            for theta in thetas(d, rng) {
                let direct = conjugate(&f, &make_one_sided_linear(theta.clone()), &ys).expect("valid");
                let post = infimal_postcomposition(&f, &theta);
                let via = conjugate(&post, &fenchel_coupling(), &ys).expect("valid");
                let gap = direct
                    .values()
                    .iter()
                    .zip(via.values())
                    .map(|(a, b)| xreal_gap(*a, *b))
                    .fold(0.0, f64::max);
                out.record(direct.values() == via.values(), gap, || {
                    format!("theta={} d={d} n={size}", theta.name())
                });
            }
        }
    }
    out
}

fn check_one_sided_reverse(config: &VerifyConfig, rng: &mut ChaCha8Rng) -> Outcome {
    let mut out = Outcome::new();
    let n = (config.samples / 10).max(5);
    for d in dims_in(config, 1, 4) {
        for _ in 0..n {
            let g = gen::sampled_function(rng, d, 24);
            let ws = samples::uniform_ball(d, 12, 2.0, rng.random());
            for theta in thetas(d, rng) {
                let lhs = reverse_conjugate(&g, &make_one_sided_linear(theta.clone()), &ws).expect("valid");
                let images: Vec<Vector> = ws.iter().map(|w| theta.apply(w)).collect();
                let fenchel = reverse_conjugate_at(&g, &images);
                let gap = lhs
                    .values()
                    .iter()
                    .zip(&fenchel)
                    .map(|(a, b)| xreal_gap(*a, *b))
                    .fold(0.0, f64::max);
                out.record(lhs.values() == fenchel.as_slice(), gap, || {
                    format!("theta={} d={d}", theta.name())
                });
            }
        }
    }
    out
}

/// Fenchel reverse conjugate of `g` at points that may repeat.
fn reverse_conjugate_at(g: &SampledFunction, xs: &[Vector]) -> Vec<XReal> {
    let c = fenchel_coupling();
    xs.iter()
        .map(|x| {
            crate::xreal::sup_fold(g.iter().map(|(y, gy)| c.eval(x, y).low_add(gy.neg())))
        })
        .collect()
}

fn check_characteristic_support(config: &VerifyConfig, rng: &mut ChaCha8Rng) -> Outcome {
    let mut out = Outcome::new();
    let n = (config.samples / 10).max(5);
    for d in dims_in(config, 1, 4) {
        for _ in 0..n {
            let ws = samples::uniform_ball(d, rng.random_range(1..=32), 2.0, rng.random());
            let delta = SampledFunction::indicator(ws.clone()).expect("distinct");
            let ys = samples::uniform_ball(d, 16, 3.0, rng.random());
            for theta in thetas(d, rng) {
                let c = make_one_sided_linear(theta.clone()).negate();
                let conj = conjugate(&delta, &c, &ys).expect("valid");
                let minus_image: Vec<Vector> = ws.iter().map(|w| theta.negated().apply(w)).collect();
                let mut ok = true;
                let mut gap: f64 = 0.0;
                for (y, v) in conj.iter() {
                    let s = support_function_sampled(&minus_image, y);
                    gap = gap.max(xreal_gap(v, s));
                    ok &= v == s;
                }
                out.record(ok, gap, || format!("theta={} d={d}", theta.name()));
            }
        }
    }
    out
}

fn check_biconjugate_ceiling(config: &VerifyConfig, rng: &mut ChaCha8Rng) -> Outcome {
    let mut out = Outcome::new();
    let n = (config.samples / 10).max(5);
    for d in dims_in(config, 1, 4) {
        for _ in 0..n {
            let f = gen::sampled_function(rng, d, 32);
            let ys = samples::uniform_ball(d, 32, 4.0, rng.random());
            for c in [fenchel_coupling(), capra_coupling()] {
                let res = biconjugate(&f, &c, &ys, f.points());
                out.record(res.is_ok(), 0.0, || format!("{}: {res:?}", c.name()));
            }
        }
    }
    let (_, violations) = engine::ceiling_stats();
    out.record(violations == 0, violations as f64, || {
        format!("{violations} ceiling violations recorded process-wide")
    });
    out
}

fn check_dual_bound(config: &VerifyConfig, rng: &mut ChaCha8Rng) -> Outcome {
    let mut out = Outcome::new();
    let n = (config.samples / 10).max(5);
    for d in dims_in(config, 2, 4) {
        for _ in 0..n {
            // l0 over a sampled k-level set under the Capra coupling
            let k = rng.random_range(0..d);
            let pts: Vec<Vector> = {
                let mut v: Vec<Vector> = Vec::new();
                while v.len() < 24 {
                    let p = gen::sparse(rng, d);
                    if !v.iter().any(|q| q.same_point(&p)) {
                        v.push(p);
                    }
                }
                v
            };
            let f = SampledFunction::from_fn(pts.clone(), l0x).expect("distinct");
            let g = SampledFunction::from_fn(pts, |x| {
                if l0(x, 0.0) <= k {
                    XReal::ZERO
                } else {
                    XReal::PosInf
                }
            })
            .expect("distinct");
            let ys = samples::uniform_ball(d, 32, 3.0, rng.random());
            match dual_bound(&f, &g, &capra_coupling(), &ys) {
                Ok(b) => {
                    let true_min = crate::xreal::inf_fold(
                        f.values().iter().zip(g.values()).map(|(a, b)| a.upp_add(*b)),
                    );
                    out.record(b.lower <= b.upper && b.upper == true_min, 0.0, || {
                        format!("{b:?} vs {true_min}")
                    });
                }
                Err(e) => out.record(false, f64::INFINITY, || e.to_string()),
            }
        }
    }
    out
}

fn check_order_reversal(config: &VerifyConfig, rng: &mut ChaCha8Rng) -> Outcome {
    let mut out = Outcome::new();
    let n = (config.samples / 10).max(5);
    for d in dims_in(config, 1, 4) {
        for _ in 0..n {
            let f = gen::sampled_function(rng, d, 20);
            let bumped = f
                .values()
                .iter()
                .map(|v| v.upp_add(XReal::from_f64(rng.random_range(0.0..1.0))))
                .collect();
            let g = SampledFunction::new(f.points().to_vec(), bumped).expect("same points");
            let ys = samples::uniform_ball(d, 16, 3.0, rng.random());
            let c = capra_coupling();
            let fc = conjugate(&f, &c, &ys).expect("valid");
            let gc = conjugate(&g, &c, &ys).expect("valid");
            let ok = fc.values().iter().zip(gc.values()).all(|(a, b)| a >= b);
            out.record(ok, 0.0, || format!("d={d}"));
        }
    }
    out
}

fn levelset_frame(d: usize, k: usize) -> Vec<Vector> {
    let mut pts: Vec<Vector> = samples::signed_support_vectors(d)
        .into_iter()
        .filter(|p| l0(p, 0.0) <= k)
        .collect();
    pts.push(Vector::zeros(d));
    pts
}

fn check_levelset_conjugate(config: &VerifyConfig, rng: &mut ChaCha8Rng) -> Outcome {
    let mut out = Outcome::new();
    for d in dims_in(config, 1, 4) {
        for k in 0..=d {
            // level-set sample: the signed frame plus random points of S_K
            let mut pts = levelset_frame(d, k);
            for _ in 0..20 {
                if k == 0 {
                    break;
                }
                let p = { let s = rng.random_range(1..=k); gen::sparse_with_support(rng, d, s) };
                if !pts.iter().any(|q| q.same_point(&p)) {
                    pts.push(p);
                }
            }
            let delta = SampledFunction::indicator(pts).expect("distinct");
            // probes where the frame attains the sup: +-e_i and equal magnitudes
            let mut probes: Vec<Vector> = (0..d)
                .flat_map(|i| [Vector::basis(d, i), Vector::basis(d, i).scale(-1.5)])
                .collect();
            probes.extend(samples::signed_support_vectors(d).into_iter().map(|p| p.scale(2.0)));
            let randoms = samples::uniform_ball(d, 16, 3.0, rng.random());
            for c in [capra_coupling(), capra_coupling().negate()] {
                let exact = conjugate(&delta, &c, &probes).expect("valid");
                for (y, v) in exact.iter() {
                    let closed = conj_levelset_indicator(y, k).expect("k <= d");
                    let gap = (v.finite().expect("finite") - closed).abs();
                    out.record(gap <= 1e-12, gap, || format!("{} y={y} k={k}", c.name()));
                }
                let lower = conjugate(&delta, &c, &randoms).expect("valid");
                for (y, v) in lower.iter() {
                    let closed = conj_levelset_indicator(y, k).expect("k <= d");
                    let g = v.finite().expect("finite") - closed;
                    out.record(g <= 1e-12, g.max(0.0), || format!("grid above closed form at y={y}"));
                }
            }
        }
    }
    out
}

fn check_levelset_biconjugate(config: &VerifyConfig, rng: &mut ChaCha8Rng) -> Outcome {
    let mut out = Outcome::new();
    let n = (config.samples / 20).max(3);
    for d in dims_in(config, 1, 4) {
        for k in 0..d {
            for _ in 0..n {
                let inside: Vec<Vector> = levelset_frame(d, k);
                let outside = normalization(&{ let s = rng.random_range(k + 1..=d); gen::sparse_with_support(rng, d, s) });
                let mut pts = inside.clone();
                pts.push(outside.clone());
                let f = SampledFunction::new(
                    pts.clone(),
                    inside
                        .iter()
                        .map(|_| XReal::ZERO)
                        .chain([XReal::PosInf])
                        .collect(),
                )
                .expect("distinct");
                let lambdas = [0.0, 1.0, 10.0, 100.0];
                let ys = samples::ray_ladder(&outside, &lambdas);
                let bi = biconjugate(&f, &capra_coupling(), &ys, &pts).expect("ceiling");
                for (x, v) in bi.iter() {
                    let closed = capra_l0::biconj_levelset_indicator(x, k, DEFAULT_REL_TOL).expect("k <= d");
                    if closed == XReal::ZERO {
                        out.record(v == XReal::ZERO, xreal_gap(v, XReal::ZERO), || {
                            format!("inside x={x}: {v}")
                        });
                    } else {
                        // grows like lambda (1 - |n(x)|_(k)) along the dual ray
                        let rate = 1.0 - topk_norm(&outside, k).expect("k <= d");
                        let want = 100.0 * rate - 1e-9;
                        out.record(v >= XReal::from_f64(want), 0.0, || {
                            format!("outside x={x}: {v} < {want}")
                        });
                    }
                }
            }
        }
    }
    out
}

fn check_conjugate_l0(config: &VerifyConfig, rng: &mut ChaCha8Rng) -> Outcome {
    let mut out = Outcome::new();
    let n = (config.samples / 4).max(5);
    for d in dims_in(config, 1, 4) {
        for _ in 0..n {
            let y = gen::dense(rng, d).scale(rng.random_range(0.1..6.0));
            let mut pts = conj_l0_maximizers(&y);
            for p in samples::uniform_ball(d, 32, 1.0, rng.random()) {
                if !pts.iter().any(|q| q.same_point(&p)) {
                    pts.push(p);
                }
            }
            let f = SampledFunction::from_fn(pts, l0x).expect("distinct");
            let grid = conjugate(&f, &capra_coupling(), std::slice::from_ref(&y)).expect("valid");
            let g = grid.values()[0].finite().expect("finite");
            let gap = (g - conj_l0(&y)).abs();
            out.record(gap <= 1e-10, gap, || format!("y={y}: grid {g} vs {}", conj_l0(&y)));
        }
    }
    out
}

fn check_biconjugate_l0(config: &VerifyConfig, rng: &mut ChaCha8Rng) -> Outcome {
    let mut out = Outcome::new();
    let n = (config.samples / 10).max(5);
    let mut params = config.search;
    for d in dims_in(config, 1, 6) {
        for _ in 0..n {
            let x = gen::sparse(rng, d);
            if !gen::well_separated(&x, 1e-6) {
                continue;
            }
            let target = l0(&x, 0.0) as f64;
            params.seed = rng.random();
            match biconj_l0_search(&x, &params) {
                None => out.record(target == 0.0, target, || "zero vector".into()),
                Some(s) => {
                    let sandwich = s.ladder.iter().all(|&(_, phi)| phi <= s.value);
                    let gap = (s.value - target).abs();
                    let capped = s.value <= target + capra_l0::DEFAULT_INTEGER_TOL;
                    out.record(sandwich && capped && gap <= capra_l0::DEFAULT_INTEGER_TOL, gap, || {
                        format!("x={x}: {} vs {target}", s.value)
                    });
                }
            }
        }
    }
    out
}

fn check_sphere_fenchel(config: &VerifyConfig, rng: &mut ChaCha8Rng) -> Outcome {
    let mut out = Outcome::new();
    let n = (config.samples / 20).max(3);
    let mut params = config.search;
    for d in dims_in(config, 1, 6) {
        for size in 1..=d {
            for _ in 0..n {
                let x = normalization(&gen::sparse_with_support(rng, d, size));
                if !gen::well_separated(&x, 1e-6) {
                    continue;
                }
                params.seed = rng.random();
                let v = capra_l0::l0_on_sphere_via_fenchel(&x, &params).expect("unit vector");
                let gap = (v - size as f64).abs();
                out.record(gap <= capra_l0::DEFAULT_INTEGER_TOL, gap, || format!("x={x}: {v}"));
            }
        }
    }
    out
}

fn check_ray_invariance(config: &VerifyConfig, rng: &mut ChaCha8Rng) -> Outcome {
    let mut out = Outcome::new();
    let n = (config.samples / 20).max(3);
    let mut params = config.search;
    for d in dims_in(config, 1, 4) {
        for _ in 0..n {
            let x = { let s = rng.random_range(1..=d); gen::sparse_with_support(rng, d, s) };
            if !gen::well_separated(&x, 1e-6) {
                continue;
            }
            params.seed = rng.random();
            let a = capra_l0::biconj_l0(&x, &params);
            let b = capra_l0::biconj_l0(&x.scale(7.3), &params);
            let gap = (a - b).abs();
            out.record(gap <= capra_l0::DEFAULT_INTEGER_TOL, gap, || format!("x={x}: {a} vs {b}"));

            // sampled Capra biconjugate is constant on power-of-two ray copies
            let pts: Vec<Vector> = [0.5, 1.0, 4.0].iter().map(|&l| x.scale(l)).chain(
                samples::uniform_ball(d, 12, 2.0, rng.random()),
            ).collect();
            let f = SampledFunction::from_fn(pts.clone(), l0x).expect("distinct");
            let ys = samples::uniform_ball(d, 24, 4.0, rng.random());
            let bi = biconjugate(&f, &capra_coupling(), &ys, &pts[..3]).expect("ceiling");
            let same = bi.values().iter().all(|v| *v == bi.values()[0]);
            out.record(same, 0.0, || format!("ray copies of x={x}: {:?}", bi.values()));
            // phi is the objective along the ray, so it is ray invariant too
            let p1 = phi_ray(&x, 3.0).expect("x != 0");
            let p2 = phi_ray(&x.scale(2.0), 1.5).expect("x != 0");
            out.record((p1 - p2).abs() <= 1e-12, (p1 - p2).abs(), || format!("phi x={x}"));
        }
    }
    out
}

fn check_level_curve_closure(config: &VerifyConfig, rng: &mut ChaCha8Rng) -> Outcome {
    let mut out = Outcome::new();
    let n = (config.samples / 20).max(3);
    for d in dims_in(config, 1, 4) {
        for k in 1..=d {
            for _ in 0..n {
                let x = normalization(&{ let s = rng.random_range(1..=k); gen::sparse_with_support(rng, d, s) });
                let mut ok = true;
                let mut last = f64::INFINITY;
                for p in 1..=8 {
                    let eps = 10f64.powi(-p);
                    let a = capra_l0::level_curve_approximant(&x, k, eps).expect("l0(x) <= k");
                    let dist = a.sub(&x).expect("dims").norm();
                    ok &= l0(&a, 0.0) == k && (a.norm() - 1.0).abs() <= 1e-12 && dist <= 2.0 * eps * (d as f64).sqrt();
                    last = dist;
                }
                out.record(ok, last, || format!("x={x} k={k}"));
            }
        }
    }
    out
}
