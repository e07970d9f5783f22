//! Fenchel-Moreau conjugacy over arbitrary couplings, evaluated on finite
//! sample sets.
//!
//! For a coupling `c : X x Y -> [-inf, +inf]` and `f : X -> [-inf, +inf]`,
//!
//! ```text
//! f^c(y)      = sup_x  c(x, y) (+.) (-f(x))
//! g^c'(x)     = sup_y  c(x, y) (+.) (-g(y))
//! f^cc'(x)    = (f^c)^c'(x)  <=  f(x)
//! ```
//!
//! where `(+.)` is the lower Moreau addition. Here every supremum runs over
//! the finite point set a [`SampledFunction`] carries, so each identity that
//! holds for the continuous objects also holds exactly between sampled
//! objects built from the same data. A sampled conjugate is a lower bound of
//! the continuous one.

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::vector::{dot, normalization, SupportSet, Vector};
use crate::xreal::{inf_fold, sup_fold, XReal};

/// Rounding slack allowed in `biconjugate <= f`.
pub const CEILING_SLACK: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("sample set is empty")]
    EmptySamples,
    #[error("{what}: expected dimension {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{points} points but {values} values")]
    LengthMismatch { points: usize, values: usize },
    #[error("sample point {index} repeats an earlier point")]
    DuplicatePoint { index: usize },
    #[error("primal sample {index} is not a point of the function")]
    NotASamplePoint { index: usize },
    #[error("functions are not sampled on the same points")]
    DifferentSupports,
    #[error("biconjugate {biconjugate} exceeds f = {value} at primal sample {index}")]
    CeilingViolated {
        index: usize,
        biconjugate: XReal,
        value: XReal,
    },
    #[error("dual lower bound {lower} exceeds primal value {upper}")]
    DualBoundViolated { lower: XReal, upper: XReal },
}

type PairFn = dyn Fn(&Vector, &Vector) -> XReal + Send + Sync;
type MapFn = dyn Fn(&Vector) -> Vector + Send + Sync;

/// A coupling `c(x, y)` between a primal and a dual space.
///
/// The built-in couplings pair spaces of equal dimension; the engine checks
/// sample dimensions against each other for those.
#[derive(Clone)]
pub struct Coupling {
    name: String,
    same_dim: bool,
    eval: Arc<PairFn>,
}

impl Coupling {
    /// A coupling between spaces of arbitrary dimensions.
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(&Vector, &Vector) -> XReal + Send + Sync + 'static,
    ) -> Self {
        Coupling {
            name: name.into(),
            same_dim: false,
            eval: Arc::new(eval),
        }
    }

    /// A coupling between two copies of `R^d`.
    pub fn new_same_dim(
        name: impl Into<String>,
        eval: impl Fn(&Vector, &Vector) -> XReal + Send + Sync + 'static,
    ) -> Self {
        Coupling {
            same_dim: true,
            ..Self::new(name, eval)
        }
    }

    pub fn pairs_equal_dims(&self) -> bool {
        self.same_dim
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, x: &Vector, y: &Vector) -> XReal {
        (self.eval)(x, y)
    }

    /// `c'(y, x) = c(x, y)`.
    pub fn reverse(&self) -> Coupling {
        let inner = Arc::clone(&self.eval);
        Coupling {
            name: format!("reverse({})", self.name),
            same_dim: self.same_dim,
            eval: Arc::new(move |y, x| inner(x, y)),
        }
    }

    /// `(-c)(x, y) = -c(x, y)`.
    pub fn negate(&self) -> Coupling {
        let inner = Arc::clone(&self.eval);
        Coupling {
            name: format!("-({})", self.name),
            same_dim: self.same_dim,
            eval: Arc::new(move |x, y| inner(x, y).neg()),
        }
    }
}

impl fmt::Debug for Coupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Coupling").field("name", &self.name).finish()
    }
}

/// A mapping `theta : W -> X` used to build one-sided linear couplings.
#[derive(Clone)]
pub struct MappingTheta {
    name: String,
    apply: Arc<MapFn>,
}

impl MappingTheta {
    pub fn new(
        name: impl Into<String>,
        apply: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        MappingTheta {
            name: name.into(),
            apply: Arc::new(apply),
        }
    }

    pub fn identity() -> Self {
        Self::new("identity", |w| w.clone())
    }

    /// The primal normalization `n(x) = x / |x|`, `n(0) = 0`.
    pub fn normalization() -> Self {
        Self::new("normalization", normalization)
    }

    /// `w -> w_K`.
    pub fn coordinate_zeroing(keep: SupportSet) -> Self {
        Self::new(format!("zeroing{keep}"), move |w| {
            crate::vector::project(w, &keep).expect("zeroing mask dimension")
        })
    }

    pub fn zero() -> Self {
        Self::new("zero", |w| Vector::zeros(w.dim()))
    }

    /// `w -> -theta(w)`.
    pub fn negated(&self) -> Self {
        let inner = Arc::clone(&self.apply);
        Self::new(format!("-{}", self.name), move |w| inner(w).scale(-1.0))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn apply(&self, w: &Vector) -> Vector {
        (self.apply)(w)
    }
}

impl fmt::Debug for MappingTheta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MappingTheta")
            .field("name", &self.name)
            .finish()
    }
}

/// The Fenchel coupling `<x, y>`.
pub fn fenchel_coupling() -> Coupling {
    Coupling::new_same_dim("fenchel", |x, y| XReal::from_f64(dot(x.as_slice(), y.as_slice())))
}

/// The one-sided linear coupling `c_theta(w, y) = <theta(w), y>`.
pub fn make_one_sided_linear(theta: MappingTheta) -> Coupling {
    let name = format!("one_sided({})", theta.name());
    Coupling::new_same_dim(name, move |w, y| {
        XReal::from_f64(dot(theta.apply(w).as_slice(), y.as_slice()))
    })
}

/// The Capra coupling: `<x, y> / |x|` for `x != 0`, and `0` at `x = 0`.
///
/// Evaluated by the direct formula; `make_one_sided_linear(normalization)`
/// is the same coupling up to rounding.
pub fn capra_coupling() -> Coupling {
    Coupling::new_same_dim("capra", |x, y| {
        let n = x.norm();
        if n == 0.0 {
            XReal::ZERO
        } else {
            XReal::from_f64(dot(x.as_slice(), y.as_slice()) / n)
        }
    })
}

/// Bit pattern of a point with `-0.0` folded onto `0.0`.
fn point_key(x: &Vector) -> Vec<u64> {
    x.as_slice()
        .iter()
        .map(|&v| if v == 0.0 { 0 } else { v.to_bits() })
        .collect()
}

/// Key identifying points that agree to 12 significant digits.
fn rounded_key(x: &Vector) -> Vec<u64> {
    x.as_slice()
        .iter()
        .map(|&v| {
            if v == 0.0 {
                return 0;
            }
            let r: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
            if r == 0.0 {
                0
            } else {
                r.to_bits()
            }
        })
        .collect()
}

/// A function known on a finite set of distinct points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledFunction {
    points: Vec<Vector>,
    values: Vec<XReal>,
}

impl SampledFunction {
    pub fn new(points: Vec<Vector>, values: Vec<XReal>) -> Result<Self, EngineError> {
        if points.is_empty() {
            return Err(EngineError::EmptySamples);
        }
        if points.len() != values.len() {
            return Err(EngineError::LengthMismatch {
                points: points.len(),
                values: values.len(),
            });
        }
        check_common_dim(&points, "sample points")?;
        let mut seen = std::collections::HashSet::with_capacity(points.len());
        for (index, p) in points.iter().enumerate() {
            if !seen.insert(point_key(p)) {
                return Err(EngineError::DuplicatePoint { index });
            }
        }
        Ok(SampledFunction { points, values })
    }

    /// Samples `f` at each point.
    pub fn from_fn(points: Vec<Vector>, f: impl Fn(&Vector) -> XReal) -> Result<Self, EngineError> {
        let values = points.iter().map(f).collect();
        Self::new(points, values)
    }

    /// The characteristic function of the point set: `0` on every point.
    pub fn indicator(points: Vec<Vector>) -> Result<Self, EngineError> {
        let values = vec![XReal::ZERO; points.len()];
        Self::new(points, values)
    }

    pub fn points(&self) -> &[Vector] {
        &self.points
    }

    pub fn values(&self) -> &[XReal] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vector, XReal)> {
        self.points.iter().zip(self.values.iter().copied())
    }

    pub fn index_of(&self, x: &Vector) -> Option<usize> {
        let key = point_key(x);
        self.points.iter().position(|p| point_key(p) == key)
    }

    pub fn value_at(&self, x: &Vector) -> Option<XReal> {
        self.index_of(x).map(|i| self.values[i])
    }

    /// The value at `x`, or `+inf` off the sample (`inf {} = +inf`).
    pub fn value_or_inf(&self, x: &Vector) -> XReal {
        self.value_at(x).unwrap_or(XReal::PosInf)
    }

    /// Same points, values passed through `op`.
    pub fn map_values(&self, op: impl Fn(XReal) -> XReal) -> SampledFunction {
        SampledFunction {
            points: self.points.clone(),
            values: self.values.iter().copied().map(op).collect(),
        }
    }

    /// Restriction to the points of `subset`, in that order.
    pub fn restrict(&self, subset: &[Vector]) -> Result<SampledFunction, EngineError> {
        let values = subset
            .iter()
            .enumerate()
            .map(|(index, p)| {
                self.value_at(p)
                    .ok_or(EngineError::NotASamplePoint { index })
            })
            .collect::<Result<Vec<_>, _>>()?;
        SampledFunction::new(subset.to_vec(), values)
    }
}

fn check_common_dim(points: &[Vector], what: &'static str) -> Result<usize, EngineError> {
    let first = points.first().ok_or(EngineError::EmptySamples)?;
    let dim = first.dim();
    for p in points {
        if p.dim() != dim {
            return Err(EngineError::DimensionMismatch {
                what,
                expected: dim,
                got: p.dim(),
            });
        }
    }
    Ok(dim)
}

/// One value of a sampled conjugate together with the first primal index
/// attaining it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupValue {
    pub value: XReal,
    pub argmax: usize,
}

fn sup_over(f: &SampledFunction, term: impl Fn(&Vector) -> XReal) -> SupValue {
    let mut best = SupValue {
        value: XReal::NegInf,
        argmax: 0,
    };
    for (i, (x, fx)) in f.iter().enumerate() {
        let v = term(x).low_add(fx.neg());
        if i == 0 || v > best.value {
            best = SupValue { value: v, argmax: i };
        }
    }
    best
}

/// `f^c` on `dual_samples`, each value with its first maximizing point.
pub fn conjugate_with_argmax(
    f: &SampledFunction,
    c: &Coupling,
    dual_samples: &[Vector],
) -> Result<Vec<SupValue>, EngineError> {
    if dual_samples.is_empty() {
        return Err(EngineError::EmptySamples);
    }
    let dual_dim = check_common_dim(dual_samples, "dual samples")?;
    if c.pairs_equal_dims() && dual_dim != f.dim() {
        return Err(EngineError::DimensionMismatch {
            what: "dual samples against primal points",
            expected: f.dim(),
            got: dual_dim,
        });
    }
    Ok(dual_samples
        .par_iter()
        .map(|y| sup_over(f, |x| c.eval(x, y)))
        .collect())
}

/// The c-Fenchel-Moreau conjugate `f^c(y) = sup_x c(x, y) (+.) (-f(x))`.
pub fn conjugate(
    f: &SampledFunction,
    c: &Coupling,
    dual_samples: &[Vector],
) -> Result<SampledFunction, EngineError> {
    let sups = conjugate_with_argmax(f, c, dual_samples)?;
    SampledFunction::new(
        dual_samples.to_vec(),
        sups.into_iter().map(|s| s.value).collect(),
    )
}

/// `g^c'(x) = sup_y c(x, y) (+.) (-g(y))`, the conjugate through the reversed
/// coupling.
pub fn reverse_conjugate(
    g: &SampledFunction,
    c: &Coupling,
    primal_samples: &[Vector],
) -> Result<SampledFunction, EngineError> {
    conjugate(g, &c.reverse(), primal_samples)
}

static CEILING_CHECKS: AtomicU64 = AtomicU64::new(0);
static CEILING_VIOLATIONS: AtomicU64 = AtomicU64::new(0);

/// Process-wide count of `(pointwise checks, violations)` of
/// `biconjugate <= f` performed by [`biconjugate`].
pub fn ceiling_stats() -> (u64, u64) {
    (
        CEILING_CHECKS.load(Ordering::SeqCst),
        CEILING_VIOLATIONS.load(Ordering::SeqCst),
    )
}

fn exceeds_ceiling(b: XReal, f: XReal) -> bool {
    match f {
        XReal::PosInf => false,
        XReal::NegInf => b != XReal::NegInf,
        XReal::Finite(v) => b > XReal::Finite(v + CEILING_SLACK),
    }
}

/// The biconjugate `f^cc'` on `primal_samples`, which must be points of `f`.
///
/// Checks `f^cc' <= f` at every returned point (with [`CEILING_SLACK`]) and
/// fails with [`EngineError::CeilingViolated`] otherwise.
pub fn biconjugate(
    f: &SampledFunction,
    c: &Coupling,
    dual_samples: &[Vector],
    primal_samples: &[Vector],
) -> Result<SampledFunction, EngineError> {
    let ceiling = f.restrict(primal_samples)?;
    let fc = conjugate(f, c, dual_samples)?;
    let fcc = reverse_conjugate(&fc, c, primal_samples)?;
    CEILING_CHECKS.fetch_add(fcc.len() as u64, Ordering::SeqCst);
    let violation = fcc
        .values()
        .iter()
        .zip(ceiling.values())
        .position(|(&b, &v)| exceeds_ceiling(b, v));
    if let Some(index) = violation {
        let bad = fcc
            .values()
            .iter()
            .zip(ceiling.values())
            .filter(|(&b, &v)| exceeds_ceiling(b, v))
            .count();
        CEILING_VIOLATIONS.fetch_add(bad as u64, Ordering::SeqCst);
        return Err(EngineError::CeilingViolated {
            index,
            biconjugate: fcc.values()[index],
            value: ceiling.values()[index],
        });
    }
    Ok(fcc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualBound {
    pub lower: XReal,
    pub upper: XReal,
}

/// Weak duality for `inf_x f(x) (+^) g(x)`:
///
/// ```text
/// sup_y (-f^c(y)) (+.) (-g^{-c}(y))  <=  inf_x f(x) (+^) g(x)
/// ```
///
/// `f` and `g` must be sampled on the same points.
pub fn dual_bound(
    f: &SampledFunction,
    g: &SampledFunction,
    c: &Coupling,
    dual_samples: &[Vector],
) -> Result<DualBound, EngineError> {
    let same = f.len() == g.len()
        && f
            .points()
            .iter()
            .zip(g.points())
            .all(|(a, b)| point_key(a) == point_key(b));
    if !same {
        return Err(EngineError::DifferentSupports);
    }
    let fc = conjugate(f, c, dual_samples)?;
    let gc = conjugate(g, &c.negate(), dual_samples)?;
    let lower = sup_fold(
        fc.values()
            .iter()
            .zip(gc.values())
            .map(|(a, b)| a.neg().low_add(b.neg())),
    );
    let upper = inf_fold(f.values().iter().zip(g.values()).map(|(a, b)| a.upp_add(*b)));
    let slack = match upper {
        XReal::Finite(u) => XReal::Finite(u + CEILING_SLACK * u.abs().max(1.0)),
        other => other,
    };
    if lower > slack {
        return Err(EngineError::DualBoundViolated { lower, upper });
    }
    Ok(DualBound { lower, upper })
}

/// The infimal postcomposition `(theta |> f)(x) = inf { f(w) : theta(w) = x }`.
///
/// The result is supported on the images `theta(w)`; images agreeing to 12
/// significant digits count as one point, represented by the first image
/// met. Off the image the value is `+inf` (see
/// [`SampledFunction::value_or_inf`]).
pub fn infimal_postcomposition(f: &SampledFunction, theta: &MappingTheta) -> SampledFunction {
    let mut groups: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut points: Vec<Vector> = Vec::new();
    let mut values: Vec<XReal> = Vec::new();
    for (w, fw) in f.iter() {
        let image = theta.apply(w);
        let key = rounded_key(&image);
        match groups.get(&key) {
            Some(&slot) => values[slot] = values[slot].min(fw),
            None => {
                groups.insert(key, points.len());
                points.push(image);
                values.push(fw);
            }
        }
    }
    SampledFunction { points, values }
}

/// The support function `sigma_X(y) = sup_{x in X} <x, y>`; `-inf` for an
/// empty `X`.
pub fn support_function_sampled(set: &[Vector], y: &Vector) -> XReal {
    sup_fold(
        set.iter()
            .map(|x| XReal::from_f64(dot(x.as_slice(), y.as_slice()))),
    )
}

/// Deterministic sample-set constructors.
pub mod samples {
    use super::*;

    /// `n` points drawn uniformly from the Euclidean ball of `radius`.
    pub fn uniform_ball(dim: usize, n: usize, radius: f64, seed: u64) -> Vec<Vector> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let unit = Uniform::new(0.0f64, 1.0).expect("valid range");
        (0..n)
            .map(|_| loop {
                let g: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                let g = Vector::new(g).expect("gaussian draws are finite");
                let norm = g.norm();
                if norm > 0.0 {
                    let r = radius * unit.sample(&mut rng).powf(1.0 / dim as f64);
                    break g.scale(r / norm);
                }
            })
            .collect()
    }

    /// The signed support vectors `s / sqrt(|K|)` for every nonempty `K` and
    /// every sign pattern `s` on `K`: the normalized points with entries of
    /// equal magnitude.
    pub fn signed_support_vectors(dim: usize) -> Vec<Vector> {
        assert!((1..=12).contains(&dim), "3^d points: keep d <= 12");
        let mut out = Vec::new();
        let total = 3usize.pow(dim as u32);
        for code in 1..total {
            let mut c = code;
            let mut entries = vec![0.0; dim];
            for e in entries.iter_mut() {
                *e = match c % 3 {
                    0 => 0.0,
                    1 => 1.0,
                    _ => -1.0,
                };
                c /= 3;
            }
            let size = entries.iter().filter(|&&e| e != 0.0).count() as f64;
            let scale = size.sqrt();
            out.push(Vector::new(entries.iter().map(|e| e / scale).collect()).expect("finite"));
        }
        out
    }

    /// `{ lambda x : lambda in lambdas }`.
    pub fn ray_ladder(x: &Vector, lambdas: &[f64]) -> Vec<Vector> {
        lambdas.iter().map(|&l| x.scale(l)).collect()
    }

    /// `{1, 2, 4, ..} up to and including `max` (`max >= 1`), or `[max]`
    /// when `max < 1`.
    pub fn geometric_ladder(max: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let mut l = 1.0;
        while l < max {
            out.push(l);
            l *= 2.0;
        }
        out.push(max);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use XReal::{NegInf, PosInf};

    fn v(e: &[f64]) -> Vector {
        Vector::new(e.to_vec()).unwrap()
    }

    fn l0x(x: &Vector) -> XReal {
        XReal::from_f64(crate::vector::l0(x, 0.0) as f64)
    }

    #[test]
    fn conjugate_of_singleton_indicator_is_the_coupling() {
        let x0 = v(&[0.5, -1.0]);
        let f = SampledFunction::indicator(vec![x0.clone()]).unwrap();
        let c = capra_coupling();
        let ys = samples::uniform_ball(2, 10, 3.0, 1);
        let fc = conjugate(&f, &c, &ys).unwrap();
        for (y, val) in fc.iter() {
            assert_eq!(val, c.eval(&x0, y));
        }
    }

    #[test]
    fn conjugate_of_plus_infinity_is_minus_infinity() {
        let pts = samples::uniform_ball(3, 5, 1.0, 2);
        let f = SampledFunction::new(pts, vec![PosInf; 5]).unwrap();
        let ys = samples::uniform_ball(3, 4, 1.0, 3);
        let fc = conjugate(&f, &fenchel_coupling(), &ys).unwrap();
        assert!(fc.values().iter().all(|&v| v == NegInf));
    }

    #[test]
    fn capra_conjugate_of_sampled_l0() {
        let pts = vec![v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[1.0, 1.0])];
        let f = SampledFunction::from_fn(pts, l0x).unwrap();
        let fc = conjugate(&f, &capra_coupling(), &[v(&[2.0, 0.0])]).unwrap();
        // sup{0, 2 - 1, 2/sqrt(2) - 2} = 1
        assert_eq!(fc.values()[0], XReal::Finite(1.0));
    }

    #[test]
    fn argmax_first_winner() {
        let pts = vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])];
        let f = SampledFunction::indicator(pts).unwrap();
        let sups = conjugate_with_argmax(&f, &fenchel_coupling(), &[v(&[1.0, 1.0])]).unwrap();
        assert_eq!(sups[0].argmax, 0);
        assert_eq!(sups[0].value, XReal::Finite(1.0));
    }

    #[test]
    fn reverse_conjugate_of_singleton() {
        let y0 = v(&[2.0, 1.0]);
        let g = SampledFunction::indicator(vec![y0.clone()]).unwrap();
        let c = capra_coupling();
        let xs = samples::uniform_ball(2, 8, 1.0, 4);
        let r = reverse_conjugate(&g, &c, &xs).unwrap();
        for (x, val) in r.iter() {
            assert_eq!(val, c.eval(x, &y0));
        }
        let ginf = g.map_values(|_| PosInf);
        let r = reverse_conjugate(&ginf, &c, &xs).unwrap();
        assert!(r.values().iter().all(|&v| v == NegInf));
    }

    #[test]
    fn biconjugate_is_reverse_of_conjugate() {
        let pts = samples::uniform_ball(2, 12, 2.0, 5);
        let f = SampledFunction::from_fn(pts.clone(), l0x).unwrap();
        let ys = samples::uniform_ball(2, 30, 4.0, 6);
        let c = capra_coupling();
        let direct = reverse_conjugate(&conjugate(&f, &c, &ys).unwrap(), &c, &pts).unwrap();
        let bi = biconjugate(&f, &c, &ys, &pts).unwrap();
        assert_eq!(direct, bi);
    }

    #[test]
    fn elementary_function_is_recovered() {
        let y0 = v(&[1.5, -0.5]);
        let c = fenchel_coupling();
        let pts = samples::uniform_ball(2, 20, 1.0, 7);
        let f = SampledFunction::from_fn(pts.clone(), |x| c.eval(x, &y0)).unwrap();
        let mut ys = samples::uniform_ball(2, 20, 2.0, 8);
        ys.push(y0.clone());
        let bi = biconjugate(&f, &c, &ys, &pts).unwrap();
        for ((_, b), (_, fx)) in bi.iter().zip(f.iter()) {
            let (b, fx) = (b.finite().unwrap(), fx.finite().unwrap());
            assert!((b - fx).abs() < 1e-12);
        }
    }

    #[test]
    fn singleton_indicator_biconjugate_vanishes_at_its_point() {
        let x0 = v(&[0.3, 0.4]);
        let f = SampledFunction::indicator(vec![x0.clone()]).unwrap();
        let ys = samples::uniform_ball(2, 50, 5.0, 9);
        let bi = biconjugate(&f, &fenchel_coupling(), &ys, &[x0]).unwrap();
        assert_eq!(bi.values()[0], XReal::ZERO);
    }

    #[test]
    fn biconjugate_requires_points_of_f() {
        let f = SampledFunction::indicator(vec![v(&[1.0])]).unwrap();
        let err = biconjugate(&f, &fenchel_coupling(), &[v(&[1.0])], &[v(&[2.0])]);
        assert!(matches!(err, Err(EngineError::NotASamplePoint { index: 0 })));
    }

    #[test]
    fn dual_bound_examples() {
        let pts = samples::uniform_ball(2, 10, 1.0, 10);
        let ys = samples::uniform_ball(2, 10, 1.0, 11);
        let c = fenchel_coupling();
        let zero = SampledFunction::indicator(pts.clone()).unwrap();
        let b = dual_bound(&zero, &zero, &c, &ys).unwrap();
        assert_eq!(b.upper, XReal::ZERO);
        assert!(b.lower <= b.upper);

        // g = indicator of the first three points
        let f = SampledFunction::from_fn(pts.clone(), |x| XReal::from_f64(x.as_slice()[0])).unwrap();
        let g = SampledFunction::new(
            pts.clone(),
            (0..10)
                .map(|i| if i < 3 { XReal::ZERO } else { PosInf })
                .collect(),
        )
        .unwrap();
        let b = dual_bound(&f, &g, &c, &ys).unwrap();
        let expected = inf_fold(f.values()[..3].iter().copied());
        assert_eq!(b.upper, expected);
        assert!(b.lower <= b.upper);
    }

    #[test]
    fn infimal_postcomposition_examples() {
        let pts = vec![v(&[2.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 0.0])];
        let f = SampledFunction::from_fn(pts.clone(), l0x).unwrap();
        let post = infimal_postcomposition(&f, &MappingTheta::normalization());
        assert_eq!(post.len(), 2);
        assert_eq!(post.value_at(&v(&[1.0, 0.0])), Some(XReal::Finite(1.0)));
        assert_eq!(post.value_at(&v(&[0.0, 0.0])), Some(XReal::ZERO));
        assert_eq!(post.value_or_inf(&v(&[0.0, 1.0])), PosInf);

        let same = infimal_postcomposition(&f, &MappingTheta::identity());
        assert_eq!(same, f);
    }

    #[test]
    fn postcomposition_groups_rounding_noise() {
        let x = v(&[0.3, -0.7, 0.1]);
        let pts: Vec<Vector> = [1.0, 3.0, 7.3, 1e3 / 3.0]
            .iter()
            .map(|&l| x.scale(l))
            .collect();
        let f = SampledFunction::from_fn(pts, |p| XReal::from_f64(p.norm())).unwrap();
        let post = infimal_postcomposition(&f, &MappingTheta::normalization());
        assert_eq!(post.len(), 1);
        assert_eq!(post.values()[0], f.values()[0]);
    }

    #[test]
    fn one_sided_linear_couplings() {
        let x = v(&[3.0, 4.0]);
        let y = v(&[1.0, -2.0]);
        let fen = make_one_sided_linear(MappingTheta::identity());
        assert_eq!(fen.eval(&x, &y), fenchel_coupling().eval(&x, &y));
        let cap = make_one_sided_linear(MappingTheta::normalization());
        let direct = capra_coupling().eval(&x, &y).finite().unwrap();
        assert!((cap.eval(&x, &y).finite().unwrap() - direct).abs() < 1e-15);
        let zero = make_one_sided_linear(MappingTheta::zero());
        assert_eq!(zero.eval(&x, &y), XReal::ZERO);
    }

    #[test]
    fn capra_coupling_examples() {
        let c = capra_coupling();
        assert_eq!(c.eval(&v(&[3.0, 4.0]), &v(&[1.0, 0.0])), XReal::Finite(0.6));
        assert_eq!(c.eval(&v(&[0.0, 0.0]), &v(&[5.0, -1.0])), XReal::ZERO);
        let x = v(&[0.2, -1.1, 0.5]);
        let y = v(&[1.0, 2.0, -3.0]);
        let a = c.eval(&x, &y).finite().unwrap();
        let b = c.eval(&x.scale(7.3), &y).finite().unwrap();
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn reverse_and_negate() {
        let c = capra_coupling();
        let x = v(&[1.0, 2.0]);
        let y = v(&[-1.0, 0.5]);
        assert_eq!(c.reverse().eval(&y, &x), c.eval(&x, &y));
        assert_eq!(c.negate().eval(&x, &y), c.eval(&x, &y).neg());
    }

    #[test]
    fn conjugate_checks_dimensions() {
        let f = SampledFunction::indicator(vec![v(&[1.0, 2.0])]).unwrap();
        assert!(matches!(
            conjugate(&f, &capra_coupling(), &[v(&[1.0])]),
            Err(EngineError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            conjugate(&f, &capra_coupling(), &[]),
            Err(EngineError::EmptySamples)
        ));
    }

    #[test]
    fn sampled_function_validation() {
        assert!(matches!(
            SampledFunction::new(vec![], vec![]),
            Err(EngineError::EmptySamples)
        ));
        assert!(matches!(
            SampledFunction::new(vec![v(&[1.0]), v(&[1.0])], vec![XReal::ZERO; 2]),
            Err(EngineError::DuplicatePoint { index: 1 })
        ));
        assert!(matches!(
            SampledFunction::new(vec![v(&[1.0]), v(&[1.0, 2.0])], vec![XReal::ZERO; 2]),
            Err(EngineError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            SampledFunction::new(vec![v(&[0.0]), v(&[-0.0])], vec![XReal::ZERO; 2]),
            Err(EngineError::DuplicatePoint { .. })
        ));
    }

    #[test]
    fn sample_constructors() {
        let a = samples::uniform_ball(3, 50, 2.0, 42);
        let b = samples::uniform_ball(3, 50, 2.0, 42);
        assert_eq!(a, b);
        assert!(a.iter().all(|p| p.norm() <= 2.0));
        let s = samples::signed_support_vectors(3);
        assert_eq!(s.len(), 26);
        assert!(s.iter().all(|p| (p.norm() - 1.0).abs() < 1e-15));
        assert_eq!(samples::geometric_ladder(5.0), vec![1.0, 2.0, 4.0, 5.0]);
        assert_eq!(samples::geometric_ladder(4.0), vec![1.0, 2.0, 4.0]);
        let r = samples::ray_ladder(&v(&[1.0, -1.0]), &[2.0, 3.0]);
        assert_eq!(r[1], v(&[3.0, -3.0]));
    }
}
