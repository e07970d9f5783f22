//! Dense real vectors, coordinate support sets and vector files.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VectorError {
    #[error("vector must have at least one entry")]
    Empty,
    #[error("entry {index} is NaN")]
    NotANumber { index: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("support set index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("support sets are limited to dimension {max}, got {dim}")]
    DimensionTooLarge { dim: usize, max: usize },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {reason}")]
    Parse { path: String, reason: String },
}

/// A point of `R^d`, `d >= 1`, with no NaN entries.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(entries: Vec<f64>) -> Result<Self, VectorError> {
        if entries.is_empty() {
            return Err(VectorError::Empty);
        }
        if let Some(index) = entries.iter().position(|v| v.is_nan()) {
            return Err(VectorError::NotANumber { index });
        }
        Ok(Vector(entries))
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "vector dimension must be at least 1");
        Vector(vec![0.0; dim])
    }

    /// The canonical basis vector `e_i` (0-based).
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[i] = 1.0;
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &Vector) -> Result<f64, VectorError> {
        self.check_dim(other.dim())?;
        Ok(dot(&self.0, &other.0))
    }

    /// Euclidean norm, accumulated over squares in non-increasing order.
    ///
    /// This is the summation order used by the top-k norms as well, so that
    /// `topk_norm(x, d)` and `norm()` agree bit for bit.
    pub fn norm(&self) -> f64 {
        let mut squares: Vec<f64> = self.0.iter().map(|v| v * v).collect();
        squares.sort_unstable_by(|a, b| b.total_cmp(a));
        squares.iter().sum::<f64>().sqrt()
    }

    pub fn scale(&self, lambda: f64) -> Vector {
        Vector(self.0.iter().map(|v| lambda * v).collect())
    }

    pub fn add(&self, other: &Vector) -> Result<Vector, VectorError> {
        self.check_dim(other.dim())?;
        Ok(Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    pub fn sub(&self, other: &Vector) -> Result<Vector, VectorError> {
        self.check_dim(other.dim())?;
        Ok(Vector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    /// Bitwise identity of the entries, with `-0.0` and `0.0` identified.
    pub fn same_point(&self, other: &Vector) -> bool {
        self.dim() == other.dim() && self.0.iter().zip(&other.0).all(|(a, b)| a == b)
    }

    pub(crate) fn check_dim(&self, got: usize) -> Result<(), VectorError> {
        if got != self.dim() {
            Err(VectorError::DimensionMismatch {
                expected: self.dim(),
                got,
            })
        } else {
            Ok(())
        }
    }

    /// Reads a vector from `.json` (array of numbers) or any other extension
    /// as whitespace/newline separated text.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Vector, VectorError> {
        let path = path.as_ref();
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| VectorError::Io {
            path: shown.clone(),
            source,
        })?;
        let is_json = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if is_json {
            Self::parse_json(&text).map_err(|reason| VectorError::Parse {
                path: shown,
                reason,
            })
        } else {
            Self::parse_text(&text).map_err(|reason| VectorError::Parse {
                path: shown,
                reason,
            })
        }
    }

    pub fn parse_json(text: &str) -> Result<Vector, String> {
        let entries: Vec<f64> = serde_json::from_str(text).map_err(|e| e.to_string())?;
        Vector::new(entries).map_err(|e| e.to_string())
    }

    pub fn parse_text(text: &str) -> Result<Vector, String> {
        let entries = text
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|e| format!("bad number {tok:?}: {e}"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Vector::new(entries).map_err(|e| e.to_string())
    }
}

impl<'de> Deserialize<'de> for Vector {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let entries = Vec::<f64>::deserialize(deserializer)?;
        Vector::new(entries).map_err(serde::de::Error::custom)
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = VectorError;
    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        Vector::new(v)
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Largest dimension a [`SupportSet`] can describe.
pub const MAX_SUPPORT_DIM: usize = 64;

/// A subset `K` of the coordinates `{0, .., dim-1}`, stored as a bitmask.
///
/// Indices are 0-based throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SupportSet {
    dim: usize,
    mask: u64,
}

impl SupportSet {
    pub fn empty(dim: usize) -> Result<Self, VectorError> {
        Self::check_dim_limit(dim)?;
        Ok(SupportSet { dim, mask: 0 })
    }

    pub fn full(dim: usize) -> Result<Self, VectorError> {
        Self::check_dim_limit(dim)?;
        let mask = if dim == 64 { u64::MAX } else { (1u64 << dim) - 1 };
        Ok(SupportSet { dim, mask })
    }

    pub fn from_indices(dim: usize, indices: &[usize]) -> Result<Self, VectorError> {
        let mut set = Self::empty(dim)?;
        for &index in indices {
            if index >= dim {
                return Err(VectorError::IndexOutOfRange { index, dim });
            }
            set.mask |= 1 << index;
        }
        Ok(set)
    }

    pub fn from_mask(dim: usize, mask: u64) -> Result<Self, VectorError> {
        let full = Self::full(dim)?;
        if mask & !full.mask != 0 {
            return Err(VectorError::IndexOutOfRange {
                index: 63 - (mask & !full.mask).leading_zeros() as usize,
                dim,
            });
        }
        Ok(SupportSet { dim, mask })
    }

    fn check_dim_limit(dim: usize) -> Result<(), VectorError> {
        if dim > MAX_SUPPORT_DIM {
            Err(VectorError::DimensionTooLarge {
                dim,
                max: MAX_SUPPORT_DIM,
            })
        } else {
            Ok(())
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.dim && self.mask & (1 << i) != 0
    }

    /// The complement `-K` within `{0, .., dim-1}`.
    pub fn complement(&self) -> SupportSet {
        let full = SupportSet::full(self.dim).expect("dimension already validated");
        SupportSet {
            dim: self.dim,
            mask: full.mask & !self.mask,
        }
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.dim).filter(|&i| self.contains(i)).collect()
    }
}

impl Serialize for SupportSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.indices().serialize(serializer)
    }
}

impl fmt::Display for SupportSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.indices())
    }
}

/// `x_K`: keeps the coordinates in `K`, zeroes the others.
pub fn project(x: &Vector, k: &SupportSet) -> Result<Vector, VectorError> {
    x.check_dim(k.dim())?;
    Ok(Vector(
        x.0.iter()
            .enumerate()
            .map(|(i, &v)| if k.contains(i) { v } else { 0.0 })
            .collect(),
    ))
}

/// Number of entries with `|x_i| > zero_tol`.
pub fn l0(x: &Vector, zero_tol: f64) -> usize {
    x.0.iter().filter(|v| v.abs() > zero_tol).count()
}

/// The primal normalization `x / |x|`, with `0` sent to `0`.
pub fn normalization(x: &Vector) -> Vector {
    let n = x.norm();
    if n == 0.0 {
        Vector::zeros(x.dim())
    } else {
        Vector(x.0.iter().map(|v| v / n).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(e: &[f64]) -> Vector {
        Vector::new(e.to_vec()).unwrap()
    }

    #[test]
    fn rejects_empty_and_nan() {
        assert!(matches!(Vector::new(vec![]), Err(VectorError::Empty)));
        assert!(matches!(
            Vector::new(vec![1.0, f64::NAN]),
            Err(VectorError::NotANumber { index: 1 })
        ));
    }

    #[test]
    fn projection_examples() {
        let x = v(&[3.0, 0.0, -4.0]);
        let k1 = SupportSet::from_indices(3, &[0]).unwrap();
        assert_eq!(project(&x, &k1).unwrap(), v(&[3.0, 0.0, 0.0]));
        let full = SupportSet::full(3).unwrap();
        assert_eq!(project(&x, &full).unwrap(), x);
        let none = SupportSet::empty(3).unwrap();
        assert_eq!(project(&x, &none).unwrap(), v(&[0.0, 0.0, 0.0]));
    }

    #[test]
    fn projection_dimension_mismatch() {
        let x = v(&[1.0, 2.0]);
        let k = SupportSet::full(3).unwrap();
        assert!(matches!(
            project(&x, &k),
            Err(VectorError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn complement_partitions() {
        let k = SupportSet::from_indices(5, &[1, 3]).unwrap();
        let c = k.complement();
        assert_eq!(c.indices(), vec![0, 2, 4]);
        assert_eq!(k.mask() & c.mask(), 0);
        assert_eq!(k.mask() | c.mask(), SupportSet::full(5).unwrap().mask());
        assert!(SupportSet::from_indices(3, &[3]).is_err());
        assert!(SupportSet::full(65).is_err());
        assert_eq!(SupportSet::full(64).unwrap().len(), 64);
    }

    #[test]
    fn l0_examples() {
        assert_eq!(l0(&v(&[0.0, 0.0, 0.0]), 0.0), 0);
        assert_eq!(l0(&v(&[3.0, 0.0, -4.0]), 0.0), 2);
        assert_eq!(l0(&v(&[1e-15, 1.0, 0.0]), 1e-12), 1);
    }

    #[test]
    fn normalization_examples() {
        let n = normalization(&v(&[3.0, 4.0]));
        assert!((n.as_slice()[0] - 0.6).abs() < 1e-15);
        assert!((n.as_slice()[1] - 0.8).abs() < 1e-15);
        assert_eq!(normalization(&v(&[0.0, 0.0])), v(&[0.0, 0.0]));
        let on_sphere = v(&[0.6, 0.8]);
        let again = normalization(&on_sphere);
        for (a, b) in again.as_slice().iter().zip(on_sphere.as_slice()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn parses_text_and_json() {
        assert_eq!(Vector::parse_text("3 0\n-4\n").unwrap(), v(&[3.0, 0.0, -4.0]));
        assert_eq!(Vector::parse_json("[3, 0, -4]").unwrap(), v(&[3.0, 0.0, -4.0]));
        assert!(Vector::parse_text("1 x").is_err());
        assert!(Vector::parse_json("[]").is_err());
    }
}
