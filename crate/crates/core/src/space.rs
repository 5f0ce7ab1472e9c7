//! Finite metric spaces, one-point extensions and cross ratios.
//!
//! Balls are closed throughout: `B(x, r) = { y : d(x, y) <= r }`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// Read access to a square matrix of pairwise values.
///
/// Implemented by validated metric spaces and by unvalidated quasi-metrics,
/// so scans such as the strong triangle check work on either.
pub trait Distances {
    fn len(&self) -> usize;
    fn dist(&self, i: usize, j: usize) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MetricError {
    EmptySpace,
    NotSquare { row: usize, len: usize, expected: usize },
    LabelCount { labels: usize, points: usize },
    DuplicateLabel(String),
    UnknownLabel(String),
    NonFinite { i: usize, j: usize },
    NegativeDistance { i: usize, j: usize },
    NonzeroDiagonal { i: usize },
    ZeroDistance { i: usize, j: usize },
    AsymmetricMatrix { i: usize, j: usize },
    /// `d(i, k) > d(i, j) + d(j, k) + tol`.
    TriangleViolation { i: usize, j: usize, k: usize },
    InvalidTolerance,
    IndexOutOfRange { index: usize, len: usize },
    DuplicatePoints,
    ZeroDenominator,
}

impl fmt::Display for MetricError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use MetricError::*;
        match self {
            EmptySpace => write!(f, "a space needs at least one point"),
            NotSquare { row, len, expected } => {
                write!(f, "row {row} has {len} entries, expected {expected}")
            }
            LabelCount { labels, points } => write!(f, "{labels} labels for {points} points"),
            DuplicateLabel(l) => write!(f, "duplicate label {l:?}"),
            UnknownLabel(l) => write!(f, "unknown label {l:?}"),
            NonFinite { i, j } => write!(f, "entry ({i}, {j}) is not finite"),
            NegativeDistance { i, j } => write!(f, "entry ({i}, {j}) is negative"),
            NonzeroDiagonal { i } => write!(f, "diagonal entry {i} is not zero"),
            ZeroDistance { i, j } => write!(f, "distinct points {i} and {j} are at distance 0"),
            AsymmetricMatrix { i, j } => write!(f, "entries ({i}, {j}) and ({j}, {i}) differ"),
            TriangleViolation { i, j, k } => {
                write!(f, "triangle inequality fails: d({i},{k}) > d({i},{j}) + d({j},{k})")
            }
            InvalidTolerance => write!(f, "tolerance must be finite and nonnegative"),
            IndexOutOfRange { index, len } => write!(f, "point index {index} out of range for {len} points"),
            DuplicatePoints => write!(f, "cross ratio needs four distinct points"),
            ZeroDenominator => write!(f, "cross ratio denominator vanishes"),
        }
    }
}

impl core::error::Error for MetricError {}

/// Labels `"0"`, `"1"`, ... for anonymous point sets.
pub fn numbered_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// A validated finite metric space.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    dist: Vec<f64>,
}

impl FiniteMetricSpace {
    /// Default absolute tolerance for the symmetry and triangle checks.
    pub const DEFAULT_TOL: f64 = 1e-9;

    /// Validates a square matrix: finite nonnegative entries, zero diagonal,
    /// positive off-diagonal entries, symmetry and the triangle inequality,
    /// the last two within the absolute tolerance `tol`.
    ///
    /// The stored matrix is made exactly symmetric by mirroring the upper
    /// triangle.
    pub fn new(rows: &[Vec<f64>], labels: Vec<String>, tol: f64) -> Result<Self, MetricError> {
        let n = rows.len();
        let mut flat = Vec::with_capacity(n * n);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(MetricError::NotSquare { row: r, len: row.len(), expected: n });
            }
            flat.extend_from_slice(row);
        }
        Self::from_flat(flat, labels, tol)
    }

    /// Like [`FiniteMetricSpace::new`] with a row-major flat matrix.
    pub fn from_flat(mut dist: Vec<f64>, labels: Vec<String>, tol: f64) -> Result<Self, MetricError> {
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(MetricError::InvalidTolerance);
        }
        let n = labels.len();
        if n == 0 {
            return Err(MetricError::EmptySpace);
        }
        if dist.len() != n * n {
            return Err(MetricError::LabelCount { labels: n, points: isqrt(dist.len()) });
        }
        check_labels(&labels)?;
        for i in 0..n {
            for j in 0..n {
                let v = dist[i * n + j];
                if !v.is_finite() {
                    return Err(MetricError::NonFinite { i, j });
                }
                if v < 0.0 {
                    return Err(MetricError::NegativeDistance { i, j });
                }
            }
        }
        for i in 0..n {
            if dist[i * n + i] != 0.0 {
                return Err(MetricError::NonzeroDiagonal { i });
            }
            for j in (i + 1)..n {
                let a = dist[i * n + j];
                let b = dist[j * n + i];
                if (a - b).abs() > tol {
                    return Err(MetricError::AsymmetricMatrix { i, j });
                }
                if a == 0.0 {
                    return Err(MetricError::ZeroDistance { i, j });
                }
                dist[j * n + i] = a;
            }
        }
        for i in 0..n {
            for k in (i + 1)..n {
                let dik = dist[i * n + k];
                for j in 0..n {
                    if j != i && j != k && dik > dist[i * n + j] + dist[j * n + k] + tol {
                        return Err(MetricError::TriangleViolation { i, j, k });
                    }
                }
            }
        }
        Ok(FiniteMetricSpace { labels, dist })
    }

    /// Builds and validates a space from a distance function.
    pub fn from_fn<F>(labels: Vec<String>, tol: f64, mut f: F) -> Result<Self, MetricError>
    where
        F: FnMut(usize, usize) -> f64,
    {
        let n = labels.len();
        let mut dist = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                dist.push(if i == j { 0.0 } else { f(i, j) });
            }
        }
        Self::from_flat(dist, labels, tol)
    }

    /// Skips validation. Callers guarantee a metric by construction
    /// (Cantor materialization, tree metrics, deformations of validated input).
    pub(crate) fn trusted(labels: Vec<String>, dist: Vec<f64>) -> Self {
        debug_assert_eq!(labels.len() * labels.len(), dist.len());
        FiniteMetricSpace { labels, dist }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.labels.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.len();
        &self.dist[i * n..(i + 1) * n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn flat(&self) -> &[f64] {
        &self.dist
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// Smallest positive distance, `None` for a single point.
    pub fn min_distance(&self) -> Option<f64> {
        let n = self.len();
        let mut best: Option<f64> = None;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = self.dist(i, j);
                best = Some(best.map_or(d, |b| b.min(d)));
            }
        }
        best
    }

    /// Sorted distinct positive distances.
    pub fn distinct_distances(&self) -> Vec<f64> {
        let n = self.len();
        let mut v: Vec<f64> = Vec::with_capacity(n * (n.saturating_sub(1)) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                v.push(self.dist(i, j));
            }
        }
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// Closed ball, in index order.
    pub fn ball(&self, x: usize, r: f64) -> Vec<usize> {
        (0..self.len()).filter(|&y| self.dist(x, y) <= r).collect()
    }

    /// All distances multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> FiniteMetricSpace {
        assert!(c > 0.0 && c.is_finite(), "scale factor must be positive");
        FiniteMetricSpace { labels: self.labels.clone(), dist: self.dist.iter().map(|d| d * c).collect() }
    }

    /// The subspace on `keep` (in the given order).
    pub fn subspace(&self, keep: &[usize]) -> FiniteMetricSpace {
        let labels = keep.iter().map(|&i| self.labels[i].clone()).collect();
        let mut dist = Vec::with_capacity(keep.len() * keep.len());
        for &i in keep {
            for &j in keep {
                dist.push(self.dist(i, j));
            }
        }
        FiniteMetricSpace { labels, dist }
    }

    pub(crate) fn check_index(&self, i: usize) -> Result<(), MetricError> {
        if i < self.len() {
            Ok(())
        } else {
            Err(MetricError::IndexOutOfRange { index: i, len: self.len() })
        }
    }
}

impl Distances for FiniteMetricSpace {
    fn len(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    fn dist(&self, i: usize, j: usize) -> f64 {
        FiniteMetricSpace::dist(self, i, j)
    }
}

fn isqrt(m: usize) -> usize {
    let mut r = 0usize;
    while (r + 1) * (r + 1) <= m {
        r += 1;
    }
    r
}

fn check_labels(labels: &[String]) -> Result<(), MetricError> {
    let mut sorted: Vec<&String> = labels.iter().collect();
    sorted.sort();
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(MetricError::DuplicateLabel(w[0].clone()));
        }
    }
    Ok(())
}

/// A square matrix of pairwise values that is explicitly *not* verified to
/// be a metric, e.g. the output of sphericalization. It can be scanned but
/// does not convert to a [`FiniteMetricSpace`] without validation.
#[derive(Clone, Debug, PartialEq)]
pub struct QuasiMetricSpace {
    labels: Vec<String>,
    dist: Vec<f64>,
}

impl QuasiMetricSpace {
    pub(crate) fn from_parts(labels: Vec<String>, dist: Vec<f64>) -> Self {
        debug_assert_eq!(labels.len() * labels.len(), dist.len());
        QuasiMetricSpace { labels, dist }
    }

    /// Accepts any symmetric matrix with finite nonnegative entries and a
    /// zero diagonal. No triangle check.
    pub fn new(rows: &[Vec<f64>], labels: Vec<String>) -> Result<Self, MetricError> {
        let n = labels.len();
        if n == 0 {
            return Err(MetricError::EmptySpace);
        }
        if rows.len() != n {
            return Err(MetricError::LabelCount { labels: n, points: rows.len() });
        }
        check_labels(&labels)?;
        let mut dist = Vec::with_capacity(n * n);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(MetricError::NotSquare { row: r, len: row.len(), expected: n });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(MetricError::NonFinite { i: r, j });
                }
                if v < 0.0 {
                    return Err(MetricError::NegativeDistance { i: r, j });
                }
            }
            dist.extend_from_slice(row);
        }
        for i in 0..n {
            if dist[i * n + i] != 0.0 {
                return Err(MetricError::NonzeroDiagonal { i });
            }
            for j in (i + 1)..n {
                if dist[i * n + j] != dist[j * n + i] {
                    return Err(MetricError::AsymmetricMatrix { i, j });
                }
            }
        }
        Ok(QuasiMetricSpace { labels, dist })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        let n = self.labels.len();
        (0..n).map(|i| self.dist[i * n..(i + 1) * n].to_vec()).collect()
    }

    /// Runs full metric validation.
    pub fn try_into_metric(self, tol: f64) -> Result<FiniteMetricSpace, MetricError> {
        FiniteMetricSpace::from_flat(self.dist, self.labels, tol)
    }
}

impl Distances for QuasiMetricSpace {
    fn len(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.labels.len() + j]
    }
}

/// A finite space with an optional distinguished point `∞`.
///
/// The marked point is an ordinary index with materialized distances. When
/// it is *deleted* (the default: `∞` stands for a point at infinite
/// distance) cross ratios drop the factors involving it and distortion scans
/// leave it out. A *compactified* `∞`, as produced by the chordal
/// extension, is a genuine point at finite distance and enters every
/// computation with its distances.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedSpace {
    base: FiniteMetricSpace,
    infinity: Option<usize>,
    deleted: bool,
}

/// Label used for an adjoined point at infinity.
pub const INFINITY_LABEL: &str = "∞";

/// A label not already used in `labels`, starting from `"∞"`.
pub(crate) fn fresh_infinity_label(labels: &[String]) -> String {
    let mut candidate = String::from(INFINITY_LABEL);
    let mut k = 1;
    while labels.contains(&candidate) {
        candidate = format!("{INFINITY_LABEL}{k}");
        k += 1;
    }
    candidate
}

impl ExtendedSpace {
    pub fn new(base: FiniteMetricSpace, infinity: Option<usize>) -> Result<Self, MetricError> {
        if let Some(i) = infinity {
            base.check_index(i)?;
        }
        Ok(ExtendedSpace { base, infinity, deleted: true })
    }

    /// Marks `infinity` as a genuine point: its distances are used as is.
    pub fn compactified(base: FiniteMetricSpace, infinity: usize) -> Result<Self, MetricError> {
        base.check_index(infinity)?;
        Ok(ExtendedSpace { base, infinity: Some(infinity), deleted: false })
    }

    /// A space without a point at infinity.
    pub fn plain(base: FiniteMetricSpace) -> Self {
        ExtendedSpace { base, infinity: None, deleted: true }
    }

    /// Appends a point `∞` at distance `max(diam, 1)` from every point. The
    /// placeholder distances keep the space metric (and ultrametric when the
    /// base is), but every cross ratio involving `∞` deletes them, so the
    /// value never enters Möbius or quasimöbius computations.
    pub fn adjoin_infinity(base: &FiniteMetricSpace) -> Self {
        let n = base.len();
        let far = base.diameter().max(1.0);
        let mut labels = base.labels().to_vec();
        labels.push(fresh_infinity_label(base.labels()));
        let m = n + 1;
        let mut dist = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                let v = if i == j {
                    0.0
                } else if i == n || j == n {
                    far
                } else {
                    base.dist(i, j)
                };
                dist.push(v);
            }
        }
        ExtendedSpace { base: FiniteMetricSpace::trusted(labels, dist), infinity: Some(n), deleted: true }
    }

    pub fn base(&self) -> &FiniteMetricSpace {
        &self.base
    }

    pub fn into_base(self) -> FiniteMetricSpace {
        self.base
    }

    pub fn infinity(&self) -> Option<usize> {
        self.infinity
    }

    /// The marked `∞` if it is deleted from cross ratios and scans.
    pub fn deleted_point(&self) -> Option<usize> {
        if self.deleted {
            self.infinity
        } else {
            None
        }
    }

    /// Forgets the marking: `∞` becomes an ordinary point.
    pub fn into_plain(self) -> ExtendedSpace {
        ExtendedSpace::plain(self.base)
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    /// The factor used in cross ratios: `1` when either point is a deleted `∞`.
    #[inline]
    pub fn cross_factor(&self, i: usize, j: usize) -> f64 {
        if self.deleted && (Some(i) == self.infinity || Some(j) == self.infinity) {
            1.0
        } else {
            self.base.dist(i, j)
        }
    }
}

impl Distances for ExtendedSpace {
    fn len(&self) -> usize {
        self.base.len()
    }

    #[inline]
    fn dist(&self, i: usize, j: usize) -> f64 {
        self.base.dist(i, j)
    }
}

/// `r(x,y,z,w) = d(x,z) d(y,w) / (d(x,y) d(z,w))`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CrossRatio(pub f64);

impl CrossRatio {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Cross ratio of four distinct points. If one of them is the marked `∞`,
/// the two distances involving it are deleted, e.g. `r(x,y,z,∞) = d(x,z)/d(x,y)`.
pub fn cross_ratio(
    space: &ExtendedSpace,
    x: usize,
    y: usize,
    z: usize,
    w: usize,
) -> Result<CrossRatio, MetricError> {
    for i in [x, y, z, w] {
        space.base.check_index(i)?;
    }
    let pts = [x, y, z, w];
    for a in 0..4 {
        for b in (a + 1)..4 {
            if pts[a] == pts[b] {
                return Err(MetricError::DuplicatePoints);
            }
        }
    }
    let den = space.cross_factor(x, y) * space.cross_factor(z, w);
    if den == 0.0 {
        return Err(MetricError::ZeroDenominator);
    }
    Ok(CrossRatio(space.cross_factor(x, z) * space.cross_factor(y, w) / den))
}
