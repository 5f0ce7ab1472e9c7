//! Distortion of point maps: bilipschitz, weak quasisymmetry and weak
//! quasimöbius constants, and Möbius checks.
//!
//! Scans over triples and quadruples come in two layers: `*_partial`
//! functions cover the first index in a given range and return mergeable
//! partial results, so a caller can split the work across threads; the
//! plain functions run one partial over everything. Merges keep the
//! lexicographically least witness among equal maxima, so any split gives
//! the same report.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use rand::Rng;

use crate::cantor::ExponentMatrix;
use crate::random::seeded;
use crate::space::{Distances, ExtendedSpace};

#[derive(Clone, Debug, PartialEq)]
pub enum DistortError {
    LengthMismatch { source: usize, target: usize },
    NotBijective { index: usize },
    /// Exhaustive quadruple scan refused; see [`QM_CAP`].
    TooLarge { n: usize, cap: usize },
}

impl fmt::Display for DistortError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistortError::LengthMismatch { source, target } => {
                write!(f, "source has {source} points but target has {target}")
            }
            DistortError::NotBijective { index } => write!(f, "assignment is not a bijection at target index {index}"),
            DistortError::TooLarge { n, cap } => {
                write!(f, "{n} points exceed the quadruple scan cap of {cap}; force sampling to proceed")
            }
        }
    }
}

impl core::error::Error for DistortError {}

/// Largest space scanned exhaustively over quadruples by default.
pub const QM_CAP: usize = 60;
/// Number of random quadruples drawn when a larger scan is forced.
pub const QM_SAMPLES: usize = 1_000_000;

/// A bijection between the points of two spaces, by index.
#[derive(Clone, Debug, PartialEq)]
pub struct PointMap {
    source: ExtendedSpace,
    target: ExtendedSpace,
    assignment: Vec<usize>,
}

impl PointMap {
    pub fn new(source: ExtendedSpace, target: ExtendedSpace, assignment: Vec<usize>) -> Result<Self, DistortError> {
        let n = source.len();
        if target.len() != n || assignment.len() != n {
            return Err(DistortError::LengthMismatch { source: n, target: target.len() });
        }
        let mut hit = vec![false; n];
        for &j in &assignment {
            if j >= n || hit[j] {
                return Err(DistortError::NotBijective { index: j });
            }
            hit[j] = true;
        }
        Ok(PointMap { source, target, assignment })
    }

    /// Point `i` goes to point `i`.
    pub fn identity(source: ExtendedSpace, target: ExtendedSpace) -> Result<Self, DistortError> {
        let n = source.len();
        PointMap::new(source, target, (0..n).collect())
    }

    pub fn source(&self) -> &ExtendedSpace {
        &self.source
    }

    pub fn target(&self) -> &ExtendedSpace {
        &self.target
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// `∞` maps to `∞` (vacuously true when the source has none).
    pub fn preserves_infinity(&self) -> bool {
        match self.source.infinity() {
            Some(i) => Some(self.assignment[i]) == self.target.infinity(),
            None => true,
        }
    }

    /// `next ∘ self`. The target of `self` and the source of `next` must
    /// have the same number of points; they are identified by index.
    pub fn then(&self, next: &PointMap) -> Result<PointMap, DistortError> {
        if next.len() != self.len() {
            return Err(DistortError::LengthMismatch { source: self.len(), target: next.len() });
        }
        let assignment = self.assignment.iter().map(|&j| next.assignment[j]).collect();
        PointMap::new(self.source.clone(), next.target.clone(), assignment)
    }

    /// Indices of points that are not a deleted `∞` on either side.
    fn finite_points(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| {
                Some(i) != self.source.deleted_point() && Some(self.assignment[i]) != self.target.deleted_point()
            })
            .collect()
    }

    fn cross_tables(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.len();
        let mut a = vec![0.0; n * n];
        let mut b = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = self.source.cross_factor(i, j);
                b[i * n + j] = self.target.cross_factor(self.assignment[i], self.assignment[j]);
            }
        }
        (a, b)
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BilipReport {
    pub constant: f64,
    pub witness: Option<[usize; 2]>,
}

/// `L = max over pairs of max(q, 1/q)` with `q = d_2(f x, f y) / d_1(x, y)`.
/// Points that are a deleted `∞` on either side are left out.
pub fn bilipschitz_of_map(map: &PointMap) -> BilipReport {
    let pts = map.finite_points();
    let mut report = BilipReport { constant: 1.0, witness: None };
    let mut best = f64::NEG_INFINITY;
    for (a, &x) in pts.iter().enumerate() {
        for &y in &pts[a + 1..] {
            let q = map.target.dist(map.assignment[x], map.assignment[y]) / map.source.dist(x, y);
            let v = q.max(1.0 / q);
            if v > best {
                best = v;
                report.witness = Some([x, y]);
            }
        }
    }
    report.constant = best.max(1.0);
    report
}

/// The upper envelope of observed `(in-ratio, out-ratio)` pairs: points not
/// dominated by another with smaller or equal input and larger or equal
/// output. A homeomorphism `η` majorizes all the data iff it majorizes
/// these points, by monotonicity.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepData {
    // keyed by f64 bits: order-preserving for nonnegative values
    steps: BTreeMap<u64, f64>,
}

impl StepData {
    pub fn new() -> Self {
        StepData::default()
    }

    pub fn insert(&mut self, input: f64, output: f64) {
        let key = input.to_bits();
        if let Some((_, &prev)) = self.steps.range(..=key).next_back() {
            if prev >= output {
                return;
            }
        }
        let dominated: Vec<u64> =
            self.steps.range(key..).take_while(|(_, &v)| v <= output).map(|(&k, _)| k).collect();
        for k in dominated {
            self.steps.remove(&k);
        }
        self.steps.insert(key, output);
    }

    pub fn merge(&mut self, other: &StepData) {
        for (&k, &v) in &other.steps {
            self.insert(f64::from_bits(k), v);
        }
    }

    /// Envelope points in increasing order of both coordinates.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.steps.iter().map(|(&k, &v)| (f64::from_bits(k), v)).collect()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Whether `eta(t) >= out` at every envelope point.
    pub fn majorized_by<F: Fn(f64) -> f64>(&self, eta: F) -> bool {
        self.points().into_iter().all(|(t, o)| eta(t) >= o)
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for StepData {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = serializer.serialize_seq(Some(self.steps.len()))?;
        for p in self.points() {
            seq.serialize_element(&[p.0, p.1])?;
        }
        seq.end()
    }
}

/// Running maximum over a scan with its witness and step data.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanPartial {
    pub best: f64,
    pub witness: Option<Vec<usize>>,
    pub steps: StepData,
    pub exhaustive: bool,
}

impl ScanPartial {
    fn new() -> Self {
        ScanPartial { best: f64::NEG_INFINITY, witness: None, steps: StepData::new(), exhaustive: true }
    }

    fn offer(&mut self, value: f64, witness: &[usize]) {
        if value > self.best {
            self.best = value;
            self.witness = Some(witness.to_vec());
        }
    }

    pub fn merge(mut self, other: ScanPartial) -> ScanPartial {
        let take = other.best > self.best
            || (other.best == self.best && other.witness.is_some() && (self.witness.is_none() || other.witness < self.witness));
        if take {
            self.best = other.best;
            self.witness = other.witness;
        }
        self.steps.merge(&other.steps);
        self.exhaustive &= other.exhaustive;
        self
    }

    /// The constant is floored at 1.
    pub fn finish(self) -> WeakReport {
        WeakReport { constant: self.best.max(1.0), witness: self.witness, steps: self.steps, exhaustive: self.exhaustive }
    }
}

/// A weak distortion constant: the worst output ratio over configurations
/// whose input ratio is at most 1, floored at 1.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct WeakReport {
    pub constant: f64,
    /// The configuration attaining the raw maximum (before flooring).
    pub witness: Option<Vec<usize>>,
    pub steps: StepData,
    /// False when the value comes from sampling and is only a lower bound.
    pub exhaustive: bool,
}

/// Triples `(x, y, z)` with `x` in `xs`: input `d_1(x,z)/d_1(x,y)`, output
/// `d_2(f x, f z)/d_2(f x, f y)`. Deleted points at `∞` are left out.
pub fn weak_qs_partial(map: &PointMap, xs: Range<usize>) -> ScanPartial {
    let pts = map.finite_points();
    let n = map.len();
    let a = &map.assignment;
    let mut acc = ScanPartial::new();
    let mut out_row = vec![0.0; n];
    for x in xs.filter(|x| pts.binary_search(x).is_ok()) {
        for &z in &pts {
            out_row[z] = map.target.dist(a[x], a[z]);
        }
        for &y in &pts {
            if y == x {
                continue;
            }
            let (d1y, d2y) = (map.source.dist(x, y), out_row[y]);
            for &z in &pts {
                if z == x || z == y {
                    continue;
                }
                let input = map.source.dist(x, z) / d1y;
                let output = out_row[z] / d2y;
                acc.steps.insert(input, output);
                if input <= 1.0 {
                    acc.offer(output, &[x, y, z]);
                }
            }
        }
    }
    acc
}

pub fn weak_qs_constant(map: &PointMap) -> WeakReport {
    weak_qs_partial(map, 0..map.len()).finish()
}

/// Ordered quadruples of distinct points `(x, y, z, w)` with `x` in `xs`:
/// input `r(x,y,z,w)`, output `r(f x, f y, f z, f w)`, cross ratios with the
/// deletion rule at a deleted `∞` on either side.
pub fn weak_qm_partial(map: &PointMap, xs: Range<usize>) -> ScanPartial {
    let n = map.len();
    let (s, t) = map.cross_tables();
    let mut acc = ScanPartial::new();
    for x in xs {
        for y in 0..n {
            if y == x {
                continue;
            }
            let (sxy, txy) = (s[x * n + y], t[x * n + y]);
            for z in 0..n {
                if z == x || z == y {
                    continue;
                }
                let (sxz, txz) = (s[x * n + z], t[x * n + z]);
                for w in 0..n {
                    if w == x || w == y || w == z {
                        continue;
                    }
                    let input = sxz * s[y * n + w] / (sxy * s[z * n + w]);
                    let output = txz * t[y * n + w] / (txy * t[z * n + w]);
                    acc.steps.insert(input, output);
                    if input <= 1.0 {
                        acc.offer(output, &[x, y, z, w]);
                    }
                }
            }
        }
    }
    acc
}

/// Random distinct quadruples; the result is a lower bound.
pub fn weak_qm_sampled(map: &PointMap, samples: usize, seed: u64) -> WeakReport {
    let n = map.len();
    let mut acc = ScanPartial::new();
    acc.exhaustive = false;
    if n < 4 {
        return acc.finish();
    }
    let (s, t) = map.cross_tables();
    let mut rng = seeded(seed);
    for _ in 0..samples {
        let mut q = [0usize; 4];
        let mut k = 0;
        while k < 4 {
            let c = rng.random_range(0..n);
            if !q[..k].contains(&c) {
                q[k] = c;
                k += 1;
            }
        }
        let [x, y, z, w] = q;
        let input = s[x * n + z] * s[y * n + w] / (s[x * n + y] * s[z * n + w]);
        let output = t[x * n + z] * t[y * n + w] / (t[x * n + y] * t[z * n + w]);
        acc.steps.insert(input, output);
        if input <= 1.0 {
            let better = output > acc.best || (output == acc.best && acc.witness.as_deref().is_some_and(|v| q[..] < *v));
            if better {
                acc.best = output;
                acc.witness = Some(q.to_vec());
            }
        }
    }
    acc.finish()
}

/// Exhaustive up to [`QM_CAP`] points; beyond that an error unless `force`,
/// in which case [`QM_SAMPLES`] seeded random quadruples are used.
pub fn weak_qm_constant(map: &PointMap, force: bool, seed: u64) -> Result<WeakReport, DistortError> {
    let n = map.len();
    if n <= QM_CAP {
        Ok(weak_qm_partial(map, 0..n).finish())
    } else if force {
        Ok(weak_qm_sampled(map, QM_SAMPLES, seed))
    } else {
        Err(DistortError::TooLarge { n, cap: QM_CAP })
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MobiusReport {
    pub holds: bool,
    /// Largest `|r' - r| / r` over quadruples of distinct points.
    pub deviation: f64,
    pub witness: Option<[usize; 4]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MobiusPartial {
    pub deviation: f64,
    pub witness: Option<[usize; 4]>,
}

impl MobiusPartial {
    pub fn merge(self, other: MobiusPartial) -> MobiusPartial {
        let take = other.deviation > self.deviation
            || (other.deviation == self.deviation && other.witness.is_some() && (self.witness.is_none() || other.witness < self.witness));
        if take {
            other
        } else {
            self
        }
    }

    pub fn finish(self, tol: f64) -> MobiusReport {
        MobiusReport { holds: self.deviation <= tol, deviation: self.deviation, witness: self.witness }
    }
}

pub fn mobius_partial(map: &PointMap, xs: Range<usize>) -> MobiusPartial {
    let n = map.len();
    let (s, t) = map.cross_tables();
    let mut acc = MobiusPartial { deviation: 0.0, witness: None };
    for x in xs {
        for y in 0..n {
            if y == x {
                continue;
            }
            for z in 0..n {
                if z == x || z == y {
                    continue;
                }
                for w in 0..n {
                    if w == x || w == y || w == z {
                        continue;
                    }
                    let r = s[x * n + z] * s[y * n + w] / (s[x * n + y] * s[z * n + w]);
                    let r2 = t[x * n + z] * t[y * n + w] / (t[x * n + y] * t[z * n + w]);
                    let dev = (r2 - r).abs() / r;
                    if dev > acc.deviation {
                        acc.deviation = dev;
                        acc.witness = Some([x, y, z, w]);
                    }
                }
            }
        }
    }
    acc
}

/// True iff every cross ratio is preserved within relative tolerance `tol`.
pub fn is_mobius(map: &PointMap, tol: f64) -> MobiusReport {
    mobius_partial(map, 0..map.len()).finish(tol)
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ExactMobius {
    pub holds: bool,
    pub witness: Option<[usize; 4]>,
}

/// `δ(i, j)`: change of the cross-ratio exponent factor under the map.
fn exponent_shift(source: &ExponentMatrix, target: &ExponentMatrix, assignment: &[usize]) -> Vec<i64> {
    let n = source.len();
    let mut delta = vec![0i64; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                delta[i * n + j] =
                    target.cross_exponent(assignment[i], assignment[j]) as i64 - source.cross_exponent(i, j) as i64;
            }
        }
    }
    delta
}

fn check_lengths(source: &ExponentMatrix, target: &ExponentMatrix, assignment: &[usize]) -> Result<(), DistortError> {
    let n = source.len();
    if target.len() != n || assignment.len() != n {
        return Err(DistortError::LengthMismatch { source: n, target: target.len() });
    }
    let mut hit = vec![false; n];
    for &j in assignment {
        if j >= n || hit[j] {
            return Err(DistortError::NotBijective { index: j });
        }
        hit[j] = true;
    }
    Ok(())
}

/// Möbius check in exponent arithmetic, every ordered quadruple.
pub fn is_mobius_exact_naive(
    source: &ExponentMatrix,
    target: &ExponentMatrix,
    assignment: &[usize],
) -> Result<ExactMobius, DistortError> {
    check_lengths(source, target, assignment)?;
    let n = source.len();
    let d = exponent_shift(source, target, assignment);
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                for w in 0..n {
                    if x == y || x == z || x == w || y == z || y == w || z == w {
                        continue;
                    }
                    if d[x * n + z] + d[y * n + w] != d[x * n + y] + d[z * n + w] {
                        return Ok(ExactMobius { holds: false, witness: Some([x, y, z, w]) });
                    }
                }
            }
        }
    }
    Ok(ExactMobius { holds: true, witness: None })
}

/// Möbius check in exponent arithmetic in `O(n^3)`.
///
/// With `δ` the exponent shift, `(x,y,z,w)` is preserved iff
/// `δ(x,z) - δ(x,y) = δ(z,w) - δ(y,w)`. For fixed `(y,z)` the left side
/// depends on `x` only and the right side on `w` only, over `x != w` in
/// `W = X \ {y,z}`. With `|W| >= 3` that holds for all such `x, w` iff both
/// sides are one and the same constant on `W`.
pub fn is_mobius_exact(
    source: &ExponentMatrix,
    target: &ExponentMatrix,
    assignment: &[usize],
) -> Result<ExactMobius, DistortError> {
    check_lengths(source, target, assignment)?;
    let n = source.len();
    if n < 6 {
        return is_mobius_exact_naive(source, target, assignment);
    }
    let d = exponent_shift(source, target, assignment);
    let violates = |x: usize, y: usize, z: usize, w: usize| d[x * n + z] + d[y * n + w] != d[x * n + y] + d[z * n + w];
    let mut left = vec![0i64; n];
    let mut right = vec![0i64; n];
    for y in 0..n {
        for z in 0..n {
            if y == z {
                continue;
            }
            let rest: Vec<usize> = (0..n).filter(|&v| v != y && v != z).collect();
            for &v in &rest {
                left[v] = d[v * n + z] - d[v * n + y];
                right[v] = d[z * n + v] - d[y * n + v];
            }
            let (p, q) = (rest[0], rest[1]);
            let witness = if let Some(&x) = rest.iter().find(|&&x| left[x] != left[p]) {
                // x and p disagree on the left; any third point in W separates them
                let w = *rest.iter().find(|&&w| w != x && w != p).expect("|W| >= 3");
                Some(if violates(x, y, z, w) { [x, y, z, w] } else { [p, y, z, w] })
            } else if let Some(&w) = rest.iter().find(|&&w| right[w] != right[p]) {
                let x = *rest.iter().find(|&&x| x != w && x != p).expect("|W| >= 3");
                Some(if violates(x, y, z, w) { [x, y, z, w] } else { [x, y, z, p] })
            } else if left[p] != right[p] {
                Some([p, y, z, q])
            } else {
                None
            };
            if let Some(q4) = witness {
                debug_assert!(violates(q4[0], q4[1], q4[2], q4[3]));
                return Ok(ExactMobius { holds: false, witness: Some(q4) });
            }
        }
    }
    Ok(ExactMobius { holds: true, witness: None })
}

/// Which scans to include in a [`DistortionReport`].
#[derive(Clone, Debug, PartialEq)]
pub struct ReportOptions {
    pub qs: bool,
    pub qm: bool,
    /// Run the Möbius check at this tolerance.
    pub mobius_tol: Option<f64>,
    /// Sample quadruples instead of failing above [`QM_CAP`].
    pub force: bool,
    pub seed: u64,
}

impl ReportOptions {
    /// Every scan, Möbius at `1e-9`.
    pub fn full() -> Self {
        ReportOptions { qs: true, qm: true, mobius_tol: Some(1e-9), force: false, seed: 0 }
    }

    /// Bilipschitz and quasisymmetry only.
    pub fn light() -> Self {
        ReportOptions { qs: true, qm: false, mobius_tol: None, force: false, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DistortionReport {
    pub bilipschitz: BilipReport,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none"))]
    pub quasisymmetry: Option<WeakReport>,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none"))]
    pub quasimobius: Option<WeakReport>,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none"))]
    pub mobius: Option<MobiusReport>,
}

pub fn distortion_report(map: &PointMap, opts: &ReportOptions) -> Result<DistortionReport, DistortError> {
    let quasimobius = if opts.qm { Some(weak_qm_constant(map, opts.force, opts.seed)?) } else { None };
    Ok(DistortionReport {
        bilipschitz: bilipschitz_of_map(map),
        quasisymmetry: opts.qs.then(|| weak_qs_constant(map)),
        quasimobius,
        mobius: opts.mobius_tol.map(|tol| is_mobius(map, tol)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cantor::{exponent_matrix, sigma_exponents_with_infinity, CantorMetric, CantorSpace};
    use crate::rational::Rational;
    use crate::space::{numbered_labels, FiniteMetricSpace};
    use crate::ultrametrize::subdominant_ultrametric;

    fn line(points: &[f64]) -> FiniteMetricSpace {
        FiniteMetricSpace::from_fn(numbered_labels(points.len()), 1e-9, |i, j| (points[i] - points[j]).abs()).unwrap()
    }

    fn id(a: &FiniteMetricSpace, b: &FiniteMetricSpace) -> PointMap {
        PointMap::identity(ExtendedSpace::plain(a.clone()), ExtendedSpace::plain(b.clone())).unwrap()
    }

    #[test]
    fn bilipschitz_examples() {
        let s = line(&[0.0, 1.0, 3.0]);
        assert_eq!(bilipschitz_of_map(&id(&s, &s)).constant, 1.0);
        assert_eq!(bilipschitz_of_map(&id(&s, &s.scaled(2.0))).constant, 2.0);
        let r = bilipschitz_of_map(&id(&s, &subdominant_ultrametric(&s)));
        assert_eq!(r, BilipReport { constant: 1.5, witness: Some([0, 2]) });
    }

    #[test]
    fn qs_examples() {
        let s = line(&[0.0, 1.0, 3.0, 7.0]);
        assert_eq!(weak_qs_constant(&id(&s, &s)).constant, 1.0);
        assert_eq!(weak_qs_constant(&id(&s, &s.scaled(3.0))).constant, 1.0);
        let l = line(&[0.0, 1.0, 2.0, 3.0]);
        let u = subdominant_ultrametric(&l);
        assert_eq!(weak_qs_constant(&id(&l, &u)).constant, 1.0);
        let r = weak_qs_constant(&id(&u, &l));
        assert_eq!(r.constant, 3.0);
        assert_eq!(r.witness, Some(vec![0, 1, 3]));
    }

    #[test]
    fn step_envelope() {
        let mut s = StepData::new();
        s.insert(1.0, 1.0);
        s.insert(2.0, 0.5);
        s.insert(0.5, 2.0);
        assert_eq!(s.points(), vec![(0.5, 2.0)]);
        s.insert(3.0, 3.0);
        s.insert(0.25, 0.1);
        assert_eq!(s.points(), vec![(0.25, 0.1), (0.5, 2.0), (3.0, 3.0)]);
        assert!(s.majorized_by(|t| 4.0 * t.max(0.5)));
        assert!(!s.majorized_by(|t| t));
    }

    #[test]
    fn mobius_scaling_and_perturbation() {
        let s = line(&[0.0, 1.0, 3.0, 7.0, 15.0]);
        let m = id(&s, &s.scaled(5.0));
        assert!(is_mobius(&m, 1e-12).holds);
        assert_eq!(weak_qm_constant(&m, false, 0).unwrap().constant, 1.0);
        let e = FiniteMetricSpace::from_fn(numbered_labels(5), 0.0, |_, _| 1.0).unwrap();
        let bent = FiniteMetricSpace::from_fn(numbered_labels(5), 0.0, |i, j| if i + j == 4 && i * j == 0 { 1.5 } else { 1.0 })
            .unwrap();
        let r = is_mobius(&id(&e, &bent), 1e-9);
        assert!(!r.holds);
        let q = r.witness.unwrap();
        assert!(q.contains(&0) && q.contains(&4));
        assert!(weak_qm_constant(&id(&e, &bent), false, 0).unwrap().constant > 1.0);
    }

    #[test]
    fn partial_merges_are_split_independent() {
        let s = line(&[0.0, 1.0, 2.5, 6.0, 6.5, 9.0]);
        let u = subdominant_ultrametric(&s);
        let m = id(&s, &u);
        let whole = weak_qm_partial(&m, 0..6).finish();
        let split = weak_qm_partial(&m, 3..6).merge(weak_qm_partial(&m, 0..3)).finish();
        assert_eq!(whole, split);
        let whole = mobius_partial(&m, 0..6);
        assert_eq!(mobius_partial(&m, 4..6).merge(mobius_partial(&m, 0..4)), whole);
    }

    #[test]
    fn qm_cap() {
        let s = line(&(0..61).map(|i| i as f64).collect::<Vec<_>>());
        let m = id(&s, &s);
        assert_eq!(weak_qm_constant(&m, false, 0), Err(DistortError::TooLarge { n: 61, cap: 60 }));
        let r = weak_qm_sampled(&m, 1000, 1);
        assert!(!r.exhaustive);
        assert_eq!(r.constant, 1.0);
    }

    #[test]
    fn exact_rho_to_sigma_is_mobius() {
        for depth in 2..=4 {
            let c = CantorSpace::full(2, depth, Rational::HALF).unwrap();
            let rho = exponent_matrix(&c, CantorMetric::Rho).unwrap();
            let sigma = sigma_exponents_with_infinity(&c).unwrap();
            let ident: Vec<usize> = (0..rho.len()).collect();
            assert!(is_mobius_exact(&rho, &sigma, &ident).unwrap().holds);
            assert!(is_mobius_exact_naive(&rho, &sigma, &ident).unwrap().holds);
            let bent = ExponentMatrix::from_fn(rho.len(), None, |i, j| rho.raw(i, j) + (i + j == 1) as i32);
            assert!(!is_mobius_exact(&rho, &bent, &ident).unwrap().holds);
            assert!(!is_mobius_exact_naive(&rho, &bent, &ident).unwrap().holds);
        }
    }

    #[test]
    fn bijection_checks() {
        let s = ExtendedSpace::plain(line(&[0.0, 1.0]));
        assert_eq!(PointMap::new(s.clone(), s.clone(), vec![0, 0]), Err(DistortError::NotBijective { index: 0 }));
        let m = PointMap::new(s.clone(), s.clone(), vec![1, 0]).unwrap();
        assert_eq!(m.then(&m).unwrap().assignment(), &[0, 1]);
    }
}
