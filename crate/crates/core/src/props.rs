//! Quantitative property analyzers for finite spaces.
//!
//! Balls are closed. Scans run over finitely many radii: the properties are
//! piecewise constant in `r` between breakpoints, so one radius per
//! breakpoint and one per open gap between consecutive breakpoints covers
//! every `r`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::space::{Distances, FiniteMetricSpace};
use crate::ultrametrize::prim_mst;

/// `d(x,y) > max(d(x,z), d(z,y))` for `triple = [x, y, z]`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TripleWitness {
    pub triple: [usize; 3],
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct UltrametricCheck {
    pub holds: bool,
    pub witness: Option<TripleWitness>,
}

/// Strong triangle check over all triples with relative tolerance `tol`:
/// a triple violates when `d(x,y) > max(d(x,z), d(z,y)) * (1 + tol)`.
/// Reports the violation with the largest ratio `lhs / rhs`.
pub fn check_ultrametric<D: Distances + ?Sized>(space: &D, tol: f64) -> UltrametricCheck {
    let n = space.len();
    let mut worst: Option<(f64, TripleWitness)> = None;
    for x in 0..n {
        for y in (x + 1)..n {
            let lhs = space.dist(x, y);
            for z in 0..n {
                if z == x || z == y {
                    continue;
                }
                let rhs = space.dist(x, z).max(space.dist(z, y));
                if lhs > rhs * (1.0 + tol) {
                    let ratio = if rhs > 0.0 { lhs / rhs } else { f64::INFINITY };
                    if worst.as_ref().is_none_or(|(r, _)| ratio > *r) {
                        worst = Some((ratio, TripleWitness { triple: [x, y, z], lhs, rhs }));
                    }
                }
            }
        }
    }
    UltrametricCheck { holds: worst.is_none(), witness: worst.map(|(_, w)| w) }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PropsError {
    /// Exact covering was asked for a ball with more than
    /// [`EXACT_COVER_LIMIT`] points.
    ExactSearchTooLarge { center: usize, radius: f64, size: usize },
}

impl fmt::Display for PropsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropsError::ExactSearchTooLarge { center, radius, size } => write!(
                f,
                "ball B({center}, {radius}) has {size} points, exact covering is limited to {EXACT_COVER_LIMIT}"
            ),
        }
    }
}

impl core::error::Error for PropsError {}

pub const EXACT_COVER_LIMIT: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum CoverMode {
    Exact,
    Greedy,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DoublingReport {
    pub constant: usize,
    pub method: CoverMode,
    /// Center and radius of a ball needing `constant` half-radius balls.
    pub witness: Option<(usize, f64)>,
}

/// Radii covering every piece of a property that only changes at the given
/// breakpoints: the breakpoints themselves plus the geometric midpoint of
/// each gap between consecutive ones.
fn with_midpoints(mut breaks: Vec<f64>) -> Vec<f64> {
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut out = Vec::with_capacity(2 * breaks.len());
    for (i, &b) in breaks.iter().enumerate() {
        if i > 0 {
            out.push(sqrt(breaks[i - 1] * b));
        }
        out.push(b);
    }
    out
}

/// Newton iteration; `core` has no `f64::sqrt`.
pub(crate) fn sqrt(x: f64) -> f64 {
    if x <= 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { f64::NAN };
    }
    let mut y = if x >= 1.0 { x } else { 1.0 };
    loop {
        let next = 0.5 * (y + x / y);
        if next >= y {
            return y;
        }
        y = next;
    }
}

/// The radius scan set: all distinct pairwise distances plus the geometric
/// midpoints between consecutive ones.
pub fn scan_radii(space: &FiniteMetricSpace) -> Vec<f64> {
    with_midpoints(space.distinct_distances())
}

/// Breakpoints for covering questions: `B(x, r)` changes at the distances
/// and `B(c, r/2)` at twice the distances. Restricted to `r <= diam`.
fn doubling_radii(space: &FiniteMetricSpace) -> Vec<f64> {
    let diam = space.diameter();
    let d = space.distinct_distances();
    let breaks: Vec<f64> = d.iter().copied().chain(d.iter().map(|x| 2.0 * x)).filter(|&r| r <= diam).collect();
    with_midpoints(breaks)
}

/// Per-point neighbor order and prefix bitsets: `prefix[c][t]` is the set of
/// the `t` nearest points to `c` (ties broken by index).
struct BallIndex {
    words: usize,
    sorted: Vec<Vec<(f64, usize)>>,
    prefix: Vec<Vec<u64>>,
}

impl BallIndex {
    fn new(space: &FiniteMetricSpace) -> Self {
        let n = space.len();
        let words = n.div_ceil(64);
        let mut sorted = Vec::with_capacity(n);
        let mut prefix = Vec::with_capacity(n);
        for c in 0..n {
            let mut s: Vec<(f64, usize)> = (0..n).map(|y| (space.dist(c, y), y)).collect();
            s.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut p = vec![0u64; (n + 1) * words];
            for (t, &(_, y)) in s.iter().enumerate() {
                let (head, tail) = p.split_at_mut((t + 1) * words);
                tail[..words].copy_from_slice(&head[t * words..]);
                tail[y / 64] |= 1u64 << (y % 64);
            }
            sorted.push(s);
            prefix.push(p);
        }
        BallIndex { words, sorted, prefix }
    }

    fn ball(&self, c: usize, r: f64) -> &[u64] {
        let t = self.sorted[c].partition_point(|&(d, _)| d <= r);
        &self.prefix[c][t * self.words..(t + 1) * self.words]
    }
}

fn members(bits: &[u64]) -> Vec<usize> {
    let mut out = Vec::new();
    for (wi, &w) in bits.iter().enumerate() {
        let mut w = w;
        while w != 0 {
            out.push(wi * 64 + w.trailing_zeros() as usize);
            w &= w - 1;
        }
    }
    out
}

/// Minimum number of sets covering `full` (bits `0..size`) by breadth-first
/// search over covered masks.
fn exact_cover(sets: &[u16], size: usize) -> usize {
    let full: u16 = if size == 16 { u16::MAX } else { (1u16 << size) - 1 };
    if full == 0 {
        return 0;
    }
    let mut seen = vec![false; 1 << size];
    let mut frontier = vec![0u16];
    seen[0] = true;
    let mut steps = 0;
    loop {
        steps += 1;
        let mut next = Vec::new();
        for &m in &frontier {
            for &s in sets {
                let u = m | s;
                if u == full {
                    return steps;
                }
                if !seen[u as usize] {
                    seen[u as usize] = true;
                    next.push(u);
                }
            }
        }
        assert!(!next.is_empty(), "candidate sets do not cover the ball");
        frontier = next;
    }
}

fn greedy_cover(sets: &[Vec<u64>], target: &[u64]) -> usize {
    let mut uncovered = target.to_vec();
    let mut count = 0;
    while uncovered.iter().any(|&w| w != 0) {
        let mut best = (0u32, 0usize);
        for (i, s) in sets.iter().enumerate() {
            let gain: u32 = s.iter().zip(&uncovered).map(|(a, b)| (a & b).count_ones()).sum();
            if gain > best.0 {
                best = (gain, i);
            }
        }
        assert!(best.0 > 0, "candidate sets do not cover the ball");
        for (u, s) in uncovered.iter_mut().zip(&sets[best.1]) {
            *u &= !s;
        }
        count += 1;
    }
    count
}

/// Smallest `N` such that every `B(x, r)` with `r <= diam` is covered by `N`
/// closed balls of radius `r/2` centered at points of the space.
pub fn doubling_constant(space: &FiniteMetricSpace, mode: CoverMode) -> Result<DoublingReport, PropsError> {
    let n = space.len();
    let index = BallIndex::new(space);
    let radii = doubling_radii(space);
    let mut best = DoublingReport { constant: 1, method: mode, witness: None };
    for x in 0..n {
        let mut last: Option<(Vec<u64>, Vec<Vec<u64>>)> = None;
        for &r in &radii {
            let ball = index.ball(x, r);
            let halves: Vec<Vec<u64>> = (0..n)
                .map(|c| index.ball(c, r / 2.0).iter().zip(ball).map(|(a, b)| a & b).collect())
                .filter(|s: &Vec<u64>| s.iter().any(|&w| w != 0))
                .collect();
            if last.as_ref().is_some_and(|(b, h)| b == ball && *h == halves) {
                continue;
            }
            let size = ball.iter().map(|w| w.count_ones() as usize).sum::<usize>();
            let needed = match mode {
                CoverMode::Greedy => greedy_cover(&halves, ball),
                CoverMode::Exact => {
                    if size > EXACT_COVER_LIMIT {
                        return Err(PropsError::ExactSearchTooLarge { center: x, radius: r, size });
                    }
                    let pts = members(ball);
                    let mut sets: Vec<u16> = halves
                        .iter()
                        .map(|h| {
                            pts.iter()
                                .enumerate()
                                .filter(|(_, &y)| h[y / 64] >> (y % 64) & 1 == 1)
                                .fold(0u16, |m, (bit, _)| m | (1 << bit))
                        })
                        .collect();
                    sets.sort_unstable();
                    sets.dedup();
                    exact_cover(&sets, size)
                }
            };
            if needed > best.constant {
                best.constant = needed;
                best.witness = Some((x, r));
            }
            last = Some((ball.to_vec(), halves));
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PerfectnessWitness {
    pub center: usize,
    /// The supremum is approached as the radius increases to this value.
    pub radius: f64,
    /// Largest distance from `center` strictly below `radius`.
    pub inner: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PerfectnessReport {
    pub constant: f64,
    pub witness: Option<PerfectnessWitness>,
}

/// Smallest `C >= 1` such that `B(x,r) \ B(x,r/C)` is nonempty whenever
/// `X \ B(x,r)` is, for radii `r` at or above the distance from `x` to its
/// nearest neighbor.
///
/// For `r` between consecutive distinct distances `d_i <= r < d_{i+1}` from
/// `x`, the annulus is nonempty iff `r/C < d_i`, so the constant is the
/// largest gap ratio `d_{i+1} / d_i` over all centers.
pub fn uniform_perfectness_constant(space: &FiniteMetricSpace) -> PerfectnessReport {
    let n = space.len();
    let mut report = PerfectnessReport { constant: 1.0, witness: None };
    for x in 0..n {
        let mut d: Vec<f64> = (0..n).filter(|&y| y != x).map(|y| space.dist(x, y)).collect();
        d.sort_by(f64::total_cmp);
        d.dedup();
        for w in d.windows(2) {
            let ratio = w[1] / w[0];
            if ratio > report.constant {
                report.constant = ratio;
                report.witness = Some(PerfectnessWitness { center: x, radius: w[1], inner: w[0] });
            }
        }
    }
    report
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ModulusReport {
    /// `μ*`: a μ-chain exists iff `μ >= μ*`.
    pub modulus: f64,
    /// A chain attaining `μ*`; empty when fewer than three points.
    pub chain: Vec<usize>,
}

/// `μ* = min over s != t and simple chains s → … → t with at least one
/// intermediate point of (largest step) / d(s, t)`.
///
/// A chain from `s` starts with a step to some `z != t` and continues
/// inside `X \ {s}`; the best continuation is the minimax path, read off a
/// minimum spanning tree of `X \ {s}`.
pub fn disconnectedness_modulus(space: &FiniteMetricSpace) -> ModulusReport {
    let n = space.len();
    if n < 3 {
        return ModulusReport { modulus: 1.0, chain: Vec::new() };
    }
    let mut best: Option<(f64, usize, usize, usize)> = None;
    let mut best_chain = Vec::new();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut bottleneck = vec![0.0f64; n];
    let mut toward = vec![usize::MAX; n];
    let mut stack = Vec::with_capacity(n);
    for s in 0..n {
        let parent = prim_mst(n, Some(s), |i, j| space.dist(i, j));
        for a in adj.iter_mut() {
            a.clear();
        }
        for (v, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                adj[v].push(p);
                adj[p].push(v);
            }
        }
        for t in (s + 1)..n {
            // bottleneck[z] = largest edge on the tree path z → t
            toward.fill(usize::MAX);
            toward[t] = t;
            bottleneck[t] = 0.0;
            stack.clear();
            stack.push(t);
            while let Some(u) = stack.pop() {
                for &v in &adj[u] {
                    if toward[v] == usize::MAX {
                        toward[v] = u;
                        bottleneck[v] = bottleneck[u].max(space.dist(u, v));
                        stack.push(v);
                    }
                }
            }
            let dst = space.dist(s, t);
            for z in 0..n {
                if z == s || z == t {
                    continue;
                }
                let mu = space.dist(s, z).max(bottleneck[z]) / dst;
                if best.is_none_or(|(b, ..)| mu < b) {
                    best = Some((mu, s, t, z));
                    best_chain.clear();
                    best_chain.push(s);
                    let mut u = z;
                    while u != t {
                        best_chain.push(u);
                        u = toward[u];
                    }
                    best_chain.push(t);
                }
            }
        }
    }
    ModulusReport { modulus: best.map_or(1.0, |b| b.0), chain: best_chain }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PropertyReport {
    pub ultrametric: UltrametricCheck,
    pub doubling: DoublingReport,
    pub perfectness: PerfectnessReport,
    pub modulus: ModulusReport,
}

/// All four analyses. Exact covering falls back to greedy (tagged in the
/// report) when a ball is too large for exhaustive search.
pub fn property_report(space: &FiniteMetricSpace, tol: f64, mode: CoverMode) -> PropertyReport {
    let doubling = match doubling_constant(space, mode) {
        Ok(r) => r,
        Err(PropsError::ExactSearchTooLarge { .. }) => {
            doubling_constant(space, CoverMode::Greedy).expect("greedy covering does not fail")
        }
    };
    PropertyReport {
        ultrametric: check_ultrametric(space, tol),
        doubling,
        perfectness: uniform_perfectness_constant(space),
        modulus: disconnectedness_modulus(space),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::numbered_labels;

    fn line(points: &[f64]) -> FiniteMetricSpace {
        FiniteMetricSpace::from_fn(numbered_labels(points.len()), 1e-9, |i, j| (points[i] - points[j]).abs()).unwrap()
    }

    fn equilateral(n: usize) -> FiniteMetricSpace {
        FiniteMetricSpace::from_fn(numbered_labels(n), 1e-9, |_, _| 1.0).unwrap()
    }

    #[test]
    fn ultrametric_checks() {
        assert!(check_ultrametric(&equilateral(4), 0.0).holds);
        let c = check_ultrametric(&line(&[0.0, 1.0, 2.0]), 0.0);
        assert!(!c.holds);
        assert_eq!(c.witness, Some(TripleWitness { triple: [0, 2, 1], lhs: 2.0, rhs: 1.0 }));
        assert!(check_ultrametric(&line(&[0.0, 1.0]), 0.0).holds);
        assert!(check_ultrametric(&line(&[0.0]), 0.0).holds);
    }

    #[test]
    fn doubling_small_cases() {
        for mode in [CoverMode::Exact, CoverMode::Greedy] {
            assert_eq!(doubling_constant(&line(&[0.0]), mode).unwrap().constant, 1);
            assert_eq!(doubling_constant(&line(&[0.0, 1.0]), mode).unwrap().constant, 2);
            assert_eq!(doubling_constant(&equilateral(3), mode).unwrap().constant, 3);
        }
    }

    #[test]
    fn exact_cover_refuses_large_balls() {
        let err = doubling_constant(&equilateral(13), CoverMode::Exact).unwrap_err();
        assert!(matches!(err, PropsError::ExactSearchTooLarge { size: 13, .. }));
        assert_eq!(doubling_constant(&equilateral(13), CoverMode::Greedy).unwrap().constant, 13);
    }

    #[test]
    fn perfectness_examples() {
        assert_eq!(uniform_perfectness_constant(&equilateral(3)).constant, 1.0);
        assert_eq!(uniform_perfectness_constant(&line(&[0.0, 1.0])).constant, 1.0);
        let r = uniform_perfectness_constant(&line(&[1.0, 0.5, 0.25, 0.125]));
        assert_eq!(r.constant, 3.0);
        assert_eq!(r.witness, Some(PerfectnessWitness { center: 2, radius: 0.75, inner: 0.25 }));
    }

    #[test]
    fn modulus_examples() {
        let r = disconnectedness_modulus(&line(&[0.0, 1.0, 2.0, 3.0]));
        assert!((r.modulus - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.chain, vec![0, 1, 2, 3]);
        let r = disconnectedness_modulus(&line(&[0.0, 1.0, 10.0]));
        assert!((r.modulus - 0.9).abs() < 1e-15);
        assert_eq!(r.chain, vec![0, 1, 2]);
        assert!(disconnectedness_modulus(&equilateral(5)).modulus >= 1.0);
        assert_eq!(disconnectedness_modulus(&line(&[0.0, 1.0])), ModulusReport { modulus: 1.0, chain: vec![] });
    }

    #[test]
    fn radius_scan_set() {
        let r = scan_radii(&line(&[0.0, 1.0, 4.0]));
        assert_eq!(r, vec![1.0, sqrt(3.0), 3.0, sqrt(12.0), 4.0]);
    }

    #[test]
    fn newton_sqrt() {
        for x in [0.0, 1e-12, 0.25, 2.0, 1e10, 12345.678] {
            let s = sqrt(x);
            assert!((s * s - x).abs() <= 4.0 * f64::EPSILON * x.max(f64::MIN_POSITIVE));
        }
    }
}
