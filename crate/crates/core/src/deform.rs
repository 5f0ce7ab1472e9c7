//! Deformations of a metric at a point: inversion, the chordal one-point
//! extension and sphericalization.

use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::props::TripleWitness;
use crate::random::{random_ultrametric, seeded, UltrametricParams};
use crate::rational::Rational;
use crate::space::{fresh_infinity_label, numbered_labels, Distances, ExtendedSpace, FiniteMetricSpace, MetricError, QuasiMetricSpace};

/// A violated strong triangle comparison `d(x,y) > max(d(x,z), d(z,y))`.
pub type DeformationWitness = TripleWitness;

#[derive(Clone, Debug, PartialEq)]
pub enum DeformError {
    TooFewPoints { len: usize, required: usize },
    Metric(MetricError),
}

impl fmt::Display for DeformError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeformError::TooFewPoints { len, required } => {
                write!(f, "need at least {required} points, got {len}")
            }
            DeformError::Metric(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for DeformError {}

impl From<MetricError> for DeformError {
    fn from(e: MetricError) -> Self {
        DeformError::Metric(e)
    }
}

/// `d(x,y) / (d(x,o) d(y,o))` on `X \ {o}`.
///
/// The result is validated: inversion of a general metric can break the
/// triangle inequality (it is a metric for Ptolemaic spaces, ultrametric
/// ones included), and that case is reported as an error.
pub fn invert(space: &FiniteMetricSpace, o: usize) -> Result<FiniteMetricSpace, DeformError> {
    if space.len() < 2 {
        return Err(DeformError::TooFewPoints { len: space.len(), required: 2 });
    }
    space.check_index(o)?;
    let keep: Vec<usize> = (0..space.len()).filter(|&i| i != o).collect();
    let labels = keep.iter().map(|&i| space.labels()[i].clone()).collect();
    let out = FiniteMetricSpace::from_fn(labels, FiniteMetricSpace::DEFAULT_TOL, |i, j| {
        let (x, y) = (keep[i], keep[j]);
        space.dist(x, y) / (space.dist(x, o) * space.dist(y, o))
    })?;
    Ok(out)
}

/// `d_a(x,y) = d(x,y) / (max{1, d(x,a)} max{1, d(y,a)})` on `X` and
/// `d_a(x, ∞) = 1 / max{1, d(x,a)}`; `∞` is appended as the last point and
/// marked as compactified, since it lies at finite distance.
pub fn chordal_extend(space: &FiniteMetricSpace, a: usize) -> Result<ExtendedSpace, DeformError> {
    space.check_index(a)?;
    let n = space.len();
    let m = n + 1;
    let scale: Vec<f64> = (0..n).map(|x| space.dist(x, a).max(1.0)).collect();
    let mut dist = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            dist.push(if i == j {
                0.0
            } else if i == n {
                1.0 / scale[j]
            } else if j == n {
                1.0 / scale[i]
            } else {
                space.dist(i, j) / (scale[i] * scale[j])
            });
        }
    }
    let mut labels = space.labels().to_vec();
    labels.push(fresh_infinity_label(space.labels()));
    let base = FiniteMetricSpace::from_flat(dist, labels, FiniteMetricSpace::DEFAULT_TOL)?;
    Ok(ExtendedSpace::compactified(base, n)?)
}

/// `s_p(x,y) = d(x,y) / ((1 + d(x,p)) (1 + d(y,p)))`. Not validated: the
/// result need not satisfy the triangle inequality, let alone the strong one.
pub fn sphericalize(space: &FiniteMetricSpace, p: usize) -> Result<QuasiMetricSpace, DeformError> {
    space.check_index(p)?;
    let n = space.len();
    let mut dist = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            dist.push(space.dist(i, j) / ((1.0 + space.dist(i, p)) * (1.0 + space.dist(j, p))));
        }
    }
    Ok(QuasiMetricSpace::from_parts(space.labels().to_vec(), dist))
}

/// An ultrametric space whose sphericalization at `p` is not ultrametric.
#[derive(Clone, Debug, PartialEq)]
pub struct SphericalizationCounterexample {
    pub space: FiniteMetricSpace,
    pub p: usize,
    /// Indices into `space`; distances are those of `s_p`.
    pub witness: DeformationWitness,
}

/// Smallest relative violation `(lhs - rhs) / rhs` accepted as a witness.
pub const MIN_MARGIN: f64 = 1e-6;

/// Scans triples of `s_p` in lexicographic order, charging one unit of
/// `budget` per triple examined.
fn scan(space: &FiniteMetricSpace, p: usize, budget: &mut u64) -> Option<DeformationWitness> {
    let s = sphericalize(space, p).expect("p is a valid index");
    let n = space.len();
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                if x == y || y == z || x == z {
                    continue;
                }
                if *budget == 0 {
                    return None;
                }
                *budget -= 1;
                let lhs = s.dist(x, y);
                let rhs = s.dist(x, z).max(s.dist(z, y));
                if lhs > rhs * (1.0 + MIN_MARGIN) {
                    return Some(DeformationWitness { triple: [x, y, z], lhs, rhs });
                }
            }
        }
    }
    None
}

/// Three-point ultrametrics `{p, x, y}` with distances `2^-i`, `|i| <= 3`:
/// `d(p,x) = 2^-i`, `d(p,y) = 2^-j`, and `d(x,y)` forced to the larger one
/// when `i != j`, or any `2^-l` with `l >= i` when `i == j`.
fn three_point_grid() -> impl Iterator<Item = FiniteMetricSpace> {
    let lambda = Rational::HALF;
    let exps = -3i64..=3;
    exps.clone().flat_map(move |i| {
        exps.clone().flat_map(move |j| {
            let xy: Vec<i64> = if i == j { (i..=3).collect() } else { alloc::vec![i.min(j)] };
            xy.into_iter().map(move |l| {
                let (px, py, xy) = (lambda.pow_f64(i), lambda.pow_f64(j), lambda.pow_f64(l));
                let rows = [[0.0, px, py], [px, 0.0, xy], [py, xy, 0.0]];
                FiniteMetricSpace::from_fn(numbered_labels(3), 0.0, |a, b| rows[a][b]).expect("ultrametric triangle")
            })
        })
    })
}

/// A deterministic grid of three-point ultrametrics first, then seeded random
/// ultrametrics with up to `max_n` points. `budget` counts triples examined;
/// `None` when it runs out.
pub fn find_sphericalization_counterexample(
    max_n: usize,
    seed: u64,
    budget: u64,
) -> Option<SphericalizationCounterexample> {
    let mut left = budget;
    for space in three_point_grid() {
        if let Some(witness) = scan(&space, 0, &mut left) {
            return Some(SphericalizationCounterexample { space, p: 0, witness });
        }
        if left == 0 {
            return None;
        }
    }
    random_search(max_n, seed, &mut left)
}

/// The random phase alone: seeded ultrametrics with heights `2^-j` spread
/// over `[2^-10, 2^10]` and a random base point.
pub fn random_sphericalization_search(max_n: usize, seed: u64, budget: u64) -> Option<SphericalizationCounterexample> {
    let mut left = budget;
    random_search(max_n, seed, &mut left)
}

fn random_search(max_n: usize, seed: u64, left: &mut u64) -> Option<SphericalizationCounterexample> {
    assert!(max_n >= 3, "max_n must be at least 3");
    let mut rng = seeded(seed);
    while *left > 0 {
        let n = rng.random_range(3..=max_n);
        let params = UltrametricParams { n, max_children: 3, lambda: Rational::HALF, top: -10, bottom: 10, max_step: 4 };
        let space = random_ultrametric(&mut rng, &params);
        let p = rng.random_range(0..n);
        if let Some(witness) = scan(&space, p, left) {
            return Some(SphericalizationCounterexample { space, p, witness });
        }
    }
    None
}
