#![allow(dead_code)]

use rand::Rng;
use umt_core::random::{random_ultrametric, seeded, UltrametricParams};
use umt_core::space::numbered_labels;
use umt_core::FiniteMetricSpace;

pub fn line(points: &[f64]) -> FiniteMetricSpace {
    FiniteMetricSpace::from_fn(numbered_labels(points.len()), 1e-9, |i, j| (points[i] - points[j]).abs()).unwrap()
}

/// Random points in the unit square.
pub fn euclidean<R: Rng>(rng: &mut R, n: usize) -> FiniteMetricSpace {
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect();
    FiniteMetricSpace::from_fn(numbered_labels(n), 1e-9, |i, j| {
        let (dx, dy) = (pts[i].0 - pts[j].0, pts[i].1 - pts[j].1);
        (dx * dx + dy * dy).sqrt()
    })
    .unwrap()
}

/// A metric or an ultrametric on `2..=max_n` points, by a coin flip.
pub fn mixed_instance(seed: u64, max_n: usize) -> FiniteMetricSpace {
    let mut rng = seeded(seed);
    let n = rng.random_range(2..=max_n);
    if rng.random_bool(0.5) {
        euclidean(&mut rng, n)
    } else {
        random_ultrametric(&mut rng, &UltrametricParams::dyadic(n))
    }
}

/// Visits every simple path starting at `s` with at least one edge, passing
/// `(path, largest step)`.
pub fn for_each_simple_path<F: FnMut(&[usize], f64)>(d: &FiniteMetricSpace, s: usize, mut f: F) {
    fn go<F: FnMut(&[usize], f64)>(d: &FiniteMetricSpace, path: &mut Vec<usize>, used: &mut [bool], top: f64, f: &mut F) {
        let u = *path.last().unwrap();
        for v in 0..d.len() {
            if used[v] {
                continue;
            }
            let t = top.max(d.dist(u, v));
            used[v] = true;
            path.push(v);
            f(path, t);
            go(d, path, used, t, f);
            path.pop();
            used[v] = false;
        }
    }
    let mut used = vec![false; d.len()];
    used[s] = true;
    go(d, &mut vec![s], &mut used, 0.0, &mut f);
}

/// Minimax chain value for every pair by enumerating all simple chains.
pub fn chain_minimax(d: &FiniteMetricSpace) -> Vec<Vec<f64>> {
    let n = d.len();
    let mut best = vec![vec![f64::INFINITY; n]; n];
    for (s, row) in best.iter_mut().enumerate() {
        row[s] = 0.0;
        for_each_simple_path(d, s, |path, top| {
            let t = *path.last().unwrap();
            row[t] = row[t].min(top);
        });
    }
    best
}

/// `μ*` by enumerating all simple chains with an intermediate point.
pub fn chain_modulus(d: &FiniteMetricSpace) -> f64 {
    let mut best = f64::INFINITY;
    for s in 0..d.len() {
        for_each_simple_path(d, s, |path, top| {
            if path.len() >= 3 {
                best = best.min(top / d.dist(s, *path.last().unwrap()));
            }
        });
    }
    if best.is_finite() {
        best
    } else {
        1.0
    }
}

/// Minimum number of closed `r/2` balls centered at points covering
/// `B(x, r)`, by trying every subset of centers.
pub fn min_cover(d: &FiniteMetricSpace, x: usize, r: f64) -> usize {
    let n = d.len();
    let ball: Vec<usize> = (0..n).filter(|&y| d.dist(x, y) <= r).collect();
    let mut best = usize::MAX;
    for mask in 1u32..(1 << n) {
        let size = mask.count_ones() as usize;
        if size >= best {
            continue;
        }
        let covered = ball.iter().all(|&y| (0..n).any(|c| mask >> c & 1 == 1 && d.dist(c, y) <= r / 2.0));
        if covered {
            best = size;
        }
    }
    best
}

/// `r / max{d(x,y) : 0 < d(x,y) <= r}`: the annulus constant needed at
/// `(x, r)`, or `None` when the condition is vacuous or `r` is below the
/// nearest neighbor.
pub fn annulus_need(d: &FiniteMetricSpace, x: usize, r: f64) -> Option<f64> {
    let n = d.len();
    if (0..n).all(|y| d.dist(x, y) <= r) {
        return None;
    }
    let inner = (0..n).filter(|&y| y != x && d.dist(x, y) <= r).map(|y| d.dist(x, y)).fold(f64::NAN, f64::max);
    if inner.is_nan() {
        None
    } else {
        Some(r / inner)
    }
}
