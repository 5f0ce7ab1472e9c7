//! Seeded generators. All randomness goes through a caller-supplied RNG;
//! [`seeded`] gives the crate's standard ChaCha generator for a `u64` seed.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cantor::{enumerate_words, nth_word_symbols, CantorError, Word};
use crate::rational::Rational;
use crate::space::{numbered_labels, FiniteMetricSpace};

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shape of a random dendrogram with heights `λ^level`.
///
/// The root sits at level `top`; each child node is `1..=max_step` levels
/// below its parent. Levels are kept at or above `bottom` whenever the tree
/// depth allows it.
#[derive(Clone, Debug)]
pub struct UltrametricParams {
    pub n: usize,
    pub max_children: usize,
    pub lambda: Rational,
    pub top: i64,
    pub bottom: i64,
    pub max_step: u32,
}

impl UltrametricParams {
    /// Heights `2^-level` for levels in `0..=n`, binary to 4-ary splits.
    pub fn dyadic(n: usize) -> Self {
        UltrametricParams { n, max_children: 4, lambda: Rational::HALF, top: 0, bottom: 64, max_step: 2 }
    }
}

struct TreeNode {
    members: Vec<usize>,
    children: Vec<usize>,
    level: i64,
}

/// A random ultrametric from a random recursive partition. Ultrametric by
/// construction: `d(x, y) = λ^level(lca(x, y))` with levels strictly
/// increasing from a node to its internal children.
pub fn random_ultrametric<R: Rng + ?Sized>(rng: &mut R, p: &UltrametricParams) -> FiniteMetricSpace {
    assert!(p.n >= 1, "need at least one point");
    assert!(p.max_children >= 2, "max_children must be at least 2");
    assert!(p.max_step >= 1, "max_step must be at least 1");
    let mut order: Vec<usize> = (0..p.n).collect();
    order.shuffle(rng);
    let mut nodes = vec![TreeNode { members: order, children: Vec::new(), level: 0 }];
    let mut stack = vec![0usize];
    while let Some(v) = stack.pop() {
        let s = nodes[v].members.len();
        if s < 2 {
            continue;
        }
        let m = rng.random_range(2..=p.max_children.min(s));
        let mut cuts: Vec<usize> = (1..s).collect();
        cuts.shuffle(rng);
        let mut cuts: Vec<usize> = cuts[..m - 1].to_vec();
        cuts.sort_unstable();
        let mut start = 0;
        for end in cuts.into_iter().chain(core::iter::once(s)) {
            let members = nodes[v].members[start..end].to_vec();
            start = end;
            nodes.push(TreeNode { members, children: Vec::new(), level: 0 });
            let c = nodes.len() - 1;
            nodes[v].children.push(c);
            stack.push(c);
        }
    }
    // longest chain of internal nodes strictly below each node
    let mut rank = vec![0i64; nodes.len()];
    for v in (0..nodes.len()).rev() {
        rank[v] = nodes[v]
            .children
            .iter()
            .filter(|&&c| nodes[c].members.len() >= 2)
            .map(|&c| rank[c] + 1)
            .max()
            .unwrap_or(0);
    }
    nodes[0].level = p.top;
    for v in 0..nodes.len() {
        let parent_level = nodes[v].level;
        let children = nodes[v].children.clone();
        for c in children {
            if nodes[c].members.len() < 2 {
                continue;
            }
            let room = p.bottom - rank[c] - parent_level;
            let hi = (p.max_step as i64).min(room).max(1);
            nodes[c].level = parent_level + rng.random_range(1..=hi);
        }
    }
    let mut dist = vec![0.0f64; p.n * p.n];
    for node in &nodes {
        if node.children.len() < 2 {
            continue;
        }
        let h = p.lambda.pow_f64(node.level);
        for (a, &ca) in node.children.iter().enumerate() {
            for &cb in &node.children[a + 1..] {
                for &x in &nodes[ca].members {
                    for &y in &nodes[cb].members {
                        dist[x * p.n + y] = h;
                        dist[y * p.n + x] = h;
                    }
                }
            }
        }
    }
    FiniteMetricSpace::trusted(numbered_labels(p.n), dist)
}

/// Points `Σ a_i 9^i` with digits `a_i ∈ {0, 1, 2}` for `i < levels`, each
/// kept with probability `keep` (at least three are always kept). Distinct
/// digit clusters at level `i` are at least `0.75 * 9^i` apart while points
/// first differing at level `i` are at most `2.25 * 9^i` apart, so every
/// chain has a step above a third of its end-to-end distance: `μ* >= 1/3`.
pub fn clustered_line_sample<R: Rng + ?Sized>(rng: &mut R, levels: u32, keep: f64) -> FiniteMetricSpace {
    assert!(levels >= 1, "need at least one level");
    let count = 3usize.pow(levels);
    let all: Vec<f64> = (0..count)
        .map(|mut idx| {
            let mut x = 0.0f64;
            let mut scale = 1.0f64;
            for _ in 0..levels {
                x += (idx % 3) as f64 * scale;
                idx /= 3;
                scale *= 9.0;
            }
            x
        })
        .collect();
    let mut chosen: Vec<f64> = all.iter().copied().filter(|_| rng.random_bool(keep.clamp(0.0, 1.0))).collect();
    if chosen.len() < 3 {
        let mut pool = all.clone();
        pool.shuffle(rng);
        for x in pool {
            if chosen.len() >= 3 {
                break;
            }
            if !chosen.contains(&x) {
                chosen.push(x);
            }
        }
    }
    chosen.sort_by(f64::total_cmp);
    let labels = chosen.iter().map(|x| alloc::format!("{x}")).collect();
    FiniteMetricSpace::from_fn(labels, FiniteMetricSpace::DEFAULT_TOL, |i, j| (chosen[i] - chosen[j]).abs())
        .expect("points on a line form a metric")
}

/// `count` distinct random words of the given depth (all of them when
/// `count >= k^depth`), in lexicographic order.
pub fn sample_words<R: Rng + ?Sized>(rng: &mut R, k: usize, depth: usize, count: usize) -> Result<Vec<Word>, CantorError> {
    let total = enumerate_words(k, depth)?.len();
    if count >= total {
        return enumerate_words(k, depth);
    }
    let mut picked = BTreeSet::new();
    while picked.len() < count {
        picked.insert(rng.random_range(0..total));
    }
    Ok(picked.into_iter().map(|i| Word::from_symbols_unchecked(nth_word_symbols(i, depth, k))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::props::check_ultrametric;

    #[test]
    fn random_ultrametrics_are_ultrametric_metrics() {
        let mut rng = seeded(3);
        for n in 1..20 {
            let s = random_ultrametric(&mut rng, &UltrametricParams::dyadic(n));
            assert_eq!(s.len(), n);
            assert!(check_ultrametric(&s, 0.0).holds);
            FiniteMetricSpace::new(&s.rows(), s.labels().to_vec(), 0.0).unwrap();
        }
    }

    #[test]
    fn levels_respect_bounds_when_possible() {
        let mut rng = seeded(11);
        let p = UltrametricParams { n: 24, max_children: 4, lambda: Rational::HALF, top: -9, bottom: 9, max_step: 3 };
        for _ in 0..20 {
            let s = random_ultrametric(&mut rng, &p);
            assert!(s.diameter() <= 512.0);
            let m = s.min_distance().unwrap();
            assert!(m >= 1.0 / 512.0, "min distance {m}");
        }
    }

    #[test]
    fn deterministic_for_a_seed() {
        let a = random_ultrametric(&mut seeded(7), &UltrametricParams::dyadic(16));
        let b = random_ultrametric(&mut seeded(7), &UltrametricParams::dyadic(16));
        assert_eq!(a, b);
    }

    #[test]
    fn clustered_sample_shape() {
        let s = clustered_line_sample(&mut seeded(1), 2, 1.0);
        assert_eq!(s.len(), 9);
        assert_eq!(s.labels()[..3], ["0", "1", "2"]);
        let s = clustered_line_sample(&mut seeded(1), 3, 0.0);
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn word_samples() {
        let ws = sample_words(&mut seeded(0), 2, 3, 100).unwrap();
        assert_eq!(ws.len(), 8);
        let ws = sample_words(&mut seeded(0), 3, 4, 10).unwrap();
        assert_eq!(ws.len(), 10);
        assert!(ws.windows(2).all(|w| w[0] < w[1]));
    }
}
