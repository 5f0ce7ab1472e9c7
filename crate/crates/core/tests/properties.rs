mod common;

use common::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use umt_core::cantor::{
    exponent_matrix, materialize, rho, rotate_to_zero, sigma, strong_triangle_violation, CantorMetric,
};
use umt_core::deform::{chordal_extend, invert};
use umt_core::distort::{bilipschitz_of_map, is_mobius, weak_qm_constant, weak_qs_constant, PointMap};
use umt_core::embed::{embed_compact, EmbedMode};
use umt_core::props::{check_ultrametric, disconnectedness_modulus};
use umt_core::random::{random_ultrametric, seeded, UltrametricParams};
use umt_core::ultrametrize::{build_dendrogram, subdominant_ultrametric, ultrametrization_distortion};
use umt_core::{CantorSpace, Distances, ExtendedSpace, FiniteMetricSpace, Rational, Word};

fn word(k: usize, depth: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(0..k as u8, depth).prop_map(move |s| Word::new(s, k).unwrap())
}

fn words3() -> impl Strategy<Value = (usize, Word, Word, Word)> {
    (2usize..5, 1usize..=8).prop_flat_map(|(k, depth)| (Just(k), word(k, depth), word(k, depth), word(k, depth)))
}

fn exp(d: umt_core::ExactDistance) -> i64 {
    d.exponent().unwrap_or(i64::MAX)
}

fn plain_map(a: &FiniteMetricSpace, b: &FiniteMetricSpace) -> PointMap {
    PointMap::identity(ExtendedSpace::plain(a.clone()), ExtendedSpace::plain(b.clone())).unwrap()
}

fn ultrametric(seed: u64, max_n: usize) -> FiniteMetricSpace {
    let mut rng = seeded(seed);
    let n = rng.random_range(1..=max_n);
    let p = UltrametricParams { n, max_children: 4, lambda: Rational::HALF, top: -6, bottom: 6, max_step: 3 };
    random_ultrametric(&mut rng, &p)
}

proptest! {
    #[test]
    fn rho_strong_triangle((_, x, y, z) in words3()) {
        let e = |a: &Word, b: &Word| exp(rho(a, b).unwrap());
        prop_assert!(e(&x, &y) >= e(&x, &z).min(e(&z, &y)));
    }

    #[test]
    fn sigma_strong_triangle_and_factorization((k, x, y, z) in words3()) {
        let o = Word::zeros(x.depth());
        prop_assume!(x != o && y != o && z != o);
        let s = |a: &Word, b: &Word| exp(sigma(a, b, &o).unwrap());
        if x != y && y != z && x != z {
            prop_assert!(s(&x, &y) >= s(&x, &z).min(s(&z, &y)));
        }
        let r = |a: &Word, b: &Word| exp(rho(a, b).unwrap());
        if x != y {
            prop_assert_eq!(s(&x, &y), r(&x, &y) - r(&x, &o) - r(&y, &o));
        } else {
            prop_assert!(sigma(&x, &y, &o).unwrap().is_zero());
        }
        prop_assert_eq!(sigma(&x, &y, &o).unwrap(), sigma(&y, &x, &o).unwrap());
        let _ = k;
    }

    #[test]
    fn rho_invariant_under_positional_permutations((k, x, y, _) in words3(), seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let perms: Vec<Vec<u8>> = (0..x.depth())
            .map(|_| {
                let mut p: Vec<u8> = (0..k as u8).collect();
                p.shuffle(&mut rng);
                p
            })
            .collect();
        let apply = |w: &Word| {
            Word::new(w.symbols().iter().enumerate().map(|(t, &s)| perms[t][s as usize]).collect(), k).unwrap()
        };
        prop_assert_eq!(rho(&x, &y).unwrap(), rho(&apply(&x), &apply(&y)).unwrap());
        let r = rotate_to_zero(&[x.clone(), y.clone()], &x);
        prop_assert_eq!(&r[0], &Word::zeros(x.depth()));
        prop_assert_eq!(rho(&x, &y).unwrap(), rho(&r[0], &r[1]).unwrap());
    }

    #[test]
    fn deformations_keep_ultrametrics(seed in any::<u64>()) {
        let u = ultrametric(seed, 16);
        let a = (seed as usize) % u.len();
        let ext = chordal_extend(&u, a).unwrap();
        prop_assert!(check_ultrametric(&ext, 1e-12).holds);
        if u.len() >= 2 {
            let inv = invert(&u, a).unwrap();
            prop_assert!(check_ultrametric(&inv, 1e-12).holds);
        }
    }

    #[test]
    fn chordal_identity_preserves_cross_ratios(seed in any::<u64>()) {
        let u = mixed_instance(seed, 10);
        let a = (seed as usize) % u.len();
        let before = ExtendedSpace::adjoin_infinity(&u);
        let after = chordal_extend(&u, a).unwrap();
        let map = PointMap::identity(before, after).unwrap();
        prop_assert!(map.preserves_infinity());
        prop_assert!(is_mobius(&map, 1e-9).holds);
    }

    #[test]
    fn chordal_is_identity_on_small_spaces(seed in any::<u64>()) {
        let u = mixed_instance(seed, 10).scaled(0.5);
        let ext = chordal_extend(&u, 0).unwrap();
        for i in 0..u.len() {
            prop_assert_eq!(ext.dist(i, u.len()), 1.0);
            for j in 0..u.len() {
                prop_assert_eq!(ext.dist(i, j), u.dist(i, j));
            }
        }
    }

    #[test]
    fn three_way_ultrametric_equivalence(seed in any::<u64>()) {
        let d = mixed_instance(seed, 8);
        let is_u = check_ultrametric(&d, 0.0).holds;
        prop_assert_eq!(is_u, disconnectedness_modulus(&d).modulus >= 1.0 || d.len() < 3);
        prop_assert_eq!(is_u, subdominant_ultrametric(&d) == d);
    }

    #[test]
    fn subdominant_is_maximal(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let n = rng.random_range(2..=7);
        let d = euclidean(&mut rng, n);
        let u = random_ultrametric(&mut rng, &UltrametricParams::dyadic(n));
        let c = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| d.dist(i, j) / u.dist(i, j))
            .fold(f64::INFINITY, f64::min);
        let u = u.scaled(c);
        let sub = subdominant_ultrametric(&d);
        for i in 0..n {
            for j in 0..n {
                prop_assert!(u.dist(i, j) <= sub.dist(i, j) * (1.0 + 1e-12));
                prop_assert!(sub.dist(i, j) <= d.dist(i, j));
            }
        }
    }

    #[test]
    fn modulus_bridge(seed in any::<u64>()) {
        let d = mixed_instance(seed, 8);
        let mu = disconnectedness_modulus(&d).modulus.min(1.0);
        let sub = subdominant_ultrametric(&d);
        for i in 0..d.len() {
            for j in 0..d.len() {
                prop_assert!(mu * d.dist(i, j) <= sub.dist(i, j) * (1.0 + 1e-12));
            }
        }
        if d.len() >= 3 {
            prop_assert!(ultrametrization_distortion(&d).0 <= 1.0 / mu + 1e-9);
        }
    }

    #[test]
    fn dendrogram_round_trip(seed in any::<u64>()) {
        let u = ultrametric(seed, 20);
        let t = build_dendrogram(&u).unwrap();
        let m = t.tree_metric();
        prop_assert_eq!(&m, &u);
        prop_assert_eq!(build_dendrogram(&m).unwrap().canonical(), t.canonical());
        for (v, node) in t.nodes.iter().enumerate() {
            if v >= u.len() {
                prop_assert!(node.children.len() >= 2);
            }
            for &c in &node.children {
                prop_assert!(t.nodes[c].height < node.height);
            }
        }
    }

    #[test]
    fn exact_level_embedding_bound_and_relabeling(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let n = rng.random_range(2..=24);
        let u = random_ultrametric(&mut rng, &UltrametricParams { n, max_children: 4, lambda: Rational::HALF, top: 0, bottom: 30, max_step: 2 });
        let r = embed_compact(&u, 4, Rational::HALF, EmbedMode::ExactLevel).unwrap();
        prop_assert!(r.bound_holds);
        prop_assert!(r.report.bilipschitz.constant <= 2.0);
        let mut sorted = r.assignment.clone();
        sorted.sort();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), n);
        // permute the input and compare realized metrics
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let permuted = u.subspace(&perm);
        let r2 = embed_compact(&permuted, 4, Rational::HALF, EmbedMode::ExactLevel).unwrap();
        let m1 = exponent_matrix(&r.target, CantorMetric::Rho).unwrap();
        let m2 = exponent_matrix(&r2.target, CantorMetric::Rho).unwrap();
        let pos1: Vec<usize> = (0..n).map(|i| r.target.points().iter().position(|w| *w == r.assignment[i]).unwrap()).collect();
        let pos2: Vec<usize> = (0..n).map(|i| r2.target.points().iter().position(|w| *w == r2.assignment[i]).unwrap()).collect();
        for a in 0..n {
            for b in 0..n {
                prop_assert_eq!(m2.raw(pos2[a], pos2[b]), m1.raw(pos1[perm[a]], pos1[perm[b]]));
            }
        }
    }

    #[test]
    fn expand_depth_bound(seed in any::<u64>(), k in 2usize..4) {
        let u = ultrametric(seed, 30);
        let r = embed_compact(&u, k, Rational::HALF, EmbedMode::ExpandDepth).unwrap();
        prop_assert!(r.bound_holds);
        prop_assert!(r.report.bilipschitz.constant <= r.bound);
    }

    #[test]
    fn scaling_invariance(seed in any::<u64>(), c in 0.01f64..100.0) {
        let d = mixed_instance(seed, 7);
        prop_assume!(d.len() >= 4);
        let u = subdominant_ultrametric(&d);
        let base = plain_map(&d, &u);
        let scaled = plain_map(&d, &u.scaled(c));
        let h0 = weak_qs_constant(&base).constant;
        let h1 = weak_qs_constant(&scaled).constant;
        prop_assert!((h0 - h1).abs() <= 1e-12 * h0);
        let k0 = weak_qm_constant(&base, false, 0).unwrap().constant;
        let k1 = weak_qm_constant(&scaled, false, 0).unwrap().constant;
        prop_assert!((k0 - k1).abs() <= 1e-12 * k0);
        let id = plain_map(&d, &d.scaled(c));
        let l = bilipschitz_of_map(&id).constant;
        prop_assert!((l - c.max(1.0 / c)).abs() <= 1e-12 * l);
    }

    #[test]
    fn composition_bounds(seed in any::<u64>()) {
        let d = mixed_instance(seed, 7);
        prop_assume!(d.len() >= 4);
        let u = subdominant_ultrametric(&d);
        let mut rng = seeded(seed);
        let w = euclidean(&mut rng, d.len());
        let f = plain_map(&d, &u);
        let g = plain_map(&u, &w);
        let gf = f.then(&g).unwrap();
        let (lf, lg, lgf) = (bilipschitz_of_map(&f).constant, bilipschitz_of_map(&g).constant, bilipschitz_of_map(&gf).constant);
        prop_assert!(lgf <= lf * lg * (1.0 + 1e-12));
        // K(g∘f) is bounded by g's envelope at K(f)
        let kf = weak_qm_constant(&f, false, 0).unwrap().constant;
        let env_g = weak_qm_constant(&g, false, 0).unwrap().steps.points();
        let eta = env_g.iter().filter(|(t, _)| *t <= kf * (1.0 + 1e-12)).map(|p| p.1).fold(1.0, f64::max);
        let kgf = weak_qm_constant(&gf, false, 0).unwrap().constant;
        prop_assert!(kgf <= eta * (1.0 + 1e-12), "{kgf} > {eta}");
    }

    #[test]
    fn mobius_maps_have_diagonal_steps(seed in any::<u64>(), c in 0.1f64..10.0) {
        let d = mixed_instance(seed, 7);
        prop_assume!(d.len() >= 4);
        let m = plain_map(&d, &d.scaled(c));
        prop_assert!(is_mobius(&m, 1e-12).holds);
        let k = weak_qm_constant(&m, false, 0).unwrap();
        prop_assert!((k.constant - 1.0).abs() <= 1e-12);
        for (t, o) in k.steps.points() {
            prop_assert!((t - o).abs() <= 1e-12 * t);
        }
    }

    #[test]
    fn infinity_preserving_maps_have_finite_qs(seed in any::<u64>()) {
        let d = mixed_instance(seed, 8);
        let ext = chordal_extend(&d, 0).unwrap();
        let map = PointMap::identity(ExtendedSpace::adjoin_infinity(&d), ext).unwrap();
        prop_assert!(map.preserves_infinity());
        prop_assert!(weak_qm_constant(&map, false, 0).unwrap().constant.is_finite());
        prop_assert!(weak_qs_constant(&map).constant.is_finite());
    }
}

#[test]
fn materialized_cantor_sets_are_ultrametric() {
    for k in 2..=3 {
        for depth in 1..=4 {
            let full = CantorSpace::full(k, depth, Rational::THIRD).unwrap();
            assert!(check_ultrametric(&materialize(&full, CantorMetric::Rho).unwrap(), 0.0).holds);
            assert!(strong_triangle_violation(&exponent_matrix(&full, CantorMetric::Rho).unwrap()).is_none());
        }
    }
}
