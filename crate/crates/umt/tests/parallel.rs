use umt::parallel;
use umt_core::distort::{is_mobius, weak_qm_constant, weak_qs_constant, PointMap};
use umt_core::random::{random_ultrametric, seeded, UltrametricParams};
use umt_core::ultrametrize::subdominant_ultrametric;
use umt_core::ExtendedSpace;

#[test]
fn parallel_scans_match_serial() {
    for seed in 0..20 {
        let d = umt::gen::euclidean(3 + seed as usize % 12, seed).unwrap();
        let maps = [
            PointMap::identity(ExtendedSpace::plain(d.clone()), ExtendedSpace::plain(subdominant_ultrametric(&d))).unwrap(),
            PointMap::identity(ExtendedSpace::plain(subdominant_ultrametric(&d)), ExtendedSpace::plain(d.clone())).unwrap(),
        ];
        for map in &maps {
            assert_eq!(parallel::weak_qs(map), weak_qs_constant(map));
            assert_eq!(parallel::weak_qm(map, false, 0).unwrap(), weak_qm_constant(map, false, 0).unwrap());
            assert_eq!(parallel::mobius(map, 1e-9), is_mobius(map, 1e-9));
        }
    }
}

#[test]
fn qm_cap_and_forced_sampling() {
    let u = random_ultrametric(&mut seeded(3), &UltrametricParams::dyadic(70));
    let map = PointMap::identity(ExtendedSpace::plain(u.clone()), ExtendedSpace::plain(u)).unwrap();
    assert!(parallel::weak_qm(&map, false, 0).is_err());
    let r = parallel::weak_qm(&map, true, 5).unwrap();
    assert!(!r.exhaustive);
    assert_eq!(r, parallel::weak_qm(&map, true, 5).unwrap());
}
