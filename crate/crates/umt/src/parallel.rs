//! Rayon drivers for the distortion scans. Each scan is split over its
//! first point and the partial results are merged with order-independent
//! tie-breaks, so the output does not depend on the thread count.

use rayon::prelude::*;
use umt_core::distort::{
    bilipschitz_of_map, mobius_partial, weak_qm_partial, weak_qm_sampled, weak_qs_partial, DistortError,
    DistortionReport, MobiusReport, PointMap, ReportOptions, ScanPartial, WeakReport, QM_CAP, QM_SAMPLES,
};

/// Thread cap from `UMT_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var("UMT_THREADS").ok()?.trim().parse().ok().filter(|&t| t > 0)
}

/// Runs `f` on a pool honoring `UMT_THREADS`.
pub fn with_pool<T: Send, F: FnOnce() -> T + Send>(f: F) -> T {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = thread_cap() {
        b = b.num_threads(t);
    }
    match b.build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

fn scan<P: Fn(&PointMap, std::ops::Range<usize>) -> ScanPartial + Sync>(map: &PointMap, partial: P) -> WeakReport {
    (0..map.len())
        .into_par_iter()
        .map(|x| partial(map, x..x + 1))
        .reduce(|| partial(map, 0..0), ScanPartial::merge)
        .finish()
}

pub fn weak_qs(map: &PointMap) -> WeakReport {
    scan(map, weak_qs_partial)
}

pub fn weak_qm(map: &PointMap, force: bool, seed: u64) -> Result<WeakReport, DistortError> {
    let n = map.len();
    if n <= QM_CAP {
        Ok(scan(map, weak_qm_partial))
    } else if force {
        Ok(weak_qm_sampled(map, QM_SAMPLES, seed))
    } else {
        Err(DistortError::TooLarge { n, cap: QM_CAP })
    }
}

pub fn mobius(map: &PointMap, tol: f64) -> MobiusReport {
    (0..map.len())
        .into_par_iter()
        .map(|x| mobius_partial(map, x..x + 1))
        .reduce(|| mobius_partial(map, 0..0), |a, b| a.merge(b))
        .finish(tol)
}

pub fn report(map: &PointMap, opts: &ReportOptions) -> Result<DistortionReport, DistortError> {
    let quasimobius = if opts.qm { Some(weak_qm(map, opts.force, opts.seed)?) } else { None };
    Ok(DistortionReport {
        bilipschitz: bilipschitz_of_map(map),
        quasisymmetry: opts.qs.then(|| weak_qs(map)),
        quasimobius,
        mobius: opts.mobius_tol.map(|tol| mobius(map, tol)),
    })
}
