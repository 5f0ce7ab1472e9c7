//! Seeded generators behind `umt gen`.

use rand::Rng;
use umt_core::random::{random_ultrametric, sample_words, seeded, UltrametricParams};
use umt_core::space::numbered_labels;
use umt_core::{CantorSpace, FiniteMetricSpace, Rational, Word};

use crate::error::{Error, Result};

pub const MAX_POINTS: usize = 512;
pub const MAX_WORDS: u64 = 1_000_000;

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParams("n must be at least 1".into()));
    }
    if n > MAX_POINTS {
        return Err(Error::SizeLimitExceeded { what: format!("n = {n}"), limit: MAX_POINTS as u64 });
    }
    Ok(())
}

pub fn ultrametric(p: &UltrametricParams, seed: u64) -> Result<FiniteMetricSpace> {
    check_n(p.n)?;
    if p.max_children < 2 {
        return Err(Error::InvalidParams("max-children must be at least 2".into()));
    }
    if p.max_step < 1 {
        return Err(Error::InvalidParams("max-step must be at least 1".into()));
    }
    if p.top > p.bottom {
        return Err(Error::InvalidParams("top level must not exceed bottom level".into()));
    }
    Ok(random_ultrametric(&mut seeded(seed), p))
}

/// `n` uniform points of the unit square, Euclidean distances.
pub fn euclidean(n: usize, seed: u64) -> Result<FiniteMetricSpace> {
    check_n(n)?;
    let mut rng = seeded(seed);
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect();
    Ok(FiniteMetricSpace::from_fn(numbered_labels(n), FiniteMetricSpace::DEFAULT_TOL, |i, j| {
        (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1)
    })?)
}

/// All of `F^depth`, or `count` sampled words, with base the zeros word.
pub fn cantor(k: usize, depth: usize, lambda: Rational, count: Option<usize>, seed: u64) -> Result<CantorSpace> {
    if !(2..=umt_core::cantor::MAX_ALPHABET).contains(&k) {
        return Err(Error::InvalidParams(format!("k = {k} must be in 2..={}", umt_core::cantor::MAX_ALPHABET)));
    }
    if depth == 0 {
        return Err(Error::InvalidParams("depth must be at least 1".into()));
    }
    let total = (k as u64).checked_pow(depth as u32).filter(|&t| t <= MAX_WORDS);
    if total.is_none() {
        return Err(Error::SizeLimitExceeded { what: format!("{k}^{depth} words"), limit: MAX_WORDS });
    }
    if count == Some(0) {
        return Err(Error::InvalidParams("count must be at least 1".into()));
    }
    let words = sample_words(&mut seeded(seed), k, depth, count.unwrap_or(usize::MAX))?;
    Ok(CantorSpace::new(k, lambda, depth, words, Word::zeros(depth))?)
}
