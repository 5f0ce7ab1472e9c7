//! Cantor embeddings of finite ultrametric spaces and the uniformization
//! pipeline.
//!
//! A compact embedding codes the dendrogram: a node of height `h` gets the
//! level `j(h)`, the least `j >= 0` with `λ^j <= h`, and each child appends
//! a block of symbols to its parent's code. Two points whose lowest common
//! ancestor has level `j` then share a prefix of length about `j`, so
//! `ρ_λ` reproduces `d` up to a factor `1/λ`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::cantor::{materialize, nth_word_symbols, rotate_to_zero, CantorError, CantorMetric, CantorSpace, Word};
use crate::deform::{chordal_extend, DeformError};
use crate::distort::{bilipschitz_of_map, distortion_report, DistortError, DistortionReport, PointMap, ReportOptions};
use crate::props::{check_ultrametric, disconnectedness_modulus, property_report, CoverMode, PropertyReport};
use crate::rational::Rational;
use crate::space::{ExtendedSpace, FiniteMetricSpace};
use crate::ultrametrize::{build_dendrogram, subdominant_ultrametric, ultrametrization_distortion, UltrametrizeError, HEIGHT_TOL};

/// Deepest level a node height may quantize to.
pub const MAX_LEVEL: u32 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum EmbedMode {
    /// One symbol per child: needs at most `k` children per node.
    ExactLevel,
    /// `⌈log_k m⌉` symbols for `m` children; any `k >= 2`.
    ExpandDepth,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum UniformizeMode {
    Bounded,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub enum EmbedError {
    /// Exact-level coding needs an alphabet of at least `required` symbols.
    AlphabetTooSmall { k: usize, required: usize },
    NotUltrametric(UltrametrizeError),
    LevelOverflow { height: f64 },
    DegenerateInput { len: usize },
    Cantor(CantorError),
    Deform(DeformError),
    Distort(DistortError),
}

impl fmt::Display for EmbedError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EmbedError::AlphabetTooSmall { k, required } => write!(
                f,
                "a node has {required} children but the alphabet has {k} symbols; use k >= {required} or expand-depth mode"
            ),
            EmbedError::NotUltrametric(e) => write!(f, "{e}"),
            EmbedError::LevelOverflow { height } => {
                write!(f, "height {height} needs a level beyond {MAX_LEVEL}")
            }
            EmbedError::DegenerateInput { len } => write!(f, "need at least 2 points, got {len}"),
            EmbedError::Cantor(e) => write!(f, "{e}"),
            EmbedError::Deform(e) => write!(f, "{e}"),
            EmbedError::Distort(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for EmbedError {}

impl From<CantorError> for EmbedError {
    fn from(e: CantorError) -> Self {
        EmbedError::Cantor(e)
    }
}

impl From<DeformError> for EmbedError {
    fn from(e: DeformError) -> Self {
        EmbedError::Deform(e)
    }
}

impl From<DistortError> for EmbedError {
    fn from(e: DistortError) -> Self {
        EmbedError::Distort(e)
    }
}

impl From<UltrametrizeError> for EmbedError {
    fn from(e: UltrametrizeError) -> Self {
        EmbedError::NotUltrametric(e)
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct StageConstant {
    pub name: String,
    pub value: f64,
}

fn stage(name: &str, value: f64) -> StageConstant {
    StageConstant { name: String::from(name), value }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EmbeddingResult {
    pub target: CantorSpace,
    pub metric: CantorMetric,
    /// Image word of each input point, by input index.
    pub assignment: Vec<Word>,
    pub report: DistortionReport,
    pub stages: Vec<StageConstant>,
    /// Input distances were divided by this before coding.
    pub rescale: f64,
    /// Guaranteed bilipschitz bound for the realized coding.
    pub bound: f64,
    /// The bound checked pair by pair in exact arithmetic (compact
    /// embeddings) or against the measured constant (pipelines).
    pub bound_holds: bool,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none"))]
    pub properties: Option<PropertyReport>,
}

impl EmbeddingResult {
    pub fn stage(&self, name: &str) -> Option<f64> {
        self.stages.iter().find(|s| s.name == name).map(|s| s.value)
    }
}

/// Words for the points of an ultrametric space with diameter at most 1,
/// plus the exponent `s` of the realized bound `λ^(1+s) d < ρ <= d`.
struct Coding {
    words: Vec<Word>,
    slack: u32,
}

fn code_dendrogram(space: &FiniteMetricSpace, k: usize, lambda: Rational, mode: EmbedMode) -> Result<Coding, EmbedError> {
    let n = space.len();
    let tree = build_dendrogram(space)?;
    if n == 1 {
        return Ok(Coding { words: vec![Word::zeros(1)], slack: 0 });
    }
    if mode == EmbedMode::ExactLevel && tree.max_children() > k {
        return Err(EmbedError::AlphabetTooSmall { k, required: tree.max_children() });
    }
    let width = |m: usize| -> usize {
        match mode {
            EmbedMode::ExactLevel => 1,
            EmbedMode::ExpandDepth => {
                let mut b = 0;
                let mut cap = 1usize;
                while cap < m {
                    cap = cap.saturating_mul(k);
                    b += 1;
                }
                b
            }
        }
    };
    let nodes = &tree.nodes;
    // code prefix of every node; an internal node's prefix length is its realized level
    let mut prefix: Vec<Vec<u8>> = vec![Vec::new(); nodes.len()];
    let mut slack = 0u32;
    for v in tree.preorder() {
        let node = &nodes[v];
        if node.children.is_empty() {
            continue;
        }
        let j = lambda.level_at_or_below(node.height, MAX_LEVEL).ok_or(EmbedError::LevelOverflow { height: node.height })?;
        let realized = j.max(prefix[v].len() as u32);
        prefix[v].resize(realized as usize, 0);
        let b = width(node.children.len());
        slack = slack.max(realized - j + b as u32 - 1);
        let base = prefix[v].clone();
        for (c, &child) in node.children.iter().enumerate() {
            let mut code = base.clone();
            code.extend(nth_word_symbols(c, b, k));
            prefix[child] = code;
        }
    }
    let depth = (0..n).map(|i| prefix[i].len()).max().unwrap_or(0).max(1);
    let words = (0..n)
        .map(|i| {
            let mut s = prefix[i].clone();
            s.resize(depth, 0);
            Word::new(s, k)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Coding { words, slack })
}

/// `λ^(1+s) d < ρ <= d` for every pair, with `ρ = λ^L` compared exactly.
fn exact_pair_bound(space: &FiniteMetricSpace, words: &[Word], lambda: Rational, slack: u32) -> bool {
    let n = space.len();
    for x in 0..n {
        for y in (x + 1)..n {
            let l = words[x].symbols().iter().zip(words[y].symbols()).take_while(|(a, b)| a == b).count() as i64;
            let d = space.dist(x, y);
            // ρ <= d  and  d < λ^(L - 1 - s)
            if lambda.cmp_f64_with_pow(d, l) == Ordering::Less
                || lambda.cmp_f64_with_pow(d, l - 1 - slack as i64) != Ordering::Less
            {
                return false;
            }
        }
    }
    true
}

fn inverse_power(lambda: Rational, e: u32) -> f64 {
    lambda.pow_f64(-(e as i64))
}

/// Codes a finite ultrametric space into the `k`-symbol Cantor set with
/// `ρ_λ`. Spaces with diameter above 1 are first divided by their diameter.
///
/// In exact-level mode with strictly separated levels this guarantees
/// `λ d < ρ(f x, f y) <= d`. In general the guaranteed factor is
/// `(1/λ)^(1+s)` where `s` collects extra depth from wide blocks and from
/// nested heights that quantize to nearby levels; `bound` reports it.
pub fn embed_compact(space: &FiniteMetricSpace, k: usize, lambda: Rational, mode: EmbedMode) -> Result<EmbeddingResult, EmbedError> {
    if !(2..=crate::cantor::MAX_ALPHABET).contains(&k) {
        return Err(CantorError::InvalidAlphabet { k }.into());
    }
    let diam = space.diameter();
    let rescale = if diam > 1.0 { diam } else { 1.0 };
    let scaled = if rescale != 1.0 { space.scaled(1.0 / rescale) } else { space.clone() };
    let coding = code_dendrogram(&scaled, k, lambda, mode)?;
    let depth = coding.words[0].depth();
    let target = CantorSpace::new(k, lambda, depth, coding.words.clone(), Word::zeros(depth))?;
    let image = materialize(&target, CantorMetric::Rho)?;
    let map = PointMap::identity(ExtendedSpace::plain(scaled.clone()), ExtendedSpace::plain(image))?;
    let report = distortion_report(&map, &ReportOptions::light())?;
    let bound = inverse_power(lambda, 1 + coding.slack);
    let bound_holds = exact_pair_bound(&scaled, &coding.words, lambda, coding.slack);
    let stages = vec![stage("rescale", rescale), stage("L", report.bilipschitz.constant)];
    Ok(EmbeddingResult {
        target,
        metric: CantorMetric::Rho,
        assignment: coding.words,
        report,
        stages,
        rescale,
        bound,
        bound_holds,
        properties: None,
    })
}

/// The unbounded pipeline: chordal extension at `a`, compact embedding of
/// the extension (with `∞` as an ordinary point), a symbol rotation sending
/// the image of `∞` to the all-zeros base word, and the induced map into the
/// punctured Cantor set with `σ_λ`. Since `d = d_a / (d_a(·,∞) d_a(·,∞))`
/// and `σ = ρ / (ρ(·,o) ρ(·,o))`, an `L`-bilipschitz coding of the extension
/// gives an `L^3`-bilipschitz map for `σ`.
pub fn embed_unbounded(
    space: &FiniteMetricSpace,
    a: usize,
    k: usize,
    lambda: Rational,
    mode: EmbedMode,
) -> Result<EmbeddingResult, EmbedError> {
    if let Some(w) = check_ultrametric(space, HEIGHT_TOL).witness {
        return Err(UltrametrizeError::NotUltrametric(w).into());
    }
    let ext = chordal_extend(space, a)?;
    let inf = ext.infinity().expect("chordal extension marks infinity");
    if let Some(w) = check_ultrametric(&ext, HEIGHT_TOL).witness {
        return Err(UltrametrizeError::NotUltrametric(w).into());
    }
    let compact = embed_compact(ext.base(), k, lambda, mode)?;
    let stage_l = compact.report.bilipschitz.constant;
    let rotated = rotate_to_zero(&compact.assignment, &compact.assignment[inf]);
    let words: Vec<Word> = rotated.iter().enumerate().filter(|&(i, _)| i != inf).map(|(_, w)| w.clone()).collect();
    let depth = compact.target.depth();
    let target = CantorSpace::new(k, lambda, depth, words.clone(), Word::zeros(depth))?;
    let image = materialize(&target, CantorMetric::Sigma)?;
    let map = PointMap::identity(ExtendedSpace::plain(space.clone()), ExtendedSpace::plain(image))?;
    let report = distortion_report(&map, &ReportOptions::light())?;
    let total = report.bilipschitz.constant;
    let bound = stage_l * stage_l * stage_l;
    let bound_holds = total <= bound * (1.0 + 1e-9);
    let stages = vec![
        stage("rescale_extension", compact.rescale),
        stage("L", stage_l),
        stage("L_total", total),
    ];
    Ok(EmbeddingResult {
        target,
        metric: CantorMetric::Sigma,
        assignment: words,
        report,
        stages,
        rescale: 1.0,
        bound,
        bound_holds,
        properties: None,
    })
}

/// The uniformization pipeline at `k = 2`: subdominant ultrametric, then
/// (bounded) a compact embedding into `ρ_λ` or (unbounded, at base point
/// `a`, default 0) the unbounded pipeline into `σ_λ`, both in expand-depth
/// mode. The report covers the composed map from the input metric.
pub fn uniformize(
    space: &FiniteMetricSpace,
    mode: UniformizeMode,
    a: Option<usize>,
    lambda: Rational,
) -> Result<EmbeddingResult, EmbedError> {
    let n = space.len();
    if n < 2 {
        return Err(EmbedError::DegenerateInput { len: n });
    }
    let properties = property_report(space, HEIGHT_TOL, CoverMode::Exact);
    let mu = disconnectedness_modulus(space).modulus;
    let u = subdominant_ultrametric(space);
    let (l1, _) = ultrametrization_distortion(space);
    let mut stages = vec![stage("mu_star", mu), stage("L1", l1)];
    let mut result = match mode {
        UniformizeMode::Bounded => {
            let r = embed_compact(&u, 2, lambda, EmbedMode::ExpandDepth)?;
            let source = if r.rescale != 1.0 { space.scaled(1.0 / r.rescale) } else { space.clone() };
            let image = materialize(&r.target, CantorMetric::Rho)?;
            let map = PointMap::identity(ExtendedSpace::plain(source), ExtendedSpace::plain(image))?;
            stages.push(stage("rescale", r.rescale));
            stages.push(stage("L_embed", r.report.bilipschitz.constant));
            EmbeddingResult { report: distortion_report(&map, &ReportOptions::full())?, ..r }
        }
        UniformizeMode::Unbounded => {
            let a = a.unwrap_or(0);
            let r = embed_unbounded(&u, a, 2, lambda, EmbedMode::ExpandDepth)?;
            let image = materialize(&r.target, CantorMetric::Sigma)?;
            let map = PointMap::identity(ExtendedSpace::plain(space.clone()), ExtendedSpace::plain(image))?;
            // the same words measured with ρ instead of σ
            let rho_image = materialize(&r.target, CantorMetric::Rho)?;
            let rho_map = PointMap::identity(ExtendedSpace::plain(space.clone()), ExtendedSpace::plain(rho_image))?;
            let rho_qm = crate::distort::weak_qm_constant(&rho_map, false, 0)?;
            stages.extend(r.stages.iter().cloned().map(|s| match s.name.as_str() {
                "L" => stage("L_embed", s.value),
                "L_total" => stage("L_sigma", s.value),
                _ => s,
            }));
            stages.push(stage("K_qm_rho", rho_qm.constant));
            EmbeddingResult { report: distortion_report(&map, &ReportOptions::full())?, ..r }
        }
    };
    let composed = bilipschitz_of_map(&PointMap::identity(
        ExtendedSpace::plain(space.scaled(1.0 / result.rescale)),
        ExtendedSpace::plain(materialize(&result.target, result.metric)?),
    )?);
    debug_assert_eq!(composed, result.report.bilipschitz);
    stages.push(stage("L_total", composed.constant));
    result.stages = stages;
    result.bound *= l1;
    result.bound_holds = result.bound_holds && composed.constant <= result.bound * (1.0 + 1e-9);
    result.properties = Some(properties);
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cantor::exponent_matrix;
    use crate::space::numbered_labels;

    fn cantor(depth: usize) -> FiniteMetricSpace {
        materialize(&CantorSpace::full(2, depth, Rational::HALF).unwrap(), CantorMetric::Rho).unwrap()
    }

    #[test]
    fn cantor_input_is_reproduced() {
        let c = cantor(3);
        let r = embed_compact(&c, 2, Rational::HALF, EmbedMode::ExactLevel).unwrap();
        assert_eq!(r.report.bilipschitz.constant, 1.0);
        assert!(r.bound_holds);
        assert_eq!(r.bound, 2.0);
        let words: Vec<String> = r.assignment.iter().map(|w| alloc::format!("{w}")).collect();
        assert_eq!(words, c.labels());
    }

    #[test]
    fn alphabet_too_small() {
        let e = FiniteMetricSpace::from_fn(numbered_labels(5), 0.0, |_, _| 1.0).unwrap();
        let err = embed_compact(&e, 4, Rational::HALF, EmbedMode::ExactLevel).unwrap_err();
        assert_eq!(err, EmbedError::AlphabetTooSmall { k: 4, required: 5 });
        let r = embed_compact(&e, 4, Rational::HALF, EmbedMode::ExpandDepth).unwrap();
        assert_eq!(r.target.depth(), 2);
        assert!(r.bound_holds);
        assert_eq!(r.bound, 4.0);
    }

    #[test]
    fn quantization_of_a_third() {
        // {a, b} at 1/3 inside a pair at distance 1
        let rows = [[0.0, 1.0 / 3.0, 1.0], [1.0 / 3.0, 0.0, 1.0], [1.0, 1.0, 0.0]];
        let s = FiniteMetricSpace::from_fn(numbered_labels(3), 0.0, |i, j| rows[i][j]).unwrap();
        let r = embed_compact(&s, 2, Rational::HALF, EmbedMode::ExactLevel).unwrap();
        let e = exponent_matrix(&r.target, CantorMetric::Rho).unwrap();
        assert_eq!(e.raw(0, 1), 2);
        assert!((r.report.bilipschitz.constant - 4.0 / 3.0).abs() < 1e-15);
        assert!(r.bound_holds);
    }

    #[test]
    fn unbounded_small_diameter() {
        let c = cantor(2);
        let r = embed_unbounded(&c, 0, 3, Rational::HALF, EmbedMode::ExactLevel).unwrap();
        assert!(r.bound_holds);
        assert!(r.assignment.iter().all(|w| w.symbols().iter().any(|&s| s != 0)));
        assert!((r.stage("L_total").unwrap() - r.stage("L").unwrap()).abs() < 1e-12);
    }

    #[test]
    fn unbounded_spread_distances() {
        let rows = [[0.0, 1.0, 4.0, 16.0], [1.0, 0.0, 4.0, 16.0], [4.0, 4.0, 0.0, 16.0], [16.0, 16.0, 16.0, 0.0]];
        let s = FiniteMetricSpace::from_fn(numbered_labels(4), 0.0, |i, j| rows[i][j]).unwrap();
        for a in 0..4 {
            let r = embed_unbounded(&s, a, 2, Rational::HALF, EmbedMode::ExpandDepth).unwrap();
            let l = r.stage("L").unwrap();
            assert!(r.report.bilipschitz.constant <= l * l * l * (1.0 + 1e-9));
        }
    }

    #[test]
    fn uniformize_fixed_point() {
        let c = cantor(3);
        let r = uniformize(&c, UniformizeMode::Bounded, None, Rational::HALF).unwrap();
        assert_eq!(r.report.bilipschitz.constant, 1.0);
        assert_eq!(r.report.quasimobius.as_ref().unwrap().constant, 1.0);
        assert!(r.report.mobius.as_ref().unwrap().holds);
        assert_eq!(r.stage("L1"), Some(1.0));
        assert!(r.properties.as_ref().unwrap().ultrametric.holds);
    }

    #[test]
    fn uniformize_line() {
        let s = FiniteMetricSpace::from_fn(numbered_labels(6), 1e-9, |i, j| (i as f64 - j as f64).abs()).unwrap();
        let r = uniformize(&s, UniformizeMode::Bounded, None, Rational::HALF).unwrap();
        assert_eq!(r.stage("L1"), Some(5.0));
        assert!((r.stage("mu_star").unwrap() - 0.2).abs() < 1e-12);
        let r = uniformize(&s, UniformizeMode::Unbounded, Some(0), Rational::HALF).unwrap();
        assert!(r.stage("K_qm_rho").unwrap().is_finite());
        assert!(r.bound_holds);
    }
}
