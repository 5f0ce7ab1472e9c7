//! Symbolic `k`-Cantor sets at finite depth.
//!
//! A depth-`n` word stands for the cylinder of its infinite extensions, so
//! distinct words have common prefix length at most `n - 1` and a word has
//! infinite common prefix with itself. Distances are exact powers `λ^e`
//! kept as integer exponents.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::rational::Rational;
use crate::space::FiniteMetricSpace;

/// Largest alphabet with a single-character digit (`0-9a-z`).
pub const MAX_ALPHABET: usize = 36;
/// Enumeration limits.
pub const MAX_ENUM_DEPTH: usize = 16;
pub const MAX_ENUM_WORDS: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CantorError {
    InvalidAlphabet { k: usize },
    SymbolOutOfRange { symbol: usize, k: usize },
    EmptyWord,
    InvalidDigit(char),
    DepthMismatch { left: usize, right: usize },
    /// `σ` is undefined at the base point.
    BasePointArgument,
    /// `σ` materialization with the base point among the points.
    BaseIncluded,
    BaseMissing,
    DuplicatePoint(String),
    NoPoints,
    SizeLimitExceeded { k: usize, depth: usize },
}

impl fmt::Display for CantorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use CantorError::*;
        match self {
            InvalidAlphabet { k } => write!(f, "alphabet size {k} must be in 2..={MAX_ALPHABET}"),
            SymbolOutOfRange { symbol, k } => write!(f, "symbol {symbol} out of range for k = {k}"),
            EmptyWord => write!(f, "words have depth at least 1"),
            InvalidDigit(c) => write!(f, "invalid word digit {c:?}"),
            DepthMismatch { left, right } => write!(f, "word depths differ: {left} vs {right}"),
            BasePointArgument => write!(f, "sigma is undefined at the base point"),
            BaseIncluded => write!(f, "sigma materialization requires the base point to be excluded"),
            BaseMissing => write!(f, "the base point is not among the points"),
            DuplicatePoint(w) => write!(f, "duplicate point {w}"),
            NoPoints => write!(f, "a Cantor space needs at least one point"),
            SizeLimitExceeded { k, depth } => {
                write!(f, "enumerating {k}^{depth} words exceeds the limit")
            }
        }
    }
}

impl core::error::Error for CantorError {}

fn digit(s: u8) -> char {
    if s < 10 {
        (b'0' + s) as char
    } else {
        (b'a' + s - 10) as char
    }
}

fn parse_digit(c: char) -> Option<u8> {
    match c {
        '0'..='9' => Some(c as u8 - b'0'),
        'a'..='z' => Some(c as u8 - b'a' + 10),
        _ => None,
    }
}

/// A finite word over `{0, .., k-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    symbols: Vec<u8>,
}

impl Word {
    pub fn new(symbols: Vec<u8>, k: usize) -> Result<Self, CantorError> {
        check_alphabet(k)?;
        if symbols.is_empty() {
            return Err(CantorError::EmptyWord);
        }
        if let Some(&s) = symbols.iter().find(|&&s| s as usize >= k) {
            return Err(CantorError::SymbolOutOfRange { symbol: s as usize, k });
        }
        Ok(Word { symbols })
    }

    /// Parses the base-`k` digit string format, e.g. `"0102"`.
    pub fn parse(s: &str, k: usize) -> Result<Self, CantorError> {
        check_alphabet(k)?;
        let symbols = s
            .chars()
            .map(|c| parse_digit(c).ok_or(CantorError::InvalidDigit(c)))
            .collect::<Result<Vec<_>, _>>()?;
        Word::new(symbols, k)
    }

    pub fn zeros(depth: usize) -> Self {
        assert!(depth >= 1, "words have depth at least 1");
        Word { symbols: vec![0; depth] }
    }

    pub(crate) fn from_symbols_unchecked(symbols: Vec<u8>) -> Self {
        Word { symbols }
    }

    pub fn depth(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.symbols {
            write!(f, "{}", digit(s))?;
        }
        Ok(())
    }
}

fn check_alphabet(k: usize) -> Result<(), CantorError> {
    if (2..=MAX_ALPHABET).contains(&k) {
        Ok(())
    } else {
        Err(CantorError::InvalidAlphabet { k })
    }
}

/// Common prefix length `L(x, y)`; `Infinite` exactly when `x = y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrefixLength {
    Finite(usize),
    Infinite,
}

pub fn common_prefix_length(x: &Word, y: &Word) -> Result<PrefixLength, CantorError> {
    if x.depth() != y.depth() {
        return Err(CantorError::DepthMismatch { left: x.depth(), right: y.depth() });
    }
    Ok(prefix_len(&x.symbols, &y.symbols))
}

#[inline]
fn prefix_len(x: &[u8], y: &[u8]) -> PrefixLength {
    match x.iter().zip(y).position(|(a, b)| a != b) {
        Some(i) => PrefixLength::Finite(i),
        None => PrefixLength::Infinite,
    }
}

/// A distance `λ^e` stored by its exponent; `exponent() == None` is the zero
/// distance (`e = +∞`). Ordering is by distance, so a larger exponent is a
/// smaller distance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ExactDistance {
    exponent: Option<i64>,
}

/// Product of distances: exponents add.
impl core::ops::Mul for ExactDistance {
    type Output = ExactDistance;

    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, other: ExactDistance) -> ExactDistance {
        match (self.exponent, other.exponent) {
            (Some(a), Some(b)) => ExactDistance::from_exponent(a + b),
            _ => ExactDistance::ZERO,
        }
    }
}

impl ExactDistance {
    pub const ZERO: ExactDistance = ExactDistance { exponent: None };

    pub fn from_exponent(e: i64) -> Self {
        ExactDistance { exponent: Some(e) }
    }

    pub fn exponent(&self) -> Option<i64> {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.exponent.is_none()
    }

    pub fn to_f64(&self, lambda: Rational) -> f64 {
        match self.exponent {
            None => 0.0,
            Some(e) => lambda.pow_f64(e),
        }
    }

    /// Quotient of distances; `None` when dividing by zero.
    pub fn checked_div(self, other: ExactDistance) -> Option<ExactDistance> {
        match (self.exponent, other.exponent) {
            (_, None) => None,
            (None, Some(_)) => Some(ExactDistance::ZERO),
            (Some(a), Some(b)) => Some(ExactDistance::from_exponent(a - b)),
        }
    }
}

impl PartialOrd for ExactDistance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExactDistance {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.exponent, other.exponent) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Less,
            (Some(_), None) => Ordering::Greater,
            (Some(a), Some(b)) => b.cmp(&a),
        }
    }
}

/// `ρ_λ(x, y) = λ^L(x,y)`.
pub fn rho(x: &Word, y: &Word) -> Result<ExactDistance, CantorError> {
    Ok(match common_prefix_length(x, y)? {
        PrefixLength::Infinite => ExactDistance::ZERO,
        PrefixLength::Finite(l) => ExactDistance::from_exponent(l as i64),
    })
}

/// `σ_λ(x, y) = λ^(L(x,y) - L(x,o) - L(y,o))` on words other than `o`.
pub fn sigma(x: &Word, y: &Word, o: &Word) -> Result<ExactDistance, CantorError> {
    let lxy = common_prefix_length(x, y)?;
    let lxo = common_prefix_length(x, o)?;
    let lyo = common_prefix_length(y, o)?;
    match (lxy, lxo, lyo) {
        (_, PrefixLength::Infinite, _) | (_, _, PrefixLength::Infinite) => Err(CantorError::BasePointArgument),
        (PrefixLength::Infinite, _, _) => Ok(ExactDistance::ZERO),
        (PrefixLength::Finite(a), PrefixLength::Finite(b), PrefixLength::Finite(c)) => {
            Ok(ExactDistance::from_exponent(a as i64 - b as i64 - c as i64))
        }
    }
}

/// All `k^depth` words in lexicographic order.
pub fn enumerate_words(k: usize, depth: usize) -> Result<Vec<Word>, CantorError> {
    check_alphabet(k)?;
    if depth == 0 {
        return Err(CantorError::EmptyWord);
    }
    let too_big = CantorError::SizeLimitExceeded { k, depth };
    if depth > MAX_ENUM_DEPTH {
        return Err(too_big);
    }
    let mut count = 1usize;
    for _ in 0..depth {
        count = count.checked_mul(k).filter(|&c| c <= MAX_ENUM_WORDS).ok_or(too_big.clone())?;
    }
    let mut out = Vec::with_capacity(count);
    let mut cur = vec![0u8; depth];
    for _ in 0..count {
        out.push(Word { symbols: cur.clone() });
        // odometer increment, last position fastest
        for pos in (0..depth).rev() {
            if (cur[pos] as usize) + 1 < k {
                cur[pos] += 1;
                break;
            }
            cur[pos] = 0;
        }
    }
    Ok(out)
}

/// The `i`-th word of length `len` in lexicographic order over `k` symbols.
pub(crate) fn nth_word_symbols(mut i: usize, len: usize, k: usize) -> Vec<u8> {
    let mut s = vec![0u8; len];
    for pos in (0..len).rev() {
        s[pos] = (i % k) as u8;
        i /= k;
    }
    debug_assert_eq!(i, 0, "index does not fit in {len} symbols");
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum CantorMetric {
    Rho,
    Sigma,
}

/// A finite subset of `F^depth` with parameter `λ` and base point `o`.
#[derive(Clone, Debug, PartialEq)]
pub struct CantorSpace {
    k: usize,
    lambda: Rational,
    depth: usize,
    points: Vec<Word>,
    base: Word,
}

impl CantorSpace {
    pub fn new(k: usize, lambda: Rational, depth: usize, points: Vec<Word>, base: Word) -> Result<Self, CantorError> {
        check_alphabet(k)?;
        if depth == 0 {
            return Err(CantorError::EmptyWord);
        }
        if points.is_empty() {
            return Err(CantorError::NoPoints);
        }
        for w in points.iter().chain(core::iter::once(&base)) {
            if w.depth() != depth {
                return Err(CantorError::DepthMismatch { left: depth, right: w.depth() });
            }
            if let Some(&s) = w.symbols.iter().find(|&&s| s as usize >= k) {
                return Err(CantorError::SymbolOutOfRange { symbol: s as usize, k });
            }
        }
        let mut sorted: Vec<&Word> = points.iter().collect();
        sorted.sort();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(CantorError::DuplicatePoint(alloc::format!("{}", w[0])));
        }
        Ok(CantorSpace { k, lambda, depth, points, base })
    }

    /// All of `F^depth`, base point the all-zeros word.
    pub fn full(k: usize, depth: usize, lambda: Rational) -> Result<Self, CantorError> {
        let points = enumerate_words(k, depth)?;
        CantorSpace::new(k, lambda, depth, points, Word::zeros(depth))
    }

    /// `F^depth` without the base point (the carrier of `σ`).
    pub fn punctured(k: usize, depth: usize, lambda: Rational) -> Result<Self, CantorError> {
        let base = Word::zeros(depth);
        let points = enumerate_words(k, depth)?.into_iter().filter(|w| *w != base).collect();
        CantorSpace::new(k, lambda, depth, points, base)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn lambda(&self) -> Rational {
        self.lambda
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn points(&self) -> &[Word] {
        &self.points
    }

    pub fn base(&self) -> &Word {
        &self.base
    }

    pub fn base_index(&self) -> Option<usize> {
        self.points.iter().position(|w| *w == self.base)
    }

    pub fn labels(&self) -> Vec<String> {
        self.points.iter().map(|w| alloc::format!("{w}")).collect()
    }
}

/// Pairwise exponents `e(i, j)` of distances `λ^e`. The diagonal holds
/// [`ExponentMatrix::DIAGONAL`] (zero distance). When `infinity` is set,
/// that row and column are placeholders: cross ratios delete them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExponentMatrix {
    n: usize,
    data: Vec<i32>,
    infinity: Option<usize>,
}

impl ExponentMatrix {
    pub const DIAGONAL: i32 = i32::MAX;

    /// Builds from a function on pairs `i != j`.
    pub fn from_fn<F: FnMut(usize, usize) -> i32>(n: usize, infinity: Option<usize>, mut f: F) -> Self {
        let mut data = vec![0i32; n * n];
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = if i == j { Self::DIAGONAL } else { f(i, j) };
            }
        }
        ExponentMatrix { n, data, infinity }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn infinity(&self) -> Option<usize> {
        self.infinity
    }

    #[inline]
    pub fn raw(&self, i: usize, j: usize) -> i32 {
        self.data[i * self.n + j]
    }

    pub fn get(&self, i: usize, j: usize) -> ExactDistance {
        if i == j {
            ExactDistance::ZERO
        } else {
            ExactDistance::from_exponent(self.raw(i, j) as i64)
        }
    }

    /// Exponent of the cross-ratio factor for `(i, j)`: `0` (a factor of
    /// one) when either point is `∞`.
    #[inline]
    pub fn cross_exponent(&self, i: usize, j: usize) -> i32 {
        if Some(i) == self.infinity || Some(j) == self.infinity {
            0
        } else {
            self.raw(i, j)
        }
    }

    /// Materializes as reals `λ^e`. The result is only a metric when the
    /// exponents come from an ultrametric (for example `ρ` or `σ`).
    pub fn to_space(&self, labels: Vec<String>, lambda: Rational) -> FiniteMetricSpace {
        let n = self.n;
        let mut dist = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                dist.push(if i == j { 0.0 } else { lambda.pow_f64(self.raw(i, j) as i64) });
            }
        }
        FiniteMetricSpace::trusted(labels, dist)
    }
}

/// Exact exponent matrix of `ρ` or `σ` on the points of `space`.
pub fn exponent_matrix(space: &CantorSpace, metric: CantorMetric) -> Result<ExponentMatrix, CantorError> {
    let pts = &space.points;
    match metric {
        CantorMetric::Rho => Ok(ExponentMatrix::from_fn(pts.len(), None, |i, j| {
            match prefix_len(&pts[i].symbols, &pts[j].symbols) {
                PrefixLength::Finite(l) => l as i32,
                PrefixLength::Infinite => unreachable!("points are distinct"),
            }
        })),
        CantorMetric::Sigma => {
            if space.base_index().is_some() {
                return Err(CantorError::BaseIncluded);
            }
            let to_base: Vec<i32> = pts.iter().map(|w| finite_prefix(&w.symbols, &space.base.symbols)).collect();
            Ok(ExponentMatrix::from_fn(pts.len(), None, |i, j| {
                finite_prefix(&pts[i].symbols, &pts[j].symbols) - to_base[i] - to_base[j]
            }))
        }
    }
}

fn finite_prefix(x: &[u8], y: &[u8]) -> i32 {
    match prefix_len(x, y) {
        PrefixLength::Finite(l) => l as i32,
        PrefixLength::Infinite => unreachable!("distinct words"),
    }
}

/// `σ` exponents on all points of `space` with the base point playing `∞`:
/// the base must be among the points; its row is a deleted placeholder.
/// This is the target of the identity `(F, ρ) → (F \ {o} ∪ {∞}, σ)`.
pub fn sigma_exponents_with_infinity(space: &CantorSpace) -> Result<ExponentMatrix, CantorError> {
    let o = space.base_index().ok_or(CantorError::BaseMissing)?;
    let pts = &space.points;
    let to_base: Vec<i32> = pts
        .iter()
        .enumerate()
        .map(|(i, w)| if i == o { 0 } else { finite_prefix(&w.symbols, &space.base.symbols) })
        .collect();
    Ok(ExponentMatrix::from_fn(pts.len(), Some(o), |i, j| {
        if i == o || j == o {
            0
        } else {
            finite_prefix(&pts[i].symbols, &pts[j].symbols) - to_base[i] - to_base[j]
        }
    }))
}

/// Real-valued `ρ` or `σ` space with the word strings as labels.
pub fn materialize(space: &CantorSpace, metric: CantorMetric) -> Result<FiniteMetricSpace, CantorError> {
    let m = exponent_matrix(space, metric)?;
    Ok(m.to_space(space.labels(), space.lambda))
}

/// Exhaustive strong triangle check in exponent arithmetic: returns a triple
/// `(x, y, z)` with `e(x,y) < min(e(x,z), e(z,y))`, i.e.
/// `d(x,y) > max(d(x,z), d(z,y))`, if one exists.
///
/// For each pair `(x, y)` with `t = e(x, y)` a violating `z` is exactly a
/// member of `{z : e(x,z) > t} ∩ {z : e(y,z) > t}`; these sets are kept as
/// bitsets per point and per distinct exponent value, so all `n^3` triples
/// are covered with word-parallel intersections.
pub fn strong_triangle_violation(m: &ExponentMatrix) -> Option<[usize; 3]> {
    let n = m.n;
    if n < 3 {
        return None;
    }
    let mut values: Vec<i32> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                values.push(m.raw(i, j));
            }
        }
    }
    values.sort_unstable();
    values.dedup();
    let rank = |e: i32| values.binary_search(&e).expect("value present");
    let words = n.div_ceil(64);
    let r = values.len();
    // above[(x * r + v) * words ..] = { z : e(x, z) > values[v] }
    let mut above = vec![0u64; n * r * words];
    for x in 0..n {
        for z in 0..n {
            let top = if z == x { r } else { rank(m.raw(x, z)) };
            for v in 0..top {
                above[(x * r + v) * words + z / 64] |= 1u64 << (z % 64);
            }
        }
    }
    for x in 0..n {
        for y in (x + 1)..n {
            let v = rank(m.raw(x, y));
            let a = &above[(x * r + v) * words..(x * r + v + 1) * words];
            let b = &above[(y * r + v) * words..(y * r + v + 1) * words];
            for (wi, (p, q)) in a.iter().zip(b).enumerate() {
                let both = p & q;
                if both != 0 {
                    let z = wi * 64 + both.trailing_zeros() as usize;
                    return Some([x, y, z]);
                }
            }
        }
    }
    None
}

/// Applies, at every position `t`, the transposition of symbols that swaps
/// `target[t]` with `0`. Maps `target` to the all-zeros word and preserves
/// every common prefix length.
pub fn rotate_to_zero(words: &[Word], target: &Word) -> Vec<Word> {
    words
        .iter()
        .map(|w| {
            let symbols = w
                .symbols
                .iter()
                .zip(&target.symbols)
                .map(|(&s, &t)| {
                    if s == t {
                        0
                    } else if s == 0 {
                        t
                    } else {
                        s
                    }
                })
                .collect();
            Word { symbols }
        })
        .collect()
}

#[cfg(feature = "serde")]
impl serde::Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for CantorSpace {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("CantorSpace", 5)?;
        st.serialize_field("k", &self.k)?;
        st.serialize_field("lambda", &self.lambda)?;
        st.serialize_field("depth", &self.depth)?;
        st.serialize_field("points", &self.points)?;
        st.serialize_field("base", &self.base)?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s, 2).unwrap()
    }

    #[test]
    fn prefix_lengths() {
        assert_eq!(common_prefix_length(&w("010"), &w("011")), Ok(PrefixLength::Finite(2)));
        assert_eq!(common_prefix_length(&w("010"), &w("010")), Ok(PrefixLength::Infinite));
        assert_eq!(common_prefix_length(&w("100"), &w("011")), Ok(PrefixLength::Finite(0)));
        assert_eq!(
            common_prefix_length(&w("10"), &w("011")),
            Err(CantorError::DepthMismatch { left: 2, right: 3 })
        );
    }

    #[test]
    fn rho_values() {
        let d = rho(&w("010"), &w("011")).unwrap();
        assert_eq!(d.exponent(), Some(2));
        assert_eq!(d.to_f64(Rational::HALF), 0.25);
        assert!(rho(&w("010"), &w("010")).unwrap().is_zero());
        assert_eq!(rho(&w("100"), &w("010")).unwrap().exponent(), Some(0));
    }

    #[test]
    fn sigma_values() {
        let o = w("000");
        assert_eq!(sigma(&w("100"), &w("110"), &o).unwrap().exponent(), Some(1));
        assert_eq!(sigma(&w("010"), &w("011"), &o).unwrap().exponent(), Some(0));
        let d = sigma(&w("001"), &w("010"), &o).unwrap();
        assert_eq!(d.exponent(), Some(-2));
        assert_eq!(d.to_f64(Rational::HALF), 4.0);
        assert_eq!(sigma(&o, &w("010"), &o), Err(CantorError::BasePointArgument));
        assert!(sigma(&w("010"), &w("010"), &o).unwrap().is_zero());
    }

    #[test]
    fn sigma_factors_through_rho() {
        let words = enumerate_words(3, 3).unwrap();
        let o = Word::parse("012", 3).unwrap();
        for x in words.iter().filter(|x| **x != o) {
            for y in words.iter().filter(|y| **y != o) {
                let lhs = sigma(x, y, &o).unwrap();
                let rhs = rho(x, y)
                    .unwrap()
                    .checked_div(rho(x, &o).unwrap() * rho(&o, y).unwrap())
                    .unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn enumeration() {
        let ws = enumerate_words(2, 1).unwrap();
        assert_eq!(ws, vec![w("0"), w("1")]);
        let ws = enumerate_words(2, 2).unwrap();
        let s: Vec<String> = ws.iter().map(|w| alloc::format!("{w}")).collect();
        assert_eq!(s, ["00", "01", "10", "11"]);
        let ws = enumerate_words(3, 2).unwrap();
        assert_eq!(ws.len(), 9);
        assert_eq!(alloc::format!("{}", ws[0]), "00");
        assert_eq!(alloc::format!("{}", ws[8]), "22");
        assert!(matches!(enumerate_words(10, 7), Err(CantorError::SizeLimitExceeded { .. })));
        assert!(matches!(enumerate_words(2, 17), Err(CantorError::SizeLimitExceeded { .. })));
        assert!(matches!(enumerate_words(1, 3), Err(CantorError::InvalidAlphabet { .. })));
    }

    #[test]
    fn materialize_rho_and_sigma() {
        let full = CantorSpace::full(2, 2, Rational::HALF).unwrap();
        let s = materialize(&full, CantorMetric::Rho).unwrap();
        assert_eq!(s.len(), 4);
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!(s.dist(i, j) == 1.0 || s.dist(i, j) == 0.5);
                }
            }
        }
        assert_eq!(materialize(&full, CantorMetric::Sigma), Err(CantorError::BaseIncluded));

        let pts = vec![w("01"), w("10"), w("11")];
        let punct = CantorSpace::new(2, Rational::HALF, 2, pts, w("00")).unwrap();
        let s = materialize(&punct, CantorMetric::Sigma).unwrap();
        assert_eq!(s.dist(0, 1), 2.0);
        assert_eq!(s.dist(0, 2), 2.0);
        assert_eq!(s.dist(1, 2), 0.5);
    }

    #[test]
    fn single_word_space() {
        let one = CantorSpace::new(2, Rational::HALF, 3, vec![w("101")], w("000")).unwrap();
        let s = materialize(&one, CantorMetric::Rho).unwrap();
        assert_eq!(s.rows(), vec![vec![0.0]]);
    }

    #[test]
    fn cantor_space_validation() {
        let dup = CantorSpace::new(2, Rational::HALF, 2, vec![w("01"), w("01")], w("00"));
        assert!(matches!(dup, Err(CantorError::DuplicatePoint(_))));
        let mixed = CantorSpace::new(2, Rational::HALF, 2, vec![w("01"), w("011")], w("00"));
        assert!(matches!(mixed, Err(CantorError::DepthMismatch { .. })));
        assert_eq!(Word::parse("012", 2), Err(CantorError::SymbolOutOfRange { symbol: 2, k: 2 }));
        assert_eq!(Word::parse("0x", 2), Err(CantorError::SymbolOutOfRange { symbol: 33, k: 2 }));
        assert_eq!(Word::parse("0-", 2), Err(CantorError::InvalidDigit('-')));
    }

    #[test]
    fn exact_ordering() {
        let a = ExactDistance::from_exponent(1);
        let b = ExactDistance::from_exponent(3);
        assert!(b < a);
        assert!(ExactDistance::ZERO < b);
        assert_eq!((a * b).exponent(), Some(4));
        assert_eq!(a.checked_div(ExactDistance::ZERO), None);
    }

    #[test]
    fn bitset_check_finds_planted_violation() {
        // exponents of a line {0, 1, 2} with λ = 1/2: distances 1, 1, 2
        let m = ExponentMatrix::from_fn(3, None, |i, j| if (i, j) == (0, 2) || (i, j) == (2, 0) { -1 } else { 0 });
        assert_eq!(strong_triangle_violation(&m), Some([0, 2, 1]));
        let full = CantorSpace::full(3, 3, Rational::THIRD).unwrap();
        assert_eq!(strong_triangle_violation(&exponent_matrix(&full, CantorMetric::Rho).unwrap()), None);
    }

    #[test]
    fn rotation_moves_target_to_zero() {
        let words = enumerate_words(3, 3).unwrap();
        let target = Word::parse("210", 3).unwrap();
        let rotated = rotate_to_zero(&words, &target);
        let ti = words.iter().position(|x| *x == target).unwrap();
        assert_eq!(rotated[ti], Word::zeros(3));
        for i in 0..words.len() {
            for j in 0..words.len() {
                assert_eq!(rho(&words[i], &words[j]), rho(&rotated[i], &rotated[j]));
            }
        }
    }

    #[test]
    fn nth_word() {
        assert_eq!(nth_word_symbols(5, 3, 2), vec![1, 0, 1]);
        assert_eq!(nth_word_symbols(0, 2, 3), vec![0, 0]);
    }
}
