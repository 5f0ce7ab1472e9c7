//! The Cantor parameter `λ` as an exact rational, and exact comparisons of
//! `f64` distances against integer powers of it.

use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use num_bigint::BigUint;

/// A reduced rational `num/den` with `0 < num < den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rational {
    num: u32,
    den: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RationalError {
    /// Not of the form `p/q` with decimal integers.
    Syntax,
    /// Parsed, but not strictly between 0 and 1.
    OutOfRange { num: u64, den: u64 },
}

impl fmt::Display for RationalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RationalError::Syntax => write!(f, "expected a rational of the form p/q"),
            RationalError::OutOfRange { num, den } => {
                write!(f, "{num}/{den} is not strictly between 0 and 1")
            }
        }
    }
}

impl core::error::Error for RationalError {}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Rational {
    pub const HALF: Rational = Rational { num: 1, den: 2 };
    pub const THIRD: Rational = Rational { num: 1, den: 3 };

    pub fn new(num: u64, den: u64) -> Result<Self, RationalError> {
        if num == 0 || den == 0 || num >= den {
            return Err(RationalError::OutOfRange { num, den });
        }
        let g = gcd(num, den);
        let (n, d) = (num / g, den / g);
        match (u32::try_from(n), u32::try_from(d)) {
            (Ok(num), Ok(den)) => Ok(Rational { num, den }),
            _ => Err(RationalError::OutOfRange { num, den }),
        }
    }

    pub fn num(&self) -> u32 {
        self.num
    }

    pub fn den(&self) -> u32 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `λ^e` as the nearest `f64` we can get cheaply: exact numerator and
    /// denominator powers while they stay below 2^53, one rounding at the end.
    pub fn pow_f64(&self, e: i64) -> f64 {
        let (a, b) = if e >= 0 { (self.num, self.den) } else { (self.den, self.num) };
        let k = e.unsigned_abs();
        let mut na = 1.0f64;
        let mut nb = 1.0f64;
        for _ in 0..k {
            na *= a as f64;
            nb *= b as f64;
            if !na.is_finite() || !nb.is_finite() {
                // fall back to stepwise multiplication of the ratio
                let r = a as f64 / b as f64;
                let mut v = 1.0f64;
                for _ in 0..k {
                    v *= r;
                }
                return v;
            }
        }
        na / nb
    }

    /// Exact numerator and denominator of `λ^e`.
    fn pow_parts(&self, e: i64) -> (BigUint, BigUint) {
        let k = u32::try_from(e.unsigned_abs()).expect("exponent fits in u32");
        let p = BigUint::from(self.num).pow(k);
        let q = BigUint::from(self.den).pow(k);
        if e >= 0 {
            (p, q)
        } else {
            (q, p)
        }
    }

    /// Compares a finite nonnegative `x` with `λ^e` exactly.
    ///
    /// Panics if `x` is negative or not finite.
    pub fn cmp_f64_with_pow(&self, x: f64, e: i64) -> Ordering {
        assert!(x.is_finite() && x >= 0.0, "cmp_f64_with_pow needs a finite nonnegative value");
        if x == 0.0 {
            return Ordering::Less;
        }
        let (mantissa, shift) = decompose(x);
        let (a, b) = self.pow_parts(e);
        // x = mantissa * 2^shift; compare mantissa * 2^shift * b with a
        let lhs = BigUint::from(mantissa) * b;
        if shift >= 0 {
            (lhs << shift as usize).cmp(&a)
        } else {
            lhs.cmp(&(a << (-shift) as usize))
        }
    }

    /// The smallest `j >= 0` with `λ^j <= h`, found by repeated exact
    /// multiplication. `None` if `h <= 0` or `j` would exceed `max_level`.
    pub fn level_at_or_below(&self, h: f64, max_level: u32) -> Option<u32> {
        if !h.is_finite() || h <= 0.0 {
            return None;
        }
        let (mantissa, shift) = decompose(h);
        let m = BigUint::from(mantissa);
        let mut a = BigUint::from(1u32); // num^j
        let mut b = BigUint::from(1u32); // den^j
        for j in 0..=max_level {
            let lhs = &m * &b;
            let ge = if shift >= 0 {
                (lhs << shift as usize) >= a
            } else {
                lhs >= (&a << (-shift) as usize)
            };
            if ge {
                return Some(j);
            }
            a *= self.num;
            b *= self.den;
        }
        None
    }
}

/// Splits a positive finite `f64` into `(m, s)` with `x = m * 2^s` exactly.
fn decompose(x: f64) -> (u64, i64) {
    let bits = x.to_bits();
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    if exp_bits == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp_bits - 1075)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Rational {
    type Err = RationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (p, q) = s.trim().split_once('/').ok_or(RationalError::Syntax)?;
        let p: u64 = p.trim().parse().map_err(|_| RationalError::Syntax)?;
        let q: u64 = q.trim().parse().map_err(|_| RationalError::Syntax)?;
        Rational::new(p, q)
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for Rational {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_reduce() {
        let r: Rational = "2/4".parse().unwrap();
        assert_eq!(r, Rational::HALF);
        assert!("1/1".parse::<Rational>().is_err());
        assert!("0/3".parse::<Rational>().is_err());
        assert!("0.5".parse::<Rational>().is_err());
    }

    #[test]
    fn exact_power_comparisons() {
        let l = Rational::THIRD;
        assert_eq!(l.cmp_f64_with_pow(1.0, 0), Ordering::Equal);
        // 1/3 is not representable; the f64 nearest to it is slightly below 1/3
        assert_eq!(l.cmp_f64_with_pow(1.0 / 3.0, 1), Ordering::Less);
        assert_eq!(l.cmp_f64_with_pow(9.0, -2), Ordering::Equal);
        assert_eq!(Rational::HALF.cmp_f64_with_pow(0.25, 2), Ordering::Equal);
        assert_eq!(Rational::HALF.cmp_f64_with_pow(0.2500001, 2), Ordering::Greater);
    }

    #[test]
    fn quantization_levels() {
        let l = Rational::HALF;
        assert_eq!(l.level_at_or_below(1.0, 64), Some(0));
        assert_eq!(l.level_at_or_below(0.5, 64), Some(1));
        assert_eq!(l.level_at_or_below(0.6, 64), Some(1));
        assert_eq!(l.level_at_or_below(1.0 / 3.0, 64), Some(2));
        assert_eq!(l.level_at_or_below(0.0, 64), None);
        assert_eq!(l.level_at_or_below(1e-30, 8), None);
    }

    #[test]
    fn powers_as_f64() {
        assert_eq!(Rational::HALF.pow_f64(3), 0.125);
        assert_eq!(Rational::HALF.pow_f64(-2), 4.0);
        assert_eq!(Rational::THIRD.pow_f64(-3), 27.0);
        assert!((Rational::THIRD.pow_f64(2) - 1.0 / 9.0).abs() < 1e-17);
    }
}
