//! Exact rational helpers shared by the evaluator, the solver, and the file
//! formats.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational `{0}` (expected `p/q` or an integer)")]
pub struct RationalParseError(pub String);

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn half() -> Rational {
    ratio(1, 2)
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `1 - x`
pub fn complement(x: &Rational) -> Rational {
    one() - x
}

pub fn in_unit_interval(x: &Rational) -> bool {
    !x.is_negative() && *x <= one()
}

/// Parses `p/q` or an integer into canonical reduced form.
pub fn parse_rational(text: &str) -> Result<Rational, RationalParseError> {
    let err = || RationalParseError(text.to_string());
    let t = text.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let valid = |s: &str| {
        let digits = s.strip_prefix('-').unwrap_or(s);
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    };
    if !valid(num) || !valid(den) {
        return Err(err());
    }
    let n: BigInt = num.parse().map_err(|_| err())?;
    let d: BigInt = den.parse().map_err(|_| err())?;
    if d.is_zero() {
        return Err(err());
    }
    Ok(Rational::new(n, d))
}

/// Canonical `p/q` (or integer) text.
pub fn format_rational(x: &Rational) -> String {
    x.to_string()
}

/// The rational with the smallest denominator (then smallest numerator)
/// inside an interval of `[0, 1]`. Bounds are `(value, strict)`; the
/// interval is assumed non-empty.
pub fn simplest_between(lower: (&Rational, bool), upper: (&Rational, bool)) -> Rational {
    let (lo, lo_strict) = lower;
    let (hi, hi_strict) = upper;
    if lo == hi {
        return lo.clone();
    }
    let admissible =
        |x: &Rational| (if lo_strict { x > lo } else { x >= lo }) && (if hi_strict { x < hi } else { x <= hi });
    let mut den = BigInt::one();
    // bounded by 1/(hi - lo) + 1 denominators
    loop {
        let scaled = lo * Rational::from_integer(den.clone());
        let mut num = scaled.floor().to_integer();
        loop {
            let cand = Rational::new(num.clone(), den.clone());
            if cand > *hi {
                break;
            }
            if admissible(&cand) {
                return cand;
            }
            num += 1;
        }
        den += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_canonicalise() {
        assert_eq!(format_rational(&parse_rational("2/4").unwrap()), "1/2");
        assert_eq!(format_rational(&parse_rational("3").unwrap()), "3");
        assert_eq!(format_rational(&parse_rational("0/7").unwrap()), "0");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("0.5").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational("a/b").is_err());
    }

    #[test]
    fn simplest_rational_picks_small_denominators() {
        assert_eq!(simplest_between((&zero(), true), (&one(), true)), half());
        assert_eq!(simplest_between((&zero(), false), (&one(), true)), zero());
        assert_eq!(simplest_between((&half(), false), (&one(), true)), half());
        assert_eq!(simplest_between((&half(), true), (&one(), true)), ratio(2, 3));
        assert_eq!(
            simplest_between((&ratio(1, 5), true), (&ratio(1, 4), true)),
            ratio(2, 9)
        );
        assert_eq!(
            simplest_between((&ratio(1, 3), false), (&ratio(1, 3), false)),
            ratio(1, 3)
        );
    }
}
