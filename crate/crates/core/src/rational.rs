//! Exact rational helpers and the `"num/den"` text form used at every
//! serialization boundary.

use alloc::format;
use alloc::string::{String, ToString};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always kept in lowest terms.
pub type Rational = BigRational;

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"num/den"` (or a bare integer). Signs are allowed on the numerator.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let err = || Error::ParseRational(s.to_string());
    let t = s.trim();
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num: BigInt = n.parse().map_err(|_| err())?;
    let den: BigInt = d.parse().map_err(|_| err())?;
    if den.is_zero() {
        return Err(err());
    }
    Ok(Rational::new(num, den))
}

/// Always renders both parts, so zero is `"0/1"` and one is `"1/1"`.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn check_probability(r: &Rational) -> Result<()> {
    if r.is_negative() || *r > Rational::one() {
        return Err(Error::ProbabilityOutOfRange(format_rational(r)));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_reduces() {
        assert_eq!(parse_rational("24/72").unwrap(), ratio(1, 3));
        assert_eq!(parse_rational(" 3 ").unwrap(), int(3));
        assert_eq!(parse_rational("-2/4").unwrap(), ratio(-1, 2));
    }

    #[test]
    fn parse_rejects_garbage() {
        for s in ["", "1/0", "a/2", "1/2/3", "0.5"] {
            assert!(parse_rational(s).is_err(), "{s}");
        }
    }

    #[test]
    fn zero_formats_with_denominator() {
        assert_eq!(format_rational(&int(0)), "0/1");
        assert_eq!(format_rational(&ratio(149, 256)), "149/256");
    }

    #[test]
    fn huge_ratio_converts_to_f64() {
        let big = BigInt::from(3u8).pow(700u32);
        let r = Rational::new(big.clone(), big * BigInt::from(4u8));
        assert_eq!(to_f64(&r), 0.25);
    }
}
