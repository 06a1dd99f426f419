//! Exact rational values and their canonical `p/q` text form.
//!
//! All game values (declared `f`, total updates, requirement bounds) are
//! arbitrary-precision rationals so strict inequalities at interval
//! boundaries are decided exactly. The serialized form is always
//! `numerator/denominator` in lowest terms with a positive denominator,
//! which makes transcripts replay bit-exactly.

use alloc::string::String;
use core::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

pub use num_rational::BigRational as Rat;

/// Builds `numer/denom`, reduced. Panics on a zero denominator.
pub fn rat(numer: i64, denom: i64) -> Rat {
    Rat::new(BigInt::from(numer), BigInt::from(denom))
}

/// Integer as a rational.
pub fn rat_int(v: i64) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

/// Unsigned integer as a rational.
pub fn rat_u(v: u64) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

/// `|r|`.
pub fn rat_abs(r: &Rat) -> Rat {
    if r.is_negative() {
        -r.clone()
    } else {
        r.clone()
    }
}

/// Canonical `p/q` rendering, denominator always explicit (`3` prints as `3/1`).
pub fn format_ratio(r: &Rat) -> String {
    alloc::format!("{}/{}", r.numer(), r.denom())
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseRatioError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid integer in rational literal")]
    BadInt,
    #[error("zero denominator")]
    ZeroDenominator,
}

/// Parses `p/q` or a bare integer `p`.
pub fn parse_ratio(s: &str) -> Result<Rat, ParseRatioError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(ParseRatioError::Empty);
    }
    let parse_int = |t: &str| -> Result<BigInt, ParseRatioError> {
        t.parse::<BigInt>().map_err(|_| ParseRatioError::BadInt)
    };
    match s.split_once('/') {
        None => Ok(Rat::from_integer(parse_int(s)?)),
        Some((p, q)) => {
            let numer = parse_int(p)?;
            let denom = parse_int(q)?;
            if denom.is_zero() {
                return Err(ParseRatioError::ZeroDenominator);
            }
            Ok(Rat::new(numer, denom))
        }
    }
}

/// Helper for displaying a rational in error messages and summaries.
pub struct DisplayRatio<'a>(pub &'a Rat);

impl fmt::Display for DisplayRatio<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["0/1", "1/1", "-3/4", "29/80", "13717421/109739369"] {
            let r = parse_ratio(s).unwrap();
            assert_eq!(format_ratio(&r), s);
        }
    }

    #[test]
    fn parse_reduces_and_accepts_integers() {
        assert_eq!(parse_ratio("6/8").unwrap(), rat(3, 4));
        assert_eq!(parse_ratio("5").unwrap(), rat_int(5));
        assert_eq!(parse_ratio("-2/-4").unwrap(), rat(1, 2));
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse_ratio("").is_err());
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("a/b").is_err());
        assert!(parse_ratio("1.5").is_err());
    }
}
