//! Arbitrary-precision rational numbers and their text form.
//!
//! Every probability in this crate is a [`Rational`]. `num`'s `Ratio` keeps
//! values in lowest terms automatically, which makes structural equality
//! coincide with numeric equality.

use num::bigint::BigInt;
use num::{BigRational, One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// The numeric type used throughout the crate.
pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid integer `{0}`")]
    BadInteger(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("negative component in `{0}` (probabilities are non-negative with positive denominator)")]
    Negative(String),
}

/// Shorthand for small rational constants.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Parse `a` or `a/b` with non-negative `a` and positive `b`.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    let parse_int = |part: &str| -> Result<BigInt, ParseRationalError> {
        part.parse::<BigInt>()
            .map_err(|_| ParseRationalError::BadInteger(part.to_string()))
    };
    let (numer, denom) = match text.split_once('/') {
        Some((n, d)) => (parse_int(n)?, parse_int(d)?),
        None => (parse_int(text)?, BigInt::one()),
    };
    if denom.is_zero() {
        return Err(ParseRationalError::ZeroDenominator(text.to_string()));
    }
    if numer.is_negative() || denom.is_negative() {
        return Err(ParseRationalError::Negative(text.to_string()));
    }
    Ok(Rational::new(numer, denom))
}

/// Canonical text form: `a/b`, or just `a` for integers.
pub fn format_rational(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Decimal approximation for human-readable output.
pub fn decimal_approx(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_integers_and_fractions() {
        assert_eq!(parse_rational("3").unwrap(), rat(3, 1));
        assert_eq!(parse_rational("2/4").unwrap(), rat(1, 2));
        assert_eq!(parse_rational(" 7/8 ").unwrap(), rat(7, 8));
    }

    #[test]
    fn rejects_zero_denominator() {
        assert!(matches!(
            parse_rational("1/0"),
            Err(ParseRationalError::ZeroDenominator(_))
        ));
    }

    #[test]
    fn rejects_negatives() {
        assert!(matches!(
            parse_rational("-1/2"),
            Err(ParseRationalError::Negative(_))
        ));
        assert!(matches!(
            parse_rational("1/-2"),
            Err(ParseRationalError::Negative(_))
        ));
    }

    #[test]
    fn formats_in_lowest_terms() {
        assert_eq!(format_rational(&rat(2, 4)), "1/2");
        assert_eq!(format_rational(&rat(6, 3)), "2");
        assert_eq!(format_rational(&rat(0, 5)), "0");
    }
}
