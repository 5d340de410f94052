//! Exact rational numbers and their text encoding.
//!
//! Every weight, penalty, dual value and LP coefficient in this crate is a
//! [`Rational`]. The text form is `num/den` or a bare integer; [`format`]
//! always emits the reduced form, with the denominator omitted when it is 1.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RationalParseError {
    #[error("empty rational")]
    Empty,
    #[error("invalid integer `{0}`")]
    Integer(String),
    #[error("zero denominator")]
    ZeroDenominator,
}

/// Parses `num/den` or a plain integer. Signs are accepted on the numerator
/// only; callers decide whether negative values are meaningful.
pub fn parse(text: &str) -> Result<Rational, RationalParseError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(RationalParseError::Empty);
    }
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (text, None),
    };
    let num = parse_int(num, true)?;
    let den = match den {
        Some(d) => parse_int(d, false)?,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return Err(RationalParseError::ZeroDenominator);
    }
    Ok(Rational::new(num, den))
}

fn parse_int(text: &str, signed: bool) -> Result<BigInt, RationalParseError> {
    let digits = if signed {
        text.strip_prefix('-').unwrap_or(text)
    } else {
        text
    };
    // BigInt::from_str also accepts '+' and '_' separators; the file format does not.
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(RationalParseError::Integer(text.to_string()));
    }
    text.parse::<BigInt>()
        .map_err(|_| RationalParseError::Integer(text.to_string()))
}

pub fn format(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Decimal rendering for human-facing report columns.
pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or_else(|| {
        if value.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn sum<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Rational {
    values
        .into_iter()
        .fold(Rational::zero(), |acc, v| acc + v)
}

/// Smallest rational with denominator `den` that is at least `x`.
pub fn ceil_to(x: f64, den: i64) -> Rational {
    ratio((x * den as f64).ceil() as i64, den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_both_forms() {
        assert_eq!(parse("3").unwrap(), int(3));
        assert_eq!(parse("6/4").unwrap(), ratio(3, 2));
        assert_eq!(parse("-1/3").unwrap(), ratio(-1, 3));
        assert_eq!(parse(" 7/10 ").unwrap(), ratio(7, 10));
    }

    #[test]
    fn rejects_garbage() {
        assert_eq!(parse(""), Err(RationalParseError::Empty));
        assert_eq!(parse("1/0"), Err(RationalParseError::ZeroDenominator));
        assert!(parse("1/-2").is_err());
        assert!(parse("+3").is_err());
        assert!(parse("1_000").is_err());
        assert!(parse("1.5").is_err());
        assert!(parse("/2").is_err());
        assert!(parse("1/2/3").is_err());
    }

    #[test]
    fn formats_reduced() {
        assert_eq!(format(&ratio(10, 4)), "5/2");
        assert_eq!(format(&ratio(8, 4)), "2");
        assert_eq!(format(&ratio(0, 5)), "0");
    }

    proptest! {
        #[test]
        fn format_parse_roundtrip(n in -1_000_000i64..1_000_000, d in 1i64..1_000_000) {
            let r = ratio(n, d);
            prop_assert_eq!(parse(&format(&r)).unwrap(), r);
        }
    }
}
