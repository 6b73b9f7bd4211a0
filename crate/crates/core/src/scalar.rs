//! Scalar abstractions shared by the exact DoF arithmetic and the
//! floating-point popularity model.
//!
//! DoF values are exact rationals `Ratio<T>` over any integer type that
//! satisfies [`DofInt`] (`i64`, `i128`, `BigInt`, ...). Probabilities are
//! generic over [`num_traits::Float`].

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, FromPrimitive, Signed, ToPrimitive};
use thiserror::Error;

/// Integer types usable as the numerator/denominator of an exact DoF.
pub trait DofInt:
    Integer
    + Signed
    + CheckedAdd
    + CheckedMul
    + Clone
    + Debug
    + Display
    + Hash
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
    + 'static
{
}

impl<T> DofInt for T where
    T: Integer
        + Signed
        + CheckedAdd
        + CheckedMul
        + Clone
        + Debug
        + Display
        + Hash
        + FromPrimitive
        + ToPrimitive
        + Send
        + Sync
        + 'static
{
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty rational string")]
    Empty,
    #[error("invalid rational string {0:?}")]
    Invalid(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
    #[error("rational {0:?} does not fit the integer type")]
    Overflow(String),
}

fn parse_uint<T: DofInt>(digits: &str, whole: &str) -> Result<T, ParseRationalError> {
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ParseRationalError::Invalid(whole.to_owned()));
    }
    let ten = T::from_u8(10).ok_or_else(|| ParseRationalError::Overflow(whole.to_owned()))?;
    let mut acc = T::zero();
    for b in digits.bytes() {
        let d = T::from_u8(b - b'0').ok_or_else(|| ParseRationalError::Overflow(whole.to_owned()))?;
        acc = acc
            .checked_mul(&ten)
            .and_then(|a| a.checked_add(&d))
            .ok_or_else(|| ParseRationalError::Overflow(whole.to_owned()))?;
    }
    Ok(acc)
}

/// Parses an exact rational from `"p"`, `"p/q"`, or fixed-point decimal
/// text such as `"0.35"`. A leading sign is accepted; exponents are not.
pub fn parse_rational<T: DofInt>(text: &str) -> Result<Ratio<T>, ParseRationalError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    let (negative, body) = match s.as_bytes()[0] {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let value = if let Some((num, den)) = body.split_once('/') {
        let num: T = parse_uint(num.trim(), s)?;
        let den: T = parse_uint(den.trim(), s)?;
        if den.is_zero() {
            return Err(ParseRationalError::ZeroDenominator(s.to_owned()));
        }
        Ratio::new(num, den)
    } else if let Some((int, frac)) = body.split_once('.') {
        if int.is_empty() && frac.is_empty() {
            return Err(ParseRationalError::Invalid(s.to_owned()));
        }
        let int: T = if int.is_empty() { T::zero() } else { parse_uint(int, s)? };
        let overflow = || ParseRationalError::Overflow(s.to_owned());
        let ten = T::from_u8(10).ok_or_else(overflow)?;
        let mut scale = T::one();
        for _ in 0..frac.len() {
            scale = scale.checked_mul(&ten).ok_or_else(overflow)?;
        }
        let frac_val: T = if frac.is_empty() { T::zero() } else { parse_uint(frac, s)? };
        let numer = int
            .checked_mul(&scale)
            .and_then(|v| v.checked_add(&frac_val))
            .ok_or_else(overflow)?;
        Ratio::new(numer, scale)
    } else {
        Ratio::from_integer(parse_uint(body, s)?)
    };
    Ok(if negative { -value } else { value })
}

/// Lossy conversion for display and confidence intervals.
pub fn ratio_to_f64<T: DofInt>(r: &Ratio<T>) -> f64 {
    let n = r.numer().to_f64().unwrap_or(f64::NAN);
    let d = r.denom().to_f64().unwrap_or(f64::NAN);
    n / d
}

/// Converts a small count into the rational's integer type.
pub(crate) fn int_from_usize<T: DofInt>(n: usize) -> T {
    T::from_usize(n).expect("count does not fit the DoF integer type")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_integer_fraction_and_decimal() {
        assert_eq!(parse_rational::<i64>("3").unwrap(), Ratio::from_integer(3));
        assert_eq!(parse_rational::<i64>("3/10").unwrap(), Ratio::new(3, 10));
        assert_eq!(parse_rational::<i64>("0.3").unwrap(), Ratio::new(3, 10));
        assert_eq!(parse_rational::<i64>(".25").unwrap(), Ratio::new(1, 4));
        assert_eq!(parse_rational::<i64>("2.").unwrap(), Ratio::from_integer(2));
        assert_eq!(parse_rational::<i64>(" 6/4 ").unwrap(), Ratio::new(3, 2));
        assert_eq!(parse_rational::<i64>("-1/2").unwrap(), Ratio::new(-1, 2));
    }

    #[test]
    fn rejects_garbage() {
        assert_eq!(parse_rational::<i64>(""), Err(ParseRationalError::Empty));
        assert!(matches!(parse_rational::<i64>("1/0"), Err(ParseRationalError::ZeroDenominator(_))));
        assert!(parse_rational::<i64>("abc").is_err());
        assert!(parse_rational::<i64>("1.2.3").is_err());
        assert!(parse_rational::<i64>(".").is_err());
        assert!(parse_rational::<i64>("1e3").is_err());
    }

    #[test]
    fn overflow_is_reported_not_panicked() {
        assert!(matches!(parse_rational::<i8>("1000"), Err(ParseRationalError::Overflow(_))));
        assert!(matches!(parse_rational::<i8>("0.001"), Err(ParseRationalError::Overflow(_))));
    }
}
