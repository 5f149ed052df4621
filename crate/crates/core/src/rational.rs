//! Exact rational numbers.
//!
//! `BigRational` already keeps values normalised (lowest terms, positive
//! denominator), so it is used directly. The helpers here add the
//! `num/den` text form used by trace files and the command line.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

pub type Rational = num_rational::BigRational;

pub fn from_ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn from_int(value: u64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Parses `p/q`, a plain integer, or a terminating decimal such as `0.01`.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num.trim().parse().ok()?;
        let den: BigInt = den.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(Rational::new(num, den));
    }
    if let Some((int, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = int.starts_with('-');
        let int_part: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse().ok()?
        };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac_part: BigInt = frac.parse().ok()?;
        let mut num = int_part.abs() * &scale + frac_part;
        if negative {
            num = -num;
        }
        return Some(Rational::new(num, scale));
    }
    text.parse::<BigInt>().ok().map(Rational::from_integer)
}

/// Formats as `num/den`, always with an explicit denominator.
pub fn format_rational(value: &Rational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

/// Renders `value` with `places` decimals, rounding half away from zero.
pub fn format_decimal(value: &Rational, places: u32) -> String {
    let scale = BigInt::from(10u32).pow(places);
    let scaled = value * Rational::from_integer(scale.clone());
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let rounded = if scaled.is_negative() {
        -((-scaled) + half).floor()
    } else {
        (scaled + half).floor()
    }
    .to_integer();
    let negative = rounded.is_negative();
    let digits = rounded.abs().to_string();
    let places = places as usize;
    let padded = format!("{:0>width$}", digits, width = places + 1);
    let (int, frac) = padded.split_at(padded.len() - places);
    let sign = if negative { "-" } else { "" };
    if places == 0 {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_integer_and_decimal() {
        assert_eq!(parse_rational("3/100"), Some(from_ratio(3, 100)));
        assert_eq!(parse_rational("6/4"), Some(from_ratio(3, 2)));
        assert_eq!(parse_rational("7"), Some(from_ratio(7, 1)));
        assert_eq!(parse_rational("0.01"), Some(from_ratio(1, 100)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
    }

    #[test]
    fn formats_four_decimals() {
        assert_eq!(format_decimal(&from_ratio(1, 1), 4), "1.0000");
        assert_eq!(format_decimal(&from_ratio(2, 3), 4), "0.6667");
        assert_eq!(format_decimal(&from_ratio(1, 8), 2), "0.13");
        assert_eq!(format_decimal(&from_ratio(0, 1), 4), "0.0000");
        assert_eq!(format_rational(&from_ratio(4, 6)), "2/3");
    }
}
