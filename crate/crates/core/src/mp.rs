//! Small helpers around MPFR floats.

use rug::float::Constant;
use rug::{Float, Integer, Rational};

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

pub fn from_f64(prec: u32, x: f64) -> Float {
    Float::with_val(prec, x)
}

pub fn from_rational(prec: u32, r: &Rational) -> Float {
    Float::with_val(prec, r)
}

pub fn factorial(n: u32) -> Integer {
    Integer::from(Integer::factorial(n))
}

/// Decimal rendering with `digits` significant digits. Deterministic for a
/// fixed value and precision.
pub fn to_decimal(x: &Float, digits: usize) -> String {
    x.to_string_radix(10, Some(digits))
}

/// Significant decimal digits carried by `bits` of mantissa.
pub fn decimal_digits(bits: u32) -> usize {
    ((bits as f64) * std::f64::consts::LOG10_2).floor() as usize
}

pub fn parse_decimal(prec: u32, s: &str) -> Option<Float> {
    Float::parse(s).ok().map(|v| Float::with_val(prec, v))
}

/// `2^(-k)` at the given precision.
pub fn pow2_neg(prec: u32, k: u32) -> Float {
    Float::with_val(prec, 1u32) >> k
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_round_trip() {
        let x = pi(256);
        let s = to_decimal(&x, decimal_digits(256));
        let y = parse_decimal(256, &s).unwrap();
        assert!((x - y).abs() < 1e-75);
        assert_eq!(factorial(5), 120);
    }
}
