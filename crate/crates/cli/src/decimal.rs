//! Exact decimal frequencies.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// A decimal string, its nearest double, and the signed rounding `value - exact`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedDecimal {
    pub text: String,
    pub value: f64,
    pub rounding: f64,
}

/// Parses `[+-]digits[.digits][(e|E)[+-]digits]`.
pub fn parse_decimal(text: &str) -> Result<ParsedDecimal, String> {
    let s = text.trim();
    let (neg, body) = match s.as_bytes().first() {
        Some(b'-') => (true, &s[1..]),
        Some(b'+') => (false, &s[1..]),
        _ => (false, s),
    };
    let (mantissa, exp) = match body.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = body[i + 1..]
                .parse()
                .map_err(|_| format!("bad exponent in {text:?}"))?;
            (&body[..i], e)
        }
        None => (body, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits_ok = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
    if int_part.is_empty() && frac_part.is_empty()
        || !digits_ok(int_part)
        || !digits_ok(frac_part)
    {
        return Err(format!("{text:?} is not a decimal number"));
    }
    if exp.abs() > 400 {
        return Err(format!("exponent of {text:?} is out of range"));
    }
    let value: f64 = s
        .parse()
        .map_err(|_| format!("{text:?} is not a decimal number"))?;
    if !value.is_finite() {
        return Err(format!("{text:?} overflows a double"));
    }
    let digits: BigInt = format!("{int_part}{frac_part}0")
        .parse::<BigInt>()
        .expect("validated digits")
        / 10;
    let scale = exp - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let mut exact = BigRational::from_integer(digits);
    if scale >= 0 {
        exact *= BigRational::from_integer(num::pow(ten, scale as usize));
    } else {
        exact /= BigRational::from_integer(num::pow(ten, (-scale) as usize));
    }
    if neg {
        exact = -exact;
    }
    let binary = BigRational::from_float(value).expect("finite");
    let diff = binary - exact;
    let rounding = if diff.is_zero() {
        0.0
    } else {
        diff.to_f64().unwrap_or(f64::NAN)
    };
    Ok(ParsedDecimal {
        text: s.to_string(),
        value,
        rounding,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_values() {
        for t in ["0", "1", "-2.5", "0.25", "1e3", "+4.0E-1"] {
            let p = parse_decimal(t).unwrap();
            if t != "+4.0E-1" {
                assert_eq!(p.rounding, 0.0, "{t}");
            }
        }
        assert_eq!(parse_decimal("-2.5").unwrap().value, -2.5);
    }

    #[test]
    fn rounding_of_tenth() {
        let p = parse_decimal("0.1").unwrap();
        // 0.1 rounds up to 0.1000000000000000055511151231257827...
        assert!((p.rounding - 5.551115123125783e-18).abs() < 1e-30);
        let s2 = parse_decimal("1.41421356237309504880168872420969808").unwrap();
        assert_eq!(s2.value, 2f64.sqrt());
        assert!(s2.rounding.abs() <= f64::EPSILON);
        assert!(s2.rounding != 0.0);
    }

    #[test]
    fn rejects_garbage() {
        for t in ["", ".", "1.2.3", "abc", "1e", "0x10", "inf", "1e999"] {
            assert!(parse_decimal(t).is_err(), "{t}");
        }
    }
}
