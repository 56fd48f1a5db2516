//! Exact rational helpers and the `p/q` text form.

use alloc::format;
use alloc::string::String;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> BigRational {
    BigRational::zero()
}

pub fn one() -> BigRational {
    BigRational::one()
}

/// `base^exp` as an exact integer.
pub fn pow(base: u64, exp: usize) -> BigInt {
    num_traits::pow(BigInt::from(base), exp)
}

/// Lowest-terms `numerator/denominator`, always with an explicit denominator.
pub fn format(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Accepts `p/q` or a bare integer `p`.
pub fn parse(text: &str) -> Option<BigRational> {
    let text = text.trim();
    let (n, d) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(BigRational::new(n, d))
}

pub fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Decimal rendering with `digits` significant digits, computed exactly
/// (round half up on the magnitude).
pub fn decimal(q: &BigRational, digits: usize) -> String {
    if q.is_zero() {
        return String::from("0");
    }
    let negative = q.is_negative();
    let q = q.abs();
    // Find e with 10^e <= q < 10^(e+1).
    let ten = BigRational::from_integer(BigInt::from(10));
    let mut e: i64 = 0;
    let mut scaled = q.clone();
    while scaled >= ten {
        scaled /= &ten;
        e += 1;
    }
    while scaled < BigRational::one() {
        scaled *= &ten;
        e -= 1;
    }
    // mantissa = round(q * 10^(digits-1-e))
    let shift = digits as i64 - 1 - e;
    let factor = BigRational::from_integer(pow(10, shift.unsigned_abs() as usize));
    let value = if shift >= 0 { &q * &factor } else { &q / &factor };
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let mut mantissa = (value + half).floor().to_integer();
    let mut shift = shift;
    if mantissa >= pow(10, digits) {
        mantissa /= BigInt::from(10);
        shift -= 1;
    }
    let digits_str = format!("{mantissa}");
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if shift <= 0 {
        out.push_str(&digits_str);
        for _ in 0..(-shift) {
            out.push('0');
        }
    } else {
        let shift = shift as usize;
        if digits_str.len() > shift {
            let (a, b) = digits_str.split_at(digits_str.len() - shift);
            out.push_str(a);
            out.push('.');
            out.push_str(b);
        } else {
            out.push_str("0.");
            for _ in 0..(shift - digits_str.len()) {
                out.push('0');
            }
            out.push_str(&digits_str);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_and_parse() {
        assert_eq!(format(&ratio(42, 36)), "7/6");
        assert_eq!(format(&int(1)), "1/1");
        assert_eq!(parse("7/6"), Some(ratio(7, 6)));
        assert_eq!(parse(" 3 "), Some(int(3)));
        assert_eq!(parse("1/0"), None);
        assert_eq!(parse("x"), None);
    }

    #[test]
    fn decimals() {
        assert_eq!(decimal(&ratio(7, 6), 12), "1.16666666667");
        assert_eq!(decimal(&int(1), 12), "1.00000000000");
        assert_eq!(decimal(&ratio(1, 12), 4), "0.08333");
        assert_eq!(decimal(&int(250), 2), "250");
        assert_eq!(decimal(&ratio(-1, 3), 3), "-0.333");
        assert_eq!(decimal(&ratio(999_999, 1_000_000), 3), "1.00");
    }
}
