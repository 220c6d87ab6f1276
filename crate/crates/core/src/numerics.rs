//! Exact arbitrary-precision arithmetic helpers.
//!
//! Every quantity in this crate is an exact rational; inequalities that
//! involve square roots are decided by squaring both (nonnegative) sides,
//! never by floating-point evaluation.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::str::FromStr;

use crate::error::Error;

/// Exact rational number, kept in canonical form (reduced, positive
/// denominator) by the underlying representation.
pub type Rational = num_rational::BigRational;

/// Default number of significant digits for decimal rendering.
pub const DEFAULT_DECIMAL_DIGITS: usize = 12;

/// Shorthand for a rational from machine integers.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// 2^n as a big integer.
pub fn pow2(n: u64) -> BigInt {
    BigInt::one() << n
}

/// Parse a rational written as `p/q` or as a plain integer `p`.
///
/// Decimal notation is rejected: boundary hypotheses such as
/// `eps <= 1/12` must be stated exactly.
pub fn parse_rational(text: &str) -> Result<Rational, Error> {
    let text = text.trim();
    let bad = || Error::ParseRational(text.to_string());
    if text.contains(['.', ',', 'e', 'E']) {
        return Err(bad());
    }
    match text.split_once('/') {
        Some((p, q)) => {
            let num = BigInt::from_str(p.trim()).map_err(|_| bad())?;
            let den = BigInt::from_str(q.trim()).map_err(|_| bad())?;
            if den <= BigInt::zero() {
                return Err(bad());
            }
            Ok(Rational::new(num, den))
        }
        None => {
            let num = BigInt::from_str(text).map_err(|_| bad())?;
            Ok(Rational::from_integer(num))
        }
    }
}

/// Binomial coefficient C(n, k), exact; 0 when k > n.
pub fn binom(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Decide `lhs <= sqrt(2) / (c * sqrt(m))` exactly.
///
/// Both sides are nonnegative, so the comparison is equivalent to
/// `lhs^2 * c^2 * m <= 2`.
pub fn leq_sqrt_ratio(lhs: &Rational, c: &Rational, m: u64) -> bool {
    assert!(!lhs.is_negative(), "leq_sqrt_ratio: lhs must be >= 0");
    assert!(c.is_positive(), "leq_sqrt_ratio: c must be > 0");
    assert!(m >= 1, "leq_sqrt_ratio: m must be >= 1");
    let two = Rational::from_integer(BigInt::from(2));
    lhs * lhs * c * c * Rational::from_integer(BigInt::from(m)) <= two
}

fn ten_pow(k: u64) -> BigInt {
    BigInt::from(10u32).pow(k as u32)
}

/// Render a rational with `sig` significant digits (round half up).
///
/// Presentation only; comparisons never go through this. Uses plain
/// decimal notation for moderate exponents and `d.dde-k` otherwise,
/// stripping trailing zeros.
pub fn decimal_string(r: &Rational, sig: usize) -> String {
    let sig = sig.max(1);
    if r.is_zero() {
        return "0".to_string();
    }
    let negative = r.is_negative();
    let num = r.numer().abs();
    let den = r.denom().clone();

    // Pin the decimal exponent e with 10^e <= |r| < 10^(e+1).
    let dn = num.to_string().len() as i64;
    let dd = den.to_string().len() as i64;
    let mut e = dn - dd;
    let ge_ten_e = if e >= 0 {
        num >= &den * ten_pow(e as u64)
    } else {
        &num * ten_pow((-e) as u64) >= den
    };
    if !ge_ten_e {
        e -= 1;
    }

    let shift = sig as i64 - 1 - e;
    let (scaled_num, scaled_den) = if shift >= 0 {
        (&num * ten_pow(shift as u64), den)
    } else {
        (num, &den * ten_pow((-shift) as u64))
    };
    let mut mantissa = (BigInt::from(2) * scaled_num + &scaled_den) / (BigInt::from(2) * scaled_den);
    if mantissa == ten_pow(sig as u64) {
        mantissa = ten_pow(sig as u64 - 1);
        e += 1;
    }
    let digits = mantissa.to_string();
    debug_assert_eq!(digits.len(), sig);

    let body = if e >= -4 && e < sig as i64 {
        if e >= 0 {
            let split = (e + 1) as usize;
            let int_part = &digits[..split];
            let frac_part = digits[split..].trim_end_matches('0');
            if frac_part.is_empty() {
                int_part.to_string()
            } else {
                format!("{int_part}.{frac_part}")
            }
        } else {
            let zeros = "0".repeat((-e - 1) as usize);
            let frac = format!("{zeros}{digits}");
            let frac = frac.trim_end_matches('0');
            format!("0.{frac}")
        }
    } else {
        let head = &digits[..1];
        let tail = digits[1..].trim_end_matches('0');
        if tail.is_empty() {
            format!("{head}e{e}")
        } else {
            format!("{head}.{tail}e{e}")
        }
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

/// Serde adapter encoding rationals as `p/q` strings.
pub mod serde_rational {
    use super::{parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(r)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

/// Best-effort `f64` value of a rational, for advisory columns only.
pub fn to_f64_approx(r: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Magnitudes outside f64 range: go through the decimal rendering.
    decimal_string(r, 17).parse().unwrap_or(f64::NAN)
}
