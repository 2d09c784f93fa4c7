//! Exact rational scalars.
//!
//! Every probability and every expected reward in this crate is a
//! `BigRational`. Floats appear only in Monte-Carlo summaries and in output
//! rows that carry a float *rendering* next to the exact value.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{CoreError, Result};

pub type Rational = num_rational::BigRational;

/// Shorthand for `n/d` from machine integers. Panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat_u128(n: u128) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Renders `r` as `num/den` in lowest terms, denominator always present.
pub fn format_ratio(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `num/den` or a bare integer.
pub fn parse_ratio(s: &str) -> Result<Rational> {
    let parse_int = |t: &str| -> Result<BigInt> {
        t.trim()
            .parse::<BigInt>()
            .map_err(|_| CoreError::BadParam(format!("bad integer in ratio: {t:?}")))
    };
    match s.split_once('/') {
        Some((n, d)) => {
            let den = parse_int(d)?;
            if den.is_zero() {
                return Err(CoreError::BadParam("zero denominator".into()));
            }
            Ok(Rational::new(parse_int(n)?, den))
        }
        None => Ok(Rational::from_integer(parse_int(s)?)),
    }
}

/// Float rendering of an exact value; used for report columns only.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `floor(log2 v)` for `v >= 1`.
pub fn floor_log2(v: u128) -> u32 {
    debug_assert!(v >= 1);
    127 - v.leading_zeros()
}

const LOG2_FRAC_BITS: u32 = 32;

/// Deterministic fixed-point `log2 v` with 32 fractional bits, returned as an
/// exact rational. Exact on powers of two; elsewhere accurate to ~2^-32,
/// which is the documented precision of the warm-up mixing weights.
///
/// The fractional bits come from the classic squaring recurrence on a 48-bit
/// mantissa, so the result is identical on every platform.
pub fn log2_q32(v: u128) -> Result<Rational> {
    if v == 0 {
        return Err(CoreError::BadParam("log2 of zero".into()));
    }
    let int_part = floor_log2(v);
    // Normalize v to a mantissa y in [2^48, 2^49) standing for [1, 2).
    let b = int_part; // v has b+1 bits
    let mut y: u128 = if b <= 48 { v << (48 - b) } else { v >> (b - 48) };
    let mut frac: u64 = 0;
    for _ in 0..LOG2_FRAC_BITS {
        y = (y * y) >> 48;
        frac <<= 1;
        if y >= 1 << 49 {
            frac |= 1;
            y >>= 1;
        }
    }
    let scaled = (u128::from(int_part) << LOG2_FRAC_BITS) | u128::from(frac);
    Ok(Rational::new(
        BigInt::from(scaled),
        BigInt::from(1u128 << LOG2_FRAC_BITS),
    ))
}

/// Clamps a rational into `[0, 1]`; used when a formula-driven weight may
/// stray outside the probability range at boundary inputs.
pub fn clamp01(r: Rational) -> Rational {
    if r.is_negative() {
        Rational::zero()
    } else if r > Rational::one() {
        Rational::one()
    } else {
        r
    }
}

/// Floor of `base^exp` for a rational `base >= 1`, as an unsigned big integer.
pub fn pow_floor(base: &Rational, exp: u32) -> Result<BigUint> {
    if base < &Rational::one() {
        return Err(CoreError::BadParam("power base below one".into()));
    }
    let p = num_traits::pow::pow(base.clone(), exp as usize);
    p.floor()
        .to_integer()
        .to_biguint()
        .ok_or_else(|| CoreError::Overflow("negative power".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_and_parse_round_trip() {
        let r = rat(-3, 9);
        assert_eq!(format_ratio(&r), "-1/3");
        assert_eq!(parse_ratio("-1/3").unwrap(), r);
        assert_eq!(parse_ratio("7").unwrap(), rat_int(7));
        assert!(parse_ratio("1/0").is_err());
    }

    #[test]
    fn floor_log2_matches_bit_length() {
        assert_eq!(floor_log2(1), 0);
        assert_eq!(floor_log2(2), 1);
        assert_eq!(floor_log2(3), 1);
        assert_eq!(floor_log2(1024), 10);
        assert_eq!(floor_log2((1 << 40) - 1), 39);
    }

    #[test]
    fn log2_q32_exact_on_powers_of_two() {
        assert_eq!(log2_q32(1).unwrap(), rat_int(0));
        assert_eq!(log2_q32(1024).unwrap(), rat_int(10));
        assert_eq!(log2_q32(1 << 21).unwrap(), rat_int(21));
    }

    #[test]
    fn log2_q32_close_to_float_log() {
        for v in [3u128, 5, 7, 462, 488, 10_000, 999_983] {
            let got = to_f64(&log2_q32(v).unwrap());
            let want = (v as f64).log2();
            assert!((got - want).abs() < 1e-8, "log2({v}): {got} vs {want}");
        }
    }

    #[test]
    fn pow_floor_handles_rational_bases() {
        let c = rat(5, 2);
        assert_eq!(pow_floor(&c, 2).unwrap(), BigUint::from(6u32)); // 6.25 -> 6
        assert_eq!(pow_floor(&rat_int(2), 10).unwrap(), BigUint::from(1024u32));
    }
}
