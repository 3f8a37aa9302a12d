//! Exact rational arithmetic helpers.
//!
//! Every probability and statistical distance in this crate is a
//! `BigRational`, compared and accumulated exactly. Floating point shows up
//! only in quantities that are inherently logarithmic (entropy in bits) and
//! only for reporting, never inside a verification comparison.
//!
//! The interchange format for rationals is the string `"num/den"` in lowest
//! terms with the denominator always present (`"3/4"`, `"1/1"`, `"-1/2"`).
//! Plain integer strings are accepted on input.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Shorthand rational constructor.
pub fn q(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Integer as a rational.
pub fn qint(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// 2^e as an exact rational, for any integer e (negative allowed).
pub fn pow2(e: i64) -> BigRational {
    let one = BigInt::one();
    if e >= 0 {
        BigRational::from_integer(one << e as usize)
    } else {
        BigRational::new(one.clone(), one << (-e) as usize)
    }
}

/// r^k for a nonnegative integer k.
pub fn powi(r: &BigRational, k: u32) -> BigRational {
    let mut acc = BigRational::one();
    let mut base = r.clone();
    let mut k = k;
    while k > 0 {
        if k & 1 == 1 {
            acc *= &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    acc
}

/// Canonical `"num/den"` rendering, always in lowest terms.
pub fn format_ratio(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"num/den"` or a plain integer string.
pub fn parse_ratio(s: &str) -> Result<BigRational> {
    let bad = |d: &dyn std::fmt::Display| Error::config(format!("bad rational {s:?}: {d}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let numer: BigInt = n.trim().parse().map_err(|e| bad(&e))?;
            let denom: BigInt = d.trim().parse().map_err(|e| bad(&e))?;
            if denom.is_zero() {
                return Err(bad(&"zero denominator"));
            }
            Ok(BigRational::new(numer, denom))
        }
        None => {
            let numer: BigInt = s.trim().parse().map_err(|e| bad(&e))?;
            Ok(BigRational::from_integer(numer))
        }
    }
}

/// log2 of a positive rational, as f64. Reporting only.
pub fn log2(r: &BigRational) -> f64 {
    assert!(r.is_positive(), "log2 of a non-positive rational");
    log2_bigint(r.numer()) - log2_bigint(r.denom())
}

fn log2_bigint(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 53 {
        let v: u64 = x.try_into().expect("positive and < 2^53");
        (v as f64).log2()
    } else {
        let top: u64 = (x >> (bits - 53)).try_into().expect("53 bits");
        (top as f64).log2() + (bits - 53) as f64
    }
}

/// Serde adapter: a single rational as a `"num/den"` string.
pub mod serde_ratio {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_ratio(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        parse_ratio(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter: `Option<BigRational>` as an optional `"num/den"` string.
pub mod serde_ratio_opt {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        r: &Option<BigRational>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_some(&format_ratio(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<BigRational>, D::Error> {
        let s = Option::<String>::deserialize(d)?;
        s.map(|s| parse_ratio(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}

/// Serde adapter: a u128 count as a decimal string. Counts can exceed both
/// u64 and the 2^53 range JSON consumers read reliably, and serde's tagged
/// enums cannot buffer raw u128 values, so reports carry them as strings.
pub mod serde_u128 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(n: &u128, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&n.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<u128, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Serde adapter: `Vec<BigRational>` as `"num/den"` strings.
pub mod serde_ratio_vec {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        v: &[BigRational],
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|r| format_ratio(r)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<BigRational>, D::Error> {
        let strings = Vec::<String>::deserialize(d)?;
        strings
            .iter()
            .map(|s| parse_ratio(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pow2_both_signs() {
        assert_eq!(pow2(0), qint(1));
        assert_eq!(pow2(5), qint(32));
        assert_eq!(pow2(-3), q(1, 8));
    }

    #[test]
    fn powi_matches_repeated_multiplication() {
        let r = q(3, 7);
        let mut acc = qint(1);
        for k in 0..10u32 {
            assert_eq!(powi(&r, k), acc);
            acc *= &r;
        }
    }

    #[test]
    fn format_is_reduced_with_explicit_denominator() {
        assert_eq!(format_ratio(&q(2, 4)), "1/2");
        assert_eq!(format_ratio(&qint(3)), "3/1");
        assert_eq!(format_ratio(&qint(0)), "0/1");
        assert_eq!(format_ratio(&q(-2, 4)), "-1/2");
    }

    #[test]
    fn parse_accepts_fractions_and_integers() {
        assert_eq!(parse_ratio("3/4").unwrap(), q(3, 4));
        assert_eq!(parse_ratio("7").unwrap(), qint(7));
        assert_eq!(parse_ratio("-1/2").unwrap(), q(-1, 2));
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("a/b").is_err());
    }

    #[test]
    fn log2_exact_on_powers_of_two() {
        assert_eq!(log2(&pow2(10)), 10.0);
        assert_eq!(log2(&pow2(-4)), -4.0);
        let big = pow2(200);
        assert_eq!(log2(&big), 200.0);
    }
}
