//! Independent schoolbook oracles.
//!
//! Everything here is deliberately written the slow, obvious way and shares
//! no code with the implementation paths it checks: multiplication is a
//! full carry-less product followed by explicit polynomial long division,
//! inversion is brute-force search. The field core in [`crate::gf2k`] must
//! agree with these on every tested input; the fixtures regenerator also
//! runs them to rebuild every derived expected value from scratch.

use crate::bits::mask;
use crate::error::{Error, Result};

/// Degree of `p` read as a polynomial over GF(2); -1 for the zero
/// polynomial.
pub fn poly_degree(p: u128) -> i32 {
    127 - p.leading_zeros() as i32
}

/// Carry-less (polynomial) product over GF(2), no reduction.
pub fn clmul(a: u64, b: u64) -> u128 {
    let mut acc = 0u128;
    let a = a as u128;
    for i in 0..64 {
        if (b >> i) & 1 == 1 {
            acc ^= a << i;
        }
    }
    acc
}

/// Remainder of polynomial long division of `a` by `m` (m != 0).
pub fn poly_rem(mut a: u128, m: u128) -> u128 {
    assert!(m != 0, "division by the zero polynomial");
    let dm = poly_degree(m);
    loop {
        let da = poly_degree(a);
        if da < dm {
            return a;
        }
        a ^= m << (da - dm) as u32;
    }
}

/// Polynomial gcd over GF(2).
pub fn poly_gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let r = poly_rem(a, b);
        a = b;
        b = r;
    }
    a
}

/// Schoolbook field multiply: full product, then long division by the
/// reduction polynomial. The modulus is passed in full, including its
/// leading term (degree-64 moduli do not fit in 64 bits).
pub fn schoolbook_mul(width: u32, reduction: u128, a: u64, b: u64) -> u64 {
    debug_assert_eq!(mask(a, width), a);
    debug_assert_eq!(mask(b, width), b);
    debug_assert_eq!(poly_degree(reduction), width as i32);
    poly_rem(clmul(a, b), reduction) as u64
}

/// Brute-force inverse: scans the whole field for b with a*b = 1. Only
/// sensible for small widths; errors on widths over 20 bits.
pub fn schoolbook_inv(width: u32, reduction: u128, a: u64) -> Result<u64> {
    if a == 0 {
        return Err(Error::ZeroInverse);
    }
    if width > 20 {
        return Err(Error::contract(format!(
            "brute-force inverse scan at width {width} (limit 20)"
        )));
    }
    for b in 1..(1u64 << width) {
        if schoolbook_mul(width, reduction, a, b) == 1 {
            return Ok(b);
        }
    }
    Err(Error::contract(format!(
        "no inverse of {a:#x} at width {width}: modulus {reduction:#x} is not irreducible"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_edges() {
        assert_eq!(poly_degree(0), -1);
        assert_eq!(poly_degree(1), 0);
        assert_eq!(poly_degree(0b10), 1);
        assert_eq!(poly_degree(1 << 64), 64);
    }

    #[test]
    fn clmul_classic_example() {
        // (x^2+x+1)(x+1) = x^3+1: no carries, pure GF(2) convolution.
        assert_eq!(clmul(0b111, 0b11), 0b1001);
        assert_eq!(clmul(0x57, 0x83), 0x2b79);
    }

    #[test]
    fn rem_reduces_below_modulus_degree() {
        assert_eq!(poly_rem(0b100, 0b111), 0b11); // x^2 mod x^2+x+1 = x+1
        assert_eq!(poly_rem(0x2b79, 0x11b), 0xc1);
        assert_eq!(poly_rem(0b11, 0b111), 0b11);
    }

    #[test]
    fn aes_field_product() {
        assert_eq!(schoolbook_mul(8, 0x11b, 0x57, 0x83), 0xc1);
    }

    #[test]
    fn gf4_square_of_x() {
        assert_eq!(schoolbook_mul(2, 0b111, 0b10, 0b10), 0b11);
    }

    #[test]
    fn inverse_in_gf4_and_zero_rejected() {
        assert_eq!(schoolbook_inv(2, 0b111, 0b10).unwrap(), 0b11);
        assert_eq!(schoolbook_inv(2, 0b111, 0b11).unwrap(), 0b10);
        assert_eq!(schoolbook_inv(2, 0b111, 1).unwrap(), 1);
        assert_eq!(schoolbook_inv(2, 0b111, 0), Err(Error::ZeroInverse));
    }

    #[test]
    fn gcd_of_multiples() {
        let m = 0b111u128; // x^2+x+1
        let a = clmul(0b111, 0b1011);
        let b = clmul(0b111, 0b110);
        assert_eq!(poly_gcd(a, b) % m, 0);
        assert_eq!(poly_gcd(0b10, 0b11), 1); // x and x+1 are coprime
    }
}
