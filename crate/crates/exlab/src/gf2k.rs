//! Binary field cores GF(2^t).
//!
//! Field elements are bit vectors: the integer value v represents the
//! polynomial sum of v_i x^i, so bit 0 is the coefficient of x^0.
//! Truncation to m bits keeps coefficients x^0..x^{m-1}. Supported widths
//! are 1..=16 for verification work plus 32 and 64 for throughput
//! experiments; each width has exactly one modulus, the lexicographically
//! least irreducible polynomial of that degree (least as an integer bit
//! mask, scanning upward from x^t):
//!
//! ```text
//! t=2: x^2+x+1   t=3: x^3+x+1   t=4: x^4+x+1   t=8: x^8+x^4+x^3+x+1
//! ```
//!
//! and so on (run `exlab field table --width t` for the full list). The
//! scan certifies irreducibility by exhaustive trial division for t <= 16;
//! for t in {32, 64} trial division is out of reach and the scan uses
//! Rabin's irreducibility test instead. Multiplication is shift-and-XOR
//! with reduction interleaved at every shift, which is a different code
//! path from the schoolbook multiply-then-long-divide oracle it is tested
//! against.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::LazyLock;

use crate::bits::{check_fits, mask};
use crate::error::{Error, Result};

pub const SUPPORTED_WIDTHS: [u32; 18] =
    [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 32, 64];

/// One binary field: a width t and the modulus polynomial of degree
/// exactly t (stored in full, leading term included).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldSpec {
    pub width: u32,
    pub modulus: u128,
}

static FIELDS: LazyLock<BTreeMap<u32, FieldSpec>> = LazyLock::new(|| {
    SUPPORTED_WIDTHS
        .iter()
        .map(|&t| (t, FieldSpec::construct(t)))
        .collect()
});

impl FieldSpec {
    /// The unique spec for a supported width.
    pub fn get(width: u32) -> Result<FieldSpec> {
        FIELDS
            .get(&width)
            .copied()
            .ok_or(Error::UnsupportedWidth(width))
    }

    fn construct(t: u32) -> FieldSpec {
        let mut p = 1u128 << t;
        loop {
            let irreducible = if t <= 16 {
                irreducible_by_trial_division(p)
            } else {
                irreducible_by_rabin(p)
            };
            if irreducible {
                return FieldSpec { width: t, modulus: p };
            }
            p += 1;
        }
    }

    /// Modulus without its leading term, masked to `width` bits. This is
    /// what gets XORed in when a shift overflows.
    #[inline]
    fn reduction_tail(&self) -> u64 {
        (self.modulus & ((1u128 << self.width) - 1)) as u64
    }

    /// Multiplication of raw values, both already known to fit.
    pub(crate) fn mul_raw(&self, a: u64, b: u64) -> u64 {
        let tail = self.reduction_tail();
        let top = self.width - 1;
        let mut acc = 0u64;
        let mut a = a;
        let mut b = b;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            if b == 0 {
                break;
            }
            let carry = (a >> top) & 1;
            a = mask(a << 1, self.width);
            if carry == 1 {
                a ^= tail;
            }
        }
        acc
    }

    pub(crate) fn inv_raw(&self, a: u64) -> Result<u64> {
        if a == 0 {
            return Err(Error::ZeroInverse);
        }
        // Fermat: a^(2^t - 2). The exponent has bits 1..t-1 set.
        let mut acc = 1u64;
        let mut sq = a;
        for i in 0..self.width {
            if i >= 1 {
                acc = self.mul_raw(acc, sq);
            }
            sq = self.mul_raw(sq, sq);
        }
        Ok(acc)
    }

    /// The modulus rendered as a polynomial, e.g. `x^8 + x^4 + x^3 + x + 1`.
    pub fn modulus_polynomial(&self) -> String {
        let terms: Vec<String> = (0..=self.width)
            .rev()
            .filter(|&i| (self.modulus >> i) & 1 == 1)
            .map(|i| match i {
                0 => "1".to_string(),
                1 => "x".to_string(),
                _ => format!("x^{i}"),
            })
            .collect();
        terms.join(" + ")
    }
}

/// Exhaustive trial division by every polynomial of degree 1..=t/2. Only
/// used for t <= 16, where the divisor space is small.
fn irreducible_by_trial_division(p: u128) -> bool {
    let t = poly_deg(p);
    for d in 1..=(t / 2) {
        for q in (1u128 << d)..(1u128 << (d + 1)) {
            if poly_mod(p, q) == 0 {
                return false;
            }
        }
    }
    true
}

/// Rabin's test: p of degree t is irreducible iff x^(2^t) = x (mod p) and
/// gcd(x^(2^(t/q)) - x, p) = 1 for every prime q dividing t.
fn irreducible_by_rabin(p: u128) -> bool {
    let t = poly_deg(p);
    let xpow2k = |k: i32| -> u128 {
        let mut r = 2u128;
        for _ in 0..k {
            r = poly_mod(poly_clmul(r, r), p);
        }
        r
    };
    if xpow2k(t) != 2 {
        return false;
    }
    let mut rest = t;
    let mut q = 2;
    while q * q <= rest {
        if rest % q == 0 {
            if poly_gcd_local(xpow2k(t / q) ^ 2, p) != 1 {
                return false;
            }
            while rest % q == 0 {
                rest /= q;
            }
        }
        q += 1;
    }
    if rest > 1 && rest < t && poly_gcd_local(xpow2k(t / rest) ^ 2, p) != 1 {
        return false;
    }
    true
}

fn poly_deg(p: u128) -> i32 {
    127 - p.leading_zeros() as i32
}

fn poly_mod(mut a: u128, m: u128) -> u128 {
    let dm = poly_deg(m);
    while poly_deg(a) >= dm {
        a ^= m << (poly_deg(a) - dm) as u32;
    }
    a
}

fn poly_clmul(a: u128, b: u128) -> u128 {
    debug_assert!(poly_deg(a) + poly_deg(b) < 128);
    let mut acc = 0u128;
    for i in 0..128 {
        if (b >> i) & 1 == 1 {
            acc ^= a << i;
        }
    }
    acc
}

fn poly_gcd_local(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let r = poly_mod(a, b);
        a = b;
        b = r;
    }
    a
}

/// An element of GF(2^width).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElem {
    value: u64,
    width: u32,
}

impl FieldElem {
    pub fn new(value: u64, width: u32) -> Result<FieldElem> {
        FieldSpec::get(width)?;
        check_fits(value, width)?;
        Ok(FieldElem { value, width })
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    fn same_field(&self, other: &FieldElem) -> Result<()> {
        if self.width != other.width {
            Err(Error::WidthMismatch {
                left: self.width,
                right: other.width,
            })
        } else {
            Ok(())
        }
    }

    /// Addition: coefficient-wise XOR.
    pub fn add(&self, other: &FieldElem) -> Result<FieldElem> {
        self.same_field(other)?;
        Ok(FieldElem {
            value: self.value ^ other.value,
            width: self.width,
        })
    }

    /// Field multiplication modulo the width's modulus polynomial.
    pub fn mul(&self, other: &FieldElem) -> Result<FieldElem> {
        self.same_field(other)?;
        let spec = FieldSpec::get(self.width)?;
        Ok(FieldElem {
            value: spec.mul_raw(self.value, other.value),
            width: self.width,
        })
    }

    /// Multiplicative inverse. Zero is rejected.
    pub fn inv(&self) -> Result<FieldElem> {
        let spec = FieldSpec::get(self.width)?;
        Ok(FieldElem {
            value: spec.inv_raw(self.value)?,
            width: self.width,
        })
    }

    /// First m bits (coefficients of x^0..x^{m-1}) as a plain bit string.
    pub fn truncate(&self, m: u32) -> Result<u64> {
        if m > self.width {
            return Err(Error::domain(format!(
                "truncate to {m} bits from a {}-bit element",
                self.width
            )));
        }
        Ok(mask(self.value, m))
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.value)
    }
}

/// Product of raw n-bit values in GF(2^n). Width must be supported.
pub fn mul_n(width: u32, a: u64, b: u64) -> Result<u64> {
    let spec = FieldSpec::get(width)?;
    check_fits(a, width)?;
    check_fits(b, width)?;
    Ok(spec.mul_raw(a, b))
}
