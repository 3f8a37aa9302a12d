//! Bit-packing conventions shared by every module.
//!
//! A tuple (v_1, ..., v_T) with widths (w_1, ..., w_T) packs into a single
//! index with component 1 in the most significant block:
//!
//! ```text
//! index = v_1 << (w_2 + ... + w_T)  |  v_2 << (w_3 + ... + w_T)  |  ...  |  v_T
//! ```
//!
//! "First m bits" of a value always means the low-order m bits, i.e. the
//! coefficients of x^0..x^{m-1} when the value is read as a polynomial over
//! GF(2). Hex strings are written most significant nibble first (ordinary
//! integer hex), lowercase, with an optional 0x prefix accepted on input.

use crate::error::{Error, Result};

/// Masks `value` to its low `width` bits. `width` may be 0..=64.
#[inline]
pub fn mask(value: u64, width: u32) -> u64 {
    if width >= 64 {
        value
    } else {
        value & ((1u64 << width) - 1)
    }
}

/// Returns an error unless `value` fits in `width` bits.
#[inline]
pub fn check_fits(value: u64, width: u32) -> Result<()> {
    if mask(value, width) != value {
        Err(Error::ValueTooWide { value, width })
    } else {
        Ok(())
    }
}

/// Packs components into one index, component 0 most significant.
pub fn pack(values: &[u64], widths: &[u32]) -> u64 {
    debug_assert_eq!(values.len(), widths.len());
    let mut idx = 0u64;
    for (v, w) in values.iter().zip(widths) {
        debug_assert_eq!(mask(*v, *w), *v);
        idx = (idx << w) | v;
    }
    idx
}

/// Inverse of [`pack`].
pub fn unpack(index: u64, widths: &[u32]) -> Vec<u64> {
    let total: u32 = widths.iter().sum();
    let mut out = Vec::with_capacity(widths.len());
    let mut shift = total;
    for w in widths {
        shift -= w;
        out.push(mask(index >> shift, *w));
    }
    out
}

/// Packs `values[..] except values[skip]`, remaining components in
/// increasing position order, all of common width `w`.
#[inline]
pub fn pack_excluding(values: &[u64], skip: usize, w: u32) -> u64 {
    let mut idx = 0u64;
    for (i, v) in values.iter().enumerate() {
        if i != skip {
            idx = (idx << w) | v;
        }
    }
    idx
}

/// Parity (XOR of all bits) of `v`.
#[inline]
pub fn parity(v: u64) -> u64 {
    (v.count_ones() & 1) as u64
}

/// Parses a hex string (optional 0x/0X prefix, either case) into a u64.
pub fn parse_hex(s: &str) -> Result<u64> {
    let t = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")).unwrap_or(s);
    if t.is_empty() {
        return Err(Error::config(format!("empty hex literal {s:?}")));
    }
    u64::from_str_radix(t, 16).map_err(|e| Error::config(format!("bad hex literal {s:?}: {e}")))
}

/// Formats a u64 as lowercase hex with a 0x prefix.
pub fn format_hex(v: u64) -> String {
    format!("{v:#x}")
}
