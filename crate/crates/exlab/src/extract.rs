//! Extractor constructions.
//!
//! Everything here composes two ingredients:
//!
//! * a two-source condenser `{0,1}^n x {0,1}^n -> {0,1}^r`, and
//! * a hard-to-communicate function on (N-1) condensed blocks, by default
//!   the truncated product over GF(2^r).
//!
//! The composed map takes N inputs of n bits, condenses each of the first
//! N-1 against the last, multiplies the results in GF(2^r) and keeps the
//! low m bits. The N-source variant for adversarial inputs XORs the
//! three-source map over every index triple.

use num::rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::check_fits;
use crate::distkit::FnTable;
use crate::error::{Error, Result};
use crate::gf2k::{FieldElem, FieldSpec};
use crate::ratio::{log2, pow2, qint, serde_ratio};

/// Truncated product condenser: the low `r` bits of `x * y` over GF(2^n).
pub fn ffm_condense(input_bits: u32, x: u64, y: u64, r: u32) -> Result<u64> {
    FieldElem::new(x, input_bits)?
        .mul(&FieldElem::new(y, input_bits)?)?
        .truncate(r)
}

/// Truncated product of `inputs` over GF(2^width), low `m` bits kept.
pub fn ffm_nof(width: u32, inputs: &[u64], m: u32) -> Result<u64> {
    if inputs.is_empty() {
        return Err(Error::contract("product of zero inputs"));
    }
    let mut acc = FieldElem::new(inputs[0], width)?;
    for &v in &inputs[1..] {
        acc = acc.mul(&FieldElem::new(v, width)?)?;
    }
    acc.truncate(m)
}

/// Declared condenser quality: on source pairs with min-entropy k0 the
/// output is eps1-close to min-entropy k1. Carried as metadata; the
/// verification oracles measure the real profile instead of trusting it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondenserProfile {
    pub k0: u32,
    pub k1: u32,
    #[serde(with = "serde_ratio")]
    pub eps1: BigRational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CondenserKind {
    /// truncate_r(x * y over GF(2^n)).
    Ffm,
    /// truncate_r(x). Deliberately bad; useful as a counterexample feed.
    FirstArg,
    /// Arbitrary explicit table over packed (x, y).
    Table { table: FnTable },
}

/// A pluggable two-source condenser `{0,1}^n x {0,1}^n -> {0,1}^r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CondenserRepr", into = "CondenserRepr")]
pub struct CondenserContract {
    input_bits: u32,
    out_bits: u32,
    kind: CondenserKind,
    profile: Option<CondenserProfile>,
}

#[derive(Clone, Serialize, Deserialize)]
struct CondenserRepr {
    input_bits: u32,
    out_bits: u32,
    #[serde(flatten)]
    kind: CondenserKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    profile: Option<CondenserProfile>,
}

impl From<CondenserContract> for CondenserRepr {
    fn from(c: CondenserContract) -> CondenserRepr {
        CondenserRepr {
            input_bits: c.input_bits,
            out_bits: c.out_bits,
            kind: c.kind,
            profile: c.profile,
        }
    }
}

impl TryFrom<CondenserRepr> for CondenserContract {
    type Error = Error;

    fn try_from(r: CondenserRepr) -> Result<CondenserContract> {
        CondenserContract::new(r.kind, r.input_bits, r.out_bits, r.profile)
    }
}

impl CondenserContract {
    pub fn new(
        kind: CondenserKind,
        input_bits: u32,
        out_bits: u32,
        profile: Option<CondenserProfile>,
    ) -> Result<CondenserContract> {
        if out_bits == 0 || out_bits > input_bits {
            return Err(Error::contract(format!(
                "condenser output of {out_bits} bits from {input_bits}-bit inputs"
            )));
        }
        match &kind {
            CondenserKind::Ffm => {
                FieldSpec::get(input_bits)?;
            }
            CondenserKind::FirstArg => {}
            CondenserKind::Table { table } => {
                if table.in_bits() != 2 * input_bits || table.out_bits() != out_bits {
                    return Err(Error::contract(format!(
                        "condenser table is {} -> {} bits, contract wants {} -> {out_bits}",
                        table.in_bits(),
                        table.out_bits(),
                        2 * input_bits
                    )));
                }
            }
        }
        Ok(CondenserContract {
            input_bits,
            out_bits,
            kind,
            profile,
        })
    }

    pub fn ffm(input_bits: u32, out_bits: u32) -> Result<CondenserContract> {
        CondenserContract::new(CondenserKind::Ffm, input_bits, out_bits, None)
    }

    pub fn input_bits(&self) -> u32 {
        self.input_bits
    }

    pub fn out_bits(&self) -> u32 {
        self.out_bits
    }

    pub fn kind(&self) -> &CondenserKind {
        &self.kind
    }

    pub fn profile(&self) -> Option<&CondenserProfile> {
        self.profile.as_ref()
    }

    pub fn with_profile(mut self, profile: CondenserProfile) -> CondenserContract {
        self.profile = Some(profile);
        self
    }

    pub fn condense(&self, x: u64, y: u64) -> Result<u64> {
        check_fits(x, self.input_bits)?;
        check_fits(y, self.input_bits)?;
        match &self.kind {
            CondenserKind::Ffm => ffm_condense(self.input_bits, x, y, self.out_bits),
            CondenserKind::FirstArg => Ok(x & ((1u64 << self.out_bits) - 1)),
            CondenserKind::Table { table } => Ok(table.eval((x << self.input_bits) | y)),
        }
    }

    /// Dense table of the condenser over packed (x, y), x most significant.
    pub fn to_table(&self) -> Result<FnTable> {
        let n = self.input_bits;
        FnTable::from_fn(2 * n, self.out_bits, |packed| {
            self.condense(packed >> n, packed & ((1 << n) - 1))
                .expect("in-range arguments")
        })
    }
}

/// Parameters of the composed N-source map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NmExtParamsRepr", into = "NmExtParamsRepr")]
pub struct NmExtParams {
    n_sources: usize,
    input_bits: u32,
    cond_bits: u32,
    out_bits: u32,
    condenser: CondenserContract,
}

#[derive(Clone, Serialize, Deserialize)]
struct NmExtParamsRepr {
    n_sources: usize,
    input_bits: u32,
    cond_bits: u32,
    out_bits: u32,
    condenser: CondenserContract,
}

impl From<NmExtParams> for NmExtParamsRepr {
    fn from(p: NmExtParams) -> NmExtParamsRepr {
        NmExtParamsRepr {
            n_sources: p.n_sources,
            input_bits: p.input_bits,
            cond_bits: p.cond_bits,
            out_bits: p.out_bits,
            condenser: p.condenser,
        }
    }
}

impl TryFrom<NmExtParamsRepr> for NmExtParams {
    type Error = Error;

    fn try_from(r: NmExtParamsRepr) -> Result<NmExtParams> {
        NmExtParams::new(r.n_sources, r.input_bits, r.cond_bits, r.out_bits, r.condenser)
    }
}

impl NmExtParams {
    pub fn new(
        n_sources: usize,
        input_bits: u32,
        cond_bits: u32,
        out_bits: u32,
        condenser: CondenserContract,
    ) -> Result<NmExtParams> {
        if n_sources < 2 {
            return Err(Error::contract(format!(
                "{n_sources} sources (need >= 2)"
            )));
        }
        if n_sources > 16 {
            return Err(Error::contract(format!("{n_sources} sources (cap 16)")));
        }
        if out_bits == 0 || out_bits > cond_bits || cond_bits > input_bits {
            return Err(Error::contract(format!(
                "need 1 <= m <= r <= n, got m={out_bits}, r={cond_bits}, n={input_bits}"
            )));
        }
        FieldSpec::get(cond_bits)?;
        if condenser.input_bits() != input_bits || condenser.out_bits() != cond_bits {
            return Err(Error::contract(format!(
                "condenser is {} -> {} bits, params want {input_bits} -> {cond_bits}",
                condenser.input_bits(),
                condenser.out_bits()
            )));
        }
        Ok(NmExtParams {
            n_sources,
            input_bits,
            cond_bits,
            out_bits,
            condenser,
        })
    }

    /// Default shape: FFM condenser, N sources of n bits condensed to r,
    /// m output bits.
    pub fn ffm(n_sources: usize, input_bits: u32, cond_bits: u32, out_bits: u32) -> Result<NmExtParams> {
        NmExtParams::new(
            n_sources,
            input_bits,
            cond_bits,
            out_bits,
            CondenserContract::ffm(input_bits, cond_bits)?,
        )
    }

    pub fn n_sources(&self) -> usize {
        self.n_sources
    }

    pub fn input_bits(&self) -> u32 {
        self.input_bits
    }

    pub fn cond_bits(&self) -> u32 {
        self.cond_bits
    }

    pub fn out_bits(&self) -> u32 {
        self.out_bits
    }

    pub fn condenser(&self) -> &CondenserContract {
        &self.condenser
    }

    /// Field width of the product stage; equal to the condenser output.
    pub fn nof_width(&self) -> u32 {
        self.cond_bits
    }

    /// Total output bits across all 2^N tampering selectors, the leakage
    /// budget the composed map spends in the reduction.
    pub fn mu2(&self) -> u64 {
        (1u64 << self.n_sources) * self.out_bits as u64
    }
}

/// The composed map: condense each of the first N-1 inputs against the
/// last, multiply over GF(2^r), keep the low m bits.
pub fn weak_nme(params: &NmExtParams, xs: &[u64]) -> Result<u64> {
    if xs.len() != params.n_sources {
        return Err(Error::contract(format!(
            "{} inputs for {} sources",
            xs.len(),
            params.n_sources
        )));
    }
    let last = xs[params.n_sources - 1];
    let condensed = xs[..params.n_sources - 1]
        .iter()
        .map(|&x| params.condenser.condense(x, last))
        .collect::<Result<Vec<u64>>>()?;
    ffm_nof(params.cond_bits, &condensed, params.out_bits)
}

/// Three-source leakage-resilient instance; the same map as [`weak_nme`]
/// at N = 3, under its own name because callers treat it as an extractor
/// rather than a tampering target.
pub fn lre3(params: &NmExtParams, x1: u64, x2: u64, x3: u64) -> Result<u64> {
    if params.n_sources != 3 {
        return Err(Error::contract(format!(
            "three-source map with {} sources",
            params.n_sources
        )));
    }
    weak_nme(params, &[x1, x2, x3])
}

/// N-source map for adversarial inputs: XOR of the three-source map over
/// every index triple a < b < c, triples in lexicographic order.
pub fn adversarial_extract(params: &NmExtParams, xs: &[u64]) -> Result<u64> {
    if params.n_sources != 3 {
        return Err(Error::contract(format!(
            "adversarial map composes the 3-source instance, params have {}",
            params.n_sources
        )));
    }
    let n_total = xs.len();
    if n_total < 3 {
        return Err(Error::contract(format!("{n_total} inputs (need >= 3)")));
    }
    let mut triples = Vec::new();
    for a in 0..n_total {
        for b in (a + 1)..n_total {
            for c in (b + 1)..n_total {
                triples.push((a, b, c));
            }
        }
    }
    triples
        .par_iter()
        .map(|&(a, b, c)| lre3(params, xs[a], xs[b], xs[c]))
        .try_reduce(|| 0, |acc, v| Ok(acc ^ v))
}

/// The product stage as a pluggable contract: either the GF(2^width)
/// product or an arbitrary table over the packed condensed blocks (block
/// for input 1 most significant).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NofContract {
    FfmProduct,
    Table { table: FnTable },
}

/// A composed map with both stages pluggable. [`recipe_compose`] builds
/// one; with the default stages it coincides with [`weak_nme`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComposedNme {
    condenser: CondenserContract,
    nof: NofContract,
    n_sources: usize,
    out_bits: u32,
}

pub fn recipe_compose(
    condenser: CondenserContract,
    nof: NofContract,
    n_sources: usize,
    out_bits: u32,
) -> Result<ComposedNme> {
    if n_sources < 2 || n_sources > 16 {
        return Err(Error::contract(format!(
            "{n_sources} sources (need 2 ..= 16)"
        )));
    }
    let r = condenser.out_bits();
    if out_bits == 0 || out_bits > r {
        return Err(Error::contract(format!(
            "need 1 <= m <= r, got m={out_bits}, r={r}"
        )));
    }
    match &nof {
        NofContract::FfmProduct => {
            FieldSpec::get(r)?;
        }
        NofContract::Table { table } => {
            let want_in = r * (n_sources as u32 - 1);
            if table.in_bits() != want_in || table.out_bits() != out_bits {
                return Err(Error::contract(format!(
                    "product-stage table is {} -> {} bits, composition wants {want_in} -> {out_bits}",
                    table.in_bits(),
                    table.out_bits()
                )));
            }
        }
    }
    Ok(ComposedNme {
        condenser,
        nof,
        n_sources,
        out_bits,
    })
}

/// Entropy requirement and error claimed for a composition, derived from
/// the condenser profile (k0, k1, eps1) and the product stage's leakage
/// error eps2: entropy k0 + 2r + 2*log2(1/eps1) and error
/// 2*N*eps1 + 2^{N(r-k1)}*eps2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecipeProfile {
    pub entropy_bits: f64,
    #[serde(with = "serde_ratio")]
    pub eps: BigRational,
}

impl ComposedNme {
    pub fn n_sources(&self) -> usize {
        self.n_sources
    }

    pub fn input_bits(&self) -> u32 {
        self.condenser.input_bits()
    }

    pub fn out_bits(&self) -> u32 {
        self.out_bits
    }

    pub fn eval(&self, xs: &[u64]) -> Result<u64> {
        if xs.len() != self.n_sources {
            return Err(Error::contract(format!(
                "{} inputs for {} sources",
                xs.len(),
                self.n_sources
            )));
        }
        let last = xs[self.n_sources - 1];
        let condensed = xs[..self.n_sources - 1]
            .iter()
            .map(|&x| self.condenser.condense(x, last))
            .collect::<Result<Vec<u64>>>()?;
        match &self.nof {
            NofContract::FfmProduct => {
                ffm_nof(self.condenser.out_bits(), &condensed, self.out_bits)
            }
            NofContract::Table { table } => {
                let r = self.condenser.out_bits();
                let mut packed = 0u64;
                for &w in &condensed {
                    packed = (packed << r) | w;
                }
                Ok(table.eval(packed))
            }
        }
    }

    pub fn claimed_profile(&self, eps2: &BigRational) -> Result<RecipeProfile> {
        let profile = self.condenser.profile().ok_or_else(|| {
            Error::contract("condenser declares no (k0, k1, eps1) profile")
        })?;
        let r = self.condenser.out_bits() as i64;
        let n_sources = self.n_sources as i64;
        let entropy_bits =
            profile.k0 as f64 + 2.0 * r as f64 - 2.0 * log2(&profile.eps1);
        let eps = qint(2 * n_sources as i64) * &profile.eps1
            + pow2(n_sources * (r - profile.k1 as i64)) * eps2;
        Ok(RecipeProfile { entropy_bits, eps })
    }
}
