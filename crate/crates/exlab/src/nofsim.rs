//! Number-on-forehead protocol simulation.
//!
//! An N-party protocol over n-bit inputs works on a blackboard transcript.
//! Step j (0-based) picks a writer, possibly from the transcript prefix so
//! far, and the writer appends one bit computed from every input except its
//! own. Conventions, fixed once for the whole crate:
//!
//! * Party indices are 0-based everywhere, including files.
//! * `x_{-i}` packs the remaining inputs in increasing party order with the
//!   lowest remaining party in the most significant block, exactly like
//!   [`crate::bits::pack_excluding`].
//! * Transcripts are integers with step j in bit j (step 0 is the least
//!   significant bit), so the prefix before step j is `t & ((1<<j)-1)`.
//! * Boolean tables are bit-packed: entry x lives at bit `x % 8` of byte
//!   `x / 8`, and the hex form is the byte sequence in order (two hex
//!   digits per byte, lowercase).
//!
//! Protocol enumeration and seeded generation cover the non-adaptive
//! class; evaluation, cylinder extraction and all distance oracles accept
//! adaptive protocols as well.

use num::rational::BigRational;
use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::bits::{mask, pack_excluding, parity, unpack};
use crate::distkit::{flat_supports, Dist, FnTable, JointDist};
use crate::error::{Budget, Error, Result};
use crate::ratio::{pow2, powi, serde_ratio, serde_u128};
use crate::rng::SplitMix64;

/// A Boolean function on `in_bits` inputs, bit-packed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TruthTable {
    in_bits: u32,
    bytes: Vec<u8>,
}

impl TruthTable {
    pub fn from_fn(in_bits: u32, f: impl Fn(u64) -> bool) -> Result<TruthTable> {
        if in_bits > 24 {
            return Err(Error::contract(format!(
                "truth table over {in_bits} bits (cap 24)"
            )));
        }
        let size = 1usize << in_bits;
        let mut bytes = vec![0u8; size.div_ceil(8)];
        for x in 0..size {
            if f(x as u64) {
                bytes[x / 8] |= 1 << (x % 8);
            }
        }
        Ok(TruthTable { in_bits, bytes })
    }

    /// Table from an integer truth table: entry x = bit x of `bits`.
    /// Usable for domains up to 6 input bits.
    pub fn from_int(in_bits: u32, bits: u64) -> Result<TruthTable> {
        if in_bits > 6 {
            return Err(Error::contract(format!(
                "integer truth table over {in_bits} bits (cap 6)"
            )));
        }
        crate::bits::check_fits(bits, 1 << in_bits)?;
        TruthTable::from_fn(in_bits, |x| (bits >> x) & 1 == 1)
    }

    pub fn from_hex(in_bits: u32, s: &str) -> Result<TruthTable> {
        let bytes = hex::decode(s).map_err(|e| Error::config(format!("bad table hex: {e}")))?;
        let expected = (1usize << in_bits).div_ceil(8);
        if bytes.len() != expected {
            return Err(Error::config(format!(
                "table hex has {} bytes, domain of {in_bits} bits needs {expected}",
                bytes.len()
            )));
        }
        let size = 1u64 << in_bits;
        for x in size..(bytes.len() as u64 * 8) {
            if (bytes[(x / 8) as usize] >> (x % 8)) & 1 == 1 {
                return Err(Error::config("table hex has bits beyond the domain"));
            }
        }
        Ok(TruthTable { in_bits, bytes })
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.bytes)
    }

    pub fn in_bits(&self) -> u32 {
        self.in_bits
    }

    #[inline]
    pub fn get(&self, x: u64) -> u64 {
        debug_assert!(x < (1u64 << self.in_bits));
        ((self.bytes[(x / 8) as usize] >> (x % 8)) & 1) as u64
    }

    pub fn to_fn_table(&self) -> FnTable {
        FnTable::from_fn(self.in_bits, 1, |x| self.get(x)).expect("bit table")
    }
}

/// One protocol step: the writer either is fixed or depends on the
/// transcript prefix. Tables are over `x_{-party}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Fixed { party: usize, table: TruthTable },
    Adaptive { cases: Vec<(usize, TruthTable)> },
}

/// An N-party number-on-forehead protocol.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ProtocolRepr", into = "ProtocolRepr")]
pub struct NofProtocol {
    parties: usize,
    input_bits: u32,
    steps: Vec<Step>,
}

impl NofProtocol {
    pub fn new(parties: usize, input_bits: u32, steps: Vec<Step>) -> Result<NofProtocol> {
        if parties < 2 {
            return Err(Error::contract(format!("{parties} parties (need >= 2)")));
        }
        if input_bits == 0 {
            return Err(Error::contract("zero input bits"));
        }
        if steps.len() > 32 {
            return Err(Error::contract(format!(
                "{} steps (transcript cap 32)",
                steps.len()
            )));
        }
        let rest_bits = input_bits * (parties as u32 - 1);
        for (j, step) in steps.iter().enumerate() {
            let check = |party: usize, table: &TruthTable| -> Result<()> {
                if party >= parties {
                    return Err(Error::contract(format!(
                        "step {j}: party {party} out of range"
                    )));
                }
                if table.in_bits != rest_bits {
                    return Err(Error::contract(format!(
                        "step {j}: table over {} bits, expected {rest_bits}",
                        table.in_bits
                    )));
                }
                Ok(())
            };
            match step {
                Step::Fixed { party, table } => check(*party, table)?,
                Step::Adaptive { cases } => {
                    if cases.len() != 1usize << j {
                        return Err(Error::contract(format!(
                            "step {j}: {} selector cases, expected {}",
                            cases.len(),
                            1usize << j
                        )));
                    }
                    for (party, table) in cases {
                        check(*party, table)?;
                    }
                }
            }
        }
        Ok(NofProtocol {
            parties,
            input_bits,
            steps,
        })
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn input_bits(&self) -> u32 {
        self.input_bits
    }

    /// Transcript length in bits.
    pub fn len(&self) -> u32 {
        self.steps.len() as u32
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn is_non_adaptive(&self) -> bool {
        self.steps.iter().all(|s| matches!(s, Step::Fixed { .. }))
    }

    fn resolve(&self, step: usize, prefix: u64) -> (usize, &TruthTable) {
        match &self.steps[step] {
            Step::Fixed { party, table } => (*party, table),
            Step::Adaptive { cases } => {
                let (party, table) = &cases[prefix as usize];
                (*party, table)
            }
        }
    }

    /// Runs the protocol on one input tuple.
    pub fn eval(&self, xs: &[u64]) -> u64 {
        assert_eq!(xs.len(), self.parties, "input tuple arity");
        let mut transcript = 0u64;
        for j in 0..self.steps.len() {
            let prefix = transcript & ((1u64 << j) - 1);
            let (party, table) = self.resolve(j, prefix);
            let bit = table.get(pack_excluding(xs, party, self.input_bits));
            transcript |= bit << j;
        }
        transcript
    }

    /// Same, on a packed input tuple (party 0 most significant).
    pub fn eval_packed(&self, packed: u64) -> u64 {
        let widths = vec![self.input_bits; self.parties];
        self.eval(&unpack(packed, &widths))
    }

    /// Rewrites every fixed step as a one-case-per-prefix adaptive step.
    pub fn to_adaptive(&self) -> NofProtocol {
        let steps = self
            .steps
            .iter()
            .enumerate()
            .map(|(j, s)| match s {
                Step::Fixed { party, table } => Step::Adaptive {
                    cases: vec![(*party, table.clone()); 1usize << j],
                },
                adaptive => adaptive.clone(),
            })
            .collect();
        NofProtocol {
            parties: self.parties,
            input_bits: self.input_bits,
            steps,
        }
    }

    /// Builds the protocol that publishes each leak function bit by bit:
    /// for each `(party, table)` in order, `table.out_bits()` fixed steps
    /// by that party, least significant output bit first.
    pub fn from_leaks(
        parties: usize,
        input_bits: u32,
        leaks: &[(usize, FnTable)],
    ) -> Result<NofProtocol> {
        let mut steps = Vec::new();
        for (party, table) in leaks {
            for bit in 0..table.out_bits() {
                let per_bit = table.bit(bit)?;
                steps.push(Step::Fixed {
                    party: *party,
                    table: TruthTable::from_fn(table.in_bits(), |x| per_bit.eval(x) == 1)?,
                });
            }
        }
        NofProtocol::new(parties, input_bits, steps)
    }

    /// The cylinder intersection recognizing transcript `t`: factor i
    /// checks that every step written by party i under prefix t would have
    /// produced the bit recorded in t. The product over parties equals the
    /// indicator of the protocol producing t.
    pub fn transcript_to_cylinder(&self, transcript: u64) -> Result<CylinderIntersection> {
        if self.len() < 64 && transcript >= (1u64 << self.len()) {
            return Err(Error::domain(format!(
                "transcript {transcript:#x} does not fit in {} steps",
                self.len()
            )));
        }
        let rest_bits = self.input_bits * (self.parties as u32 - 1);
        let factors = (0..self.parties)
            .map(|i| {
                TruthTable::from_fn(rest_bits, |x_rest| {
                    (0..self.steps.len()).all(|j| {
                        let prefix = transcript & ((1u64 << j) - 1);
                        let (party, table) = self.resolve(j, prefix);
                        party != i || table.get(x_rest) == (transcript >> j) & 1
                    })
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CylinderIntersection {
            parties: self.parties,
            input_bits: self.input_bits,
            factors,
        })
    }
}

/// A product of per-party factors, factor i depending on everything except
/// input i.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CylinderIntersection {
    parties: usize,
    input_bits: u32,
    factors: Vec<TruthTable>,
}

impl CylinderIntersection {
    pub fn new(input_bits: u32, factors: Vec<TruthTable>) -> Result<CylinderIntersection> {
        let parties = factors.len();
        if parties < 2 {
            return Err(Error::contract(format!("{parties} factors (need >= 2)")));
        }
        let rest_bits = input_bits * (parties as u32 - 1);
        for f in &factors {
            if f.in_bits != rest_bits {
                return Err(Error::contract(format!(
                    "factor over {} bits, expected {rest_bits}",
                    f.in_bits
                )));
            }
        }
        Ok(CylinderIntersection {
            parties,
            input_bits,
            factors,
        })
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn input_bits(&self) -> u32 {
        self.input_bits
    }

    pub fn factors(&self) -> &[TruthTable] {
        &self.factors
    }

    pub fn eval(&self, xs: &[u64]) -> u64 {
        assert_eq!(xs.len(), self.parties, "input tuple arity");
        for (i, factor) in self.factors.iter().enumerate() {
            if factor.get(pack_excluding(xs, i, self.input_bits)) == 0 {
                return 0;
            }
        }
        1
    }
}

// ---------------------------------------------------------------------------
// Serialized protocol form.

#[derive(Clone, Serialize, Deserialize)]
struct ProtocolRepr {
    parties: usize,
    input_bits: u32,
    steps: Vec<StepRepr>,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum StepRepr {
    Fixed { party: usize, table_hex: String },
    Adaptive { cases: Vec<CaseRepr> },
}

#[derive(Clone, Serialize, Deserialize)]
struct CaseRepr {
    party: usize,
    table_hex: String,
}

impl From<NofProtocol> for ProtocolRepr {
    fn from(p: NofProtocol) -> ProtocolRepr {
        let steps = p
            .steps
            .iter()
            .map(|s| match s {
                Step::Fixed { party, table } => StepRepr::Fixed {
                    party: *party,
                    table_hex: table.to_hex(),
                },
                Step::Adaptive { cases } => StepRepr::Adaptive {
                    cases: cases
                        .iter()
                        .map(|(party, table)| CaseRepr {
                            party: *party,
                            table_hex: table.to_hex(),
                        })
                        .collect(),
                },
            })
            .collect();
        ProtocolRepr {
            parties: p.parties,
            input_bits: p.input_bits,
            steps,
        }
    }
}

impl TryFrom<ProtocolRepr> for NofProtocol {
    type Error = Error;

    fn try_from(r: ProtocolRepr) -> Result<NofProtocol> {
        if r.parties < 2 {
            return Err(Error::config(format!("{} parties (need >= 2)", r.parties)));
        }
        let rest_bits = r.input_bits * (r.parties as u32 - 1);
        let steps = r
            .steps
            .into_iter()
            .map(|s| {
                Ok(match s {
                    StepRepr::Fixed { party, table_hex } => Step::Fixed {
                        party,
                        table: TruthTable::from_hex(rest_bits, &table_hex)?,
                    },
                    StepRepr::Adaptive { cases } => Step::Adaptive {
                        cases: cases
                            .into_iter()
                            .map(|c| Ok((c.party, TruthTable::from_hex(rest_bits, &c.table_hex)?)))
                            .collect::<Result<Vec<_>>>()?,
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        NofProtocol::new(r.parties, r.input_bits, steps)
    }
}

// ---------------------------------------------------------------------------
// Distances and bias functionals.

fn check_source_shape(
    f_bits: u32,
    protocol: Option<&NofProtocol>,
    x: &JointDist,
    parties: usize,
    input_bits: u32,
) -> Result<()> {
    if x.n_components() != parties {
        return Err(Error::contract(format!(
            "source has {} components, protocol has {parties} parties",
            x.n_components()
        )));
    }
    if x.component_widths().iter().any(|&w| w != input_bits) {
        return Err(Error::contract(format!(
            "source widths {:?} do not all equal the input width {input_bits}",
            x.component_widths()
        )));
    }
    if f_bits != x.total_bits() {
        return Err(Error::WidthMismatch {
            left: f_bits,
            right: x.total_bits(),
        });
    }
    if let Some(p) = protocol {
        if p.parties() != parties || p.input_bits() != input_bits {
            return Err(Error::contract(
                "protocol shape does not match the source",
            ));
        }
    }
    if !x.is_product()? {
        return Err(Error::contract(
            "leakage is defined against independent sources; joint is not a product",
        ));
    }
    Ok(())
}

/// If every nonzero probability is the same rational, returns it.
fn flat_mass(probs: &[BigRational]) -> Option<BigRational> {
    let mut common: Option<&BigRational> = None;
    for p in probs {
        if p.is_zero() {
            continue;
        }
        match common {
            None => common = Some(p),
            Some(c) if c == p => {}
            _ => return None,
        }
    }
    common.cloned()
}

/// Statistical distance between (f(X), transcript) and (U_m, transcript),
/// computed exactly over the whole input domain.
pub fn leakage_distance(
    f: &FnTable,
    protocol: &NofProtocol,
    x: &JointDist,
    budget: &Budget,
) -> Result<BigRational> {
    check_source_shape(
        f.in_bits(),
        Some(protocol),
        x,
        protocol.parties(),
        protocol.input_bits(),
    )?;
    let m = f.out_bits();
    let mu = protocol.len();
    if m + mu > 22 {
        return Err(Error::contract(format!(
            "joint output of {m}+{mu} bits exceeds the 22-bit cap"
        )));
    }
    let domain = 1u64 << x.total_bits();
    budget.admit(domain as u128)?;

    let keys = 1usize << (m + mu);
    if let Some(unit) = flat_mass(x.probs()) {
        // Flat source: count outcomes, divide once.
        let mut joint = vec![0u64; keys];
        for packed in 0..domain {
            if x.prob(packed).is_zero() {
                continue;
            }
            let t = protocol.eval_packed(packed);
            let v = f.eval(packed);
            joint[((v << mu) | t) as usize] += 1;
        }
        let mut transcript_mass = vec![0u64; 1usize << mu];
        for (key, c) in joint.iter().enumerate() {
            transcript_mass[key & ((1 << mu) - 1)] += c;
        }
        let mut l1_scaled: u128 = 0;
        for (key, c) in joint.iter().enumerate() {
            let t = key & ((1 << mu) - 1);
            let a = (*c as u128) << m;
            let b = transcript_mass[t] as u128;
            l1_scaled += a.abs_diff(b);
        }
        // D = unit * l1_scaled / 2^{m+1}.
        return Ok(unit * BigRational::from_integer(l1_scaled.into())
            / pow2(m as i64 + 1));
    }

    let mut joint = vec![BigRational::zero(); keys];
    let mut transcript_mass = vec![BigRational::zero(); 1usize << mu];
    for packed in 0..domain {
        let p = x.prob(packed);
        if p.is_zero() {
            continue;
        }
        let t = protocol.eval_packed(packed);
        let v = f.eval(packed);
        joint[((v << mu) | t) as usize] += p;
        transcript_mass[t as usize] += p;
    }
    let scale = pow2(-(m as i64));
    let mut l1 = BigRational::zero();
    for (key, p) in joint.iter().enumerate() {
        let t = key & ((1 << mu) - 1);
        l1 += (p - &transcript_mass[t] * &scale).abs();
    }
    Ok(l1 / BigRational::from_integer(2.into()))
}

/// The 2N-fold product expectation E[prod over all selector vectors b of
/// (-1)^{f(X^b)}], where each party contributes two independent copies of
/// its source and X^b picks copy b_i from party i.
pub fn cube_bias(f: &TruthTable, sources: &[Dist], budget: &Budget) -> Result<BigRational> {
    let parties = sources.len();
    if parties == 0 {
        return Err(Error::contract("cube over zero sources"));
    }
    let n = sources[0].domain_bits();
    if sources.iter().any(|s| s.domain_bits() != n) {
        return Err(Error::contract("cube sources must share one width"));
    }
    if f.in_bits() != n * parties as u32 {
        return Err(Error::WidthMismatch {
            left: f.in_bits(),
            right: n * parties as u32,
        });
    }

    let supports: Vec<Vec<(u64, &BigRational)>> = sources
        .iter()
        .map(|s| {
            (0..(1u64 << n))
                .filter(|&v| !s.prob(v).is_zero())
                .map(|v| (v, s.prob(v)))
                .collect()
        })
        .collect();
    let mut cost: u128 = 1;
    for s in &supports {
        let sq = (s.len() as u128) * (s.len() as u128);
        cost = cost
            .checked_mul(sq)
            .ok_or(Error::Budget {
                estimated: u128::MAX,
                budget: budget.0,
            })?;
    }
    budget.admit(cost)?;

    let flat = sources.iter().all(|s| flat_mass(s.probs()).is_some());
    // Copy values per party, then the alternating-sign sum over the cube.
    let mut copies = vec![0u64; 2 * parties];
    if flat {
        let mut signed: i128 = 0;
        cube_walk_flat(f, &supports, &mut copies, 0, &mut signed);
        let mut denom: u128 = 1;
        for s in &supports {
            denom *= (s.len() as u128) * (s.len() as u128);
        }
        Ok(BigRational::new(signed.into(), (denom as i128).into()))
    } else {
        let mut acc = BigRational::zero();
        cube_walk(
            f,
            &supports,
            &mut copies,
            0,
            &BigRational::one(),
            &mut acc,
        );
        Ok(acc)
    }
}

fn cube_sign(f: &TruthTable, copies: &[u64], parties: usize, n: u32) -> i32 {
    let mut ones = 0u64;
    for b in 0..(1u64 << parties) {
        let mut packed = 0u64;
        for (i, pair) in copies.chunks_exact(2).enumerate() {
            packed = (packed << n) | pair[((b >> i) & 1) as usize];
        }
        ones ^= f.get(packed);
    }
    if ones == 1 {
        -1
    } else {
        1
    }
}

fn cube_walk_flat(
    f: &TruthTable,
    supports: &[Vec<(u64, &BigRational)>],
    copies: &mut Vec<u64>,
    depth: usize,
    signed: &mut i128,
) {
    if depth == copies.len() {
        let parties = supports.len();
        let n = f.in_bits() / parties as u32;
        *signed += cube_sign(f, copies, parties, n) as i128;
        return;
    }
    for &(v, _) in &supports[depth / 2] {
        copies[depth] = v;
        cube_walk_flat(f, supports, copies, depth + 1, signed);
    }
}

fn cube_walk(
    f: &TruthTable,
    supports: &[Vec<(u64, &BigRational)>],
    copies: &mut Vec<u64>,
    depth: usize,
    prob: &BigRational,
    acc: &mut BigRational,
) {
    if depth == copies.len() {
        let parties = supports.len();
        let n = f.in_bits() / parties as u32;
        let sign = cube_sign(f, copies, parties, n);
        if sign == 1 {
            *acc += prob;
        } else {
            *acc -= prob;
        }
        return;
    }
    for &(v, p) in &supports[depth / 2] {
        copies[depth] = v;
        let next = prob * p;
        cube_walk(f, supports, copies, depth + 1, &next, acc);
    }
}

/// One link of the Cauchy-Schwarz chain: |E[(-1)^f C]| is at most the
/// 2^N-th root of the cube bias. Compared exactly by raising the left side
/// to the 2^N-th power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsChainReport {
    #[serde(with = "serde_ratio")]
    pub correlation: BigRational,
    #[serde(with = "serde_ratio")]
    pub correlation_powered: BigRational,
    #[serde(with = "serde_ratio")]
    pub cube: BigRational,
    pub holds: bool,
}

pub fn cs_chain_check(
    f: &TruthTable,
    cylinder: &CylinderIntersection,
    sources: &[Dist],
    budget: &Budget,
) -> Result<CsChainReport> {
    let parties = sources.len();
    if parties != cylinder.parties() {
        return Err(Error::contract(format!(
            "{parties} sources vs {} cylinder factors",
            cylinder.parties()
        )));
    }
    let n = sources[0].domain_bits();
    if sources.iter().any(|s| s.domain_bits() != n) || cylinder.input_bits() != n {
        return Err(Error::contract("cylinder and sources must share one width"));
    }
    if f.in_bits() != n * parties as u32 {
        return Err(Error::WidthMismatch {
            left: f.in_bits(),
            right: n * parties as u32,
        });
    }
    let domain = 1u128 << (n as u128 * parties as u128);
    budget.admit(domain)?;

    let widths = vec![n; parties];
    let mut correlation = BigRational::zero();
    let mut xs = vec![0u64; parties];
    for packed in 0..(domain as u64) {
        let values = unpack(packed, &widths);
        xs.copy_from_slice(&values);
        if cylinder.eval(&xs) == 0 {
            continue;
        }
        let mut p = BigRational::one();
        for (i, s) in sources.iter().enumerate() {
            p *= s.prob(xs[i]);
        }
        if p.is_zero() {
            continue;
        }
        if f.get(packed) == 1 {
            correlation -= p;
        } else {
            correlation += p;
        }
    }
    let correlation = correlation.abs();
    let cube = cube_bias(f, sources, budget)?;
    let correlation_powered = powi(&correlation, 1u32 << parties);
    Ok(CsChainReport {
        holds: correlation_powered <= cube,
        correlation,
        correlation_powered,
        cube,
    })
}

/// Non-uniform XOR lemma shape: the full leakage distance of an m-bit
/// function against a mu-bit transcript is at most 2^{m+mu} times the worst
/// single-bit bias over XOR combinations (nonempty over the output bits,
/// arbitrary over the transcript bits).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XorLemmaReport {
    #[serde(with = "serde_ratio")]
    pub lhs: BigRational,
    #[serde(with = "serde_ratio")]
    pub max_bias: BigRational,
    #[serde(with = "serde_ratio")]
    pub rhs: BigRational,
    pub holds: bool,
}

pub fn xor_lemma_check(
    f: &FnTable,
    protocol: &NofProtocol,
    x: &JointDist,
    budget: &Budget,
) -> Result<XorLemmaReport> {
    let lhs = leakage_distance(f, protocol, x, budget)?;
    let m = f.out_bits();
    let mu = protocol.len();

    // One pass for the joint law of (f(X), transcript), then biases from it.
    let domain = 1u64 << x.total_bits();
    let mut joint = vec![BigRational::zero(); 1usize << (m + mu)];
    for packed in 0..domain {
        let p = x.prob(packed);
        if p.is_zero() {
            continue;
        }
        let key = (f.eval(packed) << mu) | protocol.eval_packed(packed);
        joint[key as usize] += p;
    }
    let half = pow2(-1);
    let mut max_bias = BigRational::zero();
    for s in 1..(1u64 << m) {
        for t in 0..(1u64 << mu) {
            let mut one_mass = BigRational::zero();
            for (key, p) in joint.iter().enumerate() {
                if p.is_zero() {
                    continue;
                }
                let v = (key as u64) >> mu;
                let tr = (key as u64) & ((1 << mu) - 1);
                if parity(v & s) ^ parity(tr & t) == 1 {
                    one_mass += p;
                }
            }
            let bias = (one_mass - &half).abs();
            if bias > max_bias {
                max_bias = bias;
            }
        }
    }
    let rhs = pow2((m + mu) as i64) * &max_bias;
    Ok(XorLemmaReport {
        holds: lhs <= rhs,
        lhs,
        max_bias,
        rhs,
    })
}

// ---------------------------------------------------------------------------
// Protocol enumeration and generation.

/// Number of non-adaptive protocols: (N * 2^{2^{n(N-1)}})^mu.
pub fn count_protocols(parties: usize, input_bits: u32, steps: u32) -> Result<u128> {
    let rest_bits = input_bits * (parties as u32 - 1);
    if rest_bits > 6 {
        return Err(Error::contract(format!(
            "step tables over {rest_bits} bits are not enumerable"
        )));
    }
    let table_count: u128 = 1u128 << (1u64 << rest_bits);
    let per_step = table_count
        .checked_mul(parties as u128)
        .ok_or_else(|| Error::contract("per-step choice count overflows"))?;
    let mut count: u128 = 1;
    for _ in 0..steps {
        count = count
            .checked_mul(per_step)
            .ok_or_else(|| Error::contract("protocol count overflows"))?;
    }
    Ok(count)
}

/// All non-adaptive protocols of the given length, in a fixed order: the
/// protocol with index i has step s encoded by digit s of i in base
/// `N * 2^{2^{n(N-1)}}` (step 0 is the least significant digit), and each
/// digit is `party * 2^{2^{n(N-1)}} + integer truth table`.
pub fn enumerate_protocols(
    parties: usize,
    input_bits: u32,
    steps: u32,
    budget: &Budget,
) -> Result<impl Iterator<Item = NofProtocol> + '_> {
    if parties < 2 {
        return Err(Error::contract(format!("{parties} parties (need >= 2)")));
    }
    let count = count_protocols(parties, input_bits, steps)?;
    budget.admit(count)?;
    let rest_bits = input_bits * (parties as u32 - 1);
    let table_count = 1u128 << (1u64 << rest_bits);
    let per_step = table_count * parties as u128;
    Ok((0..count).map(move |idx| {
        let mut digits = idx;
        let steps = (0..steps)
            .map(|_| {
                let code = digits % per_step;
                digits /= per_step;
                let party = (code / table_count) as usize;
                let table_int = (code % table_count) as u64;
                Step::Fixed {
                    party,
                    table: TruthTable::from_int(rest_bits, table_int).expect("enumerable width"),
                }
            })
            .collect();
        NofProtocol::new(parties, input_bits, steps).expect("enumerated protocol is well-formed")
    }))
}

/// Seeded protocol generation. Draw order (SplitMix64): for each step, the
/// writer (`next_below(parties)`; for adaptive steps one writer per prefix,
/// prefixes increasing), then the table entries in increasing input order,
/// one bit each (low bit of the next word).
pub fn random_protocol(
    parties: usize,
    input_bits: u32,
    steps: u32,
    adaptive: bool,
    seed: u64,
) -> Result<NofProtocol> {
    if parties < 2 {
        return Err(Error::contract(format!("{parties} parties (need >= 2)")));
    }
    let rest_bits = input_bits * (parties as u32 - 1);
    if rest_bits > 20 {
        return Err(Error::contract(format!(
            "random step tables over {rest_bits} bits (cap 20)"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let draw_case = |rng: &mut SplitMix64| -> (usize, TruthTable) {
        let party = rng.next_below(parties as u64) as usize;
        let size = 1u64 << rest_bits;
        let mut bytes = vec![0u8; (size as usize).div_ceil(8)];
        for x in 0..size {
            if rng.next_bit() == 1 {
                bytes[(x / 8) as usize] |= 1 << (x % 8);
            }
        }
        (
            party,
            TruthTable::from_hex(rest_bits, &hex::encode(&bytes)).expect("generated table"),
        )
    };
    let steps = (0..steps)
        .map(|j| {
            if adaptive {
                let cases = (0..(1usize << j)).map(|_| draw_case(&mut rng)).collect();
                Step::Adaptive { cases }
            } else {
                let (party, table) = draw_case(&mut rng);
                Step::Fixed { party, table }
            }
        })
        .collect();
    NofProtocol::new(parties, input_bits, steps)
}

// ---------------------------------------------------------------------------
// Missing-entropy check.

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissingEntropyReport {
    /// Worst leakage distance over all length-mu protocols on uniform
    /// sources.
    #[serde(with = "serde_ratio")]
    pub eps_hat: BigRational,
    /// eps_hat * 2^{N(n-k)}.
    #[serde(with = "serde_ratio")]
    pub bound: BigRational,
    /// Worst leakage distance over all length-(mu-2) protocols and all
    /// tuples of flat k-sources.
    #[serde(with = "serde_ratio")]
    pub worst: BigRational,
    pub holds: bool,
    #[serde(with = "serde_u128")]
    pub protocols_full: u128,
    #[serde(with = "serde_u128")]
    pub protocols_test: u128,
    #[serde(with = "serde_u128")]
    pub source_tuples: u128,
}

/// Entropy discount for flat sources: if every length-mu protocol leaks at
/// most eps_hat about f on uniform inputs, then every length-(mu-2)
/// protocol leaks at most eps_hat * 2^{N(n-k)} on independent flat
/// k-sources. Checked by full enumeration of both protocol classes and all
/// flat supports.
pub fn missing_entropy_check(
    f: &FnTable,
    parties: usize,
    input_bits: u32,
    k: u32,
    mu: u32,
    budget: &Budget,
) -> Result<MissingEntropyReport> {
    if mu < 2 {
        return Err(Error::domain(format!("mu = {mu}, need mu >= 2")));
    }
    if k > input_bits {
        return Err(Error::domain(format!(
            "entropy floor {k} over {input_bits}-bit inputs"
        )));
    }
    let n = input_bits;
    let domain_cost = 1u128 << (n as u128 * parties as u128);
    let protocols_full = count_protocols(parties, n, mu)?;
    let protocols_test = count_protocols(parties, n, mu - 2)?;
    let supports = flat_supports(n, k)?;
    let source_tuples = (supports.len() as u128)
        .checked_pow(parties as u32)
        .ok_or_else(|| Error::contract("source tuple count overflows"))?;
    let cost = protocols_full
        .checked_mul(domain_cost)
        .and_then(|c| {
            protocols_test
                .checked_mul(source_tuples)
                .and_then(|t| t.checked_mul(domain_cost))
                .and_then(|t| c.checked_add(t))
        })
        .ok_or(Error::Budget {
            estimated: u128::MAX,
            budget: budget.0,
        })?;
    budget.admit(cost)?;

    let uniform = JointDist::product(&vec![Dist::uniform(n); parties])?;
    let mut eps_hat = BigRational::zero();
    for protocol in enumerate_protocols(parties, n, mu, budget)? {
        let d = leakage_distance(f, &protocol, &uniform, budget)?;
        if d > eps_hat {
            eps_hat = d;
        }
    }

    let dists: Vec<Dist> = supports.iter().map(Dist::from_flat).collect();
    let mut worst = BigRational::zero();
    for protocol in enumerate_protocols(parties, n, mu - 2, budget)? {
        let mut pick = vec![0usize; parties];
        loop {
            let tuple: Vec<Dist> = pick.iter().map(|&i| dists[i].clone()).collect();
            let x = JointDist::product(&tuple)?;
            let d = leakage_distance(f, &protocol, &x, budget)?;
            if d > worst {
                worst = d;
            }
            // Odometer over support choices, party 0 fastest.
            let mut carry = 0;
            while carry < parties {
                pick[carry] += 1;
                if pick[carry] < dists.len() {
                    break;
                }
                pick[carry] = 0;
                carry += 1;
            }
            if carry == parties {
                break;
            }
        }
    }

    let bound = &eps_hat * pow2(parties as i64 * (n as i64 - k as i64));
    Ok(MissingEntropyReport {
        holds: worst <= bound,
        eps_hat,
        bound,
        worst,
        protocols_full,
        protocols_test,
        source_tuples,
    })
}

/// Generalized inner product: XOR over bit positions of the AND across all
/// parties. At two parties this is the usual inner product mod 2.
pub fn gip_table(parties: usize, input_bits: u32) -> Result<FnTable> {
    if parties < 2 {
        return Err(Error::contract(format!("{parties} parties (need >= 2)")));
    }
    let widths = vec![input_bits; parties];
    FnTable::from_fn(input_bits * parties as u32, 1, move |packed| {
        let values = unpack(packed, &widths);
        let and = values.iter().fold(mask(u64::MAX, input_bits), |a, &v| a & v);
        parity(and)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distkit::FlatSourceSpec;
    use crate::ratio::{q, qint};

    fn uniform_pair(n: u32) -> JointDist {
        JointDist::product(&[Dist::uniform(n), Dist::uniform(n)]).unwrap()
    }

    #[test]
    fn truth_table_bit_order_and_hex() {
        // Entries [1,0,1,1] -> bits 0,2,3 -> byte 0b00001101 -> "0d".
        let t = TruthTable::from_fn(2, |x| x != 1).unwrap();
        assert_eq!(t.to_hex(), "0d");
        assert_eq!(TruthTable::from_hex(2, "0d").unwrap(), t);
        assert_eq!(t.get(0), 1);
        assert_eq!(t.get(1), 0);
        assert!(TruthTable::from_hex(2, "1d").is_err()); // bit beyond domain
        assert!(TruthTable::from_hex(2, "0d0d").is_err());
        assert_eq!(TruthTable::from_int(2, 0b1101).unwrap(), t);
    }

    #[test]
    fn one_step_protocol_transcript() {
        // Two parties, one bit each. Party 0 announces x1 (its visible input).
        let table = TruthTable::from_fn(1, |x| x == 1).unwrap();
        let p = NofProtocol::new(2, 1, vec![Step::Fixed { party: 0, table }]).unwrap();
        assert_eq!(p.eval(&[0, 1]), 1);
        assert_eq!(p.eval(&[1, 0]), 0);
        assert_eq!(p.eval_packed(0b01), 1); // party 0 = msb
        assert!(p.is_non_adaptive());
    }

    #[test]
    fn adaptive_step_matches_hand_unrolled_table() {
        // Step 0: party 0 announces x1. Step 1: if that bit was 0, party 0
        // announces !x1, else party 1 announces x0.
        let announce = TruthTable::from_fn(1, |x| x == 1).unwrap();
        let negate = TruthTable::from_fn(1, |x| x == 0).unwrap();
        let p = NofProtocol::new(
            2,
            1,
            vec![
                Step::Fixed {
                    party: 0,
                    table: announce.clone(),
                },
                Step::Adaptive {
                    cases: vec![(0, negate), (1, announce)],
                },
            ],
        )
        .unwrap();
        for x0 in 0..2u64 {
            for x1 in 0..2u64 {
                let expected_bit0 = x1;
                let expected_bit1 = if x1 == 0 { 1 - x1 } else { x0 };
                assert_eq!(p.eval(&[x0, x1]), expected_bit0 | (expected_bit1 << 1));
            }
        }
    }

    #[test]
    fn non_adaptive_protocols_agree_through_adaptive_path() {
        for seed in 0..20 {
            let p = random_protocol(3, 2, 3, false, seed).unwrap();
            let a = p.to_adaptive();
            assert!(!a.is_non_adaptive() || p.is_empty());
            for packed in 0..(1u64 << 6) {
                assert_eq!(p.eval_packed(packed), a.eval_packed(packed));
            }
        }
    }

    #[test]
    fn cylinder_recognizes_exactly_its_transcript() {
        for seed in 0..12 {
            for adaptive in [false, true] {
                let p = random_protocol(2, 2, 2, adaptive, seed).unwrap();
                for t in 0..(1u64 << p.len()) {
                    let c = p.transcript_to_cylinder(t).unwrap();
                    for packed in 0..(1u64 << 4) {
                        let xs = unpack(packed, &[2, 2]);
                        let expected = (p.eval(&xs) == t) as u64;
                        assert_eq!(c.eval(&xs), expected, "seed {seed} t {t} x {packed:#x}");
                    }
                }
            }
        }
        // Three parties too.
        let p = random_protocol(3, 1, 3, true, 9).unwrap();
        for t in 0..(1u64 << 3) {
            let c = p.transcript_to_cylinder(t).unwrap();
            for packed in 0..(1u64 << 3) {
                let xs = unpack(packed, &[1, 1, 1]);
                assert_eq!(c.eval(&xs), (p.eval(&xs) == t) as u64);
            }
        }
    }

    #[test]
    fn protocol_serde_roundtrip() {
        let p = random_protocol(2, 2, 2, true, 4).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        let back: NofProtocol = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        let q_ = random_protocol(3, 1, 2, false, 4).unwrap();
        let s = serde_json::to_string(&q_).unwrap();
        assert!(s.contains("\"type\":\"fixed\""));
        let back: NofProtocol = serde_json::from_str(&s).unwrap();
        assert_eq!(back, q_);
    }

    #[test]
    fn empty_protocol_leakage_is_plain_distance() {
        let empty = NofProtocol::new(2, 2, vec![]).unwrap();
        let x = uniform_pair(2);
        let budget = Budget::default();
        // f = first input verbatim: uniform output, distance 0.
        let f = FnTable::from_fn(4, 2, |packed| packed >> 2).unwrap();
        assert_eq!(leakage_distance(&f, &empty, &x, &budget).unwrap(), qint(0));
        // Constant m-bit functions sit at distance 1 - 2^-m.
        for m in 1..=2 {
            let c = FnTable::constant(4, m, 0).unwrap();
            assert_eq!(
                leakage_distance(&c, &empty, &x, &budget).unwrap(),
                qint(1) - pow2(-(m as i64))
            );
        }
        // mu = 0 leakage equals sd(f(X), uniform).
        let f = gip_table(2, 2).unwrap();
        let push = x.pushforward(&f).unwrap();
        let direct = push.statistical_distance(&Dist::uniform(1)).unwrap();
        assert_eq!(leakage_distance(&f, &empty, &x, &budget).unwrap(), direct);
    }

    #[test]
    fn leakage_rejects_dependent_sources() {
        let diag = JointDist::new(
            vec![1, 1],
            vec![q(1, 2), qint(0), qint(0), q(1, 2)],
        )
        .unwrap();
        let empty = NofProtocol::new(2, 1, vec![]).unwrap();
        let f = gip_table(2, 1).unwrap();
        assert!(leakage_distance(&f, &empty, &diag, &Budget::default()).is_err());
    }

    #[test]
    fn leakage_flat_and_rational_paths_agree() {
        // Reference: the definition, written with rationals only.
        let reference = |f: &FnTable, p: &NofProtocol, x: &JointDist| -> BigRational {
            let m = f.out_bits();
            let mu = p.len();
            let mut joint = vec![qint(0); 1 << (m + mu)];
            let mut tmass = vec![qint(0); 1usize << mu];
            for packed in 0..(1u64 << x.total_bits()) {
                let pr = x.prob(packed);
                let key = (f.eval(packed) << mu) | p.eval_packed(packed);
                joint[key as usize] += pr;
                tmass[p.eval_packed(packed) as usize] += pr;
            }
            let mut l1 = qint(0);
            for (key, pr) in joint.iter().enumerate() {
                let t = key & ((1usize << mu) - 1);
                l1 += (pr - &tmass[t] * pow2(-(m as i64))).abs();
            }
            l1 / qint(2)
        };

        let budget = Budget::default();
        let f = gip_table(2, 2).unwrap();
        let skew = JointDist::product(&[
            Dist::new(2, vec![q(1, 2), q(1, 4), q(1, 8), q(1, 8)]).unwrap(),
            Dist::uniform(2),
        ])
        .unwrap();
        let flat = JointDist::product(&[
            Dist::from_flat(&FlatSourceSpec::new(2, vec![0, 3]).unwrap()),
            Dist::uniform(2),
        ])
        .unwrap();
        for seed in 0..10 {
            let p = random_protocol(2, 2, 2, false, seed).unwrap();
            for x in [&skew, &flat, &uniform_pair(2)] {
                assert_eq!(
                    leakage_distance(&f, &p, x, &budget).unwrap(),
                    reference(&f, &p, x),
                    "seed {seed}"
                );
            }
        }
    }

    #[test]
    fn cube_bias_of_xor_is_one() {
        for n in 1..=2u32 {
            let f = TruthTable::from_fn(2 * n, |packed| {
                parity(packed >> n) ^ parity(mask(packed, n)) == 1
            })
            .unwrap();
            let sources = vec![Dist::uniform(n); 2];
            assert_eq!(cube_bias(&f, &sources, &Budget::default()).unwrap(), qint(1));
        }
    }

    #[test]
    fn cube_bias_of_inner_product_small() {
        for n in 1..=3u32 {
            let f = gip_table(2, n).unwrap();
            let tt = TruthTable::from_fn(2 * n, |x| f.eval(x) == 1).unwrap();
            let sources = vec![Dist::uniform(n); 2];
            assert_eq!(
                cube_bias(&tt, &sources, &Budget::default()).unwrap(),
                pow2(-(n as i64)),
                "n = {n}"
            );
        }
    }

    #[test]
    fn cube_bias_matches_reference_enumeration() {
        // Independent reference: loop over every pair of copy assignments
        // in the plainest possible way, including for non-flat sources.
        let reference = |f: &TruthTable, sources: &[Dist]| -> BigRational {
            let n = sources[0].domain_bits();
            let parties = sources.len();
            let size = 1u64 << n;
            let mut total = qint(0);
            let mut idx = vec![0u64; 2 * parties];
            'outer: loop {
                let mut p = qint(1);
                for (slot, &v) in idx.iter().enumerate() {
                    p *= sources[slot / 2].prob(v);
                }
                if !p.is_zero() {
                    let mut ones = 0u64;
                    for b in 0..(1u64 << parties) {
                        let mut packed = 0u64;
                        for i in 0..parties {
                            packed = (packed << n) | idx[2 * i + ((b >> i) & 1) as usize];
                        }
                        ones ^= f.get(packed);
                    }
                    if ones == 1 {
                        total -= p;
                    } else {
                        total += p;
                    }
                }
                for slot in 0..idx.len() {
                    idx[slot] += 1;
                    if idx[slot] < size {
                        continue 'outer;
                    }
                    idx[slot] = 0;
                }
                break;
            }
            total
        };

        let mut rng = SplitMix64::new(31);
        for _ in 0..15 {
            let n = 1 + (rng.next_below(2) as u32);
            let parties = 2 + rng.next_below(2) as usize;
            let bits: Vec<bool> = (0..(1u64 << (n * parties as u32)))
                .map(|_| rng.next_bit() == 1)
                .collect();
            let f = TruthTable::from_fn(n * parties as u32, |x| bits[x as usize]).unwrap();
            // Random rational sources exercise the general path; uniform the
            // counting path.
            let sources: Vec<Dist> = (0..parties)
                .map(|_| {
                    let weights: Vec<u64> =
                        (0..(1u64 << n)).map(|_| 1 + rng.next_below(8)).collect();
                    let total: u64 = weights.iter().sum();
                    Dist::new(
                        n,
                        weights
                            .iter()
                            .map(|&w| BigRational::new(w.into(), total.into()))
                            .collect(),
                    )
                    .unwrap()
                })
                .collect();
            let got = cube_bias(&f, &sources, &Budget::default()).unwrap();
            assert_eq!(got, reference(&f, &sources));
            let uniform = vec![Dist::uniform(n); parties];
            let got_u = cube_bias(&f, &uniform, &Budget::default()).unwrap();
            assert_eq!(got_u, reference(&f, &uniform));
        }
    }

    #[test]
    fn cube_bias_budget_enforced() {
        let f = gip_table(2, 3).unwrap();
        let tt = TruthTable::from_fn(6, |x| f.eval(x) == 1).unwrap();
        let sources = vec![Dist::uniform(3); 2];
        let err = cube_bias(&tt, &sources, &Budget(100)).unwrap_err();
        assert_eq!(
            err,
            Error::Budget {
                estimated: 4096,
                budget: 100
            }
        );
    }

    #[test]
    fn cs_chain_holds_on_random_instances() {
        let mut rng = SplitMix64::new(8);
        let budget = Budget::default();
        for round in 0..60 {
            let parties = 2 + (round % 2) as usize;
            let n = 1 + rng.next_below(2) as u32;
            let rest = n * (parties as u32 - 1);
            let fbits: Vec<bool> = (0..(1u64 << (n * parties as u32)))
                .map(|_| rng.next_bit() == 1)
                .collect();
            let f = TruthTable::from_fn(n * parties as u32, |x| fbits[x as usize]).unwrap();
            let factors: Vec<TruthTable> = (0..parties)
                .map(|_| {
                    let bits: Vec<bool> =
                        (0..(1u64 << rest)).map(|_| rng.next_bit() == 1).collect();
                    TruthTable::from_fn(rest, |x| bits[x as usize]).unwrap()
                })
                .collect();
            let cyl = CylinderIntersection::new(n, factors).unwrap();
            let sources = vec![Dist::uniform(n); parties];
            let r = cs_chain_check(&f, &cyl, &sources, &budget).unwrap();
            assert!(r.holds, "round {round}: {r:?}");
            assert_eq!(r.correlation_powered, powi(&r.correlation, 1 << parties));
        }
    }

    #[test]
    fn xor_lemma_single_leaked_bit_example() {
        // f equals the transcript bit: lhs = 1/2, max bias 1/2 at (S,T) =
        // ({0}, {0}), rhs = 4 * 1/2 = 2.
        let x = uniform_pair(1);
        let announce = TruthTable::from_fn(1, |v| v == 1).unwrap();
        let p = NofProtocol::new(
            2,
            1,
            vec![Step::Fixed {
                party: 0,
                table: announce,
            }],
        )
        .unwrap();
        let f = FnTable::from_fn(2, 1, |packed| mask(packed, 1)).unwrap();
        let r = xor_lemma_check(&f, &p, &x, &Budget::default()).unwrap();
        assert_eq!(r.lhs, q(1, 2));
        assert_eq!(r.rhs, qint(2));
        assert!(r.holds);
    }

    #[test]
    fn xor_lemma_empty_transcript_is_twice_bias() {
        let x = uniform_pair(2);
        let empty = NofProtocol::new(2, 2, vec![]).unwrap();
        let f = gip_table(2, 2).unwrap();
        let r = xor_lemma_check(&f, &empty, &x, &Budget::default()).unwrap();
        assert_eq!(r.rhs, qint(2) * &r.max_bias);
        assert_eq!(r.lhs, r.max_bias);
        assert!(r.holds);
    }

    #[test]
    fn protocol_counts_match_formula() {
        assert_eq!(count_protocols(2, 1, 1).unwrap(), 8);
        assert_eq!(count_protocols(2, 2, 1).unwrap(), 32);
        assert_eq!(count_protocols(2, 2, 2).unwrap(), 1024);
        assert_eq!(count_protocols(2, 2, 0).unwrap(), 1);
        let budget = Budget::default();
        assert_eq!(enumerate_protocols(2, 1, 1, &budget).unwrap().count(), 8);
        assert_eq!(enumerate_protocols(2, 2, 0, &budget).unwrap().count(), 1);
        let all: Vec<String> = enumerate_protocols(2, 2, 1, &budget)
            .unwrap()
            .map(|p| serde_json::to_string(&p).unwrap())
            .collect();
        assert_eq!(all.len(), 32);
        let distinct: std::collections::HashSet<_> = all.iter().collect();
        assert_eq!(distinct.len(), 32);
    }

    #[test]
    fn enumeration_respects_budget() {
        assert!(matches!(
            enumerate_protocols(2, 2, 2, &Budget(1000)).map(|_| ()),
            Err(Error::Budget {
                estimated: 1024,
                budget: 1000
            })
        ));
    }

    #[test]
    fn random_protocols_differ_across_seeds() {
        let a = random_protocol(2, 2, 2, false, 1).unwrap();
        let b = random_protocol(2, 2, 2, false, 2).unwrap();
        assert_ne!(a, b);
        assert_eq!(a, random_protocol(2, 2, 2, false, 1).unwrap());
        let c = random_protocol(2, 2, 3, true, 5).unwrap();
        assert_eq!(c.len(), 3);
        assert!(!c.is_non_adaptive());
    }

    #[test]
    fn missing_entropy_tiny_instance_holds() {
        let f = gip_table(2, 1).unwrap();
        let r = missing_entropy_check(&f, 2, 1, 1, 2, &Budget::default()).unwrap();
        assert!(r.holds);
        assert_eq!(r.protocols_full, 64);
        assert_eq!(r.protocols_test, 1);
        assert_eq!(r.source_tuples, 1);
        // k = n: the bound collapses to eps_hat itself.
        assert_eq!(r.bound, r.eps_hat);
        assert!(r.worst <= r.eps_hat);
    }

    #[test]
    fn missing_entropy_rejects_short_mu() {
        let f = gip_table(2, 1).unwrap();
        assert!(missing_entropy_check(&f, 2, 1, 1, 1, &Budget::default()).is_err());
        assert!(missing_entropy_check(&f, 2, 1, 2, 2, &Budget::default()).is_err());
    }

    #[test]
    fn gip_reduces_to_inner_product() {
        let f = gip_table(2, 2).unwrap();
        for x in 0..4u64 {
            for y in 0..4u64 {
                assert_eq!(f.eval((x << 2) | y), parity(x & y));
            }
        }
        let g = gip_table(3, 1).unwrap();
        assert_eq!(g.eval(0b111), 1);
        assert_eq!(g.eval(0b110), 0);
    }
}
