//! Brute-force verification oracles.
//!
//! Every quantity here is computed by full enumeration in exact rational
//! arithmetic; nothing is estimated except the explicitly named
//! Monte-Carlo cross-check, which exists to catch bugs in the exact path,
//! not to replace it. All oracles take a [`Budget`] and refuse up front
//! when the evaluation count would exceed it.
//!
//! The tampering experiment works over 2N independent copies, two per
//! source, with both copies of source i drawn from the same distribution.
//! A selector b in {0,1}^N (bit i selects the copy of source i) yields
//! Z^b = f applied to the selected copies; the measured distance is
//! between (Z^0, (Z^b) for b != 0) and (U_m, (Z^b) for b != 0), selectors
//! ordered by the integer value of b throughout.

use num::rational::BigRational;
use num::{BigInt, One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distkit::{flat_supports, Dist, FlatSourceSpec, FnTable, JointDist};
use crate::error::{Budget, Error, Result};
use crate::extract::{lre3, weak_nme, ComposedNme, CondenserContract, NmExtParams};
use crate::nofsim::{leakage_distance, NofProtocol};
use crate::ratio::{pow2, powi, qint, serde_ratio};
use crate::rng::SplitMix64;

/// One source: either a flat spec or an explicit distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceSpec {
    Flat(FlatSourceSpec),
    Explicit(Dist),
}

impl SourceSpec {
    pub fn dist(&self) -> Dist {
        match self {
            SourceSpec::Flat(spec) => Dist::from_flat(spec),
            SourceSpec::Explicit(d) => d.clone(),
        }
    }

    pub fn domain_bits(&self) -> u32 {
        match self {
            SourceSpec::Flat(spec) => spec.n,
            SourceSpec::Explicit(d) => d.domain_bits(),
        }
    }
}

/// An independent tuple of sources with a common width and a proven
/// entropy floor: construction checks max probability <= 2^-floor for
/// every member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SourceFamilyRepr", into = "SourceFamilyRepr")]
pub struct SourceFamily {
    sources: Vec<SourceSpec>,
    entropy_floor: u32,
}

#[derive(Clone, Serialize, Deserialize)]
struct SourceFamilyRepr {
    entropy_floor: u32,
    sources: Vec<SourceSpec>,
}

impl From<SourceFamily> for SourceFamilyRepr {
    fn from(f: SourceFamily) -> SourceFamilyRepr {
        SourceFamilyRepr {
            entropy_floor: f.entropy_floor,
            sources: f.sources,
        }
    }
}

impl TryFrom<SourceFamilyRepr> for SourceFamily {
    type Error = Error;

    fn try_from(r: SourceFamilyRepr) -> Result<SourceFamily> {
        SourceFamily::new(r.sources, r.entropy_floor)
    }
}

impl SourceFamily {
    pub fn new(sources: Vec<SourceSpec>, entropy_floor: u32) -> Result<SourceFamily> {
        if sources.is_empty() {
            return Err(Error::contract("family of zero sources"));
        }
        let width = sources[0].domain_bits();
        let cap = pow2(-(entropy_floor as i64));
        for (i, s) in sources.iter().enumerate() {
            if s.domain_bits() != width {
                return Err(Error::contract(format!(
                    "source {i} is {} bits wide, source 0 is {width}",
                    s.domain_bits()
                )));
            }
            let me = s.dist().min_entropy();
            if me.max_prob > cap {
                return Err(Error::contract(format!(
                    "source {i} has max probability {}, floor of {entropy_floor} bits needs <= 2^-{entropy_floor}",
                    me.max_prob
                )));
            }
        }
        Ok(SourceFamily {
            sources,
            entropy_floor,
        })
    }

    pub fn uniform(n_sources: usize, bits: u32) -> Result<SourceFamily> {
        SourceFamily::new(
            vec![SourceSpec::Explicit(Dist::uniform(bits)); n_sources],
            bits,
        )
    }

    pub fn from_flat(specs: Vec<FlatSourceSpec>, entropy_floor: u32) -> Result<SourceFamily> {
        SourceFamily::new(specs.into_iter().map(SourceSpec::Flat).collect(), entropy_floor)
    }

    pub fn n_sources(&self) -> usize {
        self.sources.len()
    }

    pub fn input_bits(&self) -> u32 {
        self.sources[0].domain_bits()
    }

    pub fn entropy_floor(&self) -> u32 {
        self.entropy_floor
    }

    pub fn sources(&self) -> &[SourceSpec] {
        &self.sources
    }

    pub fn dists(&self) -> Vec<Dist> {
        self.sources.iter().map(|s| s.dist()).collect()
    }

    pub fn joint(&self) -> Result<JointDist> {
        JointDist::product(&self.dists())
    }

    /// Product of the support sizes: the cost of enumerating one copy of
    /// the family.
    pub fn tuple_cost(&self) -> Option<u128> {
        let mut cost: u128 = 1;
        for s in &self.sources {
            let len = s
                .dist()
                .probs()
                .iter()
                .filter(|p| !p.is_zero())
                .count() as u128;
            cost = cost.checked_mul(len)?;
        }
        Some(cost)
    }
}

/// A map from N inputs of n bits to m bits, held as a closure so callers
/// can wrap constructions, tables, or ad-hoc counterexamples uniformly.
pub struct Evaluator<'a> {
    n_sources: usize,
    input_bits: u32,
    out_bits: u32,
    f: Box<dyn Fn(&[u64]) -> u64 + Sync + 'a>,
}

impl<'a> Evaluator<'a> {
    pub fn new(
        n_sources: usize,
        input_bits: u32,
        out_bits: u32,
        f: impl Fn(&[u64]) -> u64 + Sync + 'a,
    ) -> Result<Evaluator<'a>> {
        if n_sources < 2 {
            return Err(Error::contract(format!("{n_sources} sources (need >= 2)")));
        }
        if input_bits == 0 || out_bits == 0 {
            return Err(Error::contract("zero-width evaluator"));
        }
        Ok(Evaluator {
            n_sources,
            input_bits,
            out_bits,
            f: Box::new(f),
        })
    }

    pub fn from_params(params: &'a NmExtParams) -> Evaluator<'a> {
        Evaluator::new(
            params.n_sources(),
            params.input_bits(),
            params.out_bits(),
            move |xs| weak_nme(params, xs).expect("in-range inputs"),
        )
        .expect("valid params")
    }

    pub fn from_composed(composed: &'a ComposedNme) -> Evaluator<'a> {
        Evaluator::new(
            composed.n_sources(),
            composed.input_bits(),
            composed.out_bits(),
            move |xs| composed.eval(xs).expect("in-range inputs"),
        )
        .expect("valid composition")
    }

    pub fn constant(
        n_sources: usize,
        input_bits: u32,
        out_bits: u32,
        value: u64,
    ) -> Result<Evaluator<'static>> {
        crate::bits::check_fits(value, out_bits)?;
        Evaluator::new(n_sources, input_bits, out_bits, move |_| value)
    }

    pub fn n_sources(&self) -> usize {
        self.n_sources
    }

    pub fn input_bits(&self) -> u32 {
        self.input_bits
    }

    pub fn out_bits(&self) -> u32 {
        self.out_bits
    }

    pub fn eval(&self, xs: &[u64]) -> u64 {
        (self.f)(xs)
    }

    /// Dense table over the packed input tuple (source 0 most significant).
    pub fn to_fn_table(&self) -> Result<FnTable> {
        let widths = vec![self.input_bits; self.n_sources];
        FnTable::from_fn(
            self.input_bits * self.n_sources as u32,
            self.out_bits,
            |packed| (self.f)(&crate::bits::unpack(packed, &widths)),
        )
    }
}

// ---------------------------------------------------------------------------
// Reports.

/// A bound that can be re-evaluated from its stored parameters, so reports
/// cannot silently drift from the formulas they claim to instantiate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Formula {
    /// 2^{(m+mu)*2^N} * 2 * eps_hat; the tampering-to-leakage bound with
    /// both sides raised to the 2^N-th power.
    ReductionBound {
        n_sources: usize,
        out_bits: u32,
        mu: u32,
        #[serde(with = "serde_ratio")]
        eps_hat: BigRational,
    },
    /// 2^{k + r - k_prime}.
    StrongnessBound { k: u32, r: u32, k_prime: u32 },
    /// eps_hat * 2^{N(n-k)}.
    MissingEntropyBound {
        parties: usize,
        input_bits: u32,
        k: u32,
        #[serde(with = "serde_ratio")]
        eps_hat: BigRational,
    },
    /// 1 - 2^{-m}.
    ConstantGap { out_bits: u32 },
    /// A bound measured elsewhere, stored verbatim.
    Explicit {
        #[serde(with = "serde_ratio")]
        value: BigRational,
    },
}

impl Formula {
    pub fn eval(&self) -> BigRational {
        match self {
            Formula::ReductionBound {
                n_sources,
                out_bits,
                mu,
                eps_hat,
            } => {
                let exp = (*out_bits as i64 + *mu as i64) * (1i64 << *n_sources);
                pow2(exp) * qint(2) * eps_hat
            }
            Formula::StrongnessBound { k, r, k_prime } => {
                pow2(*k as i64 + *r as i64 - *k_prime as i64)
            }
            Formula::MissingEntropyBound {
                parties,
                input_bits,
                k,
                eps_hat,
            } => eps_hat * pow2(*parties as i64 * (*input_bits as i64 - *k as i64)),
            Formula::ConstantGap { out_bits } => qint(1) - pow2(-(*out_bits as i64)),
            Formula::Explicit { value } => value.clone(),
        }
    }
}

/// One checked quantity: what was measured, what bound it was held to,
/// and whether it passed. `holds` is derived, never set by hand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub quantity: String,
    #[serde(with = "serde_ratio")]
    pub measured: BigRational,
    #[serde(with = "serde_ratio")]
    pub bound: BigRational,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula: Option<Formula>,
    pub holds: bool,
    pub cost: u64,
    pub runtime_ms: u64,
}

impl VerifyReport {
    pub fn from_formula(
        quantity: impl Into<String>,
        measured: BigRational,
        formula: Formula,
        cost: u64,
    ) -> VerifyReport {
        let bound = formula.eval();
        VerifyReport {
            quantity: quantity.into(),
            holds: measured <= bound,
            measured,
            bound,
            formula: Some(formula),
            cost,
            runtime_ms: 0,
        }
    }

    pub fn from_bound(
        quantity: impl Into<String>,
        measured: BigRational,
        bound: BigRational,
        cost: u64,
    ) -> VerifyReport {
        VerifyReport {
            quantity: quantity.into(),
            holds: measured <= bound,
            measured,
            bound,
            formula: None,
            cost,
            runtime_ms: 0,
        }
    }

    /// True when the stored bound still equals the formula evaluated from
    /// its stored parameters (or no formula is attached).
    pub fn formula_consistent(&self) -> bool {
        match &self.formula {
            Some(f) => f.eval() == self.bound,
            None => true,
        }
    }
}

// ---------------------------------------------------------------------------
// The tampering-distance oracle.

enum JointRepr {
    /// Outcome counts; every enumerated assignment has probability `unit`.
    Counts { counts: Vec<u64>, unit: BigRational },
    Probs(Vec<BigRational>),
}

struct TamperJoint {
    out_bits: u32,
    selectors: u32,
    repr: JointRepr,
}

impl TamperJoint {
    fn rest_mask(&self) -> u64 {
        (1u64 << (self.out_bits * (self.selectors - 1))) - 1
    }

    /// Exact statistical distance between (Z^0, rest) and (U_m, rest).
    fn distance(&self) -> BigRational {
        let m = self.out_bits;
        let rest_mask = self.rest_mask();
        match &self.repr {
            JointRepr::Counts { counts, unit } => {
                let mut rest = vec![0u64; (rest_mask + 1) as usize];
                for (key, c) in counts.iter().enumerate() {
                    rest[key & rest_mask as usize] += c;
                }
                let mut l1: u128 = 0;
                for (key, c) in counts.iter().enumerate() {
                    let scaled = (*c as u128) << m;
                    l1 += scaled.abs_diff(rest[key & rest_mask as usize] as u128);
                }
                unit * BigRational::from_integer(l1.into()) / pow2(m as i64 + 1)
            }
            JointRepr::Probs(probs) => {
                let mut rest = vec![BigRational::zero(); (rest_mask + 1) as usize];
                for (key, p) in probs.iter().enumerate() {
                    rest[key & rest_mask as usize] += p;
                }
                let scale = pow2(-(m as i64));
                let mut l1 = BigRational::zero();
                for (key, p) in probs.iter().enumerate() {
                    l1 += (p - &rest[key & rest_mask as usize] * &scale).abs();
                }
                l1 / qint(2)
            }
        }
    }

    /// Indicator of the maximizing event {key : P(key) > Q(key)}, where Q
    /// replaces Z^0 by an independent uniform block.
    fn best_set(&self) -> Vec<bool> {
        let m = self.out_bits;
        let rest_mask = self.rest_mask();
        match &self.repr {
            JointRepr::Counts { counts, .. } => {
                let mut rest = vec![0u64; (rest_mask + 1) as usize];
                for (key, c) in counts.iter().enumerate() {
                    rest[key & rest_mask as usize] += c;
                }
                counts
                    .iter()
                    .enumerate()
                    .map(|(key, c)| ((*c as u128) << m) > rest[key & rest_mask as usize] as u128)
                    .collect()
            }
            JointRepr::Probs(probs) => {
                let mut rest = vec![BigRational::zero(); (rest_mask + 1) as usize];
                for (key, p) in probs.iter().enumerate() {
                    rest[key & rest_mask as usize] += p;
                }
                let scale = pow2(-(m as i64));
                probs
                    .iter()
                    .enumerate()
                    .map(|(key, p)| *p > &rest[key & rest_mask as usize] * &scale)
                    .collect()
            }
        }
    }

    /// Q(S) for the event indicator `set`, with Q as in [`Self::best_set`].
    fn alt_mass(&self, set: &[bool]) -> BigRational {
        let m = self.out_bits;
        let rest_mask = self.rest_mask();
        match &self.repr {
            JointRepr::Counts { counts, unit } => {
                let mut rest = vec![0u64; (rest_mask + 1) as usize];
                for (key, c) in counts.iter().enumerate() {
                    rest[key & rest_mask as usize] += c;
                }
                let mut total: u128 = 0;
                for (key, hit) in set.iter().enumerate() {
                    if *hit {
                        total += rest[key & rest_mask as usize] as u128;
                    }
                }
                unit * BigRational::from_integer(total.into()) / pow2(m as i64)
            }
            JointRepr::Probs(probs) => {
                let mut rest = vec![BigRational::zero(); (rest_mask + 1) as usize];
                for (key, p) in probs.iter().enumerate() {
                    rest[key & rest_mask as usize] += p;
                }
                let scale = pow2(-(m as i64));
                let mut total = BigRational::zero();
                for (key, hit) in set.iter().enumerate() {
                    if *hit {
                        total += &rest[key & rest_mask as usize] * &scale;
                    }
                }
                total
            }
        }
    }
}

fn support_values(d: &Dist) -> Vec<u64> {
    (0..(1u64 << d.domain_bits()))
        .filter(|&v| !d.prob(v).is_zero())
        .collect()
}

fn all_flat(dists: &[Dist]) -> bool {
    dists.iter().all(|d| {
        let mut nonzero = d.probs().iter().filter(|p| !p.is_zero());
        match nonzero.next() {
            None => true,
            Some(first) => nonzero.all(|p| p == first),
        }
    })
}

fn tamper_joint(ev: &Evaluator, family: &SourceFamily, budget: &Budget) -> Result<TamperJoint> {
    let n_sources = family.n_sources();
    if ev.n_sources() != n_sources || ev.input_bits() != family.input_bits() {
        return Err(Error::contract(format!(
            "evaluator takes {} sources of {} bits, family has {} of {}",
            ev.n_sources(),
            ev.input_bits(),
            n_sources,
            family.input_bits()
        )));
    }
    let m = ev.out_bits();
    let selectors = 1u32 << n_sources;
    let key_bits = m * selectors;
    if key_bits > 20 {
        return Err(Error::contract(format!(
            "selector tuple of {key_bits} bits exceeds the 20-bit cap"
        )));
    }
    let total_bits = ev.input_bits() * n_sources as u32;
    if total_bits > crate::distkit::MAX_DOMAIN_BITS {
        return Err(Error::contract(format!(
            "packed domain of {total_bits} bits exceeds the {}-bit cap",
            crate::distkit::MAX_DOMAIN_BITS
        )));
    }

    let dists = family.dists();
    let tuple = family
        .tuple_cost()
        .ok_or_else(|| Error::contract("support product overflows"))?;
    let cost = tuple
        .checked_mul(tuple)
        .ok_or_else(|| Error::contract("assignment count overflows"))?;
    budget.admit(cost.max(1u128 << total_bits))?;

    let table = ev.to_fn_table()?;
    let entries = table.entries();
    let n_bits = ev.input_bits();
    let keys = 1usize << key_bits;

    let repr = if all_flat(&dists) {
        let supports: Vec<Vec<u64>> = dists.iter().map(support_values).collect();
        let outer = &supports[0];
        let counts = outer
            .par_iter()
            .map(|&first| {
                let mut local = vec![0u64; keys];
                let mut copies = vec![0u64; 2 * n_sources];
                copies[0] = first;
                enumerate_copies(&supports, &mut copies, 1, &mut |copies| {
                    let mut key = 0u64;
                    for b in 0..selectors {
                        let mut packed = 0u64;
                        for (i, pair) in copies.chunks_exact(2).enumerate() {
                            packed = (packed << n_bits) | pair[((b >> i) & 1) as usize];
                        }
                        key = (key << m) | entries[packed as usize];
                    }
                    local[key as usize] += 1;
                });
                local
            })
            .reduce(
                || vec![0u64; keys],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(&b) {
                        *x += y;
                    }
                    a
                },
            );
        let mut unit_den: u128 = 1;
        for s in &supports {
            unit_den *= (s.len() as u128) * (s.len() as u128);
        }
        JointRepr::Counts {
            counts,
            unit: BigRational::new(1.into(), unit_den.into()),
        }
    } else {
        let supports: Vec<Vec<(u64, &BigRational)>> = dists
            .iter()
            .map(|d| {
                (0..(1u64 << d.domain_bits()))
                    .filter(|&v| !d.prob(v).is_zero())
                    .map(|v| (v, d.prob(v)))
                    .collect()
            })
            .collect();
        let mut probs = vec![BigRational::zero(); keys];
        let mut copies = vec![0u64; 2 * n_sources];
        weighted_copies(
            &supports,
            &mut copies,
            0,
            &BigRational::one(),
            &mut |copies, p| {
                let mut key = 0u64;
                for b in 0..selectors {
                    let mut packed = 0u64;
                    for (i, pair) in copies.chunks_exact(2).enumerate() {
                        packed = (packed << n_bits) | pair[((b >> i) & 1) as usize];
                    }
                    key = (key << m) | entries[packed as usize];
                }
                probs[key as usize] += p;
            },
        );
        JointRepr::Probs(probs)
    };

    Ok(TamperJoint {
        out_bits: m,
        selectors,
        repr,
    })
}

fn enumerate_copies(
    supports: &[Vec<u64>],
    copies: &mut Vec<u64>,
    dim: usize,
    leaf: &mut impl FnMut(&[u64]),
) {
    if dim == copies.len() {
        leaf(copies);
        return;
    }
    for i in 0..supports[dim / 2].len() {
        copies[dim] = supports[dim / 2][i];
        enumerate_copies(supports, copies, dim + 1, leaf);
    }
}

fn weighted_copies(
    supports: &[Vec<(u64, &BigRational)>],
    copies: &mut Vec<u64>,
    dim: usize,
    prob: &BigRational,
    leaf: &mut impl FnMut(&[u64], &BigRational),
) {
    if dim == copies.len() {
        leaf(copies, prob);
        return;
    }
    for i in 0..supports[dim / 2].len() {
        let (v, p) = supports[dim / 2][i];
        copies[dim] = v;
        let next = prob * p;
        weighted_copies(supports, copies, dim + 1, &next, leaf);
    }
}

/// Exact tampering distance of the evaluator on the family.
pub fn weak_nme_distance(
    ev: &Evaluator,
    family: &SourceFamily,
    budget: &Budget,
) -> Result<BigRational> {
    Ok(tamper_joint(ev, family, budget)?.distance())
}

/// Monte-Carlo cross-check of the exact tampering distance. Samples the
/// maximizing event of the exact joint and compares the resulting distance
/// estimate against the exact value in units of the binomial standard
/// error. Flat sources only (sampling them is exact).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    #[serde(with = "serde_ratio")]
    pub exact: BigRational,
    pub estimate: f64,
    pub std_err: f64,
    pub sigmas: f64,
    pub samples: u64,
    pub within_three_sigma: bool,
}

pub fn weak_nme_mc_check(
    ev: &Evaluator,
    family: &SourceFamily,
    samples: u64,
    seed: u64,
    budget: &Budget,
) -> Result<McReport> {
    let dists = family.dists();
    if !all_flat(&dists) {
        return Err(Error::contract(
            "Monte-Carlo sampling is implemented for flat sources only",
        ));
    }
    if samples == 0 {
        return Err(Error::domain("zero samples"));
    }
    budget.admit(samples as u128)?;
    let joint = tamper_joint(ev, family, budget)?;
    let exact = joint.distance();
    let set = joint.best_set();
    let alt = joint.alt_mass(&set);

    let supports: Vec<Vec<u64>> = dists.iter().map(support_values).collect();
    let table = ev.to_fn_table()?;
    let entries = table.entries();
    let n_bits = ev.input_bits();
    let n_sources = family.n_sources();
    let selectors = joint.selectors;
    let m = joint.out_bits;

    let mut rng = SplitMix64::new(seed);
    let mut copies = vec![0u64; 2 * n_sources];
    let mut hits: u64 = 0;
    for _ in 0..samples {
        for (i, c) in copies.iter_mut().enumerate() {
            let s = &supports[i / 2];
            *c = s[rng.next_below(s.len() as u64) as usize];
        }
        let mut key = 0u64;
        for b in 0..selectors {
            let mut packed = 0u64;
            for (i, pair) in copies.chunks_exact(2).enumerate() {
                packed = (packed << n_bits) | pair[((b >> i) & 1) as usize];
            }
            key = (key << m) | entries[packed as usize];
        }
        if set[key as usize] {
            hits += 1;
        }
    }

    let p_hat = hits as f64 / samples as f64;
    let estimate = p_hat - alt.to_f64().unwrap_or(f64::NAN);
    let exact_f = exact.to_f64().unwrap_or(f64::NAN);
    let std_err = (p_hat * (1.0 - p_hat) / samples as f64).sqrt();
    let gap = (estimate - exact_f).abs();
    let sigmas = if gap == 0.0 { 0.0 } else { gap / std_err };
    Ok(McReport {
        exact,
        estimate,
        std_err,
        sigmas,
        samples,
        within_three_sigma: sigmas <= 3.0,
    })
}

// ---------------------------------------------------------------------------
// Condenser oracles.

/// Distance of cond(X, Y) from having `l` bits of min-entropy, exactly.
pub fn condenser_error(
    cond: &CondenserContract,
    x: &Dist,
    y: &Dist,
    l: u32,
) -> Result<BigRational> {
    if x.domain_bits() != cond.input_bits() || y.domain_bits() != cond.input_bits() {
        return Err(Error::contract(format!(
            "sources are {} and {} bits wide, condenser takes {}",
            x.domain_bits(),
            y.domain_bits(),
            cond.input_bits()
        )));
    }
    let joint = JointDist::product(&[x.clone(), y.clone()])?;
    let push = joint.pushforward(&cond.to_table()?)?;
    push.closeness_to_min_entropy(l)
}

/// Worst condenser error over pairs of flat k-sources.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileReport {
    #[serde(with = "serde_ratio")]
    pub eps_max: BigRational,
    pub witness_x: FlatSourceSpec,
    pub witness_y: FlatSourceSpec,
    pub k: u32,
    pub l: u32,
    pub pairs: u64,
    /// True when every pair was enumerated; false for a seeded sample.
    pub universal: bool,
}

fn profile_over_pairs(
    cond: &CondenserContract,
    supports: &[FlatSourceSpec],
    pair_at: impl Fn(u64) -> (usize, usize) + Sync,
    pairs: u64,
    k: u32,
    l: u32,
    universal: bool,
) -> Result<ProfileReport> {
    let n = cond.input_bits();
    let r = cond.out_bits();
    if l > r {
        return Err(Error::domain(format!(
            "entropy target {l} over {r} output bits"
        )));
    }
    let table = cond.to_table()?;
    let entries = table.entries();
    let size = 1u64 << k;
    let outs = 1usize << r;

    // All pairs share the denominator 2^{2k+l}, so the maximum is decided
    // on integer numerators; ties go to the smaller pair index.
    let (best_num, best_idx) = (0..pairs)
        .into_par_iter()
        .fold(
            || (vec![0u32; outs], (0u128, u64::MAX)),
            |(mut counts, mut best), idx| {
                let (i, j) = pair_at(idx);
                counts.fill(0);
                for &s in &supports[i].support {
                    for &t in &supports[j].support {
                        counts[entries[((s << n) | t) as usize] as usize] += 1;
                    }
                }
                let mut num: u128 = 0;
                let floor = (size * size) as u128;
                for &c in &counts {
                    let scaled = (c as u128) << l;
                    if scaled > floor {
                        num += scaled - floor;
                    }
                }
                if num > best.0 || (num == best.0 && idx < best.1) {
                    best = (num, idx);
                }
                (counts, best)
            },
        )
        .map(|(_, best)| best)
        .reduce(
            || (0u128, u64::MAX),
            |a, b| {
                if a.0 > b.0 || (a.0 == b.0 && a.1 <= b.1) {
                    a
                } else {
                    b
                }
            },
        );

    let den = BigInt::from(1u128 << (2 * k + l));
    let (wi, wj) = pair_at(best_idx);
    Ok(ProfileReport {
        eps_max: BigRational::new(BigInt::from(best_num), den),
        witness_x: supports[wi].clone(),
        witness_y: supports[wj].clone(),
        k,
        l,
        pairs,
        universal,
    })
}

pub fn condenser_profile(
    cond: &CondenserContract,
    k: u32,
    l: u32,
    budget: &Budget,
) -> Result<ProfileReport> {
    let supports = flat_supports(cond.input_bits(), k)?;
    let count = supports.len() as u64;
    let pairs = count * count;
    budget.admit(pairs as u128)?;
    profile_over_pairs(cond, &supports, |idx| {
        ((idx / count) as usize, (idx % count) as usize)
    }, pairs, k, l, true)
}

/// Seeded-sample fallback for profiles whose full pair enumeration is out
/// of budget. The result is a lower bound on the true profile, never a
/// certificate.
pub fn condenser_profile_sampled(
    cond: &CondenserContract,
    k: u32,
    l: u32,
    pairs: u64,
    seed: u64,
    budget: &Budget,
) -> Result<ProfileReport> {
    if pairs == 0 {
        return Err(Error::domain("zero sampled pairs"));
    }
    budget.admit(pairs as u128)?;
    let supports = flat_supports(cond.input_bits(), k)?;
    let count = supports.len() as u64;
    let mut rng = SplitMix64::new(seed);
    let picks: Vec<(usize, usize)> = (0..pairs)
        .map(|_| {
            (
                rng.next_below(count) as usize,
                rng.next_below(count) as usize,
            )
        })
        .collect();
    profile_over_pairs(cond, &supports, |idx| picks[idx as usize], pairs, k, l, false)
}

/// For every pair of flat k'-sources, bounds the probability (over one
/// side) that fixing that side leaves a condensed output more than eps
/// away from l bits of min-entropy. Checked against 2^{k+r-k'} in both
/// argument roles.
pub fn strongness_check(
    cond: &CondenserContract,
    k: u32,
    l: u32,
    eps: &BigRational,
    k_prime: u32,
    budget: &Budget,
) -> Result<VerifyReport> {
    let n = cond.input_bits();
    let r = cond.out_bits();
    if l > r {
        return Err(Error::domain(format!(
            "entropy target {l} over {r} output bits"
        )));
    }
    let supports = flat_supports(n, k_prime)?;
    let count = supports.len() as u128;
    budget.admit(count * count)?;
    let table = cond.to_table()?;
    let entries = table.entries();
    let size = 1u64 << k_prime;
    let outs = 1usize << r;

    // closeness(cond(flat, point), l) > eps, by integer cross-multiplication
    // against eps = num/den: excess * den > num * (size << l).
    let bad_fixed = |fixed: u64, moving: &[u64], fixed_is_y: bool| -> bool {
        let mut counts = vec![0u32; outs];
        for &v in moving {
            let idx = if fixed_is_y {
                (v << n) | fixed
            } else {
                (fixed << n) | v
            };
            counts[entries[idx as usize] as usize] += 1;
        }
        let mut excess: u128 = 0;
        for &c in &counts {
            let scaled = (c as u128) << l;
            if scaled > size as u128 {
                excess += scaled - size as u128;
            }
        }
        BigInt::from(excess) * eps.denom() > eps.numer() * BigInt::from((size as u128) << l)
    };

    let mut worst = BigRational::zero();
    let mut cost: u64 = 0;
    for sx in &supports {
        for sy in &supports {
            let bad_y = sy
                .support
                .iter()
                .filter(|&&y| bad_fixed(y, &sx.support, true))
                .count() as u64;
            let bad_x = sx
                .support
                .iter()
                .filter(|&&x| bad_fixed(x, &sy.support, false))
                .count() as u64;
            cost = cost.saturating_add(2 * size * size);
            let fail = BigRational::new(bad_y.max(bad_x).into(), size.into());
            if fail > worst {
                worst = fail;
            }
        }
    }

    Ok(VerifyReport::from_formula(
        format!("strongness failure probability (k={k}, l={l}, k'={k_prime})"),
        worst,
        Formula::StrongnessBound { k, r, k_prime },
        cost,
    ))
}

// ---------------------------------------------------------------------------
// Reduction checks.

/// Checks, protocol by protocol, that the leakage distance of the composed
/// map is within the tampering-to-leakage bound derived from the measured
/// tampering distance. Both sides are raised to the 2^N-th power so the
/// comparison stays rational.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    #[serde(with = "serde_ratio")]
    pub eps_hat: BigRational,
    pub checks: Vec<VerifyReport>,
    pub holds: bool,
}

pub fn reduction_bound_check(
    ev: &Evaluator,
    family: &SourceFamily,
    protocols: &[NofProtocol],
    budget: &Budget,
) -> Result<ReductionReport> {
    let eps_hat = weak_nme_distance(ev, family, budget)?;
    let f = ev.to_fn_table()?;
    let x = family.joint()?;
    let m = ev.out_bits();
    let n_sources = ev.n_sources();
    let per_protocol = 1u64 << (ev.input_bits() * n_sources as u32);

    let mut checks = Vec::with_capacity(protocols.len());
    for (i, protocol) in protocols.iter().enumerate() {
        let mu = protocol.len();
        let lhs = leakage_distance(&f, protocol, &x, budget)?;
        let measured = powi(&lhs, 1u32 << n_sources);
        checks.push(VerifyReport::from_formula(
            format!("leakage^(2^N) of protocol {i} (mu={mu})"),
            measured,
            Formula::ReductionBound {
                n_sources,
                out_bits: m,
                mu,
                eps_hat: eps_hat.clone(),
            },
            per_protocol,
        ));
    }
    Ok(ReductionReport {
        holds: checks.iter().all(|c| c.holds),
        eps_hat,
        checks,
    })
}

/// Fixing all but three sources to constants: structural decomposition of
/// the XOR-of-triples map, then the statistical consequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversarialReport {
    pub structural: VerifyReport,
    pub statistical: VerifyReport,
    pub holds: bool,
}

pub fn adversarial_reduction_check(
    params: &NmExtParams,
    n_total: usize,
    good: [usize; 3],
    bad_values: &[u64],
    sources: &SourceFamily,
    budget: &Budget,
) -> Result<AdversarialReport> {
    let n = params.input_bits();
    let m = params.out_bits();
    if params.n_sources() != 3 {
        return Err(Error::contract("params must describe the 3-source map"));
    }
    if n_total < 3 {
        return Err(Error::contract(format!("{n_total} sources (need >= 3)")));
    }
    if !(good[0] < good[1] && good[1] < good[2] && good[2] < n_total) {
        return Err(Error::contract(format!(
            "good indices {good:?} must be strictly increasing and below {n_total}"
        )));
    }
    if bad_values.len() != n_total - 3 {
        return Err(Error::contract(format!(
            "{} constants for {} fixed sources",
            bad_values.len(),
            n_total - 3
        )));
    }
    for &v in bad_values {
        crate::bits::check_fits(v, n)?;
    }
    if sources.n_sources() != 3 || sources.input_bits() != n {
        return Err(Error::contract(
            "the source family must hold the three free sources",
        ));
    }

    let triple_count = (n_total * (n_total - 1) * (n_total - 2) / 6) as u128;
    budget.admit((1u128 << (3 * n)) * (triple_count + 2))?;

    // Constants occupy the non-good positions in index order.
    let mut base = vec![0u64; n_total];
    let mut next_bad = bad_values.iter();
    for (idx, slot) in base.iter_mut().enumerate() {
        if !good.contains(&idx) {
            *slot = *next_bad.next().expect("counted above");
        }
    }

    // Bucket the non-good triples by the first good index they omit; the
    // bucket's XOR depends only on the other two good inputs.
    let mut buckets: [Vec<[usize; 3]>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for a in 0..n_total {
        for b in (a + 1)..n_total {
            for c in (b + 1)..n_total {
                let t = [a, b, c];
                if t == good {
                    continue;
                }
                let slot = (0..3)
                    .find(|&g| !t.contains(&good[g]))
                    .expect("a non-good triple omits a good index");
                buckets[slot].push(t);
            }
        }
    }
    let eval_triple = |t: &[usize; 3], vals: &[u64; 3]| -> u64 {
        let pick = |idx: usize| -> u64 {
            match good.iter().position(|&g| g == idx) {
                Some(which) => vals[which],
                None => base[idx],
            }
        };
        lre3(params, pick(t[0]), pick(t[1]), pick(t[2])).expect("in-range inputs")
    };
    // g_slot is a function of the two good inputs other than good[slot].
    let g_tables: Vec<FnTable> = (0..3)
        .map(|slot| {
            FnTable::from_fn(2 * n, m, |packed| {
                let hi = packed >> n;
                let lo = packed & ((1 << n) - 1);
                let mut vals = [0u64; 3];
                let others: Vec<usize> = (0..3).filter(|&g| g != slot).collect();
                vals[others[0]] = hi;
                vals[others[1]] = lo;
                buckets[slot]
                    .iter()
                    .fold(0u64, |acc, t| acc ^ eval_triple(t, &vals))
            })
        })
        .collect::<Result<Vec<_>>>()?;

    // Structural identity over all assignments of the good inputs.
    let mut mismatches: u64 = 0;
    let total = 1u64 << (3 * n);
    let mask = (1u64 << n) - 1;
    let mut full = base.clone();
    for packed in 0..total {
        let vals = [(packed >> (2 * n)) & mask, (packed >> n) & mask, packed & mask];
        for (which, &g) in good.iter().enumerate() {
            full[g] = vals[which];
        }
        let direct = crate::extract::adversarial_extract(params, &full)?;
        let decomposed = lre3(params, vals[0], vals[1], vals[2])?
            ^ g_tables[0].eval((vals[1] << n) | vals[2])
            ^ g_tables[1].eval((vals[0] << n) | vals[2])
            ^ g_tables[2].eval((vals[0] << n) | vals[1]);
        if direct != decomposed {
            mismatches += 1;
        }
    }
    let structural = VerifyReport::from_bound(
        format!("decomposition mismatch fraction (N={n_total}, good={good:?})"),
        BigRational::new(mismatches.into(), total.into()),
        BigRational::zero(),
        total,
    );

    // Statistical consequence: the XOR of side functions can only help an
    // adversary as much as publishing them; the output distance from
    // uniform is bounded by the leakage distance of the three-source map
    // against the protocol that announces g_1, g_2, g_3.
    let x = sources.joint()?;
    let out_table = FnTable::from_fn(3 * n, m, |packed| {
        let vals = [(packed >> (2 * n)) & mask, (packed >> n) & mask, packed & mask];
        let mut full = base.clone();
        for (which, &g) in good.iter().enumerate() {
            full[g] = vals[which];
        }
        crate::extract::adversarial_extract(params, &full).expect("in-range inputs")
    })?;
    let out_dist = x.pushforward(&out_table)?;
    let measured = out_dist.statistical_distance(&Dist::uniform(m))?;

    let lre_table = FnTable::from_fn(3 * n, m, |packed| {
        lre3(params, (packed >> (2 * n)) & mask, (packed >> n) & mask, packed & mask)
            .expect("in-range inputs")
    })?;
    let leak_protocol = NofProtocol::from_leaks(
        3,
        n,
        &[
            (0, g_tables[0].clone()),
            (1, g_tables[1].clone()),
            (2, g_tables[2].clone()),
        ],
    )?;
    let bound = leakage_distance(&lre_table, &leak_protocol, &x, budget)?;
    let statistical = VerifyReport::from_formula(
        format!("output distance from uniform (N={n_total}, good={good:?})"),
        measured,
        Formula::Explicit { value: bound },
        2 * total,
    );

    Ok(AdversarialReport {
        holds: structural.holds && statistical.holds,
        structural,
        statistical,
    })
}

// ---------------------------------------------------------------------------
// Worst-family local search.

#[derive(Debug, Clone, PartialEq)]
pub struct WorstFamilyReport {
    pub family: SourceFamily,
    pub eps: BigRational,
    pub start_eps: BigRational,
    pub improvements: u32,
}

/// Greedy local search over flat supports: repeatedly swap one support
/// element of one source and keep the swap iff the tampering distance
/// strictly increases. By construction the result is at least the starting
/// distance.
pub fn worst_family_search(
    ev: &Evaluator,
    k: u32,
    steps: u32,
    seed: u64,
    budget: &Budget,
) -> Result<WorstFamilyReport> {
    let n = ev.input_bits();
    if k > n {
        return Err(Error::domain(format!("flat {k}-sources over {n} bits")));
    }
    let universe = 1u64 << n;
    let size = 1u64 << k;
    let mut rng = SplitMix64::new(seed);
    let mut supports: Vec<Vec<u64>> = (0..ev.n_sources())
        .map(|_| rng.subset(universe, size as usize))
        .collect();

    let family_of = |supports: &[Vec<u64>]| -> Result<SourceFamily> {
        SourceFamily::from_flat(
            supports
                .iter()
                .map(|s| FlatSourceSpec::new(n, s.clone()))
                .collect::<Result<Vec<_>>>()?,
            k,
        )
    };

    let mut current = weak_nme_distance(ev, &family_of(&supports)?, budget)?;
    let start_eps = current.clone();
    let mut improvements = 0;
    for _ in 0..steps {
        let src = rng.next_below(ev.n_sources() as u64) as usize;
        let pos = rng.next_below(size) as usize;
        let complement: Vec<u64> = (0..universe)
            .filter(|v| !supports[src].contains(v))
            .collect();
        if complement.is_empty() {
            continue;
        }
        let replacement = complement[rng.next_below(complement.len() as u64) as usize];
        let old = supports[src][pos];
        supports[src][pos] = replacement;
        match family_of(&supports).and_then(|f| weak_nme_distance(ev, &f, budget)) {
            Ok(eps) if eps > current => {
                current = eps;
                improvements += 1;
            }
            _ => supports[src][pos] = old,
        }
    }
    Ok(WorstFamilyReport {
        family: family_of(&supports)?,
        eps: current,
        start_eps,
        improvements,
    })
}
