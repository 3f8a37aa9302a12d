//! Exact-rational probability toolkit.
//!
//! Distributions are dense probability vectors over bit-string domains,
//! with every entry a `BigRational` and the sum checked to be exactly 1 at
//! construction. A [`JointDist`] packs tuple domains with component 0 in
//! the most significant bit block (see [`crate::bits`]); flattening a
//! joint and packing its outcomes are therefore the same operation.
//!
//! Statistical distance, min-entropy mass, conditioning, pushforwards and
//! the chain-rule / dependency-reversal checks all stay in exact
//! arithmetic end to end. The only floating-point output anywhere is the
//! entropy-in-bits field of [`MinEntropy`], which is derived from the
//! exact maximal probability for reporting.

use num::rational::BigRational;
use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::bits::{check_fits, pack, unpack};
use crate::error::{Error, Result};
use crate::ratio::{pow2, serde_ratio_vec};

/// Hard cap on dense domain width; 2^22 rational entries is already ~0.5 GB.
pub const MAX_DOMAIN_BITS: u32 = 22;

fn check_domain_bits(bits: u32) -> Result<()> {
    if bits > MAX_DOMAIN_BITS {
        return Err(Error::contract(format!(
            "dense domain of {bits} bits exceeds the {MAX_DOMAIN_BITS}-bit cap"
        )));
    }
    Ok(())
}

/// A distribution over `{0,1}^domain_bits`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DistRepr", into = "DistRepr")]
pub struct Dist {
    domain_bits: u32,
    probs: Vec<BigRational>,
}

#[derive(Clone, Serialize, Deserialize)]
struct DistRepr {
    domain_bits: u32,
    #[serde(with = "serde_ratio_vec")]
    probs: Vec<BigRational>,
}

impl From<Dist> for DistRepr {
    fn from(d: Dist) -> DistRepr {
        DistRepr {
            domain_bits: d.domain_bits,
            probs: d.probs,
        }
    }
}

impl TryFrom<DistRepr> for Dist {
    type Error = Error;

    fn try_from(r: DistRepr) -> Result<Dist> {
        Dist::new(r.domain_bits, r.probs)
    }
}

/// A distribution over a tuple domain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "JointDistRepr", into = "JointDistRepr")]
pub struct JointDist {
    component_widths: Vec<u32>,
    probs: Vec<BigRational>,
}

#[derive(Clone, Serialize, Deserialize)]
struct JointDistRepr {
    component_widths: Vec<u32>,
    #[serde(with = "serde_ratio_vec")]
    probs: Vec<BigRational>,
}

impl From<JointDist> for JointDistRepr {
    fn from(d: JointDist) -> JointDistRepr {
        JointDistRepr {
            component_widths: d.component_widths,
            probs: d.probs,
        }
    }
}

impl TryFrom<JointDistRepr> for JointDist {
    type Error = Error;

    fn try_from(r: JointDistRepr) -> Result<JointDist> {
        JointDist::new(r.component_widths, r.probs)
    }
}

/// A uniform distribution on an explicit support of distinct n-bit values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FlatSourceRepr", into = "FlatSourceRepr")]
pub struct FlatSourceSpec {
    pub n: u32,
    pub support: Vec<u64>,
}

/// Max probability together with its log for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct MinEntropy {
    pub max_prob: BigRational,
    pub bits: f64,
}

/// Outcome of the conditional min-entropy chain-rule check.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainRuleReport {
    pub holds: bool,
    pub failure_mass: BigRational,
}

fn validate_probs(probs: &[BigRational], expected_len: usize) -> Result<()> {
    if probs.len() != expected_len {
        return Err(Error::contract(format!(
            "probability vector has {} entries, domain has {expected_len}",
            probs.len()
        )));
    }
    let mut sum = BigRational::zero();
    for p in probs {
        if p.is_negative() {
            return Err(Error::contract("negative probability".to_string()));
        }
        sum += p;
    }
    if !sum.is_one() {
        return Err(Error::contract(format!(
            "probabilities sum to {sum}, not 1"
        )));
    }
    Ok(())
}

#[derive(Clone, Serialize, Deserialize)]
struct FlatSourceRepr {
    n: u32,
    support: Vec<u64>,
}

impl From<FlatSourceSpec> for FlatSourceRepr {
    fn from(s: FlatSourceSpec) -> FlatSourceRepr {
        FlatSourceRepr {
            n: s.n,
            support: s.support,
        }
    }
}

impl TryFrom<FlatSourceRepr> for FlatSourceSpec {
    type Error = Error;

    fn try_from(r: FlatSourceRepr) -> Result<FlatSourceSpec> {
        FlatSourceSpec::new(r.n, r.support)
    }
}

/// All size-2^k supports over n-bit strings, in lexicographic order.
pub fn flat_supports(n: u32, k: u32) -> Result<Vec<FlatSourceSpec>> {
    use itertools::Itertools;
    if k > n {
        return Err(Error::domain(format!("flat {k}-sources over {n} bits")));
    }
    let universe = 1u64 << n;
    let size = 1u64 << k;
    let count = binomial(universe, size).ok_or_else(|| {
        Error::contract(format!(
            "C({universe}, {size}) support sets are not enumerable"
        ))
    })?;
    if count > 1 << 24 {
        return Err(Error::contract(format!(
            "{count} support sets exceed the enumeration cap"
        )));
    }
    Ok((0..universe)
        .combinations(size as usize)
        .map(|support| FlatSourceSpec::new(n, support).expect("combination is a valid support"))
        .collect())
}

pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)?;
        acc /= (i + 1) as u128;
    }
    Some(acc)
}

impl FlatSourceSpec {
    pub fn new(n: u32, mut support: Vec<u64>) -> Result<FlatSourceSpec> {
        check_domain_bits(n)?;
        if support.is_empty() {
            return Err(Error::contract("empty support"));
        }
        for &v in &support {
            check_fits(v, n)?;
        }
        support.sort_unstable();
        if support.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::contract("support values must be distinct"));
        }
        Ok(FlatSourceSpec { n, support })
    }

    pub fn support_size(&self) -> usize {
        self.support.len()
    }
}

impl Dist {
    pub fn new(domain_bits: u32, probs: Vec<BigRational>) -> Result<Dist> {
        check_domain_bits(domain_bits)?;
        validate_probs(&probs, 1usize << domain_bits)?;
        Ok(Dist { domain_bits, probs })
    }

    pub fn uniform(domain_bits: u32) -> Dist {
        check_domain_bits(domain_bits).expect("domain cap");
        let size = 1usize << domain_bits;
        let p = pow2(-(domain_bits as i64));
        Dist {
            domain_bits,
            probs: vec![p; size],
        }
    }

    pub fn point(domain_bits: u32, value: u64) -> Result<Dist> {
        check_domain_bits(domain_bits)?;
        check_fits(value, domain_bits)?;
        let mut probs = vec![BigRational::zero(); 1usize << domain_bits];
        probs[value as usize] = BigRational::one();
        Ok(Dist { domain_bits, probs })
    }

    /// Uniform distribution on the given support.
    pub fn from_flat(spec: &FlatSourceSpec) -> Dist {
        let mut probs = vec![BigRational::zero(); 1usize << spec.n];
        let p = BigRational::new(1.into(), (spec.support.len() as u64).into());
        for &v in &spec.support {
            probs[v as usize] = p.clone();
        }
        Dist {
            domain_bits: spec.n,
            probs,
        }
    }

    pub fn domain_bits(&self) -> u32 {
        self.domain_bits
    }

    pub fn domain_size(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[BigRational] {
        &self.probs
    }

    pub fn prob(&self, x: u64) -> &BigRational {
        &self.probs[x as usize]
    }

    pub fn to_joint(&self) -> JointDist {
        JointDist {
            component_widths: vec![self.domain_bits],
            probs: self.probs.clone(),
        }
    }

    /// Distribution of f(X).
    pub fn pushforward(&self, f: &FnTable) -> Result<Dist> {
        if f.in_bits != self.domain_bits {
            return Err(Error::WidthMismatch {
                left: f.in_bits,
                right: self.domain_bits,
            });
        }
        let mut probs = vec![BigRational::zero(); 1usize << f.out_bits];
        for (x, p) in self.probs.iter().enumerate() {
            if !p.is_zero() {
                probs[f.entries[x] as usize] += p;
            }
        }
        Ok(Dist {
            domain_bits: f.out_bits,
            probs,
        })
    }

    /// Half the L1 distance between two distributions on the same domain.
    pub fn statistical_distance(&self, other: &Dist) -> Result<BigRational> {
        if self.domain_bits != other.domain_bits {
            return Err(Error::WidthMismatch {
                left: self.domain_bits,
                right: other.domain_bits,
            });
        }
        let mut l1 = BigRational::zero();
        for (p, q) in self.probs.iter().zip(&other.probs) {
            l1 += (p - q).abs();
        }
        Ok(l1 / BigRational::from_integer(2.into()))
    }

    /// Exact maximal probability and its negative log.
    pub fn min_entropy(&self) -> MinEntropy {
        let max_prob = self.probs.iter().max().expect("nonempty").clone();
        let bits = -crate::ratio::log2(&max_prob);
        MinEntropy { max_prob, bits }
    }

    /// Smallest eps such that the distribution is eps-close to some
    /// distribution with min-entropy >= k: the total mass above the 2^-k
    /// cap.
    pub fn closeness_to_min_entropy(&self, k: u32) -> Result<BigRational> {
        let cap = self.entropy_cap(k)?;
        let mut excess = BigRational::zero();
        for p in &self.probs {
            if *p > cap {
                excess += p - &cap;
            }
        }
        debug_assert_eq!(excess, self.closeness_via_best_set(k).unwrap());
        Ok(excess)
    }

    /// Same quantity by the dual route: the set S* of outcomes heavier than
    /// the cap maximizes Pr[S] - |S| * 2^-k over all sets S.
    pub fn closeness_via_best_set(&self, k: u32) -> Result<BigRational> {
        let cap = self.entropy_cap(k)?;
        let mut mass = BigRational::zero();
        let mut count: u64 = 0;
        for p in &self.probs {
            if *p > cap {
                mass += p;
                count += 1;
            }
        }
        Ok(mass - BigRational::from_integer(count.into()) * cap)
    }

    fn entropy_cap(&self, k: u32) -> Result<BigRational> {
        if k > self.domain_bits {
            return Err(Error::domain(format!(
                "entropy floor {k} over a {}-bit domain",
                self.domain_bits
            )));
        }
        Ok(pow2(-(k as i64)))
    }
}

impl JointDist {
    pub fn new(component_widths: Vec<u32>, probs: Vec<BigRational>) -> Result<JointDist> {
        let total: u32 = component_widths.iter().sum();
        check_domain_bits(total)?;
        validate_probs(&probs, 1usize << total)?;
        Ok(JointDist {
            component_widths,
            probs,
        })
    }

    /// Product of independent factors, component 0 first (most
    /// significant).
    pub fn product(factors: &[Dist]) -> Result<JointDist> {
        if factors.is_empty() {
            return Err(Error::contract("product of zero distributions"));
        }
        let component_widths: Vec<u32> = factors.iter().map(|d| d.domain_bits).collect();
        let total: u32 = component_widths.iter().sum();
        check_domain_bits(total)?;
        let mut probs = vec![BigRational::one()];
        for d in factors {
            let mut next = Vec::with_capacity(probs.len() << d.domain_bits);
            for acc in &probs {
                for p in &d.probs {
                    next.push(acc * p);
                }
            }
            probs = next;
        }
        Ok(JointDist {
            component_widths,
            probs,
        })
    }

    pub fn component_widths(&self) -> &[u32] {
        &self.component_widths
    }

    pub fn n_components(&self) -> usize {
        self.component_widths.len()
    }

    pub fn total_bits(&self) -> u32 {
        self.component_widths.iter().sum()
    }

    pub fn probs(&self) -> &[BigRational] {
        &self.probs
    }

    pub fn prob(&self, packed: u64) -> &BigRational {
        &self.probs[packed as usize]
    }

    /// Reads the packed joint as a single flat distribution.
    pub fn flatten(&self) -> Dist {
        Dist {
            domain_bits: self.total_bits(),
            probs: self.probs.clone(),
        }
    }

    /// Distribution of f applied to the packed tuple.
    pub fn pushforward(&self, f: &FnTable) -> Result<Dist> {
        self.flatten().pushforward(f)
    }

    /// Joint distribution of (f_0(X), ..., f_{T-1}(X)).
    pub fn concat_pushforward(&self, fs: &[FnTable]) -> Result<JointDist> {
        if fs.is_empty() {
            return Err(Error::contract("concat_pushforward of zero tables"));
        }
        let total = self.total_bits();
        for f in fs {
            if f.in_bits != total {
                return Err(Error::WidthMismatch {
                    left: f.in_bits,
                    right: total,
                });
            }
        }
        let out_widths: Vec<u32> = fs.iter().map(|f| f.out_bits).collect();
        let out_total: u32 = out_widths.iter().sum();
        check_domain_bits(out_total)?;
        let mut probs = vec![BigRational::zero(); 1usize << out_total];
        for (x, p) in self.probs.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let mut idx = 0u64;
            for f in fs {
                idx = (idx << f.out_bits) | f.entries[x];
            }
            probs[idx as usize] += p;
        }
        Ok(JointDist {
            component_widths: out_widths,
            probs,
        })
    }

    /// Marginal over the given components, output components in the order
    /// given. Indices must be distinct and the set nonempty.
    pub fn marginal(&self, components: &[usize]) -> Result<JointDist> {
        if components.is_empty() {
            return Err(Error::contract("marginal over the empty index set"));
        }
        let mut seen = vec![false; self.component_widths.len()];
        for &c in components {
            if c >= self.component_widths.len() {
                return Err(Error::contract(format!(
                    "component {c} out of range (have {})",
                    self.component_widths.len()
                )));
            }
            if seen[c] {
                return Err(Error::contract(format!("component {c} repeated")));
            }
            seen[c] = true;
        }
        let out_widths: Vec<u32> = components.iter().map(|&c| self.component_widths[c]).collect();
        let out_total: u32 = out_widths.iter().sum();
        let mut probs = vec![BigRational::zero(); 1usize << out_total];
        for (x, p) in self.probs.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let values = unpack(x as u64, &self.component_widths);
            let picked: Vec<u64> = components.iter().map(|&c| values[c]).collect();
            probs[pack(&picked, &out_widths) as usize] += p;
        }
        Ok(JointDist {
            component_widths: out_widths,
            probs,
        })
    }

    /// Single-component marginal as a flat distribution.
    pub fn marginal_single(&self, component: usize) -> Result<Dist> {
        Ok(self.marginal(&[component])?.flatten())
    }

    /// Conditions on `component = value`. Returns the joint over the
    /// remaining components (in their original order; zero components give
    /// the unit distribution) and the probability of the event.
    pub fn condition(&self, component: usize, value: u64) -> Result<(JointDist, BigRational)> {
        if component >= self.component_widths.len() {
            return Err(Error::contract(format!(
                "component {component} out of range (have {})",
                self.component_widths.len()
            )));
        }
        check_fits(value, self.component_widths[component])?;
        let rest_widths: Vec<u32> = self
            .component_widths
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != component)
            .map(|(_, &w)| w)
            .collect();
        let rest_total: u32 = rest_widths.iter().sum();
        let mut rest = vec![BigRational::zero(); 1usize << rest_total];
        let mut event = BigRational::zero();
        for (x, p) in self.probs.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let values = unpack(x as u64, &self.component_widths);
            if values[component] != value {
                continue;
            }
            let kept: Vec<u64> = values
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != component)
                .map(|(_, &v)| v)
                .collect();
            rest[pack(&kept, &rest_widths) as usize] += p;
            event += p;
        }
        if event.is_zero() {
            return Err(Error::domain(format!(
                "conditioning on zero-probability value {value:#x} of component {component}"
            )));
        }
        for r in &mut rest {
            *r /= &event;
        }
        Ok((
            JointDist {
                component_widths: rest_widths,
                probs: rest,
            },
            event,
        ))
    }

    /// True if the joint equals the product of its single-component
    /// marginals.
    pub fn is_product(&self) -> Result<bool> {
        let marginals: Vec<Dist> = (0..self.n_components())
            .map(|c| self.marginal_single(c))
            .collect::<Result<_>>()?;
        let product = JointDist::product(&marginals)?;
        Ok(product.probs == self.probs)
    }

    /// Chain rule for conditional min-entropy on a two-component joint
    /// (X, Y): except for y-mass at most eps,
    /// H_inf(X | Y=y) >= H_inf(X) - log|Y| - log(1/eps),
    /// with |Y| the alphabet size 2^y_bits. Done without logs: y fails iff
    /// eps * max_x Pr[X=x, Y=y] > max_x Pr[X=x] * 2^y_bits * Pr[Y=y].
    pub fn verify_chain_rule(&self, eps: &BigRational) -> Result<ChainRuleReport> {
        if self.n_components() != 2 {
            return Err(Error::contract(format!(
                "chain rule needs a two-component joint, got {}",
                self.n_components()
            )));
        }
        if !eps.is_positive() || eps > &BigRational::one() {
            return Err(Error::domain(format!(
                "eps must lie in (0, 1], got {eps}"
            )));
        }
        let (x_bits, y_bits) = (self.component_widths[0], self.component_widths[1]);
        let y_size = 1u64 << y_bits;
        let max_x = self.marginal_single(0)?.min_entropy().max_prob;
        let scale = &max_x * pow2(y_bits as i64);

        let mut failure_mass = BigRational::zero();
        for y in 0..y_size {
            let mut row_max = BigRational::zero();
            let mut row_mass = BigRational::zero();
            for x in 0..(1u64 << x_bits) {
                let p = &self.probs[pack(&[x, y], &self.component_widths) as usize];
                row_mass += p;
                if p > &row_max {
                    row_max = p.clone();
                }
            }
            if row_mass.is_zero() {
                continue;
            }
            if eps * &row_max > &scale * &row_mass {
                failure_mass += row_mass;
            }
        }
        Ok(ChainRuleReport {
            holds: failure_mass <= *eps,
            failure_mass,
        })
    }
}

/// A total function `{0,1}^in_bits -> {0,1}^out_bits` as a dense table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FnTableRepr", into = "FnTableRepr")]
pub struct FnTable {
    in_bits: u32,
    out_bits: u32,
    entries: Vec<u64>,
}

#[derive(Clone, Serialize, Deserialize)]
struct FnTableRepr {
    in_bits: u32,
    out_bits: u32,
    entries: Vec<u64>,
}

impl From<FnTable> for FnTableRepr {
    fn from(t: FnTable) -> FnTableRepr {
        FnTableRepr {
            in_bits: t.in_bits,
            out_bits: t.out_bits,
            entries: t.entries,
        }
    }
}

impl TryFrom<FnTableRepr> for FnTable {
    type Error = Error;

    fn try_from(r: FnTableRepr) -> Result<FnTable> {
        FnTable::new(r.in_bits, r.out_bits, r.entries)
    }
}

impl FnTable {
    pub fn new(in_bits: u32, out_bits: u32, entries: Vec<u64>) -> Result<FnTable> {
        check_domain_bits(in_bits)?;
        if entries.len() != 1usize << in_bits {
            return Err(Error::contract(format!(
                "table has {} entries, domain has {}",
                entries.len(),
                1usize << in_bits
            )));
        }
        for &e in &entries {
            check_fits(e, out_bits)?;
        }
        Ok(FnTable {
            in_bits,
            out_bits,
            entries,
        })
    }

    pub fn from_fn(in_bits: u32, out_bits: u32, f: impl Fn(u64) -> u64) -> Result<FnTable> {
        check_domain_bits(in_bits)?;
        let entries: Vec<u64> = (0..(1u64 << in_bits)).map(f).collect();
        FnTable::new(in_bits, out_bits, entries)
    }

    pub fn identity(bits: u32) -> FnTable {
        FnTable::from_fn(bits, bits, |x| x).expect("identity")
    }

    pub fn constant(in_bits: u32, out_bits: u32, value: u64) -> Result<FnTable> {
        check_fits(value, out_bits)?;
        FnTable::from_fn(in_bits, out_bits, |_| value)
    }

    pub fn in_bits(&self) -> u32 {
        self.in_bits
    }

    pub fn out_bits(&self) -> u32 {
        self.out_bits
    }

    #[inline]
    pub fn eval(&self, x: u64) -> u64 {
        self.entries[x as usize]
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    /// The single output bit `bit` as its own table.
    pub fn bit(&self, bit: u32) -> Result<FnTable> {
        if bit >= self.out_bits {
            return Err(Error::contract(format!(
                "bit {bit} of a {}-bit output",
                self.out_bits
            )));
        }
        FnTable::from_fn(self.in_bits, 1, |x| (self.entries[x as usize] >> bit) & 1)
    }
}

/// Factored form of the dependency-reversal construction: an independent
/// record A = (A_y)_y of per-fiber conditionals plus the selector
/// g(y, a) = a_y. The joint law of (f(X), A_{f(X)}) reproduces X without
/// the record ever being materialized as a single distribution over
/// |X|^|Y| tuples.
#[derive(Debug, Clone, PartialEq)]
pub struct DependencyReversal {
    pub y_bits: u32,
    /// Pr[f(X) = y], indexed by y.
    pub fiber_weights: Vec<BigRational>,
    /// Law of A_y, i.e. X conditioned on f(X) = y; uniform on the whole
    /// domain for weight-zero fibers.
    pub conditionals: Vec<Dist>,
}

impl DependencyReversal {
    /// Law of g(f(X), A) = A_{f(X)}: total probability over the fibers.
    /// Equal to the original distribution by construction; the equality is
    /// the correctness check.
    pub fn reconstruct(&self) -> Dist {
        let domain_bits = self.conditionals[0].domain_bits;
        let mut probs = vec![BigRational::zero(); 1usize << domain_bits];
        for (w, cond) in self.fiber_weights.iter().zip(&self.conditionals) {
            if w.is_zero() {
                continue;
            }
            for (x, p) in cond.probs.iter().enumerate() {
                if !p.is_zero() {
                    probs[x] += w * p;
                }
            }
        }
        Dist {
            domain_bits,
            probs,
        }
    }

    /// The selector g itself: picks coordinate y out of a record of
    /// per-fiber draws.
    pub fn select(&self, y: u64, record: &[u64]) -> u64 {
        record[y as usize]
    }
}

/// Rewrites X as a function of f(X) and a record independent of f(X):
/// A_y ~ (X | f(X) = y), g(y, a) = a_y.
pub fn dependency_reversal(p: &Dist, f: &FnTable) -> Result<DependencyReversal> {
    if f.in_bits != p.domain_bits {
        return Err(Error::WidthMismatch {
            left: f.in_bits,
            right: p.domain_bits,
        });
    }
    let y_size = 1usize << f.out_bits;
    let mut fiber_weights = vec![BigRational::zero(); y_size];
    let mut fibers: Vec<Vec<BigRational>> =
        vec![vec![BigRational::zero(); p.probs.len()]; y_size];
    for (x, prob) in p.probs.iter().enumerate() {
        if prob.is_zero() {
            continue;
        }
        let y = f.entries[x] as usize;
        fiber_weights[y] += prob;
        fibers[y][x] += prob;
    }
    let conditionals: Vec<Dist> = fibers
        .into_iter()
        .zip(&fiber_weights)
        .map(|(mut fiber, w)| {
            if w.is_zero() {
                Dist::uniform(p.domain_bits)
            } else {
                for q in &mut fiber {
                    *q /= w;
                }
                Dist {
                    domain_bits: p.domain_bits,
                    probs: fiber,
                }
            }
        })
        .collect();
    Ok(DependencyReversal {
        y_bits: f.out_bits,
        fiber_weights,
        conditionals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::{q, qint};
    use crate::rng::SplitMix64;

    fn random_dist(rng: &mut SplitMix64, bits: u32) -> Dist {
        let size = 1usize << bits;
        loop {
            let weights: Vec<u64> = (0..size)
                .map(|_| if rng.next_below(4) == 0 { 0 } else { 1 + rng.next_below(64) })
                .collect();
            let total: u64 = weights.iter().sum();
            if total == 0 {
                continue;
            }
            let probs = weights
                .iter()
                .map(|&w| BigRational::new(w.into(), total.into()))
                .collect();
            return Dist::new(bits, probs).unwrap();
        }
    }

    #[test]
    fn constructor_validates() {
        assert!(Dist::new(1, vec![q(1, 2), q(1, 2)]).is_ok());
        assert!(Dist::new(1, vec![q(1, 2), q(1, 3)]).is_err());
        assert!(Dist::new(1, vec![q(3, 2), q(-1, 2)]).is_err());
        assert!(Dist::new(2, vec![q(1, 2), q(1, 2)]).is_err());
    }

    #[test]
    fn flat_source_examples() {
        let spec = FlatSourceSpec::new(2, vec![3, 0]).unwrap();
        assert_eq!(spec.support, vec![0, 3]);
        let d = Dist::from_flat(&spec);
        assert_eq!(*d.prob(0), q(1, 2));
        assert_eq!(*d.prob(1), qint(0));
        assert_eq!(d.min_entropy().max_prob, q(1, 2));
        assert_eq!(d.min_entropy().bits, 1.0);
        assert!(FlatSourceSpec::new(2, vec![1, 1]).is_err());
        assert!(FlatSourceSpec::new(2, vec![4]).is_err());
        assert!(FlatSourceSpec::new(2, vec![]).is_err());
    }

    #[test]
    fn flat_support_enumeration() {
        assert_eq!(flat_supports(2, 1).unwrap().len(), 6);
        assert_eq!(flat_supports(4, 2).unwrap().len(), 1820);
        assert_eq!(flat_supports(2, 2).unwrap().len(), 1);
        assert_eq!(flat_supports(2, 0).unwrap().len(), 4);
        assert!(flat_supports(2, 3).is_err());
        assert_eq!(binomial(16, 8), Some(12870));
        assert_eq!(binomial(4, 5), Some(0));
        // Serde re-validates: duplicated support values are rejected.
        let good: FlatSourceSpec = serde_json::from_str(r#"{"n":2,"support":[3,0]}"#).unwrap();
        assert_eq!(good.support, vec![0, 3]);
        assert!(serde_json::from_str::<FlatSourceSpec>(r#"{"n":2,"support":[1,1]}"#).is_err());
    }

    #[test]
    fn uniform_vs_half_support_distance() {
        let u = Dist::uniform(2);
        let half = Dist::from_flat(&FlatSourceSpec::new(2, vec![0, 1]).unwrap());
        assert_eq!(u.statistical_distance(&half).unwrap(), q(1, 2));
        assert_eq!(half.statistical_distance(&u).unwrap(), q(1, 2));
        assert_eq!(u.statistical_distance(&u).unwrap(), qint(0));
    }

    #[test]
    fn distance_needs_matching_domains() {
        let a = Dist::uniform(2);
        let b = Dist::uniform(3);
        assert!(a.statistical_distance(&b).is_err());
    }

    #[test]
    fn closeness_worked_example() {
        // p = (1/2, 1/2, 0, 0) on 2 bits, k = 2: excess over 1/4 is 1/2.
        let p = Dist::new(2, vec![q(1, 2), q(1, 2), qint(0), qint(0)]).unwrap();
        assert_eq!(p.closeness_to_min_entropy(2).unwrap(), q(1, 2));
        assert_eq!(p.closeness_via_best_set(2).unwrap(), q(1, 2));
        assert_eq!(p.closeness_to_min_entropy(1).unwrap(), qint(0));
        assert_eq!(p.closeness_to_min_entropy(0).unwrap(), qint(0));
        assert!(p.closeness_to_min_entropy(3).is_err());
    }

    #[test]
    fn product_and_marginals_roundtrip() {
        let mut rng = SplitMix64::new(5);
        let a = random_dist(&mut rng, 2);
        let b = random_dist(&mut rng, 3);
        let j = JointDist::product(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(j.marginal_single(0).unwrap(), a);
        assert_eq!(j.marginal_single(1).unwrap(), b);
        assert!(j.is_product().unwrap());
        assert_eq!(j.marginal(&[0, 1]).unwrap(), j);
        assert!(j.marginal(&[]).is_err());
        assert!(j.marginal(&[0, 0]).is_err());
        assert!(j.marginal(&[2]).is_err());
    }

    #[test]
    fn diagonal_marginal_and_condition() {
        // (X, X xor 1) for X uniform on one bit.
        let probs = vec![qint(0), q(1, 2), q(1, 2), qint(0)];
        let j = JointDist::new(vec![1, 1], probs).unwrap();
        assert_eq!(j.marginal_single(0).unwrap(), Dist::uniform(1));
        assert_eq!(j.marginal_single(1).unwrap(), Dist::uniform(1));
        assert!(!j.is_product().unwrap());

        let (rest, w) = j.condition(0, 0).unwrap();
        assert_eq!(w, q(1, 2));
        assert_eq!(rest.flatten(), Dist::point(1, 1).unwrap());

        // Conditioning away the single remaining component gives the unit.
        let (unit, w2) = rest.condition(0, 1).unwrap();
        assert_eq!(w2, qint(1));
        assert_eq!(unit.n_components(), 0);
        assert_eq!(unit.probs(), &[qint(1)]);

        assert!(j.condition(0, 2).is_err());
        let pt = JointDist::new(vec![1, 1], vec![qint(1), qint(0), qint(0), qint(0)]).unwrap();
        assert!(pt.condition(0, 1).is_err());
    }

    #[test]
    fn pushforward_examples() {
        let u = Dist::uniform(2);
        let first_bit = FnTable::from_fn(2, 1, |x| x >> 1).unwrap();
        assert_eq!(u.pushforward(&first_bit).unwrap(), Dist::uniform(1));

        // Bijective concat pushforward preserves uniformity: (msb, msb xor lsb).
        let f0 = FnTable::from_fn(2, 1, |x| x >> 1).unwrap();
        let f1 = FnTable::from_fn(2, 1, |x| (x >> 1) ^ (x & 1)).unwrap();
        let j = u.to_joint().concat_pushforward(&[f0, f1]).unwrap();
        assert_eq!(j.flatten(), Dist::uniform(2));
        assert!(u.to_joint().concat_pushforward(&[]).is_err());
    }

    #[test]
    fn chain_rule_examples() {
        // X = Y, both uniform bits.
        let eq = JointDist::new(vec![1, 1], vec![q(1, 2), qint(0), qint(0), q(1, 2)]).unwrap();
        let r = eq.verify_chain_rule(&q(1, 2)).unwrap();
        assert!(r.holds);
        assert_eq!(r.failure_mass, qint(0));

        // eps = 1 holds for any joint.
        let mut rng = SplitMix64::new(9);
        for _ in 0..20 {
            let a = random_dist(&mut rng, 2);
            let b = random_dist(&mut rng, 2);
            let j = JointDist::product(&[a, b]).unwrap();
            let r = j.verify_chain_rule(&qint(1)).unwrap();
            assert!(r.holds);
            // Independent X, Y: no failures at any eps.
            let r = j.verify_chain_rule(&q(1, 64)).unwrap();
            assert_eq!(r.failure_mass, qint(0));
        }

        assert!(eq.verify_chain_rule(&qint(0)).is_err());
        assert!(eq.verify_chain_rule(&qint(2)).is_err());
        let single = Dist::uniform(1).to_joint();
        assert!(single.verify_chain_rule(&q(1, 2)).is_err());
    }

    #[test]
    fn dependency_reversal_reconstructs() {
        let mut rng = SplitMix64::new(11);
        for _ in 0..25 {
            let p = random_dist(&mut rng, 3);
            let f = FnTable::from_fn(3, 2, |x| {
                // A lossy map with collisions and a guaranteed empty fiber.
                if x < 6 { x % 3 } else { 0 }
            })
            .unwrap();
            let rev = dependency_reversal(&p, &f).unwrap();
            assert_eq!(rev.reconstruct(), p);
            // Fiber 3 is empty: placeholder is uniform, weight zero.
            assert_eq!(rev.fiber_weights[3], qint(0));
            assert_eq!(rev.conditionals[3], Dist::uniform(3));
            assert_eq!(rev.select(2, &[9, 8, 7, 6]), 7);
        }
    }

    #[test]
    fn fn_table_validation() {
        assert!(FnTable::new(1, 1, vec![0, 1]).is_ok());
        assert!(FnTable::new(1, 1, vec![0, 2]).is_err());
        assert!(FnTable::new(1, 1, vec![0]).is_err());
        let f = FnTable::from_fn(2, 2, |x| x ^ 3).unwrap();
        assert_eq!(f.bit(0).unwrap().eval(2), 1);
        assert!(f.bit(2).is_err());
    }

    #[test]
    fn serde_roundtrip_with_rational_strings() {
        let d = Dist::new(1, vec![q(1, 3), q(2, 3)]).unwrap();
        let s = serde_json::to_string(&d).unwrap();
        assert!(s.contains("\"1/3\""));
        let back: Dist = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);

        let j = JointDist::product(&[Dist::uniform(1), Dist::uniform(2)]).unwrap();
        let s = serde_json::to_string(&j).unwrap();
        let back: JointDist = serde_json::from_str(&s).unwrap();
        assert_eq!(back, j);
    }

    proptest::proptest! {
        #[test]
        fn sd_is_a_metric_sample(seed in 0u64..500) {
            let mut rng = SplitMix64::new(seed);
            let bits = 1 + (seed % 4) as u32;
            let p = random_dist(&mut rng, bits);
            let q_ = random_dist(&mut rng, bits);
            let r = random_dist(&mut rng, bits);
            let pq = p.statistical_distance(&q_).unwrap();
            let qp = q_.statistical_distance(&p).unwrap();
            proptest::prop_assert_eq!(&pq, &qp);
            proptest::prop_assert!(pq >= qint(0) && pq <= qint(1));
            let pr = p.statistical_distance(&r).unwrap();
            let rq = r.statistical_distance(&q_).unwrap();
            proptest::prop_assert!(pq <= pr + rq);
        }

        #[test]
        fn data_processing_never_increases_distance(seed in 0u64..500) {
            let mut rng = SplitMix64::new(seed ^ 0xdead);
            let bits = 1 + (seed % 4) as u32;
            let p = random_dist(&mut rng, bits);
            let q_ = random_dist(&mut rng, bits);
            let out_bits = 1 + (seed % 3) as u32;
            let entries: Vec<u64> = (0..(1u64 << bits)).map(|_| rng.next_below(1 << out_bits)).collect();
            let f = FnTable::new(bits, out_bits, entries).unwrap();
            let before = p.statistical_distance(&q_).unwrap();
            let after = p
                .pushforward(&f)
                .unwrap()
                .statistical_distance(&q_.pushforward(&f).unwrap())
                .unwrap();
            proptest::prop_assert!(after <= before);
        }
    }
}
