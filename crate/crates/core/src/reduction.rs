//! Density-level reductions on multisets of moduli.
//!
//! Residues are forgotten here; only the moduli and their reciprocal sums
//! matter. A mod-`p` split sends the moduli prime to `p` into every one of the
//! `p` sub-coverings and each multiple of `p` (divided by `p`) into exactly
//! one, so the question becomes a bin-covering problem on `M1` that is
//! decided exactly.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lcm_profile::FactoredInteger;
use crate::numeric::{reciprocal_sum, Rational};

/// Largest `M1` handed to [`max_threshold_groups`].
pub const GROUPING_GUARD: usize = 32;
/// Largest `M1` handed to [`enumerate_feasible_assignments`].
pub const ENUMERATION_GUARD: usize = 16;
const ASSIGNMENT_OUTPUT_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct ModuliMultiset {
    entries: BTreeMap<u64, u32>,
}

impl TryFrom<Vec<u64>> for ModuliMultiset {
    type Error = Error;

    fn try_from(v: Vec<u64>) -> Result<Self> {
        ModuliMultiset::from_elements(v)
    }
}

impl From<ModuliMultiset> for Vec<u64> {
    fn from(m: ModuliMultiset) -> Self {
        m.elements()
    }
}

impl ModuliMultiset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_elements<I: IntoIterator<Item = u64>>(it: I) -> Result<Self> {
        let mut m = Self::new();
        for n in it {
            m.insert(n)?;
        }
        Ok(m)
    }

    pub fn insert(&mut self, n: u64) -> Result<()> {
        self.insert_many(n, 1)
    }

    pub fn insert_many(&mut self, n: u64, count: u32) -> Result<()> {
        if n == 0 {
            return Err(invalid!("moduli must be positive"));
        }
        if count > 0 {
            *self.entries.entry(n).or_insert(0) += count;
        }
        Ok(())
    }

    /// Remove one copy of `n`; false if absent.
    pub fn remove_one(&mut self, n: u64) -> bool {
        match self.entries.get_mut(&n) {
            Some(c) if *c > 1 => {
                *c -= 1;
                true
            }
            Some(_) => {
                self.entries.remove(&n);
                true
            }
            None => false,
        }
    }

    pub fn count(&self, n: u64) -> u32 {
        self.entries.get(&n).copied().unwrap_or(0)
    }

    /// Size counted with multiplicity.
    pub fn len(&self) -> usize {
        self.entries.values().map(|&c| c as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `(value, multiplicity)` pairs in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u32)> + '_ {
        self.entries.iter().map(|(&n, &c)| (n, c))
    }

    /// Ascending, with repeats.
    pub fn elements(&self) -> Vec<u64> {
        self.iter().flat_map(|(n, c)| core::iter::repeat_n(n, c as usize)).collect()
    }

    pub fn reciprocal_sum(&self) -> Result<Rational> {
        reciprocal_sum(self.elements())
    }

    pub fn lcm(&self) -> Result<FactoredInteger> {
        self.entries.keys().try_fold(FactoredInteger::one(), |acc, &n| Ok(acc.lcm(&FactoredInteger::from_u64(n)?)))
    }

    pub fn union(&self, other: &ModuliMultiset) -> ModuliMultiset {
        let mut out = self.clone();
        for (n, c) in other.iter() {
            *out.entries.entry(n).or_insert(0) += c;
        }
        out
    }

    /// Elements divisible by `q`, with repeats.
    pub fn multiples_of(&self, q: u64) -> Vec<u64> {
        self.elements().into_iter().filter(|n| n % q == 0).collect()
    }
}

/// Outcome of one multiset replacement step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Replacement {
    pub removed: Vec<u64>,
    pub inserted: u64,
    pub result: ModuliMultiset,
}

/// Replace the `p` elements divisible by `p^a` with `p^(a-1) lcm(x_i / p^a)`.
///
/// The lcm of the multiset itself must have `p`-valuation exactly `a`.
pub fn lemma3_multiset(s: &ModuliMultiset, p: u64, a: u32) -> Result<Replacement> {
    if a == 0 {
        return Err(invalid!("exponent must be positive"));
    }
    let v = s.lcm()?.valuation(p);
    if v != a {
        return Err(Error::LemmaPrecondition(alloc::format!("lcm has {p}-valuation {v}, expected exactly {a}")));
    }
    let pa = p.checked_pow(a).ok_or_else(|| Error::Overflow(alloc::format!("{p}^{a}")))?;
    let removed = s.multiples_of(pa);
    if removed.len() as u64 != p {
        return Err(Error::LemmaPrecondition(alloc::format!(
            "{} elements divisible by {p}^{a}; need exactly {p}",
            removed.len()
        )));
    }
    let inserted = crate::covering::replacement_modulus(p, a, &removed)?;
    let mut result = s.clone();
    for &n in &removed {
        result.remove_one(n);
    }
    result.insert(inserted)?;
    Ok(Replacement { removed, inserted, result })
}

/// `S = M0 ⊎ p·M1` with `S0 = Σ_{M0} 1/d` and `deficit = 1 - S0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModSplit {
    pub p: u64,
    pub m0: ModuliMultiset,
    pub m1: ModuliMultiset,
    pub s0: Rational,
    pub deficit: Rational,
}

pub fn mod_p_split(s: &ModuliMultiset, p: u64) -> Result<ModSplit> {
    if p < 2 {
        return Err(invalid!("split prime must be at least 2"));
    }
    let mut m0 = ModuliMultiset::new();
    let mut m1 = ModuliMultiset::new();
    for (n, c) in s.iter() {
        if n % p == 0 {
            m1.insert_many(n / p, c)?;
        } else {
            m0.insert_many(n, c)?;
        }
    }
    let s0 = m0.reciprocal_sum()?;
    let deficit = Rational::one() - &s0;
    Ok(ModSplit { p, m0, m1, s0, deficit })
}

/// Reciprocals of a multiset scaled to integers over a common denominator.
struct Scaled {
    values: Vec<u64>,
    weights: Vec<u128>,
    threshold: u128,
}

impl Scaled {
    /// Values sorted ascending, so weights descend.
    fn new(m1: &ModuliMultiset, t: &Rational) -> Result<Self> {
        let values = m1.elements();
        let num = t.numer().to_biguint().ok_or_else(|| invalid!("threshold must be positive"))?;
        let den = t.denom().to_biguint().expect("denominators are positive");
        let d = values.iter().fold(den.clone(), |acc, &v| acc.lcm(&BigUint::from(v)));
        let overflow = || Error::Overflow("bin-covering common denominator".into());
        let threshold = (num * (&d / &den)).to_u128().ok_or_else(overflow)?;
        let weights = values.iter().map(|&v| (&d / v).to_u128().ok_or_else(overflow)).collect::<Result<Vec<_>>>()?;
        // Room for summing every weight.
        weights.iter().try_fold(0u128, |acc, &w| acc.checked_add(w)).ok_or_else(overflow)?;
        Ok(Scaled { values, weights, threshold })
    }

    fn mask_sum(&self, mask: u64) -> u128 {
        bits(mask).map(|i| self.weights[i]).sum()
    }

    fn group(&self, mask: u64) -> Vec<u64> {
        bits(mask).map(|i| self.values[i]).collect()
    }
}

fn bits(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| mask >> i & 1 == 1)
}

/// The maximum number of disjoint groups, each with reciprocal sum at least the threshold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grouping {
    pub count: usize,
    pub groups: Vec<Vec<u64>>,
}

struct GroupSearch<'a> {
    s: &'a Scaled,
    // mask -> (best count, group taken with the lowest element, 0 for discard)
    memo: BTreeMap<u64, (usize, u64)>,
}

impl GroupSearch<'_> {
    fn best(&mut self, mask: u64) -> usize {
        if mask == 0 {
            return 0;
        }
        if let Some(&(c, _)) = self.memo.get(&mask) {
            return c;
        }
        let bound = (self.s.mask_sum(mask) / self.s.threshold) as usize;
        let first = mask.trailing_zeros() as usize;
        let lead = 1u64 << first;
        let rest = mask & !lead;
        let result = if bound == 0 {
            (0, 0)
        } else if self.s.weights[first] >= self.s.threshold {
            (1 + self.best(rest), lead)
        } else {
            let mut best = (self.best(rest), 0);
            let mut groups = Vec::new();
            self.closing_groups(rest, lead, self.s.weights[first], &mut groups);
            for g in groups {
                if best.0 == bound {
                    break;
                }
                let c = 1 + self.best(mask & !g);
                if c > best.0 {
                    best = (c, g);
                }
            }
            best
        };
        self.memo.insert(mask, result);
        result.0
    }

    /// Groups extending `group` by elements of `pool` in index order, closed as soon as they reach the threshold.
    fn closing_groups(&self, pool: u64, group: u64, sum: u128, out: &mut Vec<u64>) {
        let mut previous: Option<u128> = None;
        for i in bits(pool) {
            let w = self.s.weights[i];
            // Equal weights are interchangeable; try only the first at each depth.
            if previous == Some(w) {
                continue;
            }
            previous = Some(w);
            let g = group | 1 << i;
            if sum + w >= self.s.threshold {
                out.push(g);
            } else {
                let later = pool & !((2u64 << i) - 1);
                self.closing_groups(later, g, sum + w, out);
            }
        }
    }

    fn witness(&self, mut mask: u64) -> Vec<Vec<u64>> {
        let mut groups = Vec::new();
        while mask != 0 {
            let (_, g) = self.memo.get(&mask).copied().unwrap_or((0, 0));
            if g == 0 {
                mask &= mask - 1;
            } else {
                groups.push(self.s.group(g));
                mask &= !g;
            }
        }
        groups
    }
}

pub fn max_threshold_groups(m1: &ModuliMultiset, t: &Rational) -> Result<Grouping> {
    if !t.is_positive() {
        return Err(invalid!("threshold must be positive"));
    }
    if m1.len() > GROUPING_GUARD {
        return Err(Error::SearchGuard { size: m1.len(), limit: GROUPING_GUARD });
    }
    let scaled = Scaled::new(m1, t)?;
    let full = if scaled.values.is_empty() { 0 } else { u64::MAX >> (64 - scaled.values.len()) };
    let mut search = GroupSearch { s: &scaled, memo: BTreeMap::new() };
    let count = search.best(full);
    let groups = search.witness(full);
    debug_assert_eq!(groups.len(), count);
    Ok(Grouping { count, groups })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum BinVerdict {
    /// Fewer than `p` groups can reach the deficit.
    Infeasible {
        max_groups: usize,
    },
    Feasible {
        witness: Vec<Vec<u64>>,
    },
    /// `S0 >= 1`: the split proves nothing.
    Inconclusive,
}

pub fn bins_coverable(split: &ModSplit) -> Result<BinVerdict> {
    if !split.deficit.is_positive() {
        return Ok(BinVerdict::Inconclusive);
    }
    let g = max_threshold_groups(&split.m1, &split.deficit)?;
    if (g.count as u64) < split.p {
        Ok(BinVerdict::Infeasible { max_groups: g.count })
    } else {
        Ok(BinVerdict::Feasible { witness: g.groups.into_iter().take(split.p as usize).collect() })
    }
}

/// `p` disjoint bins drawn from `M1`; elements may stay unassigned.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub bins: Vec<Vec<u64>>,
    /// Bins whose reciprocal sum equals the deficit exactly.
    pub tight: Vec<usize>,
}

impl Assignment {
    pub fn tight_bins(&self) -> impl Iterator<Item = &Vec<u64>> {
        self.tight.iter().map(|&i| &self.bins[i])
    }
}

struct Enumerator<'a> {
    s: &'a Scaled,
    p: usize,
    suffix: Vec<u128>,
    bins: Vec<Vec<usize>>,
    sums: Vec<u128>,
    out: Vec<Vec<Vec<usize>>>,
}

impl Enumerator<'_> {
    fn run(&mut self, i: usize) -> Result<()> {
        let n = self.s.weights.len();
        let open = self.bins.len();
        let missing: u128 = self.sums.iter().map(|&x| self.s.threshold.saturating_sub(x)).sum::<u128>()
            + (self.p - open) as u128 * self.s.threshold;
        if missing > self.suffix[i] || (self.p - open) > n - i {
            return Ok(());
        }
        if i == n {
            if self.out.len() >= ASSIGNMENT_OUTPUT_LIMIT {
                return Err(Error::SearchGuard { size: self.out.len(), limit: ASSIGNMENT_OUTPUT_LIMIT });
            }
            self.out.push(self.bins.clone());
            return Ok(());
        }
        let w = self.s.weights[i];
        self.run(i + 1)?;
        for b in 0..open {
            self.bins[b].push(i);
            self.sums[b] += w;
            self.run(i + 1)?;
            self.sums[b] -= w;
            self.bins[b].pop();
        }
        if open < self.p {
            self.bins.push(vec![i]);
            self.sums.push(w);
            self.run(i + 1)?;
            self.sums.pop();
            self.bins.pop();
        }
        Ok(())
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for perm in permutations(n - 1) {
        for pos in 0..=perm.len() {
            let mut next = perm.clone();
            next.insert(pos, n - 1);
            out.push(next);
        }
    }
    out
}

/// Every way to fill `p` bins from `M1` so that each reaches the deficit.
///
/// Identical moduli are treated as distinguishable copies. With `canonical`
/// each set of bins appears once; otherwise every ordering of the bins is listed.
pub fn enumerate_feasible_assignments(split: &ModSplit, canonical: bool) -> Result<Vec<Assignment>> {
    if split.m1.len() > ENUMERATION_GUARD {
        return Err(Error::SearchGuard { size: split.m1.len(), limit: ENUMERATION_GUARD });
    }
    if !split.deficit.is_positive() {
        return Err(Error::LemmaPrecondition("deficit is not positive".into()));
    }
    let scaled = Scaled::new(&split.m1, &split.deficit)?;
    let p = usize::try_from(split.p).map_err(|_| invalid!("prime too large"))?;
    if p > scaled.values.len() {
        return Ok(Vec::new());
    }
    let mut suffix = vec![0u128; scaled.weights.len() + 1];
    for i in (0..scaled.weights.len()).rev() {
        suffix[i] = suffix[i + 1] + scaled.weights[i];
    }
    let mut e = Enumerator { s: &scaled, p, suffix, bins: Vec::new(), sums: Vec::new(), out: Vec::new() };
    e.run(0)?;
    let orders = if canonical { vec![(0..p).collect()] } else { permutations(p) };
    if e.out.len().saturating_mul(orders.len()) > ASSIGNMENT_OUTPUT_LIMIT {
        return Err(Error::SearchGuard {
            size: e.out.len().saturating_mul(orders.len()),
            limit: ASSIGNMENT_OUTPUT_LIMIT,
        });
    }
    let mut result = Vec::with_capacity(e.out.len() * orders.len());
    for bins in &e.out {
        let sums: Vec<u128> = bins.iter().map(|b| b.iter().map(|&i| scaled.weights[i]).sum()).collect();
        for order in &orders {
            let ordered: Vec<usize> = order.clone();
            result.push(Assignment {
                bins: ordered.iter().map(|&b| bins[b].iter().map(|&i| scaled.values[i]).collect()).collect(),
                tight: ordered
                    .iter()
                    .enumerate()
                    .filter(|(_, &b)| sums[b] == scaled.threshold)
                    .map(|(j, _)| j)
                    .collect(),
            });
        }
    }
    Ok(result)
}

/// `M0 ⊎ bin` for a tight bin: a sub-covering whose reciprocal sum is exactly 1.
pub fn tight_bin_moduli(split: &ModSplit, assignment: &Assignment, bin: usize) -> Result<ModuliMultiset> {
    let chosen = assignment.bins.get(bin).ok_or_else(|| invalid!("no bin {bin}"))?;
    let out = split.m0.union(&ModuliMultiset::from_elements(chosen.iter().copied())?);
    if out.reciprocal_sum()? != Rational::one() {
        return Err(Error::LemmaPrecondition(alloc::format!("bin {bin} is not tight")));
    }
    Ok(out)
}

/// `Σ 1/d` over a group, as a check on witnesses.
pub fn group_sum(group: &[u64]) -> Result<Rational> {
    reciprocal_sum(group.iter().copied())
}

impl ModSplit {
    /// `Σ_S 1/n = S0 + (1/p) Σ_{M1} 1/d`.
    pub fn parent_sum(&self) -> Result<Rational> {
        let p = Rational::recip_of(self.p)?;
        Ok(&self.s0 + &(&p * &self.m1.reciprocal_sum()?))
    }

    /// The multiset this split came from.
    pub fn parent(&self) -> Result<ModuliMultiset> {
        let mut out = self.m0.clone();
        for (n, c) in self.m1.iter() {
            out.insert_many(n.checked_mul(self.p).ok_or_else(|| Error::Overflow("parent modulus".into()))?, c)?;
        }
        Ok(out)
    }
}
