//! Smooth reciprocal sums `T_m` and the downward anchor scan.
//!
//! `T_m = Σ 1/n` over `m <= n <= k*m` with `P(n)^2 < (k-1)m + 1`. A prime at or
//! above that bound has too few multiples in the interval to divide the lcm of
//! a minimal covering, so `T_m < 1` rules out a covering with moduli in `[m, k*m]`.
//!
//! The scan uses `T_{m-1} <= T_m + a_{m-1}`, where `a_j = 1/j` if `j` itself is
//! smooth for the shifted bound `P(j)^2 < (k-1)j + 1` and `0` otherwise. From an
//! anchor `A` the bound `T_A + Σ_{j=low}^{A-1} a_j` is extended downward while it
//! stays below one; the next anchor is `low - 1` and its `T` is recomputed.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::factor_sieve::FactorTable;
use crate::numeric::{reciprocal_sum, Rational, UpperFixed};

/// Largest minimum modulus any distinct covering can have (external bound).
pub const MIN_MODULUS_BOUND: u64 = 616_000;

/// Lower end of the anchor scan for `k = 10`.
pub const DEFAULT_SCAN_FLOOR: u64 = 117;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanConfig {
    /// Interval multiplier: moduli live in `[m, k*m]`.
    pub k: u64,
    pub min_m: u64,
    pub max_m: u64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig { k: 10, min_m: 3, max_m: MIN_MODULUS_BOUND }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(invalid!("k must be at least 2 (got {})", self.k));
        }
        if self.min_m < 3 || self.min_m > self.max_m {
            return Err(invalid!("need 3 <= min_m <= max_m (got {}..={})", self.min_m, self.max_m));
        }
        Ok(())
    }

    /// Sieve size needed to evaluate `T_m` for every `m <= max_m`.
    pub fn sieve_limit(&self) -> u64 {
        self.k * self.max_m
    }

    /// `(k-1)m + 1`, the strict bound on `P(n)^2`.
    pub fn smooth_bound(&self, m: u64) -> u64 {
        (self.k - 1) * m + 1
    }
}

fn check_range(table: &FactorTable, m: u64, k: u64) -> Result<()> {
    if m == 0 {
        return Err(invalid!("m must be positive"));
    }
    let top = k.checked_mul(m).ok_or_else(|| invalid!("k*m overflows"))?;
    if top > table.limit() {
        return Err(invalid!("k*m = {top} exceeds sieve limit {}", table.limit()));
    }
    Ok(())
}

/// `m <= n <= k*m` and `P(n)^2 < (k-1)m + 1`.
pub fn is_smooth_term(table: &FactorTable, n: u64, m: u64, k: u64) -> Result<bool> {
    let p = table.largest_prime_factor(n)?;
    Ok(n >= m && n <= k * m && p * p < (k - 1) * m + 1)
}

/// Terms counted by `T_m`, ascending.
pub fn smooth_terms(table: &FactorTable, m: u64, k: u64) -> Result<impl Iterator<Item = u64> + '_> {
    check_range(table, m, k)?;
    let bound = (k - 1) * m + 1;
    Ok((m..=k * m).filter(move |&n| {
        let p = table.lpf_raw(n);
        p * p < bound
    }))
}

pub fn t_exact(table: &FactorTable, m: u64, k: u64) -> Result<Rational> {
    reciprocal_sum(smooth_terms(table, m, k)?)
}

pub fn t_upper(table: &FactorTable, m: u64, k: u64) -> Result<UpperFixed> {
    let mut acc = UpperFixed::new();
    for n in smooth_terms(table, m, k)? {
        acc.push_unchecked(n);
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumMode {
    Exact,
    Upper,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TValue {
    Exact(Rational),
    Upper(UpperFixed),
}

pub fn t_value(table: &FactorTable, m: u64, cfg: &ScanConfig, mode: SumMode) -> Result<TValue> {
    Ok(match mode {
        SumMode::Exact => TValue::Exact(t_exact(table, m, cfg.k)?),
        SumMode::Upper => TValue::Upper(t_upper(table, m, cfg.k)?),
    })
}

/// Does `a_j` contribute, i.e. `P(j)^2 < (k-1)j + 1`?
#[inline]
fn a_qualifies(table: &FactorTable, j: u64, k: u64) -> bool {
    let p = table.lpf_raw(j);
    p * p < (k - 1) * j + 1
}

/// `a_j`: `1/j` when `P(j)^2 < (k-1)j + 1`, else `0`.
pub fn a_term(table: &FactorTable, j: u64, k: u64) -> Result<Rational> {
    let p = table.largest_prime_factor(j)?;
    if p * p < (k - 1) * j + 1 {
        Rational::recip_of(j)
    } else {
        Ok(Rational::zero())
    }
}

/// Exact `T_anchor + Σ_{j=low}^{anchor-1} a_j`.
pub fn exact_cumulative_bound(table: &FactorTable, k: u64, anchor: u64, low: u64) -> Result<Rational> {
    if low == 0 || low > anchor {
        return Err(invalid!("need 1 <= low <= anchor (got {low}, {anchor})"));
    }
    check_range(table, anchor, k)?;
    let a_terms = (low..anchor).filter(|&j| a_qualifies(table, j, k));
    reciprocal_sum(smooth_terms(table, anchor, k)?.chain(a_terms))
}

/// A certified bound recorded for one anchor interval.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CertifiedBound {
    /// Fixed-point upper bound: `t_anchor + a_sum`, both rounded up.
    Upper { t_anchor: UpperFixed, a_sum: UpperFixed, total: UpperFixed },
    /// Fallback when rounding slack straddled one.
    Exact { total: crate::numeric::RationalRecord },
}

impl CertifiedBound {
    pub fn as_rational(&self) -> Result<Rational> {
        match self {
            CertifiedBound::Upper { total, .. } => Ok(total.to_rational()),
            CertifiedBound::Exact { total } => total.parse(),
        }
    }
}

/// One interval `[low_m, anchor_m]` on which `T_m < 1` is certified.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Anchor {
    pub anchor_m: u64,
    pub low_m: u64,
    pub bound: CertifiedBound,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnchorChain {
    /// Descending: the first anchor is `max_m`.
    pub anchors: Vec<Anchor>,
    pub k: u64,
    /// Anchors at which the exact cumulative sum hit exactly one; recorded, never silently resolved.
    pub exact_ties: Vec<u64>,
    /// Set when the scan stopped because `T_anchor >= 1`.
    pub halted_at: Option<u64>,
}

impl AnchorChain {
    pub fn total_anchors(&self) -> usize {
        self.anchors.len()
    }

    /// Smallest `m` the chain certifies.
    pub fn lowest(&self) -> Option<u64> {
        self.anchors.last().map(|a| a.low_m)
    }
}

enum Start {
    Certified(UpperFixed),
    Grey,
    AtLeastOne { tie: bool },
}

fn classify_anchor(table: &FactorTable, anchor: u64, k: u64) -> Result<Start> {
    let t = t_upper(table, anchor, k)?;
    if t.less_than_one() {
        return Ok(Start::Certified(t));
    }
    if t.certainly_above_one() {
        return Ok(Start::AtLeastOne { tie: false });
    }
    let exact = t_exact(table, anchor, k)?;
    if exact.less_than_one() {
        Ok(Start::Grey)
    } else {
        Ok(Start::AtLeastOne { tie: exact == Rational::one() })
    }
}

/// Extend one anchor downward with exact rationals only.
fn extend_exact(table: &FactorTable, anchor: u64, floor: u64, k: u64, ties: &mut Vec<u64>) -> Result<Anchor> {
    let mut sum = t_exact(table, anchor, k)?;
    let mut low = anchor;
    while low > floor {
        let j = low - 1;
        if a_qualifies(table, j, k) {
            let next = &sum + &Rational::recip_of(j)?;
            if !next.less_than_one() {
                if next == Rational::one() {
                    ties.push(anchor);
                }
                break;
            }
            sum = next;
        }
        low = j;
    }
    Ok(Anchor { anchor_m: anchor, low_m: low, bound: CertifiedBound::Exact { total: (&sum).into() } })
}

fn extend(table: &FactorTable, anchor: u64, t: UpperFixed, floor: u64, k: u64, ties: &mut Vec<u64>) -> Result<Anchor> {
    let mut a_sum = UpperFixed::new();
    let mut low = anchor;
    while low > floor {
        let j = low - 1;
        if !a_qualifies(table, j, k) {
            low = j;
            continue;
        }
        let mut next = a_sum;
        next.push_unchecked(j);
        let total = t.merge(next)?;
        if total.less_than_one() {
            a_sum = next;
            low = j;
        } else if total.certainly_above_one() {
            break;
        } else {
            // Rounding slack straddles one: only exact arithmetic may fix the endpoint.
            let exact = exact_cumulative_bound(table, k, anchor, j)?;
            if exact.less_than_one() {
                return extend_exact(table, anchor, floor, k, ties);
            }
            if exact == Rational::one() {
                ties.push(anchor);
            }
            break;
        }
    }
    let total = t.merge(a_sum)?;
    Ok(Anchor { anchor_m: anchor, low_m: low, bound: CertifiedBound::Upper { t_anchor: t, a_sum, total } })
}

/// Walk anchors down from `cfg.max_m` to `floor`, stopping early (with
/// `halted_at` set) at the first anchor whose own `T` is at least one.
pub fn descend(table: &FactorTable, cfg: &ScanConfig, floor: u64) -> Result<AnchorChain> {
    cfg.validate()?;
    if floor < 1 || floor > cfg.max_m {
        return Err(invalid!("scan floor {floor} outside [1, {}]", cfg.max_m));
    }
    check_range(table, cfg.max_m, cfg.k)?;
    let mut chain = AnchorChain { anchors: Vec::new(), k: cfg.k, exact_ties: Vec::new(), halted_at: None };
    let mut anchor = cfg.max_m;
    loop {
        let link = match classify_anchor(table, anchor, cfg.k)? {
            Start::Certified(t) => extend(table, anchor, t, floor, cfg.k, &mut chain.exact_ties)?,
            Start::Grey => extend_exact(table, anchor, floor, cfg.k, &mut chain.exact_ties)?,
            Start::AtLeastOne { tie } => {
                if tie {
                    chain.exact_ties.push(anchor);
                }
                chain.halted_at = Some(anchor);
                return Ok(chain);
            }
        };
        let low = link.low_m;
        chain.anchors.push(link);
        if low <= floor {
            return Ok(chain);
        }
        anchor = low - 1;
    }
}

/// The anchor chain over `[floor, cfg.max_m]`; an anchor with `T >= 1` is a scan failure.
pub fn anchor_chain(table: &FactorTable, cfg: &ScanConfig, floor: u64) -> Result<AnchorChain> {
    let chain = descend(table, cfg, floor)?;
    match chain.halted_at {
        Some(m) => Err(Error::ScanFailure { m }),
        None => Ok(chain),
    }
}

/// Exact `T_m` for one `m` of the small range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmallRangeEntry {
    pub m: u64,
    pub t: Rational,
}

impl SmallRangeEntry {
    pub fn at_least_one(&self) -> bool {
        !self.t.less_than_one()
    }
}

/// Exact `T_m` for every `m` in `[lo, hi]`.
pub fn classify_small(table: &FactorTable, k: u64, lo: u64, hi: u64) -> Result<Vec<SmallRangeEntry>> {
    (lo..=hi).map(|m| Ok(SmallRangeEntry { m, t: t_exact(table, m, k)? })).collect()
}
