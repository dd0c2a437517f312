//! The full verification: base facts, small-range sums, the anchor scan,
//! divisor-sum filter and case analyses, assembled into one [`ProofLog`].

mod cases;
mod check;
pub mod published;

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor_sieve::FactorTable;
use crate::lcm_profile::{compute_l, divisor_reciprocal_sum, FactoredInteger};
use crate::numeric::{rat, within, Rational, RationalRecord};
use crate::smooth_scan::{classify_small, descend, exact_cumulative_bound, AnchorChain, ScanConfig, MIN_MODULUS_BOUND};

pub use cases::{
    initial_multiset, run_case, run_script, script_for, CaseReport, CaseScript, CaseVerdict, Continuation, Leftover,
    ReplaceScript, ScriptStep, SplitLog, SplitScript, StepLog, CASE_SCRIPTS,
};
pub use check::{replay, verify};

/// Printed decimals carry seven digits; anything further apart is a deviation.
pub fn paper_tolerance() -> Rational {
    rat(1, 1_000_000).expect("nonzero denominator")
}

/// Digits kept in the decimal approximations of anchor bounds.
pub const ANCHOR_DIGITS: usize = 16;

pub const VERIFIED: &str = "verified (modulo external facts)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviationKind {
    Numeric,
    Structural,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Deviation {
    pub location: String,
    pub paper_value: String,
    pub computed_value: String,
    pub kind: DeviationKind,
    pub affects_verdict: bool,
}

pub(crate) fn numeric_deviation(location: String, printed: &str, computed: &Rational) -> Result<Option<Deviation>> {
    let expected = Rational::from_decimal_str(printed)?;
    if within(&expected, computed, &paper_tolerance()) {
        return Ok(None);
    }
    Ok(Some(Deviation {
        location,
        paper_value: printed.into(),
        computed_value: computed.truncated_decimal(7),
        kind: DeviationKind::Numeric,
        affects_verdict: false,
    }))
}

pub(crate) fn structural_deviation(location: String, paper_value: String, computed_value: String) -> Deviation {
    Deviation { location, paper_value, computed_value, kind: DeviationKind::Structural, affects_verdict: false }
}

/// A cited result that is not re-proved here.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExternalFact {
    pub id: String,
    pub statement: String,
    pub citation: String,
    /// Values of `m` this fact settles on its own.
    pub covers: Vec<u64>,
    /// Settles every `m` above this value.
    pub covers_above: Option<u64>,
}

/// Base facts that apply for interval multiplier `k`.
pub fn external_facts(k: u64) -> Vec<ExternalFact> {
    let three: Vec<u64> = if 3 * k < 36 { vec![3] } else { Vec::new() };
    let four: Vec<u64> = (4..).take_while(|m| k * m <= 59).collect();
    vec![
        ExternalFact {
            id: "krukenberg-3".into(),
            statement: "no distinct covering system has minimum modulus 3 and all moduli at most 35".into(),
            citation: "C. E. Krukenberg, Covering sets of the integers, PhD thesis, University of Illinois, 1971"
                .into(),
            covers: three,
            covers_above: None,
        },
        ExternalFact {
            id: "krukenberg-4".into(),
            statement: "no distinct covering system has minimum modulus at least 4 and all moduli at most 59".into(),
            citation: "C. E. Krukenberg, Covering sets of the integers, PhD thesis, University of Illinois, 1971"
                .into(),
            covers: four,
            covers_above: None,
        },
        ExternalFact {
            id: "minimum-modulus-616000".into(),
            statement: "the minimum modulus of a distinct covering system is at most 616000".into(),
            citation: "P. Balister, B. Bollobas, R. Morris, J. Sahasrabudhe, M. Tiba, \
                       On the Erdos covering problem: the density of the uncovered set, Invent. Math. 228 (2022)"
                .into(),
            covers: Vec::new(),
            covers_above: Some(MIN_MODULUS_BOUND),
        },
    ]
}

/// Exact cumulative bound at one anchor, kept for independent confirmation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confirmation {
    pub anchor_m: u64,
    pub low_m: u64,
    pub exact: RationalRecord,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnchorSection {
    pub chain: AnchorChain,
    pub confirmations: Vec<Confirmation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmallEntry {
    pub m: u64,
    pub t: RationalRecord,
    pub at_least_one: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisorFilterEntry {
    pub m: u64,
    pub l_m: String,
    pub l_factors: Vec<(u64, u32)>,
    pub sum: RationalRecord,
    pub needs_case: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofLog {
    pub config: ScanConfig,
    pub external_facts: Vec<ExternalFact>,
    pub anchors: AnchorSection,
    pub small_range: Vec<SmallEntry>,
    #[serde(rename = "eq32")]
    pub divisor_filter: Vec<DivisorFilterEntry>,
    pub cases: Vec<CaseReport>,
    pub deviations: Vec<Deviation>,
    pub verdict: String,
}

/// First `m` the scan has to handle: just above the values settled by base facts.
pub fn scan_floor(cfg: &ScanConfig, facts: &[ExternalFact]) -> u64 {
    let covered: BTreeSet<u64> = facts.iter().flat_map(|f| f.covers.iter().copied()).collect();
    let mut m = cfg.min_m;
    while covered.contains(&m) {
        m += 1;
    }
    m
}

/// Divisor sum over `[m, k*m]` for one `m`.
pub fn divisor_filter_entry(m: u64, k: u64, table: &FactorTable) -> Result<DivisorFilterEntry> {
    let l = compute_l(m, k, table)?;
    let sum = divisor_reciprocal_sum(&l, m, k * m)?;
    Ok(DivisorFilterEntry {
        m,
        l_m: alloc::format!("{l}"),
        l_factors: l.to_pairs(),
        needs_case: !sum.less_than_one(),
        sum: (&sum).into(),
    })
}

/// The filter over a list of `m`; each must have `T_m >= 1`, i.e. appear in the small-range table.
pub fn divisor_filter(ms: &[u64], k: u64, table: &FactorTable) -> Result<Vec<DivisorFilterEntry>> {
    ms.iter()
        .map(|&m| {
            if crate::smooth_scan::t_exact(table, m, k)?.less_than_one() {
                return Err(crate::error::invalid!("T_{m} < 1; the divisor filter applies only where T_m >= 1"));
            }
            divisor_filter_entry(m, k, table)
        })
        .collect()
}

pub fn prove(cfg: &ScanConfig, table: &FactorTable) -> Result<ProofLog> {
    cfg.validate()?;
    let k = cfg.k;
    let facts = external_facts(k);
    let floor = scan_floor(cfg, &facts);
    let chain = if floor <= cfg.max_m {
        descend(table, cfg, floor)?
    } else {
        AnchorChain { anchors: Vec::new(), k, exact_ties: Vec::new(), halted_at: None }
    };
    let confirmations = confirm(&chain, k, table)?;
    let small_hi = chain.halted_at.unwrap_or(floor - 1);
    let small_range: Vec<SmallEntry> = if floor <= small_hi {
        classify_small(table, k, floor, small_hi)?
            .into_iter()
            .map(|e| SmallEntry { m: e.m, at_least_one: e.at_least_one(), t: (&e.t).into() })
            .collect()
    } else {
        Vec::new()
    };
    let divisor_filter = small_range
        .iter()
        .filter(|e| e.at_least_one)
        .map(|e| divisor_filter_entry(e.m, k, table))
        .collect::<Result<Vec<_>>>()?;
    let cases = divisor_filter
        .iter()
        .filter(|e| e.needs_case && k == 10)
        .filter_map(|e| script_for(e.m))
        .map(|s| run_script(s, k, table))
        .collect::<Result<Vec<_>>>()?;
    let mut log = ProofLog {
        config: *cfg,
        external_facts: facts,
        anchors: AnchorSection { chain, confirmations },
        small_range,
        divisor_filter,
        cases,
        deviations: Vec::new(),
        verdict: String::new(),
    };
    log.deviations = deviation_report(&log)?;
    log.verdict = decide_verdict(&log)?;
    Ok(log)
}

/// Exact cumulative bounds at the first two anchors.
pub fn confirm(chain: &AnchorChain, k: u64, table: &FactorTable) -> Result<Vec<Confirmation>> {
    chain
        .anchors
        .iter()
        .take(2)
        .map(|a| {
            let exact = exact_cumulative_bound(table, k, a.anchor_m, a.low_m)?;
            Ok(Confirmation {
                anchor_m: a.anchor_m,
                low_m: a.low_m,
                exact: RationalRecord::with_digits(&exact, ANCHOR_DIGITS),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    External,
    SmallRange,
    Anchor,
    DivisorFilter,
    Case,
    Unresolved,
}

/// A maximal run of consecutive `m` sharing one route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteSpan {
    pub lo: u64,
    pub hi: u64,
    pub route: Route,
}

/// Assign every `m` in `[min_m, max_m]` its route; a value claimed twice is an error.
pub fn routes(log: &ProofLog) -> Result<Vec<RouteSpan>> {
    let (lo, hi) = (log.config.min_m, log.config.max_m);
    if lo > hi {
        return Err(Error::Rejected("empty range".into()));
    }
    let mut slots: Vec<Option<Route>> = vec![None; (hi - lo + 1) as usize];
    let mut claim = |m: u64, r: Route| -> Result<()> {
        if m < lo || m > hi {
            return Ok(());
        }
        let slot = &mut slots[(m - lo) as usize];
        if let Some(prev) = slot {
            return Err(Error::Rejected(alloc::format!("m = {m} claimed by both {prev:?} and {r:?}")));
        }
        *slot = Some(r);
        Ok(())
    };
    for f in &log.external_facts {
        for &m in &f.covers {
            claim(m, Route::External)?;
        }
    }
    for a in &log.anchors.chain.anchors {
        if a.low_m > a.anchor_m {
            return Err(Error::Rejected(alloc::format!("anchor {} has low end {}", a.anchor_m, a.low_m)));
        }
        for m in a.low_m.max(lo)..=a.anchor_m.min(hi) {
            claim(m, Route::Anchor)?;
        }
    }
    for e in log.small_range.iter().filter(|e| !e.at_least_one) {
        claim(e.m, Route::SmallRange)?;
    }
    for e in log.divisor_filter.iter().filter(|e| !e.needs_case) {
        claim(e.m, Route::DivisorFilter)?;
    }
    for c in log.cases.iter().filter(|c| c.established()) {
        claim(c.m, Route::Case)?;
    }
    let mut spans: Vec<RouteSpan> = Vec::new();
    for (i, slot) in slots.iter().enumerate() {
        let m = lo + i as u64;
        let route = slot.unwrap_or(Route::Unresolved);
        match spans.last_mut() {
            Some(s) if s.route == route && s.hi + 1 == m => s.hi = m,
            _ => spans.push(RouteSpan { lo: m, hi: m, route }),
        }
    }
    Ok(spans)
}

/// The overall verdict string implied by a log's components.
pub fn decide_verdict(log: &ProofLog) -> Result<String> {
    let spans = routes(log)?;
    let unresolved: Vec<String> = spans
        .iter()
        .filter(|s| s.route == Route::Unresolved)
        .map(|s| if s.lo == s.hi { s.lo.to_string() } else { alloc::format!("{}..={}", s.lo, s.hi) })
        .collect();
    let failed: Vec<String> = log.cases.iter().filter(|c| !c.established()).map(|c| c.m.to_string()).collect();
    if !failed.is_empty() {
        return Ok(alloc::format!("not verified: case analysis failed for m = {}", failed.join(", ")));
    }
    if !unresolved.is_empty() {
        return Ok(alloc::format!("not verified: unresolved m = {}", unresolved.join(", ")));
    }
    let cfg = &log.config;
    if cfg.min_m == 3 && cfg.max_m >= MIN_MODULUS_BOUND {
        Ok(VERIFIED.into())
    } else {
        Ok(alloc::format!("verified-for-range [{}, {}]", cfg.min_m, cfg.max_m))
    }
}

/// Every disagreement between the log and the published values, plus the case-level deviations.
pub fn deviation_report(log: &ProofLog) -> Result<Vec<Deviation>> {
    let mut out = Vec::new();
    if log.config.k != 10 {
        out.extend(log.cases.iter().flat_map(|c| c.deviations.iter().cloned()));
        return Ok(out);
    }
    small_range_deviations(log, &mut out)?;
    anchor_deviations(log, &mut out)?;
    filter_deviations(log, &mut out)?;
    out.extend(log.cases.iter().flat_map(|c| c.deviations.iter().cloned()));
    Ok(out)
}

fn small_range_deviations(log: &ProofLog, out: &mut Vec<Deviation>) -> Result<()> {
    let Some((first, last)) = log.small_range.first().zip(log.small_range.last()).map(|(a, b)| (a.m, b.m)) else {
        return Ok(());
    };
    let listed = published::SMALL_TABLE.len();
    if listed != published::STATED_EXCEPTIONAL_COUNT {
        out.push(structural_deviation(
            "T_m >= 1 table: stated count vs listed entries".into(),
            published::STATED_EXCEPTIONAL_COUNT.to_string(),
            listed.to_string(),
        ));
    }
    let computed: Vec<&SmallEntry> = log.small_range.iter().filter(|e| e.at_least_one).collect();
    if computed.len() != published::STATED_EXCEPTIONAL_COUNT {
        out.push(structural_deviation(
            "T_m >= 1 table: stated count vs computed count".into(),
            published::STATED_EXCEPTIONAL_COUNT.to_string(),
            computed.len().to_string(),
        ));
    }
    for &(m, printed) in published::SMALL_TABLE.iter().filter(|(m, _)| (first..=last).contains(m)) {
        match log.small_range.iter().find(|e| e.m == m) {
            Some(e) if e.at_least_one => {
                if let Some(d) = numeric_deviation(alloc::format!("T_{m}"), printed, &e.t.parse()?)? {
                    out.push(d);
                }
            }
            Some(e) => out.push(structural_deviation(
                alloc::format!("T_{m} >= 1"),
                printed.into(),
                e.t.parse()?.truncated_decimal(7),
            )),
            None => {}
        }
    }
    for e in computed {
        if !published::SMALL_TABLE.iter().any(|(m, _)| *m == e.m) {
            out.push(structural_deviation(
                alloc::format!("T_{} >= 1 missing from table", e.m),
                "absent".into(),
                e.t.parse()?.truncated_decimal(7),
            ));
        }
    }
    Ok(())
}

fn interval(lo: u64, hi: u64) -> String {
    alloc::format!("[{lo}, {hi}]")
}

fn anchor_deviations(log: &ProofLog, out: &mut Vec<Deviation>) -> Result<()> {
    if log.config.max_m != MIN_MODULUS_BOUND {
        return Ok(());
    }
    let chain = &log.anchors.chain.anchors;
    if chain.len() != published::ANCHOR_INTERVALS.len() {
        out.push(structural_deviation(
            "anchor count".into(),
            published::ANCHOR_INTERVALS.len().to_string(),
            chain.len().to_string(),
        ));
    }
    for (i, (&(lo, hi), a)) in published::ANCHOR_INTERVALS.iter().zip(chain).enumerate() {
        if (lo, hi) != (a.low_m, a.anchor_m) {
            out.push(structural_deviation(
                alloc::format!("anchor interval {}", i + 1),
                interval(lo, hi),
                interval(a.low_m, a.anchor_m),
            ));
        }
    }
    for (i, (printed, c)) in published::FIRST_BOUNDS.iter().zip(&log.anchors.confirmations).enumerate() {
        if let Some(d) =
            numeric_deviation(alloc::format!("cumulative bound at anchor {}", i + 1), printed, &c.exact.parse()?)?
        {
            out.push(d);
        }
    }
    Ok(())
}

fn filter_deviations(log: &ProofLog, out: &mut Vec<Deviation>) -> Result<()> {
    for e in &log.divisor_filter {
        if let Some(pairs) = published::lcm_profile(e.m) {
            let printed = FactoredInteger::from_pairs(pairs.iter().copied());
            if printed.to_pairs() != e.l_factors {
                out.push(structural_deviation(alloc::format!("L_{}", e.m), alloc::format!("{printed}"), e.l_m.clone()));
            }
        } else {
            out.push(structural_deviation(alloc::format!("L_{}", e.m), "undefined".into(), e.l_m.clone()));
        }
        let listed = published::EXCEPTIONAL.contains(&e.m);
        if listed != e.needs_case {
            let sum = e.sum.parse()?.truncated_decimal(7);
            let (stated, computed) = if listed {
                ("divisor sum >= 1".to_string(), alloc::format!("{sum} < 1"))
            } else {
                ("divisor sum < 1".to_string(), alloc::format!("{sum} >= 1"))
            };
            out.push(Deviation {
                location: alloc::format!("divisor filter m={}", e.m),
                paper_value: stated,
                computed_value: computed,
                kind: DeviationKind::Structural,
                affects_verdict: true,
            });
        }
    }
    Ok(())
}
