//! Replay checking for a [`ProofLog`].
//!
//! [`replay`] re-checks recorded inequalities and identities without summing
//! anything over the scan range. [`verify`] additionally recomputes the cheap
//! components and the two exact confirmations, and with `full` reruns the scan.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::factor_sieve::FactorTable;
use crate::lcm_profile::FactoredInteger;
use crate::numeric::Rational;
use crate::reduction::BinVerdict;
use crate::smooth_scan::{classify_small, descend, exact_cumulative_bound, Anchor, CertifiedBound};

use super::{
    confirm, decide_verdict, deviation_report, divisor_filter_entry, external_facts, routes, run_script, scan_floor,
    script_for, CaseReport, ProofLog, RouteSpan, SmallEntry, SplitLog, StepLog,
};

fn reject<T>(msg: String) -> Result<T> {
    Err(Error::Rejected(msg))
}

fn context<T>(what: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Rejected(m) => Error::Rejected(m),
        other => Error::Rejected(alloc::format!("{what}: {other}")),
    })
}

/// Check a log using only its recorded values.
pub fn replay(log: &ProofLog) -> Result<Vec<RouteSpan>> {
    let cfg = &log.config;
    context("config", cfg.validate())?;
    if log.external_facts != external_facts(cfg.k) {
        return reject("external facts differ from the base facts for this k".into());
    }
    let floor = scan_floor(cfg, &log.external_facts);
    replay_chain(log, floor)?;
    replay_small(log, floor)?;
    replay_filter(log)?;
    replay_cases(log)?;
    let spans = routes(log)?;
    let verdict = decide_verdict(log)?;
    if verdict != log.verdict {
        return reject(alloc::format!("recorded verdict {:?}, components imply {verdict:?}", log.verdict));
    }
    Ok(spans)
}

fn replay_bound(a: &Anchor) -> Result<Rational> {
    match &a.bound {
        CertifiedBound::Upper { t_anchor, a_sum, total } => {
            let merged = t_anchor.merge(*a_sum)?;
            if merged != *total {
                return reject(alloc::format!("anchor {}: total is not t_anchor + a_sum", a.anchor_m));
            }
            if t_anchor.term_count == 0 || a_sum.term_count > a.anchor_m - a.low_m {
                return reject(alloc::format!("anchor {}: impossible term counts", a.anchor_m));
            }
            if !total.less_than_one() {
                return reject(alloc::format!("anchor {}: bound is not below one", a.anchor_m));
            }
            Ok(total.to_rational())
        }
        CertifiedBound::Exact { total } => {
            let v = context(&alloc::format!("anchor {}", a.anchor_m), total.parse())?;
            if !v.less_than_one() {
                return reject(alloc::format!("anchor {}: bound is not below one", a.anchor_m));
            }
            Ok(v)
        }
    }
}

fn replay_chain(log: &ProofLog, floor: u64) -> Result<()> {
    let cfg = &log.config;
    let chain = &log.anchors.chain;
    if chain.k != cfg.k {
        return reject("anchor chain k differs from config".into());
    }
    if floor > cfg.max_m {
        if !chain.anchors.is_empty() || chain.halted_at.is_some() {
            return reject("anchor chain present although base facts settle the range".into());
        }
        return Ok(());
    }
    let mut expected = cfg.max_m;
    for a in &chain.anchors {
        if a.anchor_m != expected || a.low_m > a.anchor_m || a.low_m < floor {
            return reject(alloc::format!("anchor [{}, {}] breaks the tiling", a.low_m, a.anchor_m));
        }
        replay_bound(a)?;
        expected = a.low_m - 1;
    }
    match chain.halted_at {
        Some(h) if h != expected || h < floor => {
            return reject(alloc::format!("scan halt at {h} does not follow the chain"))
        }
        None if chain.anchors.last().map(|a| a.low_m) != Some(floor) => {
            return reject("anchor chain stops short of the scan floor".into())
        }
        _ => {}
    }
    let mut ties = chain.exact_ties.clone();
    ties.dedup();
    if ties.len() != chain.exact_ties.len()
        || !chain
            .exact_ties
            .iter()
            .all(|t| chain.anchors.iter().any(|a| a.anchor_m == *t) || Some(*t) == chain.halted_at)
    {
        return reject("exact ties do not name anchors".into());
    }
    let confirmations = &log.anchors.confirmations;
    if confirmations.len() != chain.anchors.len().min(2) {
        return reject("expected exact confirmations for the first two anchors".into());
    }
    for (c, a) in confirmations.iter().zip(&chain.anchors) {
        if (c.anchor_m, c.low_m) != (a.anchor_m, a.low_m) {
            return reject(alloc::format!("confirmation for anchor {} is misplaced", c.anchor_m));
        }
        let exact = context(&alloc::format!("confirmation at {}", c.anchor_m), c.exact.parse())?;
        let consistent = match &a.bound {
            CertifiedBound::Upper { total, .. } => {
                let upper = total.to_rational();
                exact <= upper && &upper - &total.slack() <= exact
            }
            CertifiedBound::Exact { total } => total.parse()? == exact,
        };
        if !consistent || !exact.less_than_one() {
            return reject(alloc::format!("confirmation at {} disagrees with the certified bound", c.anchor_m));
        }
    }
    Ok(())
}

fn replay_small(log: &ProofLog, floor: u64) -> Result<()> {
    let expected: Vec<u64> = match log.anchors.chain.halted_at {
        Some(h) if floor <= log.config.max_m => (floor..=h).collect(),
        _ => Vec::new(),
    };
    let recorded: Vec<u64> = log.small_range.iter().map(|e| e.m).collect();
    if recorded != expected {
        return reject("small-range table does not cover the range below the scan".into());
    }
    for e in &log.small_range {
        let t = context(&alloc::format!("T_{}", e.m), e.t.parse())?;
        if e.at_least_one == t.less_than_one() {
            return reject(alloc::format!("T_{}: recorded comparison with one is wrong", e.m));
        }
    }
    Ok(())
}

fn replay_filter(log: &ProofLog) -> Result<()> {
    let expected: Vec<u64> = log.small_range.iter().filter(|e| e.at_least_one).map(|e| e.m).collect();
    let recorded: Vec<u64> = log.divisor_filter.iter().map(|e| e.m).collect();
    if recorded != expected {
        return reject("divisor filter does not match the values with T_m >= 1".into());
    }
    for e in &log.divisor_filter {
        let sum = context(&alloc::format!("divisor sum for m={}", e.m), e.sum.parse())?;
        if e.needs_case == sum.less_than_one() {
            return reject(alloc::format!("m={}: recorded comparison with one is wrong", e.m));
        }
        let l = FactoredInteger::from_pairs(e.l_factors.iter().copied());
        if alloc::format!("{l}") != e.l_m || l.to_pairs() != e.l_factors {
            return reject(alloc::format!("m={}: lcm profile fields disagree", e.m));
        }
    }
    Ok(())
}

fn split_closed(s: &SplitLog) -> Result<bool> {
    let s0 = s.s0.parse()?;
    let deficit = s.deficit.parse()?;
    if &Rational::one() - &s0 != deficit {
        return reject(alloc::format!("mod {} split: deficit is not 1 - S0", s.p));
    }
    let closed = match &s.bins {
        BinVerdict::Infeasible { max_groups } => (*max_groups as u64) < s.p && deficit.is_positive(),
        BinVerdict::Feasible { .. } => {
            let mut all = !s.continuations.is_empty();
            for c in &s.continuations {
                all &= match &c.nested {
                    Some(n) => c.tight_bin.is_some() && split_closed(n)?,
                    None => false,
                };
            }
            all
        }
        BinVerdict::Inconclusive => false,
    };
    if closed != s.closed {
        return reject(alloc::format!("mod {} split: recorded closure is inconsistent", s.p));
    }
    Ok(closed)
}

fn case_closed(c: &CaseReport) -> Result<bool> {
    let mut closed = false;
    for step in &c.steps {
        closed = match step {
            StepLog::Replace { sum, .. } | StepLog::Discard { sum, .. } => sum.parse()?.less_than_one(),
            StepLog::Split(s) => split_closed(s)?,
        };
    }
    Ok(closed)
}

fn replay_cases(log: &ProofLog) -> Result<()> {
    let mut seen = Vec::new();
    for c in &log.cases {
        if !log.divisor_filter.iter().any(|e| e.m == c.m && e.needs_case) || seen.contains(&c.m) {
            return reject(alloc::format!("case report for m={} is not called for", c.m));
        }
        seen.push(c.m);
        let closed = context(&alloc::format!("case m={}", c.m), case_closed(c))?;
        if c.established() != (closed && c.failure.is_none()) {
            return reject(alloc::format!("case m={}: verdict does not follow from its steps", c.m));
        }
    }
    Ok(())
}

/// [`replay`], then recompute every component except the scan itself (or including it with `full`).
pub fn verify(log: &ProofLog, table: &FactorTable, full: bool) -> Result<Vec<RouteSpan>> {
    let spans = replay(log)?;
    let cfg = &log.config;
    let k = cfg.k;
    if table.limit() < cfg.sieve_limit() {
        return Err(crate::error::invalid!("sieve limit {} is below k * max_m = {}", table.limit(), cfg.sieve_limit()));
    }
    if let (Some(first), Some(last)) = (log.small_range.first(), log.small_range.last()) {
        let fresh: Vec<SmallEntry> = classify_small(table, k, first.m, last.m)?
            .into_iter()
            .map(|e| SmallEntry { m: e.m, at_least_one: e.at_least_one(), t: (&e.t).into() })
            .collect();
        if fresh != log.small_range {
            return reject("small-range values do not match recomputation".into());
        }
    }
    for e in &log.divisor_filter {
        if divisor_filter_entry(e.m, k, table)? != *e {
            return reject(alloc::format!("divisor filter entry m={} does not match recomputation", e.m));
        }
    }
    let fresh_cases = log
        .divisor_filter
        .iter()
        .filter(|e| e.needs_case && k == 10)
        .filter_map(|e| script_for(e.m))
        .map(|s| run_script(s, k, table))
        .collect::<Result<Vec<_>>>()?;
    if fresh_cases != log.cases {
        return reject("case reports do not match recomputation".into());
    }
    if deviation_report(log)? != log.deviations {
        return reject("deviation report does not match recomputation".into());
    }
    let chain = &log.anchors.chain;
    for a in &chain.anchors {
        if let CertifiedBound::Exact { total } = &a.bound {
            if exact_cumulative_bound(table, k, a.anchor_m, a.low_m)? != total.parse()? {
                return reject(alloc::format!("exact bound at anchor {} does not match recomputation", a.anchor_m));
            }
        }
    }
    if confirm(chain, k, table)? != log.anchors.confirmations {
        return reject("exact confirmations do not match recomputation".into());
    }
    if full || !chain.exact_ties.is_empty() {
        let floor = scan_floor(cfg, &log.external_facts);
        if floor <= cfg.max_m && descend(table, cfg, floor)? != *chain {
            return reject("anchor chain does not match a fresh scan".into());
        }
    }
    Ok(spans)
}
