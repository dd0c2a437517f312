//! Covering JSON lines, proof-log JSON and scan CSV.

use std::io::{BufRead, Write};
use std::path::Path;

use anyhow::{Context, Result};
use covergap_core::smooth_scan::AnchorChain;
use covergap_core::{Congruence, CoveringSystem, ProofLog};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct Line {
    a: i64,
    n: u64,
}

/// One `{"a": int, "n": int}` object per non-blank line.
pub fn read_covering<R: BufRead>(r: R) -> Result<CoveringSystem> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let l: Line = serde_json::from_str(&line).with_context(|| format!("line {}", i + 1))?;
        out.push(Congruence::reduced(l.a, l.n).with_context(|| format!("line {}", i + 1))?);
    }
    Ok(CoveringSystem::new(out))
}

pub fn write_covering<W: Write>(mut w: W, sys: &CoveringSystem) -> Result<()> {
    for c in &sys.congruences {
        serde_json::to_writer(&mut w, &Line { a: c.residue as i64, n: c.modulus })?;
        writeln!(w)?;
    }
    Ok(())
}

pub fn proof_to_string(log: &ProofLog) -> Result<String> {
    let mut s = serde_json::to_string_pretty(log)?;
    s.push('\n');
    Ok(s)
}

pub fn read_proof(path: &Path) -> Result<ProofLog> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

#[derive(Debug, Serialize)]
struct ScanRow {
    m_low: u64,
    m_high: u64,
    bound_num: String,
    bound_den: String,
    bound_approx: String,
}

/// CSV with columns `m_low, m_high, bound_num, bound_den, bound_approx`.
pub fn write_scan_csv<W: Write>(w: W, chain: &AnchorChain) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for a in &chain.anchors {
        let bound = a.bound.as_rational()?;
        out.serialize(ScanRow {
            m_low: a.low_m,
            m_high: a.anchor_m,
            bound_num: bound.numer().to_string(),
            bound_den: bound.denom().to_string(),
            bound_approx: bound.truncated_decimal(16),
        })?;
    }
    out.flush()?;
    Ok(())
}
