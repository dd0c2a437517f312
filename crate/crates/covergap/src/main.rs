use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use covergap::{formats, load_table};
use covergap_core::lcm_profile::{compute_l, describe, divisor_reciprocal_sum};
use covergap_core::proof::{self, external_facts, scan_floor, VERIFIED};
use covergap_core::reduction::{bins_coverable, lemma3_multiset, mod_p_split, BinVerdict};
use covergap_core::smooth_scan::{descend, t_exact, t_upper, MIN_MODULUS_BOUND};
use covergap_core::{FactorTable, ScanConfig};
use serde_json::json;

#[derive(Parser)]
#[command(name = "covergap", version, about = "Certify that no distinct covering system has all moduli in [m, k*m]")]
struct Cli {
    /// Binary sieve cache; created if missing or too small.
    #[arg(long, global = true)]
    sieve_cache: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Smooth reciprocal sum T_m.
    Tm {
        m: u64,
        /// Exact rational instead of the fixed-point upper bound.
        #[arg(long)]
        exact: bool,
        #[arg(long, default_value_t = 10)]
        k: u64,
    },
    /// Anchor chain from max_m down to the first m with T_m >= 1.
    Anchors {
        #[arg(long, default_value_t = 10)]
        k: u64,
        #[arg(long, default_value_t = MIN_MODULUS_BOUND)]
        max_m: u64,
    },
    /// Certified scan of [from, to] as CSV.
    Scan {
        #[arg(long, default_value_t = 117)]
        from: u64,
        #[arg(long, default_value_t = MIN_MODULUS_BOUND)]
        to: u64,
        #[arg(long, default_value_t = 10)]
        k: u64,
    },
    /// Lcm profile L_m.
    Lm {
        m: u64,
        #[arg(long, default_value_t = 10)]
        k: u64,
    },
    /// Sum of 1/d over divisors d of L_m in [m, k*m].
    Divsum {
        m: u64,
        #[arg(long, default_value_t = 10)]
        k: u64,
    },
    /// Check a covering given as JSON lines {"a": int, "n": int}.
    Verify { file: PathBuf },
    /// Mod-p split of the divisor multiset for m, after optional replacements of p-power blocks.
    Reduce {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        prime: u64,
        /// `p,a`; may be repeated and is applied in order.
        #[arg(long = "after-lemma3", value_parser = parse_pa)]
        after_lemma3: Vec<(u64, u32)>,
        #[arg(long, default_value_t = 10)]
        k: u64,
    },
    /// Run the whole verification and emit a proof log.
    Prove {
        #[arg(long, default_value_t = 10)]
        k: u64,
        #[arg(long, default_value_t = 3)]
        min_m: u64,
        #[arg(long, default_value_t = MIN_MODULUS_BOUND)]
        max_m: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one scripted case analysis.
    Case { m: u64 },
    /// Check a proof log.
    Check {
        file: PathBuf,
        /// Only re-check recorded inequalities; no sieve, no recomputation.
        #[arg(long, conflicts_with = "full")]
        replay_only: bool,
        /// Also rerun the anchor scan.
        #[arg(long)]
        full: bool,
    },
}

fn parse_pa(s: &str) -> Result<(u64, u32), String> {
    let (p, a) = s.split_once(',').ok_or_else(|| format!("expected p,a but got {s:?}"))?;
    Ok((p.trim().parse().map_err(|e| format!("{e}"))?, a.trim().parse().map_err(|e| format!("{e}"))?))
}

fn table(cli_cache: &Option<PathBuf>, limit: u64) -> Result<FactorTable> {
    load_table(limit, cli_cache.as_deref())
}

fn run(cli: Cli) -> Result<bool> {
    let mut out = io::stdout().lock();
    let cache = &cli.sieve_cache;
    match cli.cmd {
        Cmd::Tm { m, exact, k } => {
            let t = table(cache, k * m)?;
            if exact {
                let v = t_exact(&t, m, k)?;
                writeln!(out, "T_{m} = {v}")?;
                writeln!(out, "T_{m} ~ {}", v.truncated_decimal(16))?;
            } else {
                let v = t_upper(&t, m, k)?;
                writeln!(out, "T_{m} <= {} ({} terms)", v.to_rational().truncated_decimal(16), v.term_count)?;
            }
        }
        Cmd::Anchors { k, max_m } => {
            let cfg = ScanConfig { k, min_m: 3, max_m };
            cfg.validate()?;
            let t = table(cache, cfg.sieve_limit())?;
            let chain = descend(&t, &cfg, scan_floor(&cfg, &external_facts(k)))?;
            for a in &chain.anchors {
                writeln!(out, "[{}, {}] {}", a.low_m, a.anchor_m, a.bound.as_rational()?.truncated_decimal(16))?;
            }
            writeln!(out, "anchors: {}", chain.anchors.len())?;
            match chain.halted_at {
                Some(h) => writeln!(out, "halted at {h} (T_{h} >= 1)")?,
                None => writeln!(out, "reached the scan floor")?,
            }
        }
        Cmd::Scan { from, to, k } => {
            let cfg = ScanConfig { k, min_m: from.max(3), max_m: to };
            cfg.validate()?;
            let t = table(cache, cfg.sieve_limit())?;
            let chain = descend(&t, &cfg, from)?;
            formats::write_scan_csv(&mut out, &chain)?;
            if let Some(h) = chain.halted_at {
                eprintln!("scan halted at {h}: T_{h} >= 1");
                return Ok(false);
            }
        }
        Cmd::Lm { m, k } => {
            let t = table(cache, k * m)?;
            writeln!(out, "{}", describe(&compute_l(m, k, &t)?))?;
        }
        Cmd::Divsum { m, k } => {
            let t = table(cache, k * m)?;
            let s = divisor_reciprocal_sum(&compute_l(m, k, &t)?, m, k * m)?;
            writeln!(out, "{s}")?;
            writeln!(out, "{}", s.truncated_decimal(7))?;
        }
        Cmd::Verify { file } => {
            let f = File::open(&file).with_context(|| format!("opening {}", file.display()))?;
            let sys = formats::read_covering(BufReader::new(f))?;
            let covering = sys.is_covering()?;
            let density = sys.uncovered_density()?;
            writeln!(out, "{}", if covering { "covering" } else { "not a covering" })?;
            writeln!(out, "uncovered density: {density}")?;
            return Ok(covering);
        }
        Cmd::Reduce { m, prime, after_lemma3, k } => {
            let t = table(cache, k * m)?;
            let mut s = proof::initial_multiset(m, k, &t)?;
            let mut replacements = Vec::new();
            for (p, a) in after_lemma3 {
                let r = lemma3_multiset(&s, p, a)?;
                replacements.push(json!({"p": p, "a": a, "removed": r.removed, "inserted": r.inserted}));
                s = r.result;
            }
            let split = mod_p_split(&s, prime)?;
            let verdict = bins_coverable(&split)?;
            let doc = json!({
                "m": m,
                "replacements": replacements,
                "p": prime,
                "m0": split.m0,
                "m1": split.m1,
                "s0": {"value": split.s0.to_string(), "approx": split.s0.truncated_decimal(7)},
                "deficit": {"value": split.deficit.to_string(), "approx": split.deficit.truncated_decimal(7)},
                "result": verdict,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
            return Ok(matches!(verdict, BinVerdict::Infeasible { .. }));
        }
        Cmd::Prove { k, min_m, max_m, out: path } => {
            let cfg = ScanConfig { k, min_m, max_m };
            cfg.validate()?;
            let t = table(cache, cfg.sieve_limit())?;
            let log = proof::prove(&cfg, &t)?;
            let text = formats::proof_to_string(&log)?;
            match path {
                Some(p) => std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
                None => out.write_all(text.as_bytes())?,
            }
            eprintln!(
                "anchors: {}, small range: {}, case reports: {}, deviations: {}",
                log.anchors.chain.anchors.len(),
                log.small_range.len(),
                log.cases.len(),
                log.deviations.len()
            );
            eprintln!("verdict: {}", log.verdict);
            return Ok(verified(&log.verdict));
        }
        Cmd::Case { m } => {
            let t = table(cache, 10 * m)?;
            let report = proof::run_case(m, 10, &t)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
            return Ok(report.established());
        }
        Cmd::Check { file, replay_only, full } => {
            let log = formats::read_proof(&file)?;
            let checked = if replay_only {
                proof::replay(&log)
            } else {
                let t = table(cache, log.config.sieve_limit())?;
                proof::verify(&log, &t, full)
            };
            match checked {
                Ok(spans) => {
                    writeln!(out, "accepted: {} route spans", spans.len())?;
                    writeln!(out, "verdict: {}", log.verdict)?;
                    return Ok(verified(&log.verdict));
                }
                Err(e) => bail!("rejected: {e}"),
            }
        }
    }
    Ok(true)
}

fn verified(verdict: &str) -> bool {
    verdict == VERIFIED || verdict.starts_with("verified-for-range")
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
