//! One line per acceptance criterion; exits nonzero if any fails.

use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use covergap_core::covering::{
    lemma1_discard, lemma3_discard_same_class, lemma3_replace, lemma4_reduce, reduce_congruence, split,
};
use covergap_core::lcm_profile::compute_l;
use covergap_core::numeric::{rat, reciprocal_sum, within};
use covergap_core::proof::{
    self, divisor_filter_entry, external_facts, paper_tolerance, published, replay, run_case, scan_floor, verify,
    StepLog, CASE_SCRIPTS, VERIFIED,
};
use covergap_core::reduction::{
    enumerate_feasible_assignments, group_sum, lemma3_multiset, max_threshold_groups, mod_p_split, tight_bin_moduli,
};
use covergap_core::smooth_scan::{classify_small, descend, exact_cumulative_bound};
use covergap_core::{
    Congruence, CoveringSystem, Error, FactorTable, FactoredInteger, ModuliMultiset, ProofLog, Rational, ScanConfig,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::Value;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const FULL: ScanConfig = ScanConfig { k: 10, min_m: 3, max_m: 616_000 };

fn table() -> &'static FactorTable {
    static T: OnceLock<FactorTable> = OnceLock::new();
    T.get_or_init(|| FactorTable::build(FULL.sieve_limit()).unwrap())
}

fn log() -> &'static ProofLog {
    static L: OnceLock<ProofLog> = OnceLock::new();
    L.get_or_init(|| proof::prove(&FULL, table()).unwrap())
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn trial_division(mut n: u64) -> (u64, u64) {
    if n == 1 {
        return (1, 1);
    }
    let (mut small, mut big) = (0, 0);
    let mut p = 2;
    while p * p <= n {
        while n.is_multiple_of(p) {
            if small == 0 {
                small = p;
            }
            big = p;
            n /= p;
        }
        p += 1;
    }
    if n > 1 {
        if small == 0 {
            small = n;
        }
        big = n;
    }
    (small, big)
}

fn sieve() -> Outcome {
    let start = Instant::now();
    let t = table();
    let built = start.elapsed();
    let mut rng = StdRng::seed_from_u64(1);
    let mut bad = 0;
    for _ in 0..10_000 {
        let n = rng.random_range(1..=t.limit());
        let (s, b) = trial_division(n);
        if t.smallest_prime_factor(n).unwrap() != s || t.largest_prime_factor(n).unwrap() != b {
            bad += 1;
        }
    }
    ensure(
        built < Duration::from_secs(10) && bad == 0,
        format!("limit {} built in {built:.2?}, {bad} of 10000 samples disagree", t.limit()),
    )
}

fn small_range() -> Outcome {
    let start = Instant::now();
    let entries = classify_small(table(), 10, 6, 116).unwrap();
    let took = start.elapsed();
    let big: Vec<_> = entries.iter().filter(|e| e.at_least_one()).collect();
    let ms: Vec<u64> = big.iter().map(|e| e.m).collect();
    let listed: Vec<u64> = published::SMALL_TABLE.iter().map(|(m, _)| *m).collect();
    let mut off = Vec::new();
    for (m, printed) in published::SMALL_TABLE {
        let value = Rational::from_decimal_str(printed).unwrap();
        match big.iter().find(|e| e.m == m) {
            Some(e) if within(&value, &e.t, &paper_tolerance()) => {}
            _ => off.push(m),
        }
    }
    ensure(
        ms.len() == published::STATED_EXCEPTIONAL_COUNT
            && ms == listed
            && off.is_empty()
            && took < Duration::from_secs(1),
        format!(
            "{} values with T_m >= 1 (expected {}), same set as listed: {}, values off: {off:?}, {took:.2?}",
            ms.len(),
            published::STATED_EXCEPTIONAL_COUNT,
            ms == listed
        ),
    )
}

fn anchors() -> Outcome {
    let start = Instant::now();
    let chain = descend(table(), &FULL, scan_floor(&FULL, &external_facts(10))).unwrap();
    let took = start.elapsed();
    let got: Vec<(u64, u64)> = chain.anchors.iter().map(|a| (a.low_m, a.anchor_m)).collect();
    let same = got == published::ANCHOR_INTERVALS;
    let mut bounds = Vec::new();
    for (a, printed) in chain.anchors.iter().zip(published::FIRST_BOUNDS) {
        let exact = exact_cumulative_bound(table(), 10, a.anchor_m, a.low_m).unwrap();
        bounds.push((exact.truncated_decimal(13), printed[..15].to_string()));
    }
    let bounds_ok = bounds.len() == 2 && bounds.iter().all(|(a, b)| a == b);
    ensure(
        got.len() == 39 && same && bounds_ok && took < Duration::from_secs(300),
        format!(
            "{} anchors (expected 39), first interval {:?} (expected {:?}), first bounds {bounds:?}, {took:.2?}",
            got.len(),
            got.first(),
            published::ANCHOR_INTERVALS[0]
        ),
    )
}

fn lcm_profiles() -> Outcome {
    let mut off = Vec::new();
    for (lo, hi, pairs) in published::LCM_PROFILES {
        let want = FactoredInteger::from_pairs(pairs.iter().copied());
        for m in lo..=hi {
            if compute_l(m, 10, table()).unwrap() != want {
                off.push(m);
            }
        }
    }
    let l95 = format!("{}", compute_l(95, 10, table()).unwrap());
    ensure(
        off.is_empty() && l95 == "2^8 * 3^4 * 5^3 * 7^2 * 11 * 13 * 17 * 19 * 23",
        format!("{} profiles, mismatches at {off:?}, L_95 = {l95}", published::LCM_PROFILES.len()),
    )
}

fn divisor_filter() -> Outcome {
    let ms: Vec<u64> =
        classify_small(table(), 10, 6, 116).unwrap().into_iter().filter(|e| e.at_least_one()).map(|e| e.m).collect();
    let mut below = 0;
    let mut at_least = Vec::new();
    for &m in &ms {
        let e = divisor_filter_entry(m, 10, table()).unwrap();
        if e.needs_case {
            at_least.push(m);
        } else {
            below += 1;
        }
    }
    let mut off = Vec::new();
    for script in CASE_SCRIPTS.iter().filter(|s| !s.supplementary) {
        let printed = Rational::from_decimal_str(script.published_sum.unwrap()).unwrap();
        let sum = divisor_filter_entry(script.m, 10, table()).unwrap().sum.parse().unwrap();
        if !within(&printed, &sum, &paper_tolerance()) {
            off.push(script.m);
        }
    }
    ensure(
        below == 54 && at_least == published::EXCEPTIONAL && off.is_empty(),
        format!("{below} sums below one (expected 54), at least one for {at_least:?}, printed sums off at {off:?}"),
    )
}

fn step_matches(steps: &[StepLog], i: usize, p: u64, count: usize, modulus: u64, listed: Option<&[u64]>) -> bool {
    match steps.get(i) {
        Some(StepLog::Replace { p: q, removed, inserted, .. }) => {
            *q == p && removed.len() == count && *inserted == modulus && listed.is_none_or(|l| l == removed)
        }
        _ => false,
    }
}

fn cases() -> Outcome {
    let mut open = Vec::new();
    let mut structural = Vec::new();
    let mut steps = std::collections::BTreeMap::new();
    for m in published::EXCEPTIONAL {
        let r = run_case(m, 10, table()).unwrap();
        if !r.established() {
            open.push(m);
        }
        for d in &r.deviations {
            if d.location.contains("multiples of") || d.location.contains("replacement modulus") {
                structural.push(format!("{} ({} vs {})", d.location, d.paper_value, d.computed_value));
            }
        }
        steps.insert(m, r.steps);
    }
    let examples = [
        ("m=6 7 x 7 -> 120", step_matches(&steps[&6], 0, 7, 7, 120, None)),
        ("m=6 {16,48} -> 24", step_matches(&steps[&6], 1, 2, 2, 24, Some(&[16, 48]))),
        ("m=21 {64,192} -> 96", step_matches(&steps[&21], 0, 2, 2, 96, Some(&[64, 192]))),
        ("m=20 13 x 13 -> 27720", step_matches(&steps[&20], 0, 13, 13, 27_720, None)),
        ("m=42 19 x 19 -> 12252240", step_matches(&steps[&42], 0, 19, 19, 12_252_240, None)),
        ("m=43 19 x 19 -> 12252240", step_matches(&steps[&43], 0, 19, 19, 12_252_240, None)),
        ("m=45 19 x 19 -> 12252240", step_matches(&steps[&45], 0, 19, 19, 12_252_240, None)),
        ("m=16 5 x 25 -> 60", step_matches(&steps[&16], 0, 5, 5, 60, None)),
        ("m=16 11 x 11 -> 2520", step_matches(&steps[&16], 1, 11, 11, 2520, None)),
    ];
    let failed: Vec<&str> = examples.iter().filter(|(_, ok)| !ok).map(|(name, _)| *name).collect();
    ensure(
        open.is_empty() && structural.is_empty() && failed.is_empty(),
        format!(
            "{} of 23 established (open: {open:?}), count/modulus deviations: {structural:?}, examples failing: {failed:?}",
            23 - open.len()
        ),
    )
}

fn deviations() -> Outcome {
    let devs = &log().deviations;
    let has = |loc: &str| devs.iter().any(|d| d.location == loc);
    let wanted = ["m=6 step 2 sum", "m=21 step 1 sum"];
    let missing: Vec<&str> = wanted.iter().copied().filter(|l| !has(l)).collect();
    let decisive: Vec<&str> = devs.iter().filter(|d| d.affects_verdict).map(|d| d.location.as_str()).collect();
    ensure(
        missing.is_empty() && decisive.is_empty(),
        format!("{} deviations, missing {missing:?}, verdict-changing {decisive:?}", devs.len()),
    )
}

fn nested_m7() -> Outcome {
    let mut s = proof::initial_multiset(7, 10, table()).unwrap();
    s = lemma3_multiset(&s, 2, 4).unwrap().result;
    let split = mod_p_split(&s, 7).unwrap();
    let all = enumerate_feasible_assignments(&split, true).unwrap();
    let mut bad = 0;
    let mut maxima = std::collections::BTreeSet::new();
    for a in &all {
        let Some(&i) = a.tight.iter().find(|&&i| a.bins[i] == [5]) else {
            bad += 1;
            continue;
        };
        let inner = tight_bin_moduli(&split, a, i).unwrap();
        let nested = mod_p_split(&inner, 5).unwrap();
        let g = max_threshold_groups(&nested.m1, &nested.deficit).unwrap().count;
        maxima.insert(g);
        if g >= 5 {
            bad += 1;
        }
    }
    ensure(
        !all.is_empty() && bad == 0 && maxima == [3].into(),
        format!(
            "{} feasible assignments, {bad} without a closing tight bin {{5}}, nested maxima {maxima:?}",
            all.len()
        ),
    )
}

const LCM_CAP: u64 = 1_000_000;
const PRIMES: [u64; 4] = [2, 3, 5, 7];

fn lcm_value(sys: &CoveringSystem) -> u64 {
    sys.lcm_of().value_u64().unwrap()
}

fn tree_covers(sys: &CoveringSystem, l: u64, m: u64, r: u64) -> bool {
    if sys.congruences.iter().any(|c| m.is_multiple_of(c.modulus) && r % c.modulus == c.residue) {
        return true;
    }
    if m == l {
        return false;
    }
    let rest = l / m;
    let q = (2..=rest).find(|q| rest.is_multiple_of(*q)).unwrap();
    (0..q).all(|i| tree_covers(sys, l, m * q, r + i * m))
}

fn covers(sys: &CoveringSystem) -> Result<bool, String> {
    let bitset = sys.is_covering().unwrap();
    if bitset != tree_covers(sys, lcm_value(sys), 1, 0) {
        return Err(format!("oracles disagree on {sys:?}"));
    }
    Ok(bitset)
}

fn random_covering(rng: &mut StdRng) -> CoveringSystem {
    let mut sys = CoveringSystem::trivial();
    for _ in 0..rng.random_range(1..9) {
        let i = rng.random_range(0..sys.congruences.len());
        let p = PRIMES[rng.random_range(0..PRIMES.len())];
        let mut trial = sys.clone();
        let c = trial.congruences.swap_remove(i);
        trial.congruences.extend(split(c, p).unwrap());
        if lcm_value(&trial) <= LCM_CAP {
            sys = trial;
        }
    }
    for _ in 0..rng.random_range(0..4) {
        let n = [2u64, 3, 4, 6, 8, 9, 12, 16, 18, 25, 27, 32, 49][rng.random_range(0..13)];
        let extra = if rng.random_bool(0.5) {
            let c = sys.congruences[rng.random_range(0..sys.congruences.len())];
            Congruence::new(c.residue, c.modulus * n).unwrap()
        } else {
            Congruence::reduced(rng.random_range(0..10_000), n).unwrap()
        };
        let mut trial = sys.clone();
        trial.congruences.push(extra);
        if lcm_value(&trial) <= LCM_CAP {
            sys = trial;
        }
    }
    if rng.random_bool(0.3) {
        let p: u64 = if rng.random_bool(0.5) { 2 } else { 3 };
        let q = p.pow(sys.lcm_of().valuation(p) + 1);
        let seed: u64 = rng.random();
        let mut trial = sys.clone();
        for i in 0..p {
            let r = if i < 2 { seed } else { seed.wrapping_mul(i + 7) } % q;
            trial.congruences.push(Congruence::new(r, q).unwrap());
        }
        if lcm_value(&trial) <= LCM_CAP {
            sys = trial;
        }
    }
    sys
}

fn lemma_suite(sys: &CoveringSystem, rng: &mut StdRng, counts: &mut [usize; 4]) -> Result<(), String> {
    let check = |ok: bool, what: &str| if ok { Ok(()) } else { Err(format!("{what} on {sys:?}")) };
    check(covers(sys)?, "generated system does not cover")?;
    let density = |s: &CoveringSystem| reciprocal_sum(s.moduli()).unwrap();
    let divisible = |q: u64| sys.congruences.iter().filter(|c| c.modulus % q == 0).count() as u64;
    for (p, v) in sys.lcm_of().to_pairs() {
        for a in 1..=v {
            let q = p.pow(a);
            let count = divisible(q);
            if count < p {
                let out = lemma1_discard(sys, p, a).unwrap();
                check(covers(&out)?, "lemma 1 broke covering")?;
                check(out.congruences.iter().all(|c| c.modulus % q != 0), "lemma 1 kept a multiple")?;
                counts[0] += 1;
            }
            if a == v && count == p {
                let (out, chosen) = lemma3_replace(sys, p, a).unwrap();
                check(covers(&out)?, "lemma 3 broke covering")?;
                let inner = sys.moduli().iter().filter(|n| *n % q == 0).fold(1u64, |acc, &n| num_lcm(acc, n / q));
                check(chosen.modulus == q / p * inner, "lemma 3 modulus")?;
                counts[1] += 1;
                if let Ok(out) = lemma3_discard_same_class(sys, p, a) {
                    check(covers(&out)?, "same-class discard broke covering")?;
                    counts[2] += 1;
                }
            } else if a == v {
                check(matches!(lemma3_replace(sys, p, a), Err(Error::LemmaPrecondition(_))), "lemma 3 precondition")?;
            }
        }
        let parts = lemma4_reduce(sys, p).unwrap();
        let mut total = Rational::zero();
        for part in &parts {
            check(covers(part)?, "lemma 4 part does not cover")?;
            total = total + density(part);
        }
        check(total == &density(sys) * &Rational::from_integer(p as i64), "lemma 4 density")?;
        let y = rng.random_range(0..LCM_CAP);
        for c in &sys.congruences {
            for j in 0..p {
                let image = reduce_congruence(*c, p, j);
                check(c.contains(j + p * y) == image.is_some_and(|r| r.contains(y)), "lemma 4 class map")?;
            }
        }
        counts[3] += 1;
    }
    Ok(())
}

fn num_lcm(a: u64, b: u64) -> u64 {
    let (mut x, mut y) = (a, b);
    while y != 0 {
        (x, y) = (y, x % y);
    }
    a / x * b
}

fn lemma_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(9);
    let mut counts = [0usize; 4];
    let mut failures = Vec::new();
    let mut big = 0;
    for _ in 0..256 {
        let sys = random_covering(&mut rng);
        big += usize::from(lcm_value(&sys) > LCM_CAP);
        if let Err(e) = lemma_suite(&sys, &mut rng, &mut counts) {
            failures.push(e);
        }
    }
    let exercised = counts.iter().all(|&c| c > 0);
    ensure(
        failures.is_empty() && big == 0 && exercised,
        format!(
            "256 coverings; lemma 1 {}, lemma 3 {}, same-class {}, lemma 4 {} applications; failures {:?}",
            counts[0],
            counts[1],
            counts[2],
            counts[3],
            failures.first()
        ),
    )
}

fn naive_groups(xs: &[u64], t: &Rational) -> usize {
    let n = xs.len();
    let full = (1usize << n) - 1;
    let reaches: Vec<bool> = (0..=full)
        .map(|mask| mask != 0 && reciprocal_sum((0..n).filter(|i| mask >> i & 1 == 1).map(|i| xs[i])).unwrap() >= *t)
        .collect();
    let mut best = vec![0usize; full + 1];
    for mask in 1..=full {
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        let mut b = best[rest];
        let mut sub = rest;
        loop {
            if reaches[sub | low] {
                b = b.max(1 + best[mask ^ (sub | low)]);
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        best[mask] = b;
    }
    best[full]
}

fn grouping() -> Outcome {
    let mut rng = StdRng::seed_from_u64(10);
    let mut bad = Vec::new();
    for _ in 0..500 {
        let len = rng.random_range(0..=10);
        let xs: Vec<u64> = (0..len).map(|_| rng.random_range(1..40)).collect();
        let n = rng.random_range(1..60);
        let t = rat(n, rng.random_range(n..200)).unwrap();
        let ms = ModuliMultiset::from_elements(xs.iter().copied()).unwrap();
        let g = max_threshold_groups(&ms, &t).unwrap();
        let valid = g.groups.len() == g.count && g.groups.iter().all(|grp| group_sum(grp).unwrap() >= t);
        if g.count != naive_groups(&xs, &t) || !valid {
            bad.push((xs, t.to_string()));
        }
    }
    ensure(bad.is_empty(), format!("500 instances, {} disagree {:?}", bad.len(), bad.first()))
}

fn leaves(v: &Value, path: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                path.push(k.clone());
                leaves(x, path, out);
                path.pop();
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                path.push(i.to_string());
                leaves(x, path, out);
                path.pop();
            }
        }
        _ => out.push(path.clone()),
    }
}

fn at<'a>(v: &'a mut Value, path: &[String]) -> &'a mut Value {
    path.iter().fold(v, |v, k| match v {
        Value::Object(m) => m.get_mut(k).unwrap(),
        Value::Array(a) => &mut a[k.parse::<usize>().unwrap()],
        _ => unreachable!(),
    })
}

fn corrupt(v: &Value) -> Value {
    match v {
        Value::Bool(b) => Value::Bool(!b),
        Value::Number(n) => Value::from(n.as_u64().map_or(1, |x| x + 1)),
        Value::String(s) => {
            let mut chars: Vec<char> = s.chars().collect();
            match chars.iter().rposition(|c| c.is_ascii_digit()) {
                Some(i) => chars[i] = if chars[i] == '9' { '8' } else { (chars[i] as u8 + 1) as char },
                None => chars.push('x'),
            }
            Value::String(chars.into_iter().collect())
        }
        Value::Null => Value::from(1u64),
        _ => unreachable!(),
    }
}

fn binary(args: &[&str], cache: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_covergap")).arg("--sieve-cache").arg(cache).args(args).output().unwrap()
}

fn end_to_end() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("sieve.bin");
    let out = dir.path().join("proof.json");
    let start = Instant::now();
    let run = binary(&["prove", "--out", out.to_str().unwrap()], &cache);
    let took = start.elapsed();
    let text = std::fs::read_to_string(&out).map_err(|e| format!("prove wrote no log: {e}"))?;
    let base: Value = serde_json::from_str(&text).unwrap();
    let parsed: ProofLog = serde_json::from_value(base.clone()).unwrap();
    let verdict_ok = run.status.success() && parsed.verdict == VERIFIED && took < Duration::from_secs(360);
    let check_ok = binary(&["check", out.to_str().unwrap()], &cache).status.success();

    let mut paths = Vec::new();
    leaves(&base, &mut Vec::new(), &mut paths);
    let mut missed = Vec::new();
    for path in &paths {
        let mut v = base.clone();
        let slot = at(&mut v, path);
        *slot = corrupt(slot);
        let accepted = match serde_json::from_value::<ProofLog>(v) {
            Err(_) => false,
            Ok(log) => replay(&log).is_ok() && verify(&log, table(), false).is_ok(),
        };
        if accepted {
            missed.push(path.join("."));
        }
    }

    let picks = [
        vec!["verdict"],
        vec!["small_range", "0", "at_least_one"],
        vec!["eq32", "0", "sum", "num"],
        vec!["anchors", "confirmations", "0", "exact", "num"],
        vec!["cases", "0", "steps", "0", "inserted"],
    ];
    let mut cli_missed = Vec::new();
    for (i, pick) in picks.iter().enumerate() {
        let path: Vec<String> = pick.iter().map(|s| s.to_string()).collect();
        let mut v = base.clone();
        let slot = at(&mut v, &path);
        *slot = corrupt(slot);
        let file = dir.path().join(format!("bad{i}.json"));
        std::fs::write(&file, serde_json::to_string_pretty(&v).unwrap()).unwrap();
        if binary(&["check", file.to_str().unwrap()], &cache).status.success() {
            cli_missed.push(path.join("."));
        }
    }
    ensure(
        verdict_ok && check_ok && missed.is_empty() && cli_missed.is_empty(),
        format!(
            "verdict {:?} in {took:.2?}, check accepted: {check_ok}, {} single-field corruptions with {} missed {:?}, \
             {} via the binary with {} missed",
            parsed.verdict,
            paths.len(),
            missed.len(),
            missed.first(),
            picks.len(),
            cli_missed.len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("sieve", sieve),
        ("small range", small_range),
        ("anchor chain", anchors),
        ("lcm profiles", lcm_profiles),
        ("divisor filter", divisor_filter),
        ("case analyses", cases),
        ("deviation report", deviations),
        ("nested m=7", nested_m7),
        ("lemma oracle", lemma_oracle),
        ("bin covering", grouping),
        ("end to end", end_to_end),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} {name}: PASS - {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL - {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
