//! Scripted case analyses for the values of `m` whose divisor sum reaches one.
//!
//! Scripts are data: the primes to reduce by and the values printed alongside
//! each step. The engine recomputes everything and records every place where a
//! printed value disagrees with the computation.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor_sieve::FactorTable;
use crate::lcm_profile::{compute_l, divisors_in_interval};
use crate::numeric::{Rational, RationalRecord};
use crate::reduction::{
    bins_coverable, enumerate_feasible_assignments, lemma3_multiset, mod_p_split, tight_bin_moduli, BinVerdict,
    ModSplit, ModuliMultiset,
};

use super::{numeric_deviation, structural_deviation, Deviation};

#[derive(Debug, Clone, Copy)]
pub struct ReplaceScript {
    pub p: u64,
    pub a: u32,
    pub expected_count: usize,
    pub expected_modulus: u64,
    pub published_multiples: Option<&'static [u64]>,
    pub published_sum: Option<&'static str>,
}

/// The relabeling remark closing a split: elements of `M1` up to `last_assigned` fill one covering each.
#[derive(Debug, Clone, Copy)]
pub struct Leftover {
    pub last_assigned: u64,
    pub stated_count: usize,
    pub listed: Option<&'static [u64]>,
}

#[derive(Debug, Clone, Copy)]
pub struct SplitScript {
    pub p: u64,
    pub expect_feasible: bool,
    pub published_m0: Option<&'static [u64]>,
    pub published_m1: Option<&'static [u64]>,
    pub stated_m1_count: Option<usize>,
    pub published_s0: Option<&'static str>,
    pub leftover: Option<Leftover>,
    /// Applied to every tight bin of every feasible assignment.
    pub nested: Option<&'static SplitScript>,
}

const SPLIT: SplitScript = SplitScript {
    p: 0,
    expect_feasible: false,
    published_m0: None,
    published_m1: None,
    stated_m1_count: None,
    published_s0: None,
    leftover: None,
    nested: None,
};

#[derive(Debug, Clone, Copy)]
pub enum ScriptStep {
    Replace(ReplaceScript),
    Split(SplitScript),
}

#[derive(Debug, Clone, Copy)]
pub struct CaseScript {
    pub m: u64,
    /// Not in the published argument; closes a gap found by recomputation.
    pub supplementary: bool,
    pub published_sum: Option<&'static str>,
    pub steps: &'static [ScriptStep],
}

const fn left(last_assigned: u64, stated_count: usize, listed: Option<&'static [u64]>) -> Option<Leftover> {
    Some(Leftover { last_assigned, stated_count, listed })
}

const M1_13: &[u64] = &[2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 14, 15, 16];
const M1_13_18: &[u64] = &[2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 14, 15, 16, 18];
const NINETEEN: &[u64] = &[57, 76, 95, 114, 133, 152, 171, 190, 209, 228, 247, 266, 285, 304, 323, 342, 380, 399, 418];

const fn published_case(m: u64, sum: &'static str, steps: &'static [ScriptStep]) -> CaseScript {
    CaseScript { m, supplementary: false, published_sum: Some(sum), steps }
}

const fn nineteen(sum: &'static str) -> [ScriptStep; 1] {
    [ScriptStep::Replace(ReplaceScript {
        p: 19,
        a: 1,
        expected_count: 19,
        expected_modulus: 12_252_240,
        published_multiples: Some(NINETEEN),
        published_sum: Some(sum),
    })]
}

const fn split19(m1: &'static [u64], count: usize, s0: &'static str, leftover: Option<Leftover>) -> [ScriptStep; 1] {
    [ScriptStep::Split(SplitScript {
        p: 19,
        published_m1: Some(m1),
        stated_m1_count: Some(count),
        published_s0: Some(s0),
        leftover,
        ..SPLIT
    })]
}

const fn split13(m1: &'static [u64], count: usize, s0: &'static str, leftover: Option<Leftover>) -> [ScriptStep; 1] {
    [ScriptStep::Split(SplitScript {
        p: 13,
        published_m1: Some(m1),
        stated_m1_count: Some(count),
        published_s0: Some(s0),
        leftover,
        ..SPLIT
    })]
}

const M7_NESTED: SplitScript = SplitScript {
    p: 5,
    published_m0: Some(&[8, 9, 12, 18, 24, 36, 24]),
    published_m1: Some(&[1, 2, 3, 4, 6, 8, 9, 12]),
    stated_m1_count: Some(8),
    published_s0: Some("0.486111"),
    leftover: left(1, 7, Some(&[2, 3, 4, 6, 8, 9, 12])),
    ..SPLIT
};

const STEPS_6: &[ScriptStep] = &[
    ScriptStep::Replace(ReplaceScript {
        p: 7,
        a: 1,
        expected_count: 7,
        expected_modulus: 120,
        published_multiples: Some(&[7, 14, 21, 28, 35, 42, 56]),
        published_sum: Some("1.016667"),
    }),
    ScriptStep::Replace(ReplaceScript {
        p: 2,
        a: 4,
        expected_count: 2,
        expected_modulus: 24,
        published_multiples: Some(&[16, 48]),
        published_sum: Some("0.933333"),
    }),
];

const STEPS_7: &[ScriptStep] = &[
    ScriptStep::Replace(ReplaceScript {
        p: 2,
        a: 4,
        expected_count: 2,
        expected_modulus: 24,
        published_multiples: Some(&[16, 48]),
        published_sum: Some("1.198016"),
    }),
    ScriptStep::Split(SplitScript {
        p: 7,
        expect_feasible: true,
        published_m0: Some(&[8, 9, 10, 12, 15, 18, 20, 24, 30, 36, 40, 45, 60, 24]),
        published_m1: Some(&[1, 2, 3, 4, 5, 6, 8, 9, 10]),
        stated_m1_count: Some(9),
        published_s0: Some("0.8"),
        leftover: left(4, 5, Some(&[5, 6, 8, 9, 10])),
        nested: Some(&M7_NESTED),
    }),
];

const STEPS_8: &[ScriptStep] = &[ScriptStep::Split(SplitScript {
    p: 7,
    published_m0: Some(&[8, 9, 10, 12, 15, 16, 18, 20, 24, 30, 36, 40, 45, 48, 60, 72, 80]),
    published_m1: Some(&[2, 3, 4, 5, 6, 8, 9, 10]),
    stated_m1_count: Some(8),
    published_s0: Some("0.868056"),
    leftover: left(6, 3, Some(&[8, 9, 10])),
    ..SPLIT
})];

const STEPS_9: &[ScriptStep] = &[ScriptStep::Split(SplitScript {
    p: 7,
    published_m0: Some(&[9, 10, 12, 15, 16, 18, 20, 24, 30, 36, 40, 45, 48, 60, 72, 80, 90]),
    published_m1: Some(&[2, 3, 4, 5, 6, 8, 9, 10, 12]),
    stated_m1_count: Some(9),
    published_s0: Some("0.754167"),
    leftover: left(4, 6, None),
    ..SPLIT
})];

const STEPS_15: &[ScriptStep] = &[ScriptStep::Split(SplitScript {
    p: 11,
    published_m1: Some(&[2, 3, 4, 5, 6, 7, 8, 9, 10, 12]),
    stated_m1_count: Some(10),
    published_s0: Some("0.908056"),
    leftover: left(12, 0, None),
    ..SPLIT
})];

const STEPS_16: &[ScriptStep] = &[
    ScriptStep::Replace(ReplaceScript {
        p: 5,
        a: 2,
        expected_count: 5,
        expected_modulus: 60,
        published_multiples: Some(&[25, 50, 75, 100, 150]),
        published_sum: Some("1.030402"),
    }),
    ScriptStep::Replace(ReplaceScript {
        p: 11,
        a: 1,
        expected_count: 11,
        expected_modulus: 2520,
        published_multiples: Some(&[22, 33, 44, 55, 66, 77, 88, 99, 110, 132, 154]),
        published_sum: Some("0.841369"),
    }),
];

const STEPS_18: &[ScriptStep] = &[ScriptStep::Split(SplitScript {
    p: 11,
    published_m1: Some(&[2, 3, 4, 5, 6, 7, 8, 9, 10, 12, 14, 15, 16]),
    stated_m1_count: Some(13),
    published_s0: Some("0.802361"),
    leftover: left(5, 8, Some(&[6, 7, 8, 9, 10, 12, 14, 15, 16])),
    ..SPLIT
})];

const STEPS_20: &[ScriptStep] = &[ScriptStep::Replace(ReplaceScript {
    p: 13,
    a: 1,
    expected_count: 13,
    expected_modulus: 27_720,
    published_multiples: Some(&[26, 39, 52, 65, 78, 91, 104, 117, 130, 143, 156, 182, 195]),
    published_sum: Some("0.984189"),
})];

const STEPS_21: &[ScriptStep] = &[
    ScriptStep::Replace(ReplaceScript {
        p: 2,
        a: 6,
        expected_count: 2,
        expected_modulus: 96,
        published_multiples: Some(&[64, 192]),
        published_sum: Some("1.156349"),
    }),
    ScriptStep::Split(SplitScript {
        p: 13,
        published_m1: Some(M1_13),
        stated_m1_count: Some(14),
        published_s0: Some("0.928498"),
        leftover: left(12, 3, Some(&[14, 15, 16])),
        ..SPLIT
    }),
];

const STEPS_22: &[ScriptStep] = &split13(M1_13, 14, "0.900471", left(10, 5, Some(&[11, 12, 14, 15, 16])));
const STEPS_23: &[ScriptStep] = &split13(M1_13, 14, "0.863925", left(7, 8, Some(&[8, 9, 10, 11, 12, 14, 15, 16])));
const STEPS_24: &[ScriptStep] =
    &split13(M1_13_18, 15, "0.872421", left(7, 9, Some(&[8, 9, 10, 11, 12, 14, 15, 16, 18])));
const STEPS_25: &[ScriptStep] =
    &split13(M1_13_18, 15, "0.830754", left(5, 11, Some(&[6, 7, 8, 9, 10, 11, 12, 14, 15, 16, 18])));

const STEPS_33: &[ScriptStep] = &[ScriptStep::Replace(ReplaceScript {
    p: 17,
    a: 1,
    expected_count: 17,
    expected_modulus: 720_720,
    published_multiples: Some(&[34, 51, 68, 85, 102, 119, 136, 153, 170, 187, 204, 221, 238, 255, 272, 234]),
    published_sum: Some("0.876758"),
})];

const STEPS_42: &[ScriptStep] = &nineteen("0.964332");
const STEPS_43: &[ScriptStep] = &nineteen("0.945206");
const STEPS_45: &[ScriptStep] = &nineteen("0.936051");

const STEPS_44: &[ScriptStep] = &split19(
    &[3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 20, 21, 22],
    19,
    "0.949794",
    left(18, 3, Some(&[20, 21, 22])),
);
const STEPS_46: &[ScriptStep] = &split19(
    &[3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 20, 21, 22, 24],
    20,
    "0.918205",
    left(12, 10, Some(&[13, 14, 15, 16, 17, 18, 20, 21, 22, 24])),
);
const STEPS_47: &[ScriptStep] = &split19(
    &[3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 20, 21, 22, 23, 24],
    22,
    "0.922506",
    left(12, 10, Some(&[13, 14, 15, 16, 17, 18, 20, 21, 22, 23, 24])),
);
const STEPS_48: &[ScriptStep] = &split19(
    &[3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 20, 21, 22, 24, 25],
    21,
    "0.92669",
    left(13, 10, Some(&[14, 15, 16, 17, 18, 20, 21, 22, 24, 25])),
);
const STEPS_49: &[ScriptStep] = &split19(
    &[3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 20, 21, 22, 23, 24, 25],
    22,
    "0.907898",
    left(10, 14, Some(&[11, 12, 13, 14, 15, 16, 17, 18, 20, 21, 22, 23, 24, 25])),
);
const STEPS_50: &[ScriptStep] = &split19(
    &[3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20, 21, 22, 23, 24, 25, 26],
    23,
    "0.88951",
    left(9, 15, Some(&[10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20, 21, 22, 23, 24, 25, 26])),
);

const REPLACE_23: &[ScriptStep] = &[ScriptStep::Replace(ReplaceScript {
    p: 23,
    a: 1,
    expected_count: 23,
    expected_modulus: 1_163_962_800,
    published_multiples: None,
    published_sum: None,
})];
const SPLIT_23: &[ScriptStep] = &[ScriptStep::Split(SplitScript { p: 23, ..SPLIT })];

const fn supplementary(m: u64, steps: &'static [ScriptStep]) -> CaseScript {
    CaseScript { m, supplementary: true, published_sum: None, steps }
}

/// Scripts for `k = 10`, ascending in `m`.
pub const CASE_SCRIPTS: [CaseScript; 28] = [
    published_case(6, "1.3761905", STEPS_6),
    published_case(7, "1.2396825", STEPS_7),
    published_case(8, "1.1232142", STEPS_8),
    published_case(9, "1.0212301", STEPS_9),
    published_case(15, "1.0909921", STEPS_15),
    published_case(16, "1.0370689", STEPS_16),
    published_case(18, "1.0035335", STEPS_18),
    published_case(20, "1.1565610", STEPS_20),
    published_case(21, "1.1161306", STEPS_21),
    published_case(22, "1.0776866", STEPS_22),
    published_case(23, "1.0411408", STEPS_23),
    published_case(24, "1.0539099", STEPS_24),
    published_case(25, "1.0122433", STEPS_25),
    published_case(33, "1.0200675", STEPS_33),
    published_case(42, "1.0768676", STEPS_42),
    published_case(43, "1.0577420", STEPS_43),
    published_case(44, "1.0623295", STEPS_44),
    published_case(45, "1.0485866", STEPS_45),
    published_case(46, "1.0329338", STEPS_46),
    published_case(47, "1.0372351", STEPS_47),
    published_case(48, "1.0435245", STEPS_48),
    published_case(49, "1.0247320", STEPS_49),
    published_case(50, "1.0083683", STEPS_50),
    supplementary(60, REPLACE_23),
    supplementary(61, REPLACE_23),
    supplementary(62, REPLACE_23),
    supplementary(63, SPLIT_23),
    supplementary(64, SPLIT_23),
];

pub fn script_for(m: u64) -> Option<&'static CaseScript> {
    CASE_SCRIPTS.iter().find(|s| s.m == m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseVerdict {
    ContradictionEstablished,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum StepLog {
    Replace {
        p: u64,
        a: u32,
        removed: Vec<u64>,
        inserted: u64,
        sum: RationalRecord,
    },
    /// Fewer than `p` multiples of `p^a`: all of them are dropped.
    Discard {
        p: u64,
        a: u32,
        removed: Vec<u64>,
        sum: RationalRecord,
    },
    Split(SplitLog),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitLog {
    pub p: u64,
    pub m0: ModuliMultiset,
    pub m1: ModuliMultiset,
    pub s0: RationalRecord,
    pub deficit: RationalRecord,
    pub bins: BinVerdict,
    /// For a feasible split: each feasible assignment with the tight bin that closed it.
    pub continuations: Vec<Continuation>,
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Continuation {
    pub bins: Vec<Vec<u64>>,
    pub tight_bin: Option<Vec<u64>>,
    pub nested: Option<SplitLog>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseReport {
    pub m: u64,
    pub supplementary: bool,
    pub l_m: String,
    pub initial_sum: RationalRecord,
    pub steps: Vec<StepLog>,
    pub verdict: CaseVerdict,
    pub failure: Option<String>,
    pub deviations: Vec<Deviation>,
}

impl CaseReport {
    pub fn established(&self) -> bool {
        self.verdict == CaseVerdict::ContradictionEstablished
    }
}

struct Runner {
    m: u64,
    deviations: Vec<Deviation>,
}

impl Runner {
    fn loc(&self, what: &str) -> String {
        alloc::format!("m={} {what}", self.m)
    }

    fn compare_number(&mut self, what: &str, printed: Option<&str>, computed: &Rational) -> Result<()> {
        if let Some(printed) = printed {
            let loc = self.loc(what);
            if let Some(d) = numeric_deviation(loc, printed, computed)? {
                self.deviations.push(d);
            }
        }
        Ok(())
    }

    fn compare_list(&mut self, what: &str, printed: Option<&[u64]>, computed: &[u64]) {
        if let Some(printed) = printed {
            let mut a = printed.to_vec();
            a.sort_unstable();
            if a != computed {
                self.deviations.push(structural_deviation(self.loc(what), list(printed), list(computed)));
            }
        }
    }

    fn compare_count(&mut self, what: &str, stated: usize, actual: usize) {
        if stated != actual {
            self.deviations.push(structural_deviation(self.loc(what), stated.to_string(), actual.to_string()));
        }
    }

    fn split(&mut self, s: &ModuliMultiset, script: &SplitScript, label: &str) -> Result<SplitLog> {
        let split = mod_p_split(s, script.p)?;
        let m1 = split.m1.elements();
        self.compare_list(&alloc::format!("{label} M0"), script.published_m0, &split.m0.elements());
        self.compare_list(&alloc::format!("{label} M1"), script.published_m1, &m1);
        if let (Some(stated), Some(listed)) = (script.stated_m1_count, script.published_m1) {
            self.compare_count(&alloc::format!("{label} stated |M1| vs listed"), stated, listed.len());
        }
        self.compare_number(&alloc::format!("{label} S0"), script.published_s0, &split.s0)?;
        if let Some(l) = script.leftover {
            let rest: Vec<u64> = m1.iter().copied().filter(|&d| d > l.last_assigned).collect();
            match l.listed {
                Some(listed) => {
                    self.compare_count(
                        &alloc::format!("{label} leftover stated vs listed"),
                        l.stated_count,
                        listed.len(),
                    );
                    self.compare_list(&alloc::format!("{label} leftover"), Some(listed), &rest);
                }
                None => self.compare_count(&alloc::format!("{label} leftover count"), l.stated_count, rest.len()),
            }
        }
        let bins = bins_coverable(&split)?;
        let feasible = matches!(bins, BinVerdict::Feasible { .. });
        if feasible != script.expect_feasible {
            self.deviations.push(structural_deviation(
                self.loc(&alloc::format!("{label} bin verdict")),
                feasibility(script.expect_feasible).into(),
                feasibility(feasible).into(),
            ));
        }
        let mut log = SplitLog {
            p: split.p,
            m0: split.m0.clone(),
            m1: split.m1.clone(),
            s0: (&split.s0).into(),
            deficit: (&split.deficit).into(),
            bins: bins.clone(),
            continuations: Vec::new(),
            closed: matches!(bins, BinVerdict::Infeasible { .. }),
        };
        if let (BinVerdict::Feasible { .. }, Some(nested)) = (&bins, script.nested) {
            log.closed = self.continue_tight(&split, nested, label, &mut log.continuations)?;
        }
        Ok(log)
    }

    /// Every feasible assignment must have a tight bin whose own split is infeasible.
    fn continue_tight(
        &mut self,
        split: &ModSplit,
        nested: &SplitScript,
        label: &str,
        out: &mut Vec<Continuation>,
    ) -> Result<bool> {
        let assignments = enumerate_feasible_assignments(split, true)?;
        let mut all_closed = true;
        for (i, a) in assignments.iter().enumerate() {
            let mut found = Continuation { bins: a.bins.clone(), tight_bin: None, nested: None };
            for &b in &a.tight {
                let sub = tight_bin_moduli(split, a, b)?;
                // Deviations are recorded once, from the first assignment.
                let saved = self.deviations.len();
                let log = self.split(&sub, nested, &alloc::format!("{label} nested mod {}", nested.p))?;
                if i > 0 {
                    self.deviations.truncate(saved);
                }
                let closed = log.closed;
                found = Continuation { bins: a.bins.clone(), tight_bin: Some(a.bins[b].clone()), nested: Some(log) };
                if closed {
                    break;
                }
            }
            all_closed &= found.nested.as_ref().is_some_and(|n| n.closed);
            out.push(found);
        }
        Ok(all_closed && !assignments.is_empty())
    }
}

fn feasibility(f: bool) -> &'static str {
    if f {
        "feasible"
    } else {
        "infeasible"
    }
}

fn list(v: &[u64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    alloc::format!("{{{}}}", parts.join(", "))
}

/// The starting multiset: divisors of `L_m` in `[m, k*m]`.
pub fn initial_multiset(m: u64, k: u64, table: &FactorTable) -> Result<ModuliMultiset> {
    let l = compute_l(m, k, table)?;
    ModuliMultiset::from_elements(divisors_in_interval(&l, m, k * m))
}

pub fn run_script(script: &CaseScript, k: u64, table: &FactorTable) -> Result<CaseReport> {
    let m = script.m;
    let l = compute_l(m, k, table)?;
    let mut s = ModuliMultiset::from_elements(divisors_in_interval(&l, m, k * m))?;
    let initial = s.reciprocal_sum()?;
    let mut r = Runner { m, deviations: Vec::new() };
    r.compare_number("divisor sum", script.published_sum, &initial)?;
    let mut steps = Vec::new();
    let mut failure = None;
    let mut closed = false;
    for (i, step) in script.steps.iter().enumerate() {
        let label = alloc::format!("step {}", i + 1);
        match step {
            ScriptStep::Replace(rs) => match replace_step(&mut r, &s, rs, &label)? {
                Ok((log, next)) => {
                    s = next;
                    let sum = s.reciprocal_sum()?;
                    closed = sum.less_than_one();
                    steps.push(log);
                }
                Err(why) => {
                    failure = Some(alloc::format!("{label}: {why}"));
                    break;
                }
            },
            ScriptStep::Split(ss) => {
                let log = r.split(&s, ss, &label)?;
                closed = log.closed;
                if !closed {
                    failure = Some(alloc::format!("{label}: mod {} split does not close", ss.p));
                }
                steps.push(StepLog::Split(log));
                break;
            }
        }
    }
    if !closed && failure.is_none() {
        failure = Some("reciprocal sum is still at least one".into());
    }
    Ok(CaseReport {
        m,
        supplementary: script.supplementary,
        l_m: alloc::format!("{l}"),
        initial_sum: (&initial).into(),
        steps,
        verdict: if closed && failure.is_none() { CaseVerdict::ContradictionEstablished } else { CaseVerdict::Failed },
        failure,
        deviations: r.deviations,
    })
}

type StepOutcome = core::result::Result<(StepLog, ModuliMultiset), String>;

fn replace_step(r: &mut Runner, s: &ModuliMultiset, rs: &ReplaceScript, label: &str) -> Result<StepOutcome> {
    let pa = rs.p.checked_pow(rs.a).ok_or_else(|| Error::Overflow("prime power".into()))?;
    let multiples = s.multiples_of(pa);
    r.compare_count(&alloc::format!("{label} multiples of {}^{}", rs.p, rs.a), rs.expected_count, multiples.len());
    r.compare_list(&alloc::format!("{label} multiples listed"), rs.published_multiples, &multiples);
    if !multiples.is_empty() {
        let modulus = crate::covering::replacement_modulus(rs.p, rs.a, &multiples)?;
        if modulus != rs.expected_modulus {
            r.deviations.push(structural_deviation(
                r.loc(&alloc::format!("{label} replacement modulus")),
                rs.expected_modulus.to_string(),
                modulus.to_string(),
            ));
        }
    }
    let (log, next) = if (multiples.len() as u64) < rs.p {
        let v = s.lcm()?.valuation(rs.p);
        if v < rs.a || multiples.is_empty() {
            return Ok(Err(alloc::format!("{}^{} divides no modulus", rs.p, rs.a)));
        }
        let mut next = s.clone();
        for &n in &multiples {
            next.remove_one(n);
        }
        let sum = next.reciprocal_sum()?;
        (StepLog::Discard { p: rs.p, a: rs.a, removed: multiples, sum: (&sum).into() }, next)
    } else {
        match lemma3_multiset(s, rs.p, rs.a) {
            Ok(rep) => {
                let sum = rep.result.reciprocal_sum()?;
                (
                    StepLog::Replace {
                        p: rs.p,
                        a: rs.a,
                        removed: rep.removed,
                        inserted: rep.inserted,
                        sum: (&sum).into(),
                    },
                    rep.result,
                )
            }
            Err(Error::LemmaPrecondition(why)) => return Ok(Err(why)),
            Err(e) => return Err(e),
        }
    };
    let sum = next.reciprocal_sum()?;
    r.compare_number(&alloc::format!("{label} sum"), rs.published_sum, &sum)?;
    Ok(Ok((log, next)))
}

/// Run the script for `m`; `m` must have one.
pub fn run_case(m: u64, k: u64, table: &FactorTable) -> Result<CaseReport> {
    if k != 10 {
        return Err(crate::error::invalid!("case scripts exist only for k = 10"));
    }
    let script = script_for(m).ok_or_else(|| crate::error::invalid!("no case script for m = {m}"))?;
    run_script(script, k, table)
}
