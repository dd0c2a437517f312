//! Exact, allocation-only engine that certifies there is no distinct covering
//! system whose moduli all lie in `[m, k*m]` (for `k = 10` and every `m >= 3`).
//!
//! The crate is `no_std` and needs only `alloc`. File formats, the sieve cache,
//! and the command-line driver live in the `covergap` companion crate.
//!
//! Module map:
//!
//! * [`factor_sieve`]: smallest / largest prime factor tables.
//! * [`numeric`]: exact [`Rational`] values and the directed-rounding
//!   [`UpperFixed`] accumulator.
//! * [`smooth_scan`]: smooth reciprocal sums `T_m`, the anchor chain and the
//!   small-range classification.
//! * [`lcm_profile`]: lcm profiles `L_m` and divisor reciprocal sums.
//! * [`covering`]: concrete covering systems, the brute-force oracle and the
//!   reduction lemmas as executable transformations.
//! * [`reduction`]: moduli multisets, mod-`p` splitting and exact bin-covering
//!   search.
//! * [`proof`]: case scripts, the proof log and its replay checker.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod covering;
pub mod error;
pub mod factor_sieve;
pub mod lcm_profile;
pub mod numeric;
pub mod proof;
pub mod reduction;
pub mod smooth_scan;

pub use covering::{Congruence, CoveringSystem};
pub use error::{Error, Result};
pub use factor_sieve::FactorTable;
pub use lcm_profile::FactoredInteger;
pub use numeric::{Rational, RationalRecord, UpperFixed};
pub use proof::{CaseReport, ProofLog};
pub use reduction::{ModSplit, ModuliMultiset};
pub use smooth_scan::{AnchorChain, ScanConfig};
