//! Lcm profiles `L_m` and the divisor reciprocal sums built on them.
//!
//! For a distinct covering with moduli in `[m, k*m]`, the lcm of a minimal
//! subcovering divides `L_m`. Each prime enters with the smaller of two
//! exponent caps: the counting rule (at least `p + 1` multiples of `p^a` in the
//! interval) and the discard rule `p^a (p + 1) <= k*m`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::factor_sieve::FactorTable;
use crate::numeric::{reciprocal_sum, Rational};

/// A positive integer as a map from primes to positive exponents; empty means 1.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactoredInteger {
    factors: BTreeMap<u64, u32>,
}

impl FactoredInteger {
    pub fn one() -> Self {
        Self::default()
    }

    /// Trust the caller that every key is prime.
    pub fn from_pairs<I: IntoIterator<Item = (u64, u32)>>(pairs: I) -> Self {
        let mut f = Self::one();
        for (p, e) in pairs {
            f.multiply_prime(p, e);
        }
        f
    }

    /// Factor by trial division; fine for the moduli this crate handles.
    pub fn from_u64(mut n: u64) -> Result<Self> {
        if n == 0 {
            return Err(invalid!("cannot factor 0"));
        }
        let mut f = Self::one();
        let mut p = 2u64;
        while p * p <= n {
            while n.is_multiple_of(p) {
                f.multiply_prime(p, 1);
                n /= p;
            }
            p += if p == 2 { 1 } else { 2 };
        }
        if n > 1 {
            f.multiply_prime(n, 1);
        }
        Ok(f)
    }

    pub fn multiply_prime(&mut self, p: u64, e: u32) {
        if e > 0 {
            *self.factors.entry(p).or_insert(0) += e;
        }
    }

    pub fn valuation(&self, p: u64) -> u32 {
        self.factors.get(&p).copied().unwrap_or(0)
    }

    pub fn to_pairs(&self) -> Vec<(u64, u32)> {
        self.factors.iter().map(|(&p, &e)| (p, e)).collect()
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.keys().copied()
    }

    pub fn value(&self) -> BigUint {
        self.factors.iter().fold(BigUint::one(), |acc, (&p, &e)| acc * BigUint::from(p).pow(e))
    }

    pub fn value_u64(&self) -> Option<u64> {
        self.factors.iter().try_fold(1u64, |acc, (&p, &e)| acc.checked_mul(p.checked_pow(e)?))
    }

    pub fn lcm(&self, other: &FactoredInteger) -> FactoredInteger {
        let mut out = self.clone();
        for (&p, &e) in &other.factors {
            let slot = out.factors.entry(p).or_insert(0);
            *slot = (*slot).max(e);
        }
        out
    }

    /// Does `n` divide this integer?
    pub fn divisible_by(&self, n: u64) -> bool {
        match FactoredInteger::from_u64(n) {
            Ok(f) => f.factors.iter().all(|(&p, &e)| self.valuation(p) >= e),
            Err(_) => false,
        }
    }
}

impl fmt::Display for FactoredInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("1");
        }
        let mut first = true;
        for (&p, &e) in &self.factors {
            if !first {
                f.write_str(" * ")?;
            }
            first = false;
            if e == 1 {
                write!(f, "{p}")?;
            } else {
                write!(f, "{p}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Largest `a >= 0` with `p^a (p + 1) <= d`.
pub fn lemma2_exponent(p: u64, d: u64) -> u32 {
    let (p, d) = (u128::from(p), u128::from(d));
    let mut a = 0;
    let mut pa = 1u128;
    while pa * p * (p + 1) <= d {
        pa *= p;
        a += 1;
    }
    a
}

/// Number of multiples of `q` in `[lo, hi]`.
pub fn multiples_in(q: u64, lo: u64, hi: u64) -> u64 {
    if lo > hi {
        return 0;
    }
    hi / q - (lo - 1) / q
}

/// Largest `a >= 0` such that `[m, k*m]` holds at least `p + 1` multiples of `p^a`.
pub fn lemma1_exponent(p: u64, m: u64, k: u64) -> u32 {
    let hi = k * m;
    let mut a = 0;
    let mut q = p;
    while multiples_in(q, m, hi) > p {
        a += 1;
        match q.checked_mul(p) {
            Some(next) if next <= hi => q = next,
            _ => break,
        }
    }
    a
}

/// One prime's entry in an lcm profile, with both caps kept for the record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeCap {
    pub prime: u64,
    pub counting_cap: u32,
    pub discard_cap: u32,
}

impl PrimeCap {
    pub fn exponent(&self) -> u32 {
        self.counting_cap.min(self.discard_cap)
    }
}

/// Both caps for every prime below the smoothness bound `p^2 < (k-1)m + 1`.
pub fn prime_caps(m: u64, k: u64, table: &FactorTable) -> Result<Vec<PrimeCap>> {
    if m < 3 || k < 2 {
        return Err(invalid!("lcm profile needs m >= 3 and k >= 2 (got m = {m}, k = {k})"));
    }
    let bound = (k - 1) * m + 1;
    let root = bound.isqrt();
    let primes = table.primes_up_to(root)?;
    Ok(primes
        .into_iter()
        .filter(|&p| p * p < bound)
        .map(|p| PrimeCap { prime: p, counting_cap: lemma1_exponent(p, m, k), discard_cap: lemma2_exponent(p, k * m) })
        .collect())
}

/// The lcm profile `L_m` for moduli in `[m, k*m]`.
pub fn compute_l(m: u64, k: u64, table: &FactorTable) -> Result<FactoredInteger> {
    Ok(FactoredInteger::from_pairs(prime_caps(m, k, table)?.iter().map(|c| (c.prime, c.exponent()))))
}

/// Primes where the discard rule alone would allow a larger exponent than the profile uses.
pub fn cap_divergences(m: u64, k: u64, table: &FactorTable) -> Result<Vec<PrimeCap>> {
    Ok(prime_caps(m, k, table)?.into_iter().filter(|c| c.counting_cap != c.discard_cap).collect())
}

/// All divisors of `f` in `[lo, hi]`, ascending.
pub fn divisors_in_interval(f: &FactoredInteger, lo: u64, hi: u64) -> Vec<u64> {
    fn descend(pairs: &[(u64, u32)], cur: u64, hi: u64, out: &mut Vec<u64>) {
        let Some((&(p, e), rest)) = pairs.split_first() else {
            out.push(cur);
            return;
        };
        let mut x = cur;
        for i in 0..=e {
            descend(rest, x, hi, out);
            if i == e {
                break;
            }
            match x.checked_mul(p) {
                Some(next) if next <= hi => x = next,
                _ => break,
            }
        }
    }
    if lo > hi {
        return Vec::new();
    }
    let mut out = Vec::new();
    descend(&f.to_pairs(), 1, hi, &mut out);
    out.retain(|&d| d >= lo);
    out.sort_unstable();
    out
}

/// Exact `Σ 1/d` over the divisors of `f` in `[lo, hi]`.
pub fn divisor_reciprocal_sum(f: &FactoredInteger, lo: u64, hi: u64) -> Result<Rational> {
    reciprocal_sum(divisors_in_interval(f, lo, hi))
}

/// `"2^4 * 3^2 * 5 * 7 = 5040"`.
pub fn describe(f: &FactoredInteger) -> String {
    alloc::format!("{f} = {}", f.value())
}
