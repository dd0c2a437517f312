//! Smallest and largest prime factor tables.
//!
//! Entries are 32-bit, which is enough for every limit below `2^32`; the
//! default limit is `10 * 616_000`. `P(1) = 1` by convention.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::lcm_profile::FactoredInteger;

/// Default sieve bound: ten times the largest minimum modulus of a distinct covering.
pub const DEFAULT_LIMIT: u64 = 6_160_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorTable {
    limit: u32,
    // Both arrays are indexed by n itself; slot 0 is unused.
    lpf: Vec<u32>,
    spf: Vec<u32>,
}

impl FactorTable {
    /// Sieve of Eratosthenes recording the first (smallest) and last (largest)
    /// prime that strikes each index.
    pub fn build(limit: u64) -> Result<Self> {
        if limit == 0 {
            return Err(invalid!("sieve limit must be positive"));
        }
        let limit = u32::try_from(limit).map_err(|_| invalid!("sieve limit {limit} exceeds 2^32 - 1"))?;
        let len = limit as usize + 1;
        let mut lpf = vec![0u32; len];
        let mut spf = vec![0u32; len];
        lpf[1] = 1;
        spf[1] = 1;
        for p in 2..len {
            if spf[p] != 0 {
                continue;
            }
            let prime = p as u32;
            let mut j = p;
            while j < len {
                if spf[j] == 0 {
                    spf[j] = prime;
                }
                lpf[j] = prime;
                j += p;
            }
        }
        Ok(FactorTable { limit, lpf, spf })
    }

    /// Reassemble a table from stored arrays (index 1..=limit, no slot 0).
    ///
    /// Structural checks only: every entry divides its index, prime entries are
    /// fixed points, and the entries agree with the recursion
    /// `lpf(n) = max(spf(n), lpf(n / spf(n)))`.
    pub fn from_parts(limit: u64, lpf: &[u32], spf: &[u32]) -> Result<Self> {
        if limit == 0 || limit > u64::from(u32::MAX) {
            return Err(invalid!("sieve limit {limit} out of range"));
        }
        if lpf.len() as u64 != limit || spf.len() as u64 != limit {
            return Err(Error::Malformed(alloc::format!(
                "expected {limit} entries, found {} and {}",
                lpf.len(),
                spf.len()
            )));
        }
        let mut l = Vec::with_capacity(lpf.len() + 1);
        l.push(0);
        l.extend_from_slice(lpf);
        let mut s = Vec::with_capacity(spf.len() + 1);
        s.push(0);
        s.extend_from_slice(spf);
        if l[1] != 1 || s[1] != 1 {
            return Err(Error::Malformed("entry for 1 must be 1".into()));
        }
        for n in 2..l.len() {
            let (big, small) = (l[n] as usize, s[n] as usize);
            let bad = small < 2
                || big < small
                || big > n
                || n % small != 0
                || n % big != 0
                || s[small] as usize != small
                || s[big] as usize != big;
            if bad {
                return Err(Error::Malformed(alloc::format!("inconsistent entry at {n}")));
            }
            let rest = n / small;
            if rest > 1 && (small > s[rest] as usize || big != small.max(l[rest] as usize)) {
                return Err(Error::Malformed(alloc::format!("inconsistent entry at {n}")));
            }
        }
        Ok(FactorTable { limit: limit as u32, lpf: l, spf: s })
    }

    pub fn limit(&self) -> u64 {
        u64::from(self.limit)
    }

    /// Largest prime factor array for `1..=limit`.
    pub fn lpf_entries(&self) -> &[u32] {
        &self.lpf[1..]
    }

    /// Smallest prime factor array for `1..=limit`.
    pub fn spf_entries(&self) -> &[u32] {
        &self.spf[1..]
    }

    fn check(&self, n: u64) -> Result<usize> {
        if n == 0 || n > self.limit() {
            return Err(invalid!("{n} outside sieve range [1, {}]", self.limit));
        }
        Ok(n as usize)
    }

    /// `P(n)`, the largest prime divisor of `n`.
    pub fn largest_prime_factor(&self, n: u64) -> Result<u64> {
        self.check(n).map(|i| u64::from(self.lpf[i]))
    }

    pub fn smallest_prime_factor(&self, n: u64) -> Result<u64> {
        self.check(n).map(|i| u64::from(self.spf[i]))
    }

    /// Unchecked lookup for hot loops; callers guarantee `1 <= n <= limit`.
    #[inline]
    pub(crate) fn lpf_raw(&self, n: u64) -> u64 {
        u64::from(self.lpf[n as usize])
    }

    pub fn is_prime(&self, n: u64) -> Result<bool> {
        self.check(n).map(|i| i >= 2 && self.spf[i] as usize == i)
    }

    pub fn primes_up_to(&self, bound: u64) -> Result<Vec<u64>> {
        if bound > self.limit() {
            return Err(invalid!("bound {bound} exceeds sieve limit {}", self.limit));
        }
        Ok((2..=bound as usize).filter(|&i| self.spf[i] as usize == i).map(|i| i as u64).collect())
    }

    pub fn factorize(&self, n: u64) -> Result<FactoredInteger> {
        let mut rest = self.check(n)?;
        let mut out = FactoredInteger::one();
        while rest > 1 {
            let p = self.spf[rest] as usize;
            rest /= p;
            out.multiply_prime(p as u64, 1);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_table() {
        let t = FactorTable::build(10).unwrap();
        assert_eq!(t.lpf_entries(), &[1, 2, 3, 2, 5, 3, 7, 2, 3, 5]);
        assert_eq!(t.spf_entries(), &[1, 2, 3, 2, 5, 2, 7, 2, 3, 2]);
    }

    #[test]
    fn unit_table() {
        let t = FactorTable::build(1).unwrap();
        assert_eq!(t.largest_prime_factor(1).unwrap(), 1);
        assert!(t.primes_up_to(1).unwrap().is_empty());
    }

    #[test]
    fn rejects_zero_limit_and_out_of_range() {
        assert!(matches!(FactorTable::build(0), Err(Error::InvalidArgument(_))));
        let t = FactorTable::build(100).unwrap();
        assert!(t.largest_prime_factor(0).is_err());
        assert!(t.largest_prime_factor(101).is_err());
        assert!(t.primes_up_to(101).is_err());
        assert!(t.factorize(101).is_err());
    }

    #[test]
    fn lookups() {
        let t = FactorTable::build(30_000).unwrap();
        assert_eq!(t.largest_prime_factor(49).unwrap(), 7);
        assert_eq!(t.largest_prime_factor(2520).unwrap(), 7);
        assert_eq!(t.primes_up_to(10).unwrap(), [2, 3, 5, 7]);
        assert_eq!(t.primes_up_to(2).unwrap(), [2]);
        let p31 = t.primes_up_to(31).unwrap();
        assert_eq!((p31.len(), p31.last()), (11, Some(&31)));
        assert_eq!(t.factorize(5040).unwrap().to_pairs(), [(2, 4), (3, 2), (5, 1), (7, 1)]);
        assert_eq!(t.factorize(27720).unwrap().to_pairs(), [(2, 3), (3, 2), (5, 1), (7, 1), (11, 1)]);
        assert!(t.factorize(1).unwrap().to_pairs().is_empty());
    }

    #[test]
    fn from_parts_round_trip_and_corruption() {
        let t = FactorTable::build(5000).unwrap();
        let back = FactorTable::from_parts(5000, t.lpf_entries(), t.spf_entries()).unwrap();
        assert_eq!(back, t);

        let mut lpf = t.lpf_entries().to_vec();
        lpf[59] = 3; // n = 60
        assert!(FactorTable::from_parts(5000, &lpf, t.spf_entries()).is_err());
        assert!(FactorTable::from_parts(4999, t.lpf_entries(), t.spf_entries()).is_err());
    }
}
