//! Concrete covering systems with residues.
//!
//! The oracle decides coverage by marking every residue modulo the lcm in a
//! bitset, so it refuses systems whose lcm exceeds its bound. The reduction
//! lemmas are implemented as transformations; callers (and the test suite)
//! confirm their outputs with the oracle.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lcm_profile::FactoredInteger;
use crate::numeric::Rational;

pub const DEFAULT_ORACLE_BOUND: u64 = 10_000_000;

/// `x ≡ residue (mod modulus)` with `0 <= residue < modulus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Congruence {
    pub residue: u64,
    pub modulus: u64,
}

impl Congruence {
    pub fn new(residue: u64, modulus: u64) -> Result<Self> {
        if modulus == 0 {
            return Err(invalid!("modulus must be positive"));
        }
        if residue >= modulus {
            return Err(invalid!("residue {residue} not reduced modulo {modulus}"));
        }
        Ok(Congruence { residue, modulus })
    }

    /// Any integer residue, reduced into `[0, modulus)`.
    pub fn reduced(residue: i64, modulus: u64) -> Result<Self> {
        if modulus == 0 {
            return Err(invalid!("modulus must be positive"));
        }
        let r = i128::from(residue).rem_euclid(i128::from(modulus));
        Ok(Congruence { residue: r as u64, modulus })
    }

    pub fn contains(&self, x: u64) -> bool {
        x % self.modulus == self.residue
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoveringSystem {
    pub congruences: Vec<Congruence>,
}

impl CoveringSystem {
    pub fn new(congruences: Vec<Congruence>) -> Self {
        CoveringSystem { congruences }
    }

    pub fn trivial() -> Self {
        CoveringSystem { congruences: vec![Congruence { residue: 0, modulus: 1 }] }
    }

    pub fn len(&self) -> usize {
        self.congruences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.congruences.is_empty()
    }

    pub fn moduli(&self) -> Vec<u64> {
        self.congruences.iter().map(|c| c.modulus).collect()
    }

    /// `1 < n_1 < n_2 < ... < n_k` after sorting.
    pub fn is_distinct(&self) -> bool {
        let mut ms = self.moduli();
        ms.sort_unstable();
        ms.first().is_none_or(|&m| m > 1) && ms.windows(2).all(|w| w[0] < w[1])
    }

    pub fn lcm_of(&self) -> FactoredInteger {
        self.congruences.iter().fold(FactoredInteger::one(), |acc, c| {
            acc.lcm(&FactoredInteger::from_u64(c.modulus).expect("moduli are positive"))
        })
    }

    pub fn is_covering(&self) -> Result<bool> {
        self.is_covering_within(DEFAULT_ORACLE_BOUND)
    }

    pub fn is_covering_within(&self, bound: u64) -> Result<bool> {
        Ok(ResidueMap::build(self, bound)?.uncovered == 0)
    }

    /// Fraction of residues modulo the lcm left uncovered.
    pub fn uncovered_density(&self) -> Result<Rational> {
        let map = ResidueMap::build(self, DEFAULT_ORACLE_BOUND)?;
        Rational::new(map.uncovered.into(), map.modulus.into())
    }

    fn without(&self, drop: &[bool]) -> CoveringSystem {
        CoveringSystem::new(self.congruences.iter().zip(drop).filter(|(_, &d)| !d).map(|(c, _)| *c).collect())
    }
}

/// Bitset of covered residues modulo the lcm of a system (optionally refined by an extra modulus).
struct ResidueMap {
    modulus: u64,
    covered: Vec<u64>,
    uncovered: u64,
}

impl ResidueMap {
    fn build(system: &CoveringSystem, bound: u64) -> Result<Self> {
        Self::build_with(system, 1, bound)
    }

    fn build_with(system: &CoveringSystem, extra: u64, bound: u64) -> Result<Self> {
        let lcm = system.lcm_of().lcm(&FactoredInteger::from_u64(extra)?);
        let modulus = match lcm.value_u64() {
            Some(v) if v <= bound => v,
            _ => return Err(Error::OracleOverflow { lcm: alloc::format!("{}", lcm.value()), bound }),
        };
        let mut covered = vec![0u64; modulus.div_ceil(64) as usize];
        for c in &system.congruences {
            let mut x = c.residue;
            while x < modulus {
                covered[(x / 64) as usize] |= 1 << (x % 64);
                x += c.modulus;
            }
        }
        let marked: u64 = covered.iter().map(|w| u64::from(w.count_ones())).sum();
        Ok(ResidueMap { modulus, covered, uncovered: modulus - marked })
    }

    fn uncovered_residues(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.modulus).filter(|&x| self.covered[(x / 64) as usize] & (1 << (x % 64)) == 0)
    }
}

/// The `p` congruences `residue + i*modulus (mod p*modulus)`, `i = 0..p`; together they cover exactly `c`.
pub fn split(c: Congruence, p: u64) -> Result<Vec<Congruence>> {
    if p == 0 {
        return Err(invalid!("cannot split into zero classes"));
    }
    let modulus = c.modulus.checked_mul(p).ok_or_else(|| Error::Overflow("split modulus".into()))?;
    Ok((0..p).map(|i| Congruence { residue: c.residue + i * c.modulus, modulus }).collect())
}

fn prime_power(p: u64, a: u32) -> Result<u64> {
    p.checked_pow(a).ok_or_else(|| Error::Overflow(alloc::format!("{p}^{a}")))
}

fn marks_divisible(system: &CoveringSystem, q: u64) -> Vec<bool> {
    system.congruences.iter().map(|c| c.modulus % q == 0).collect()
}

/// Drop every congruence whose modulus is divisible by `p^a`, given fewer than `p` of them and `p^a | L`.
pub fn lemma1_discard(system: &CoveringSystem, p: u64, a: u32) -> Result<CoveringSystem> {
    if a == 0 {
        return Err(invalid!("exponent must be positive"));
    }
    if system.lcm_of().valuation(p) < a {
        return Err(Error::LemmaPrecondition(alloc::format!("{p}^{a} does not divide the lcm")));
    }
    let marks = marks_divisible(system, prime_power(p, a)?);
    let count = marks.iter().filter(|&&m| m).count() as u64;
    if count >= p {
        return Err(Error::LemmaPrecondition(alloc::format!(
            "{count} moduli divisible by {p}^{a}; need fewer than {p}"
        )));
    }
    Ok(system.without(&marks))
}

/// The `p` congruences targeted by the replacement lemma, after checking its preconditions.
fn replacement_block(system: &CoveringSystem, p: u64, a: u32) -> Result<(Vec<bool>, u64)> {
    if a == 0 {
        return Err(invalid!("exponent must be positive"));
    }
    let v = system.lcm_of().valuation(p);
    if v != a {
        return Err(Error::LemmaPrecondition(alloc::format!("lcm has {p}-valuation {v}, expected exactly {a}")));
    }
    let pa = prime_power(p, a)?;
    let marks = marks_divisible(system, pa);
    let count = marks.iter().filter(|&&m| m).count() as u64;
    if count != p {
        return Err(Error::LemmaPrecondition(alloc::format!("{count} moduli divisible by {p}^{a}; need exactly {p}")));
    }
    Ok((marks, pa))
}

/// Modulus of the single congruence replacing moduli `p^a m_1, ..., p^a m_p`: `p^(a-1) lcm(m_i)`.
pub fn replacement_modulus(p: u64, a: u32, moduli: &[u64]) -> Result<u64> {
    let pa = prime_power(p, a)?;
    let lcm = moduli.iter().try_fold(FactoredInteger::one(), |acc, &n| {
        if n % pa != 0 {
            return Err(invalid!("{n} is not a multiple of {p}^{a}"));
        }
        Ok(acc.lcm(&FactoredInteger::from_u64(n / pa)?))
    })?;
    let mut out = lcm;
    out.multiply_prime(p, a - 1);
    out.value_u64().ok_or_else(|| Error::Overflow("replacement modulus".into()))
}

/// Replace the `p` congruences with moduli divisible by `p^a` (where `p^a ‖ L`) by a
/// single congruence modulo `p^(a-1) lcm(m_i)`, choosing the least residue that
/// keeps the system a covering.
pub fn lemma3_replace(system: &CoveringSystem, p: u64, a: u32) -> Result<(CoveringSystem, Congruence)> {
    let (marks, _) = replacement_block(system, p, a)?;
    if !system.is_covering()? {
        return Err(Error::LemmaPrecondition("input is not a covering".into()));
    }
    let block: Vec<u64> = system.congruences.iter().zip(&marks).filter(|(_, &m)| m).map(|(c, _)| c.modulus).collect();
    let modulus = replacement_modulus(p, a, &block)?;
    let mut rest = system.without(&marks);
    let map = ResidueMap::build_with(&rest, modulus, DEFAULT_ORACLE_BOUND)?;
    // The first valid residue is 0 when nothing is uncovered; otherwise every
    // uncovered residue must share one class modulo the new modulus.
    let mut gaps = map.uncovered_residues();
    let residue = match gaps.next() {
        None => 0,
        Some(first) => {
            let r = first % modulus;
            if gaps.any(|x| x % modulus != r) {
                return Err(Error::LemmaFalsified(alloc::format!(
                    "no residue modulo {modulus} closes the gap left by removing multiples of {p}^{a}"
                )));
            }
            r
        }
    };
    let chosen = Congruence { residue, modulus };
    rest.congruences.push(chosen);
    Ok((rest, chosen))
}

/// When two of the `p` congruences agree modulo `p^a`, all `p` may be discarded.
pub fn lemma3_discard_same_class(system: &CoveringSystem, p: u64, a: u32) -> Result<CoveringSystem> {
    let (marks, pa) = replacement_block(system, p, a)?;
    let mut classes: Vec<u64> =
        system.congruences.iter().zip(&marks).filter(|(_, &m)| m).map(|(c, _)| c.residue % pa).collect();
    classes.sort_unstable();
    if classes.windows(2).all(|w| w[0] != w[1]) {
        return Err(Error::LemmaPrecondition(alloc::format!(
            "the {p} congruences lie in distinct classes modulo {pa}"
        )));
    }
    Ok(system.without(&marks))
}

fn mod_inverse(a: u64, n: u64) -> Option<u64> {
    let (mut old_r, mut r) = (i128::from(a % n), i128::from(n));
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    (old_r == 1).then(|| old_s.rem_euclid(i128::from(n)) as u64)
}

/// Image of one congruence in the class `x = j + p*y`, if it meets that class.
pub fn reduce_congruence(c: Congruence, p: u64, j: u64) -> Option<Congruence> {
    let (a, n) = (c.residue, c.modulus);
    if n % p == 0 {
        (a % p == j).then(|| Congruence { residue: (a - j) / p % (n / p), modulus: n / p })
    } else {
        let inv = mod_inverse(p, n)?;
        let diff = (i128::from(a) - i128::from(j)).rem_euclid(i128::from(n)) as u128;
        let r = (diff * u128::from(inv) % u128::from(n)).to_u64()?;
        Some(Congruence { residue: r, modulus: n })
    }
}

/// Split a covering into the `p` systems obtained by substituting `x = j + p*y`, `j = 0..p`.
pub fn lemma4_reduce(system: &CoveringSystem, p: u64) -> Result<Vec<CoveringSystem>> {
    if p < 2 {
        return Err(invalid!("reduction prime must be at least 2"));
    }
    Ok((0..p)
        .map(|j| CoveringSystem::new(system.congruences.iter().filter_map(|&c| reduce_congruence(c, p, j)).collect()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;

    fn cs(pairs: &[(u64, u64)]) -> CoveringSystem {
        CoveringSystem::new(pairs.iter().map(|&(a, n)| Congruence::new(a, n).unwrap()).collect())
    }

    #[test]
    fn lcm_examples() {
        assert_eq!(cs(&[(0, 2), (0, 3)]).lcm_of().value_u64(), Some(6));
        assert_eq!(cs(&[(0, 2), (1, 4), (3, 8), (7, 8)]).lcm_of().value_u64(), Some(8));
        let ms: Vec<(u64, u64)> = [7, 14, 21, 28, 35, 42, 56].iter().map(|&n| (0, n)).collect();
        assert_eq!(cs(&ms).lcm_of().value_u64(), Some(840));
    }

    #[test]
    fn oracle_examples() {
        assert!(cs(&[(0, 1)]).is_covering().unwrap());
        assert!(cs(&[(0, 2), (1, 2)]).is_covering().unwrap());
        assert!(!cs(&[(0, 2), (1, 4)]).is_covering().unwrap());
        assert!(cs(&[(0, 2), (0, 3), (1, 4), (5, 6), (7, 12)]).is_covering().unwrap());
        assert!(!CoveringSystem::default().is_covering().unwrap());
    }

    #[test]
    fn densities() {
        assert_eq!(cs(&[(0, 2), (1, 2)]).uncovered_density().unwrap(), Rational::zero());
        assert_eq!(cs(&[(0, 2)]).uncovered_density().unwrap(), rat(1, 2).unwrap());
        assert_eq!(cs(&[(0, 2), (0, 3)]).uncovered_density().unwrap(), rat(1, 3).unwrap());
    }

    #[test]
    fn oracle_overflow_is_an_error() {
        let big = cs(&[(0, 9_999_991), (0, 2)]);
        assert!(matches!(big.is_covering(), Err(Error::OracleOverflow { .. })));
    }

    #[test]
    fn congruence_validation() {
        assert!(Congruence::new(2, 2).is_err());
        assert!(Congruence::new(0, 0).is_err());
        assert_eq!(Congruence::reduced(-1, 6).unwrap(), Congruence { residue: 5, modulus: 6 });
    }

    #[test]
    fn split_examples() {
        let c = Congruence::new(0, 1).unwrap();
        assert_eq!(split(c, 2).unwrap(), cs(&[(0, 2), (1, 2)]).congruences);
        let c = Congruence::new(1, 2).unwrap();
        assert_eq!(split(c, 3).unwrap(), cs(&[(1, 6), (3, 6), (5, 6)]).congruences);
    }

    #[test]
    fn distinctness() {
        assert!(cs(&[(0, 2), (0, 3), (1, 4), (5, 6), (7, 12)]).is_distinct());
        assert!(!cs(&[(0, 2), (1, 2)]).is_distinct());
        assert!(!cs(&[(0, 1)]).is_distinct());
    }

    #[test]
    fn lemma1_boundaries() {
        // One modulus divisible by 9 with p = 3.
        let c = cs(&[(0, 3), (1, 3), (2, 9), (5, 9), (8, 9), (2, 18)]);
        assert!(c.is_covering().unwrap());
        let out = lemma1_discard(&c, 2, 1).unwrap();
        assert!(out.is_covering().unwrap());
        assert_eq!(out.len(), 5);
        let none = cs(&[(0, 2), (1, 2), (0, 9)]);
        assert_eq!(
            lemma1_discard(&none, 2, 2).unwrap_err(),
            Error::LemmaPrecondition("2^2 does not divide the lcm".into())
        );
        // p congruences divisible by p^a is out of scope.
        let c = cs(&[(0, 2), (1, 2)]);
        assert!(matches!(lemma1_discard(&c, 2, 1), Err(Error::LemmaPrecondition(_))));
    }

    #[test]
    fn lemma3_replace_small() {
        // {0 mod 4, 2 mod 4} came from splitting 0 mod 2.
        let c = cs(&[(1, 2), (0, 4), (2, 4)]);
        let (out, chosen) = lemma3_replace(&c, 2, 2).unwrap();
        assert_eq!(chosen, Congruence { residue: 0, modulus: 2 });
        assert!(out.is_covering().unwrap());
        assert_eq!(replacement_modulus(7, 1, &[7, 14, 21, 28, 35, 42, 56]).unwrap(), 120);
        assert_eq!(replacement_modulus(2, 4, &[16, 48]).unwrap(), 24);
    }

    #[test]
    fn lemma3_same_class() {
        let c = cs(&[(0, 2), (1, 4), (1, 4), (3, 4)]);
        // Three multiples of 4 with p = 2 violates the count.
        assert!(lemma3_discard_same_class(&c, 2, 2).is_err());
        let c = cs(&[(0, 2), (1, 2), (1, 4), (5, 8)]);
        // 2-valuation of L is 3, only one multiple of 8.
        assert!(lemma3_discard_same_class(&c, 2, 3).is_err());
        let c = cs(&[(0, 2), (1, 4), (3, 8), (7, 8), (7, 16), (23, 48)]);
        assert!(lemma3_discard_same_class(&c, 2, 4).unwrap().is_covering().unwrap());
        let distinct = cs(&[(1, 2), (0, 4), (2, 4)]);
        assert!(matches!(lemma3_discard_same_class(&distinct, 2, 2), Err(Error::LemmaPrecondition(_))));
    }

    #[test]
    fn lemma4_examples() {
        let outs = lemma4_reduce(&cs(&[(0, 2), (1, 2)]), 2).unwrap();
        assert_eq!(outs, [cs(&[(0, 1)]), cs(&[(0, 1)])]);
        let c = cs(&[(0, 2), (0, 3), (1, 4), (5, 6), (7, 12)]);
        for out in lemma4_reduce(&c, 3).unwrap() {
            assert!(out.is_covering().unwrap());
        }
        assert_eq!(mod_inverse(3, 7), Some(5));
        assert_eq!(mod_inverse(2, 4), None);
    }
}
