//! Exact rationals and a directed-rounding fixed-point accumulator.
//!
//! Every proof-critical comparison goes through [`Rational`]. The long scans
//! accumulate reciprocals in [`UpperFixed`], whose value never falls below the
//! true sum; "< 1" verdicts from it are therefore certified, while "≥ 1"
//! verdicts are only trusted once the rounding slack cannot explain them.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};
use core::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Digits kept when rendering a rational as a truncated decimal.
pub const DISPLAY_DIGITS: usize = 7;

/// Exact arbitrary-precision fraction, always in lowest terms with a positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

/// Shorthand for [`Rational::new`] on machine integers.
pub fn rat(numerator: i64, denominator: i64) -> Result<Rational> {
    Rational::new(BigInt::from(numerator), BigInt::from(denominator))
}

impl Rational {
    pub fn new(numerator: BigInt, denominator: BigInt) -> Result<Self> {
        if denominator.is_zero() {
            return Err(invalid!("zero denominator"));
        }
        Ok(Rational(BigRational::new(numerator, denominator)))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn from_integer(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// `1/n`.
    pub fn recip_of(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(invalid!("reciprocal of zero"));
        }
        Ok(Rational(BigRational::new_raw(BigInt::one(), BigInt::from(n))))
    }

    pub fn from_biguint_ratio(numerator: BigUint, denominator: BigUint) -> Result<Self> {
        Rational::new(BigInt::from(numerator), BigInt::from(denominator))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(invalid!("reciprocal of zero"));
        }
        Ok(Rational(self.0.recip()))
    }

    pub fn less_than_one(&self) -> bool {
        self.numer() < self.denom()
    }

    /// Decimal expansion truncated toward zero after `digits` fractional digits.
    pub fn truncated_decimal(&self, digits: usize) -> String {
        let scale = BigInt::from(10u32).pow(digits as u32);
        let scaled = (self.numer().abs() * &scale) / self.denom();
        let (int_part, frac_part) = scaled.div_rem(&scale);
        let sign = if self.is_negative() && !scaled.is_zero() { "-" } else { "" };
        if digits == 0 {
            return format!("{sign}{int_part}");
        }
        let frac = frac_part.to_string();
        format!("{sign}{int_part}.{}{frac}", "0".repeat(digits - frac.len()))
    }

    /// Parse a plain decimal literal such as `"1.3761905"` or `"-0.5"` exactly.
    pub fn from_decimal_str(s: &str) -> Result<Self> {
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
        let digits_ok = |t: &str| t.bytes().all(|b| b.is_ascii_digit());
        if int_part.is_empty() || !digits_ok(int_part) || !digits_ok(frac_part) {
            return Err(Error::Malformed(format!("not a decimal literal: {s:?}")));
        }
        let mut all = String::from(int_part);
        all.push_str(frac_part);
        let mut numer = BigInt::from_str(&all).map_err(|_| Error::Malformed(format!("bad decimal {s:?}")))?;
        if neg {
            numer = -numer;
        }
        Rational::new(numer, BigInt::from(10u32).pow(frac_part.len() as u32))
    }

    /// Lossy conversion for logging and plotting only.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
    };
}
forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl core::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

/// Exact `Σ 1/d` over a multiset of positive integers.
///
/// Builds the lcm of the denominators once and sums the integer quotients, so
/// the cost is linear in the number of terms rather than one gcd per addition.
pub fn reciprocal_sum<I>(ds: I) -> Result<Rational>
where
    I: IntoIterator<Item = u64>,
{
    let ds: Vec<u64> = ds.into_iter().collect();
    if ds.contains(&0) {
        return Err(invalid!("modulus 0 in reciprocal sum"));
    }
    let mut den = BigUint::one();
    for &d in &ds {
        let rem = (&den % d).to_u64().unwrap_or(0);
        den *= d / rem.gcd(&d);
    }
    let mut num = BigUint::zero();
    for &d in &ds {
        num += &den / d;
    }
    Rational::from_biguint_ratio(num, den)
}

/// Fractional bits of the [`UpperFixed`] grid.
pub const GRID_BITS: u32 = 96;
const GRID_ONE: u128 = 1u128 << GRID_BITS;

/// Certified upper bound on a sum of reciprocals, stored as `value * 2^-96`.
///
/// Each term `1/n` is rounded up to the grid, so the stored value exceeds the
/// true sum by less than `term_count` grid units.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct UpperFixed {
    #[serde(with = "u128_string")]
    pub value: u128,
    pub term_count: u64,
}

impl UpperFixed {
    pub const ONE: u128 = GRID_ONE;

    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `ceil(2^96 / n)`.
    pub fn accumulate_reciprocal(self, n: u64) -> Result<Self> {
        if n == 0 {
            return Err(invalid!("reciprocal of zero"));
        }
        let step = GRID_ONE.div_ceil(u128::from(n));
        let value = self.value.checked_add(step).ok_or_else(|| Error::Overflow("fixed-point accumulator".into()))?;
        Ok(UpperFixed { value, term_count: self.term_count + 1 })
    }

    #[inline]
    pub(crate) fn push_unchecked(&mut self, n: u64) {
        self.value += GRID_ONE.div_ceil(u128::from(n));
        self.term_count += 1;
    }

    /// Sum of two partial accumulations; both the value and the slack add.
    pub fn merge(self, other: UpperFixed) -> Result<Self> {
        let value =
            self.value.checked_add(other.value).ok_or_else(|| Error::Overflow("fixed-point accumulator".into()))?;
        Ok(UpperFixed { value, term_count: self.term_count + other.term_count })
    }

    /// `true` certifies that the true sum is `< 1`.
    pub fn less_than_one(&self) -> bool {
        self.value < GRID_ONE
    }

    /// `true` certifies that the true sum is `> 1`: even after removing the
    /// maximal rounding slack the value stays at or above one.
    pub fn certainly_above_one(&self) -> bool {
        self.term_count > 0 && self.value.saturating_sub(u128::from(self.term_count)) >= GRID_ONE
    }

    /// The bound itself as an exact rational.
    pub fn to_rational(&self) -> Rational {
        Rational(BigRational::new(BigInt::from(self.value), BigInt::from(GRID_ONE)))
    }

    /// Maximal rounding overshoot, `term_count * 2^-96`.
    pub fn slack(&self) -> Rational {
        Rational(BigRational::new(BigInt::from(self.term_count), BigInt::from(GRID_ONE)))
    }
}

mod u128_string {
    use alloc::string::{String, ToString};

    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u128, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u128, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// Serialized form of a [`Rational`]: decimal strings plus a truncated decimal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalRecord {
    pub num: String,
    pub den: String,
    pub approx: String,
}

impl RationalRecord {
    pub fn new(r: &Rational) -> Self {
        Self::with_digits(r, DISPLAY_DIGITS)
    }

    pub fn with_digits(r: &Rational, digits: usize) -> Self {
        RationalRecord { num: r.numer().to_string(), den: r.denom().to_string(), approx: r.truncated_decimal(digits) }
    }

    /// Parse back, insisting on lowest terms, a positive denominator and an
    /// `approx` string that is the truncation of the exact value.
    pub fn parse(&self) -> Result<Rational> {
        let bad = |what: &str| Error::Malformed(format!("{what} in {{num: {}, den: {}}}", self.num, self.den));
        let num = BigInt::from_str(&self.num).map_err(|_| bad("numerator"))?;
        let den = BigInt::from_str(&self.den).map_err(|_| bad("denominator"))?;
        if den.sign() != Sign::Plus {
            return Err(bad("non-positive denominator"));
        }
        if !num.gcd(&den).is_one() {
            return Err(bad("fraction not in lowest terms"));
        }
        let r = Rational(BigRational::new_raw(num, den));
        let digits = self.approx.split_once('.').map_or(0, |(_, f)| f.len());
        if r.truncated_decimal(digits) != self.approx {
            return Err(bad("approx string disagrees with exact value"));
        }
        Ok(r)
    }
}

impl From<&Rational> for RationalRecord {
    fn from(r: &Rational) -> Self {
        RationalRecord::new(r)
    }
}

/// `|a - b| <= tol`.
pub fn within(a: &Rational, b: &Rational, tol: &Rational) -> bool {
    (a - b).abs().cmp(tol) != Ordering::Greater
}
