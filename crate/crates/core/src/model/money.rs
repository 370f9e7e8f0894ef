use std::fmt;
use std::ops::{Add, AddAssign, Mul};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Arbitrary-precision rational used for reputations, ratios and utilities.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MoneyError {
    #[error("`{0}` is not a decimal or p/q rational")]
    Malformed(String),
    #[error("`{0}` has a zero denominator")]
    ZeroDenominator(String),
    #[error("`{0}` is negative")]
    Negative(String),
}

/// Exact non-negative rational amount: bids, costs, budgets, prices, payments.
///
/// The value is always kept in reduced form with a positive denominator, so
/// structural equality coincides with numeric equality.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Money(BigRational);

impl Money {
    pub fn zero() -> Self {
        Money(BigRational::zero())
    }

    pub fn from_integer(n: u64) -> Self {
        Money(BigRational::from_integer(BigInt::from(n)))
    }

    /// `numer / denom`. Panics if `denom == 0`.
    pub fn ratio(numer: u64, denom: u64) -> Self {
        assert!(denom != 0, "zero denominator");
        Money(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    /// Wraps a rational, rejecting negative values.
    pub fn from_rational(value: BigRational) -> Result<Self, MoneyError> {
        if value.is_negative() {
            return Err(MoneyError::Negative(value.to_string()));
        }
        Ok(Money(value))
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn into_rational(self) -> BigRational {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// `⌊self / divisor⌋`, or `None` when `divisor` is zero.
    pub fn floor_div(&self, divisor: &Money) -> Option<BigInt> {
        if divisor.is_zero() {
            return None;
        }
        let q = &self.0 / &divisor.0;
        Some(q.numer().div_floor(q.denom()))
    }

    /// Same as [`Money::floor_div`] but saturating into a `u64`.
    pub fn floor_div_u64(&self, divisor: &Money) -> Option<u64> {
        self.floor_div(divisor).map(|q| q.to_u64().unwrap_or(u64::MAX))
    }

    /// Exact quotient, `None` when dividing by zero.
    pub fn checked_div(&self, divisor: &Money) -> Option<Money> {
        if divisor.is_zero() {
            None
        } else {
            Some(Money(&self.0 / &divisor.0))
        }
    }

    /// Multiplication by a non-negative rational.
    pub fn scale(&self, factor: &BigRational) -> Money {
        debug_assert!(!factor.is_negative());
        Money(&self.0 * factor)
    }

    /// Lossy conversion for reports and logging only.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Debug for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Money({})", self)
    }
}

/// Terminating decimals print as decimals (`"2.5"`), everything else as `"p/q"`.
impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.0))
    }
}

pub(crate) fn format_rational(value: &BigRational) -> String {
    let numer = value.numer();
    let denom = value.denom();
    if denom.is_one() {
        return numer.to_string();
    }
    // Count factors of 2 and 5; anything else means a repeating decimal.
    let mut rest = denom.clone();
    let two = BigInt::from(2u8);
    let five = BigInt::from(5u8);
    let (mut twos, mut fives) = (0u32, 0u32);
    while rest.is_even() {
        rest /= &two;
        twos += 1;
    }
    while (&rest % &five).is_zero() {
        rest /= &five;
        fives += 1;
    }
    if !rest.is_one() {
        return format!("{}/{}", numer, denom);
    }
    let digits = twos.max(fives);
    let scaled = numer * num_traits::pow(BigInt::from(10u8), digits as usize) / denom;
    let negative = scaled.sign() == Sign::Minus;
    let abs = scaled.abs().to_string();
    let padded = if abs.len() <= digits as usize {
        format!("{}{}", "0".repeat(digits as usize + 1 - abs.len()), abs)
    } else {
        abs
    };
    let split = padded.len() - digits as usize;
    format!(
        "{}{}.{}",
        if negative { "-" } else { "" },
        &padded[..split],
        &padded[split..]
    )
}

/// Parses `"12"`, `"3.25"`, `".5"` or `"p/q"` into an exact rational.
pub(crate) fn parse_rational(text: &str) -> Result<BigRational, MoneyError> {
    let s = text.trim();
    let malformed = || MoneyError::Malformed(text.to_string());
    if s.is_empty() {
        return Err(malformed());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = parse_int(p.trim()).ok_or_else(malformed)?;
        let q: BigInt = parse_int(q.trim()).ok_or_else(malformed)?;
        if q.is_zero() {
            return Err(MoneyError::ZeroDenominator(text.to_string()));
        }
        return Ok(BigRational::new(p, q));
    }
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(malformed());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(malformed());
    }
    let digits = format!("{}{}", int_part, frac_part);
    let numer: BigInt = digits.parse().map_err(|_| malformed())?;
    let denom = num_traits::pow(BigInt::from(10u8), frac_part.len());
    let value = BigRational::new(numer, denom);
    Ok(if negative { -value } else { value })
}

fn parse_int(s: &str) -> Option<BigInt> {
    let body = s.strip_prefix('-').unwrap_or(s);
    if body.is_empty() || !body.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

impl FromStr for Money {
    type Err = MoneyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Money::from_rational(parse_rational(s)?)
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl<'a> Add<&'a Money> for &'a Money {
    type Output = Money;
    fn add(self, rhs: &'a Money) -> Money {
        Money(&self.0 + &rhs.0)
    }
}

impl AddAssign<&Money> for Money {
    fn add_assign(&mut self, rhs: &Money) {
        self.0 += &rhs.0;
    }
}

impl<'a> Mul<&'a Money> for &'a Money {
    type Output = Money;
    fn mul(self, rhs: &'a Money) -> Money {
        Money(&self.0 * &rhs.0)
    }
}

impl std::iter::Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::zero(), |acc, m| acc + m)
    }
}

impl<'a> std::iter::Sum<&'a Money> for Money {
    fn sum<I: Iterator<Item = &'a Money>>(iter: I) -> Money {
        let mut acc = Money::zero();
        for m in iter {
            acc += m;
        }
        acc
    }
}

impl Serialize for Money {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Money {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Serde helper for plain rationals (reputations, expected values).
pub mod rational_serde {
    use super::*;

    pub fn serialize<S: Serializer>(value: &BigRational, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&format_rational(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

pub fn rational_to_string(value: &BigRational) -> String {
    format_rational(value)
}

pub fn parse_rational_str(text: &str) -> Result<BigRational, MoneyError> {
    parse_rational(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn decimal_strings_parse_exactly() {
        assert_eq!("4.5".parse::<Money>().unwrap(), Money::ratio(9, 2));
        assert_eq!("3.25".parse::<Money>().unwrap(), Money::ratio(13, 4));
        assert_eq!("40".parse::<Money>().unwrap(), Money::from_integer(40));
        assert_eq!("7/3".parse::<Money>().unwrap(), Money::ratio(7, 3));
        assert_eq!("0.10".parse::<Money>().unwrap(), Money::ratio(1, 10));
    }

    #[test]
    fn rejects_garbage_and_negatives() {
        assert!(matches!("abc".parse::<Money>(), Err(MoneyError::Malformed(_))));
        assert!(matches!("1/0".parse::<Money>(), Err(MoneyError::ZeroDenominator(_))));
        assert!(matches!("-2".parse::<Money>(), Err(MoneyError::Negative(_))));
        assert!("1e5".parse::<Money>().is_err());
        assert!(".".parse::<Money>().is_err());
    }

    #[test]
    fn display_prefers_decimals() {
        assert_eq!(Money::ratio(5, 2).to_string(), "2.5");
        assert_eq!(Money::ratio(1, 20).to_string(), "0.05");
        assert_eq!(Money::ratio(4, 3).to_string(), "4/3");
        assert_eq!(Money::from_integer(80).to_string(), "80");
    }

    #[test]
    fn floor_div_is_exact() {
        let b = Money::from_integer(4);
        assert_eq!(b.floor_div_u64(&Money::from_integer(3)), Some(1));
        assert_eq!(b.floor_div_u64(&Money::ratio(4, 3)), Some(3));
        assert_eq!(b.floor_div_u64(&Money::zero()), None);
    }

    fn money() -> impl Strategy<Value = Money> {
        (0u64..10_000, 1u64..500).prop_map(|(p, q)| Money::ratio(p, q))
    }

    proptest! {
        #[test]
        fn display_parse_round_trip(m in money()) {
            prop_assert_eq!(m.to_string().parse::<Money>().unwrap(), m);
        }

        #[test]
        fn addition_is_associative(a in money(), b in money(), c in money()) {
            prop_assert_eq!((&(&a + &b)) + &c, &a + &(&b + &c));
            prop_assert_eq!(&a + &b, &b + &a);
        }

        #[test]
        fn floor_of_budget_over_virtual_price(b in money(), t in 1u64..200) {
            prop_assume!(!b.is_zero());
            let price = b.checked_div(&Money::from_integer(t)).unwrap();
            prop_assert_eq!(b.floor_div_u64(&price), Some(t));
        }
    }
}
