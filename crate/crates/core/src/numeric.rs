//! Exact/approximate scalar arithmetic.
//!
//! Breakpoints are always [`Rational`]. Function values are [`Real`], which stays
//! exact as long as every operation applied to it admits an exact result and
//! degrades to `f64` otherwise.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

pub type Rational = BigRational;

/// Absolute comparison slack for float paths.
pub const TAU_ABS: f64 = 1e-12;
/// Relative comparison slack for float paths.
pub const TAU_REL: f64 = 1e-9;

// Exact roots are only attempted below these sizes.
const MAX_ROOT_INDEX: u32 = 64;
const MAX_POWER: u32 = 64;
const MAX_EXACT_BITS: u64 = 1 << 16;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact binary value of a finite float.
pub fn rat_from_f64(x: f64) -> Result<Rational, Error> {
    Rational::from_float(x).ok_or_else(|| Error::Parse(format!("non-finite value {x}")))
}

/// Parses `"p/q"`, `"p"` or a plain decimal like `"0.75"` exactly.
pub fn parse_rational(s: &str) -> Result<Rational, Error> {
    let s = s.trim();
    if let Ok(r) = Rational::from_str(s) {
        if r.denom().is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(r);
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (whole, frac) = body
        .split_once('.')
        .ok_or_else(|| Error::Parse(format!("not a rational: {s:?}")))?;
    if frac.is_empty() && whole.is_empty() {
        return Err(Error::Parse(format!("not a rational: {s:?}")));
    }
    let digits = format!("{whole}{frac}");
    if !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Parse(format!("not a rational: {s:?}")));
    }
    let num = BigInt::from_str(&digits).map_err(|e| Error::Parse(e.to_string()))?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let r = Rational::new(num, den);
    Ok(if neg { -r } else { r })
}

pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn exact_nth_root(x: &BigInt, n: u32) -> Option<BigInt> {
    if x.is_negative() {
        return None;
    }
    let r = x.nth_root(n);
    (num_traits::pow(r.clone(), n as usize) == *x).then_some(r)
}

/// `base^exp` when the result is rational and cheap to find.
pub fn exact_pow(base: &Rational, exp: &Rational) -> Option<Rational> {
    if base.is_negative() || !exp.is_positive() {
        return None;
    }
    if base.is_zero() || base.is_one() {
        return Some(base.clone());
    }
    let m = exp.numer().to_u32().filter(|&m| m <= MAX_POWER)?;
    let n = exp.denom().to_u32().filter(|&n| n <= MAX_ROOT_INDEX)?;
    let bits = base.numer().bits().max(base.denom().bits());
    if bits.saturating_mul(u64::from(m)) > MAX_EXACT_BITS {
        return None;
    }
    let num = exact_nth_root(base.numer(), n)?;
    let den = exact_nth_root(base.denom(), n)?;
    Some(num_traits::pow(Rational::new(num, den), m as usize))
}

/// Smallest slack accepted when comparing float results of size `scale`.
pub fn slack(scale: f64) -> f64 {
    TAU_ABS + TAU_REL * scale.abs()
}

/// A nonnegative-or-signed scalar held exactly when possible.
#[derive(Clone, Debug)]
pub enum Real {
    Exact(Rational),
    Approx(f64),
}

impl Real {
    pub fn zero() -> Self {
        Real::Exact(Rational::zero())
    }

    pub fn one() -> Self {
        Real::Exact(Rational::one())
    }

    pub fn int(n: i64) -> Self {
        Real::Exact(int(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Real::Exact(rat(n, d))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Real::Exact(_))
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Real::Exact(r) => Some(r),
            Real::Approx(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Real::Exact(r) => rat_to_f64(r),
            Real::Approx(x) => *x,
        }
    }

    /// The exact rational value; floats are read as their binary expansion.
    pub fn to_rational(&self) -> Rational {
        match self {
            Real::Exact(r) => r.clone(),
            Real::Approx(x) => Rational::from_float(*x).unwrap_or_else(Rational::zero),
        }
    }

    /// Same value, forced into the exact representation.
    pub fn rationalized(&self) -> Real {
        Real::Exact(self.to_rational())
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Real::Exact(r) => r.is_zero(),
            Real::Approx(x) => *x == 0.0,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Real::Exact(r) => r.is_negative(),
            Real::Approx(x) => *x < 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Real::Exact(_) => true,
            Real::Approx(x) => x.is_finite(),
        }
    }

    pub fn abs(&self) -> Real {
        match self {
            Real::Exact(r) => Real::Exact(r.abs()),
            Real::Approx(x) => Real::Approx(x.abs()),
        }
    }

    pub fn mul_rat(&self, r: &Rational) -> Real {
        match self {
            Real::Exact(a) => Real::Exact(a * r),
            Real::Approx(x) => Real::Approx(x * rat_to_f64(r)),
        }
    }

    /// `self^exp` for `self ≥ 0`, exact whenever the result is a cheap rational.
    pub fn pow(&self, exp: &Rational) -> Real {
        if exp.is_one() {
            return self.clone();
        }
        if let Real::Exact(b) = self {
            if let Some(r) = exact_pow(b, exp) {
                return Real::Exact(r);
            }
        }
        Real::Approx(self.to_f64().powf(rat_to_f64(exp)))
    }

    pub fn powf(&self, exp: f64) -> Real {
        match Rational::from_float(exp) {
            Some(e) => self.pow(&e),
            None => Real::Approx(self.to_f64().powf(exp)),
        }
    }

    /// `self^(1/p)`.
    pub fn root(&self, p: f64) -> Real {
        match Rational::from_float(p) {
            Some(e) if e.is_positive() => self.pow(&e.recip()),
            _ => Real::Approx(self.to_f64().powf(1.0 / p)),
        }
    }

    pub fn max(self, other: Real) -> Real {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Real) -> Real {
        if other < self {
            other
        } else {
            self
        }
    }

    /// `self ≥ other`, exactly when both are exact, else with [`slack`].
    pub fn ge_tol(&self, other: &Real) -> bool {
        match (self, other) {
            (Real::Exact(a), Real::Exact(b)) => a >= b,
            _ => {
                let (a, b) = (self.to_f64(), other.to_f64());
                a >= b - slack(a.abs().max(b.abs()))
            }
        }
    }

    /// Equality up to the float slack (exact when both are exact).
    pub fn eq_tol(&self, other: &Real) -> bool {
        self.ge_tol(other) && other.ge_tol(self)
    }
}

impl From<Rational> for Real {
    fn from(r: Rational) -> Self {
        Real::Exact(r)
    }
}

impl From<f64> for Real {
    fn from(x: f64) -> Self {
        Real::Approx(x)
    }
}

fn cmp_rat_f64(r: &Rational, x: f64) -> Ordering {
    if x.is_nan() {
        return Ordering::Less;
    }
    if x.is_infinite() {
        return if x > 0.0 { Ordering::Less } else { Ordering::Greater };
    }
    let approx = rat_to_f64(r);
    if (approx - x).abs() > 1e-6 * approx.abs().max(x.abs()).max(1e-300) {
        return approx.total_cmp(&x);
    }
    r.cmp(&Rational::from_float(x).expect("finite"))
}

impl Ord for Real {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Real::Exact(a), Real::Exact(b)) => a.cmp(b),
            (Real::Approx(a), Real::Approx(b)) => a.total_cmp(b),
            (Real::Exact(a), Real::Approx(b)) => cmp_rat_f64(a, *b),
            (Real::Approx(a), Real::Exact(b)) => cmp_rat_f64(b, *a).reverse(),
        }
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Real {}

macro_rules! real_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl std::ops::$trait<&Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                match (self, rhs) {
                    (Real::Exact(a), Real::Exact(b)) => Real::Exact(a $op b),
                    _ => Real::Approx(self.to_f64() $op rhs.to_f64()),
                }
            }
        }
        impl std::ops::$trait<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                (&self) $op (&rhs)
            }
        }
    };
}

real_binop!(Add, add, +);
real_binop!(Sub, sub, -);
real_binop!(Mul, mul, *);

impl std::ops::Div<&Real> for &Real {
    type Output = Real;
    fn div(self, rhs: &Real) -> Real {
        match (self, rhs) {
            (Real::Exact(a), Real::Exact(b)) if !b.is_zero() => Real::Exact(a / b),
            _ => Real::Approx(self.to_f64() / rhs.to_f64()),
        }
    }
}

impl std::ops::Div<Real> for Real {
    type Output = Real;
    fn div(self, rhs: Real) -> Real {
        &self / &rhs
    }
}

impl std::iter::Sum for Real {
    fn sum<I: Iterator<Item = Real>>(iter: I) -> Real {
        iter.fold(Real::zero(), |acc, x| acc + x)
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Real::Exact(r) => f.write_str(&format_rational(r)),
            Real::Approx(x) => write!(f, "{x:?}"),
        }
    }
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Real::Exact(r) => s.serialize_str(&format_rational(r)),
            Real::Approx(x) => s.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::String(s) => parse_rational(&s).map(Real::Exact).map_err(D::Error::custom),
            serde_json::Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(Real::int(i))
                } else if let Some(u) = n.as_u64() {
                    Ok(Real::Exact(Rational::from_integer(BigInt::from(u))))
                } else {
                    n.as_f64().map(Real::Approx).ok_or_else(|| D::Error::custom("bad number"))
                }
            }
            other => Err(D::Error::custom(format!("expected number or rational string, got {other}"))),
        }
    }
}

/// Right end of the domain `(0, α)` or of an interval; possibly `+∞`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Bound {
    Finite(Rational),
    Infinite,
}

impl Bound {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Bound::Finite(r) => Some(r),
            Bound::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Bound::Infinite)
    }

    /// Whether `t ≤ self`.
    pub fn admits(&self, t: &Rational) -> bool {
        match self {
            Bound::Finite(b) => t <= b,
            Bound::Infinite => true,
        }
    }

    pub fn min_with(&self, t: &Rational) -> Rational {
        match self {
            Bound::Finite(b) if b < t => b.clone(),
            _ => t.clone(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Bound::Finite(r) => rat_to_f64(r),
            Bound::Infinite => f64::INFINITY,
        }
    }
}

impl PartialOrd for Bound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Bound {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Bound::Infinite, Bound::Infinite) => Ordering::Equal,
            (Bound::Infinite, _) => Ordering::Greater,
            (_, Bound::Infinite) => Ordering::Less,
            (Bound::Finite(a), Bound::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Finite(r) => f.write_str(&format_rational(r)),
            Bound::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Bound {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Bound::Infinite),
            other => parse_rational(other).map(Bound::Finite),
        }
    }
}

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Bound {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// Serde adapter for a single rational as a `"p/q"` string.
pub mod rational_str {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        use serde::de::Error as _;
        match Real::deserialize(d)? {
            Real::Exact(r) => Ok(r),
            Real::Approx(x) => rat_from_f64(x).map_err(D::Error::custom),
        }
    }
}

/// Serde adapter for `Option<Rational>`.
pub mod opt_rational_str {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_str(&format_rational(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        use serde::de::Error as _;
        match Option::<Real>::deserialize(d)? {
            None => Ok(None),
            Some(Real::Exact(r)) => Ok(Some(r)),
            Some(Real::Approx(x)) => rat_from_f64(x).map(Some).map_err(D::Error::custom),
        }
    }
}

/// Serde adapter for `Vec<Rational>`.
pub mod rational_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(format_rational))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        use serde::de::Error as _;
        Vec::<Real>::deserialize(d)?
            .into_iter()
            .map(|r| match r {
                Real::Exact(r) => Ok(r),
                Real::Approx(x) => rat_from_f64(x).map_err(D::Error::custom),
            })
            .collect()
    }
}

/// Sign of a rational as -1, 0, 1.
pub fn signum(r: &Rational) -> i8 {
    match r.numer().sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_are_reduced() {
        let r = rat(6, -4);
        assert_eq!(r.numer(), &BigInt::from(-3));
        assert_eq!(r.denom(), &BigInt::from(2));
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rational("0.75").unwrap(), rat(3, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), rat(-3, 2));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn exact_powers_and_roots() {
        assert_eq!(Real::int(4).powf(0.5), Real::int(2));
        assert!(Real::int(4).powf(0.5).is_exact());
        assert_eq!(Real::ratio(8, 27).root(3.0), Real::ratio(2, 3));
        assert!(!Real::int(2).powf(0.5).is_exact());
        assert!((Real::int(2).powf(0.5).to_f64() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(Real::int(2).powf(3.0), Real::int(8));
    }

    #[test]
    fn mixed_comparison_is_exact() {
        assert_eq!(Real::ratio(1, 2), Real::Approx(0.5));
        assert!(Real::ratio(1, 3) > Real::Approx(1.0 / 3.0) || Real::ratio(1, 3) < Real::Approx(1.0 / 3.0));
        assert!(Real::int(1) < Real::Approx(1.0 + f64::EPSILON));
    }

    #[test]
    fn arithmetic_promotes() {
        let a = Real::ratio(1, 3) + Real::ratio(1, 6);
        assert_eq!(a, Real::ratio(1, 2));
        assert!(a.is_exact());
        assert!(!(Real::ratio(1, 3) + Real::Approx(0.5)).is_exact());
    }

    #[test]
    fn json_forms() {
        let v: Vec<Real> = serde_json::from_str(r#"[1, "1/2", 0.25]"#).unwrap();
        assert!(v[0].is_exact() && v[1].is_exact() && !v[2].is_exact());
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"["1","1/2",0.25]"#);
        let b: Bound = serde_json::from_str(r#""inf""#).unwrap();
        assert_eq!(b, Bound::Infinite);
    }
}
