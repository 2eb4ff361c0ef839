//! Exact reals of the form `(p/q) · π^k · (√2)^s` with `s ∈ {0, 1}`.
//!
//! Every bound handled by this crate lives in this set, and the set is closed
//! under multiplication, division and integer powers. Ordering between two
//! values is decided rigorously by bracketing π and √2 between rationals and
//! refining until the enclosing intervals separate.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Div, Mul, Neg};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactValue {
    coeff: BigRational,
    pi_power: i32,
    sqrt2_power: u8,
}

impl ExactValue {
    pub fn new(coeff: BigRational, pi_power: i32, sqrt2_power: u8) -> Self {
        let mut v = ExactValue {
            coeff,
            pi_power,
            sqrt2_power: 0,
        };
        // (√2)^s = 2^(s div 2) · (√2)^(s mod 2)
        let s = sqrt2_power;
        if s >= 2 {
            v.coeff *= BigRational::from_integer(BigInt::from(2).pow(u32::from(s / 2)));
        }
        v.sqrt2_power = s % 2;
        v.canonicalize();
        v
    }

    pub fn from_ratio(p: i64, q: i64) -> Self {
        assert!(q != 0, "zero denominator");
        Self::new(BigRational::new(p.into(), q.into()), 0, 0)
    }

    pub fn integer(p: i64) -> Self {
        Self::from_ratio(p, 1)
    }

    pub fn zero() -> Self {
        Self::integer(0)
    }

    pub fn one() -> Self {
        Self::integer(1)
    }

    pub fn pi() -> Self {
        Self::new(BigRational::one(), 1, 0)
    }

    pub fn sqrt2() -> Self {
        Self::new(BigRational::one(), 0, 1)
    }

    fn canonicalize(&mut self) {
        if self.coeff.is_zero() {
            self.pi_power = 0;
            self.sqrt2_power = 0;
        }
    }

    /// Signed numerator of the rational coefficient, in lowest terms.
    pub fn numerator(&self) -> &BigInt {
        self.coeff.numer()
    }

    /// Denominator of the rational coefficient; always positive.
    pub fn denominator(&self) -> &BigInt {
        self.coeff.denom()
    }

    pub fn coefficient(&self) -> &BigRational {
        &self.coeff
    }

    pub fn pi_power(&self) -> i32 {
        self.pi_power
    }

    pub fn sqrt2_power(&self) -> u8 {
        self.sqrt2_power
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        let c = self.coeff.to_f64().unwrap_or(f64::NAN);
        let mut x = c * std::f64::consts::PI.powi(self.pi_power);
        if self.sqrt2_power == 1 {
            x *= std::f64::consts::SQRT_2;
        }
        x
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        ExactValue::one() / self.clone()
    }

    pub fn powi(&self, exp: u32) -> Self {
        let mut acc = ExactValue::one();
        for _ in 0..exp {
            acc = acc * self.clone();
        }
        acc
    }

    /// Rigorous comparison. Distinct canonical values are never numerically
    /// equal (π is transcendental and √2 irrational), so refinement terminates.
    pub fn cmp_exact(&self, other: &Self) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        let mut digits = 24;
        loop {
            let (a_lo, a_hi) = self.enclosure(digits);
            let (b_lo, b_hi) = other.enclosure(digits);
            if a_hi < b_lo {
                return Ordering::Less;
            }
            if b_hi < a_lo {
                return Ordering::Greater;
            }
            digits *= 2;
        }
    }

    /// Rational interval `[lo, hi]` containing the value, accurate to roughly
    /// `digits` decimal places in π and √2.
    pub fn enclosure(&self, digits: u32) -> (BigRational, BigRational) {
        if self.is_zero() {
            return (BigRational::zero(), BigRational::zero());
        }
        let (pi_lo, pi_hi) = pi_enclosure(digits);
        let (mut lo, mut hi) = (BigRational::one(), BigRational::one());
        let k = self.pi_power.unsigned_abs();
        for _ in 0..k {
            lo *= &pi_lo;
            hi *= &pi_hi;
        }
        if self.pi_power < 0 {
            let (l, h) = (hi.recip(), lo.recip());
            lo = l;
            hi = h;
        }
        if self.sqrt2_power == 1 {
            let (s_lo, s_hi) = sqrt2_enclosure(digits);
            lo *= s_lo;
            hi *= s_hi;
        }
        let c = &self.coeff;
        if c.is_negative() {
            (c * hi, c * lo)
        } else {
            (c * lo, c * hi)
        }
    }
}

impl PartialOrd for ExactValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExactValue {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_exact(other)
    }
}

impl Mul for ExactValue {
    type Output = ExactValue;

    fn mul(self, rhs: ExactValue) -> ExactValue {
        ExactValue::new(
            self.coeff * rhs.coeff,
            self.pi_power + rhs.pi_power,
            self.sqrt2_power + rhs.sqrt2_power,
        )
    }
}

impl Div for ExactValue {
    type Output = ExactValue;

    fn div(self, rhs: ExactValue) -> ExactValue {
        assert!(!rhs.is_zero(), "division by zero");
        let mut coeff = self.coeff / rhs.coeff;
        let mut s = self.sqrt2_power;
        if rhs.sqrt2_power == 1 {
            // 1/√2 = √2/2
            coeff /= BigRational::from_integer(2.into());
            s += 1;
        }
        ExactValue::new(coeff, self.pi_power - rhs.pi_power, s)
    }
}

impl Neg for ExactValue {
    type Output = ExactValue;

    fn neg(self) -> ExactValue {
        ExactValue::new(-self.coeff, self.pi_power, self.sqrt2_power)
    }
}

/// Canonical form `p/q*pi^k*sqrt2^s`.
impl fmt::Display for ExactValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{}*pi^{}*sqrt2^{}",
            self.coeff.numer(),
            self.coeff.denom(),
            self.pi_power,
            self.sqrt2_power
        )
    }
}

impl FromStr for ExactValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::Parse(s.to_string());
        let mut parts = s.trim().split('*');
        let frac = parts.next().ok_or_else(bad)?;
        let pi = parts.next().ok_or_else(bad)?;
        let sq = parts.next().ok_or_else(bad)?;
        if parts.next().is_some() {
            return Err(bad());
        }
        let (p, q) = frac.split_once('/').ok_or_else(bad)?;
        let p: BigInt = p.parse().map_err(|_| bad())?;
        let q: BigInt = q.parse().map_err(|_| bad())?;
        if !q.is_positive() {
            return Err(bad());
        }
        let k: i32 = pi
            .strip_prefix("pi^")
            .ok_or_else(bad)?
            .parse()
            .map_err(|_| bad())?;
        let sp: u8 = sq
            .strip_prefix("sqrt2^")
            .ok_or_else(bad)?
            .parse()
            .map_err(|_| bad())?;
        if sp > 1 {
            return Err(bad());
        }
        Ok(ExactValue::new(BigRational::new(p, q), k, sp))
    }
}

fn pow10(digits: u32) -> BigInt {
    BigInt::from(10).pow(digits)
}

/// `atan(1/x)` scaled by `scale`, with the truncation error of the
/// alternating series folded into a returned bound on the absolute error.
fn arctan_inv_scaled(x: u64, scale: &BigInt) -> (BigInt, BigInt) {
    let x = BigInt::from(x);
    let x2 = &x * &x;
    let mut power = scale / &x;
    let mut sum = BigInt::zero();
    let mut k: u64 = 0;
    let mut terms = 0u64;
    while !power.is_zero() {
        let term = &power / BigInt::from(2 * k + 1);
        if k.is_multiple_of(2) {
            sum += term;
        } else {
            sum -= term;
        }
        power /= &x2;
        k += 1;
        terms += 1;
    }
    // each integer division truncates by < 1; the tail is below one unit
    (sum, BigInt::from(2 * terms + 2))
}

/// Rational bounds on π from Machin's formula, width about `10^-digits`.
pub fn pi_enclosure(digits: u32) -> (BigRational, BigRational) {
    let guard = 10;
    let scale = pow10(digits + guard);
    let (a, ea) = arctan_inv_scaled(5, &scale);
    let (b, eb) = arctan_inv_scaled(239, &scale);
    let approx = BigInt::from(16) * a - BigInt::from(4) * b;
    let err = BigInt::from(16) * ea + BigInt::from(4) * eb;
    (
        BigRational::new(&approx - &err, scale.clone()),
        BigRational::new(&approx + &err, scale),
    )
}

/// Rational bounds on √2 of width `10^-digits`.
pub fn sqrt2_enclosure(digits: u32) -> (BigRational, BigRational) {
    let scale = pow10(digits);
    let root = (BigInt::from(2) * &scale * &scale).sqrt();
    (
        BigRational::new(root.clone(), scale.clone()),
        BigRational::new(root + 1, scale),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form_reduces() {
        let v = ExactValue::from_ratio(6, -8);
        assert_eq!(v.numerator(), &BigInt::from(-3));
        assert_eq!(v.denominator(), &BigInt::from(4));
        assert_eq!(v.to_string(), "-3/4*pi^0*sqrt2^0");
    }

    #[test]
    fn zero_drops_transcendental_parts() {
        let v = ExactValue::new(BigRational::zero(), 3, 1);
        assert_eq!(v, ExactValue::zero());
    }

    #[test]
    fn sqrt2_squares_to_two() {
        assert_eq!(ExactValue::sqrt2() * ExactValue::sqrt2(), ExactValue::integer(2));
        assert_eq!(
            ExactValue::one() / ExactValue::sqrt2(),
            ExactValue::new(BigRational::new(1.into(), 2.into()), 0, 1)
        );
    }

    #[test]
    fn pi_enclosure_brackets_float_pi() {
        let (lo, hi) = pi_enclosure(30);
        assert!(lo.to_f64().unwrap() <= std::f64::consts::PI + 1e-15);
        assert!(hi.to_f64().unwrap() >= std::f64::consts::PI - 1e-15);
        assert!(&hi - &lo < BigRational::new(1.into(), pow10(28)));
        // π = 3.14159265358979323846264338327950288...
        let truncated = BigRational::new("3141592653589793238462643383279502".parse().unwrap(), pow10(33));
        let above = &truncated + BigRational::new(1.into(), pow10(33));
        assert!(lo < above && truncated < hi);
        assert!(lo > truncated - BigRational::new(1.into(), pow10(29)));
    }

    #[test]
    fn ordering_across_pi_powers() {
        // π²/8 ≈ 1.2337 < 4/3 < 9π²/64 ≈ 1.3879 < √2 < 64/45
        let a = ExactValue::pi().powi(2) / ExactValue::integer(8);
        let b = ExactValue::from_ratio(4, 3);
        let c = ExactValue::from_ratio(9, 64) * ExactValue::pi().powi(2);
        let d = ExactValue::sqrt2();
        let e = ExactValue::from_ratio(64, 45);
        assert!(a < b && b < c && c < d && d < e);
        assert!(-e.clone() < -d.clone());
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!("1/0*pi^0*sqrt2^0".parse::<ExactValue>().is_err());
        assert!("1/2*pi^0".parse::<ExactValue>().is_err());
        assert!("1/2*pi^0*sqrt2^2".parse::<ExactValue>().is_err());
        assert!("x/2*pi^0*sqrt2^0".parse::<ExactValue>().is_err());
    }

    proptest::proptest! {
        #[test]
        fn display_parse_roundtrip(p in -10_000i64..10_000, q in 1i64..10_000, k in -6i32..6, s in 0u8..2) {
            let v = ExactValue::new(BigRational::new(p.into(), q.into()), k, s);
            let back: ExactValue = v.to_string().parse().unwrap();
            proptest::prop_assert_eq!(back, v);
        }

        #[test]
        fn mul_div_inverse(p in 1i64..1000, q in 1i64..1000, k in -4i32..4, s in 0u8..2,
                           p2 in 1i64..1000, q2 in 1i64..1000, k2 in -4i32..4, s2 in 0u8..2) {
            let a = ExactValue::new(BigRational::new(p.into(), q.into()), k, s);
            let b = ExactValue::new(BigRational::new(p2.into(), q2.into()), k2, s2);
            let prod = a.clone() * b.clone();
            proptest::prop_assert_eq!(prod.clone() / b.clone(), a.clone());
            let rel = (prod.to_f64() - a.to_f64() * b.to_f64()).abs() / prod.to_f64().abs();
            proptest::prop_assert!(rel < 1e-14);
        }

        #[test]
        fn exact_order_agrees_with_floats(p in -1000i64..1000, q in 1i64..1000, k in -3i32..3, s in 0u8..2,
                                           p2 in -1000i64..1000, q2 in 1i64..1000, k2 in -3i32..3, s2 in 0u8..2) {
            let a = ExactValue::new(BigRational::new(p.into(), q.into()), k, s);
            let b = ExactValue::new(BigRational::new(p2.into(), q2.into()), k2, s2);
            let (fa, fb) = (a.to_f64(), b.to_f64());
            if (fa - fb).abs() > 1e-9 * fa.abs().max(fb.abs()) {
                proptest::prop_assert_eq!(a.cmp(&b), fa.partial_cmp(&fb).unwrap());
            }
        }
    }
}
