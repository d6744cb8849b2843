//! Floating-point types used by the dense eigensolver.
//!
//! [`DoubleDouble`] carries an unevaluated sum of two `f64` values (about 32
//! significant decimal digits) and is the default working precision.
//! [`BinaryFloat`] is a slower fixed-precision binary float built on big
//! integers, used when the double-double result would not be trustworthy.

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Arithmetic needed by Cholesky and Jacobi.
pub trait Real:
    Clone
    + Send
    + Sync
    + fmt::Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn from_rational(q: &BigRational) -> Self;
    fn to_f64(&self) -> f64;
    fn sqrt(&self) -> Self;
    /// Unit roundoff.
    fn epsilon() -> f64;
    /// Approximate number of significant decimal digits.
    fn digits() -> u32;

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

impl Real for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn from_rational(q: &BigRational) -> Self {
        crate::rational::to_f64(q)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn epsilon() -> f64 {
        f64::EPSILON / 2.0
    }
    fn digits() -> u32 {
        15
    }
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Double-double number `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Clone, Copy, Default, PartialEq)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    pub const fn new(hi: f64, lo: f64) -> Self {
        DoubleDouble { hi, lo }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (hi, lo) = quick_two_sum(p, e);
        DoubleDouble { hi, lo }
    }

    /// Exact conversion back to a rational (for tests and diagnostics).
    pub fn to_rational(self) -> BigRational {
        crate::rational::exact(self.hi) + crate::rational::exact(self.lo)
    }
}

impl fmt::Debug for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DoubleDouble({:e} + {:e})", self.hi, self.lo)
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            o => o,
        }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    #[inline]
    fn add(self, b: Self) -> Self {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        DoubleDouble { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    #[inline]
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        DoubleDouble { hi: -self.hi, lo: -self.lo }
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    #[inline]
    fn mul(self, b: Self) -> Self {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        DoubleDouble { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    #[inline]
    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        DoubleDouble { hi, lo } + DoubleDouble { hi: q3, lo: 0.0 }
    }
}

impl Real for DoubleDouble {
    fn zero() -> Self {
        DoubleDouble { hi: 0.0, lo: 0.0 }
    }
    fn one() -> Self {
        DoubleDouble { hi: 1.0, lo: 0.0 }
    }
    fn from_f64(x: f64) -> Self {
        DoubleDouble { hi: x, lo: 0.0 }
    }
    fn from_rational(q: &BigRational) -> Self {
        let hi = crate::rational::to_f64(q);
        if !hi.is_finite() || hi == 0.0 {
            return DoubleDouble { hi, lo: 0.0 };
        }
        let rest = q - crate::rational::exact(hi);
        let lo = crate::rational::to_f64(&rest);
        let (hi, lo) = quick_two_sum(hi, lo);
        DoubleDouble { hi, lo }
    }
    fn to_f64(&self) -> f64 {
        self.hi + self.lo
    }
    fn sqrt(&self) -> Self {
        if self.hi <= 0.0 {
            return DoubleDouble::zero();
        }
        // One Newton correction of the double-precision root.
        let x = self.hi.sqrt();
        let (p, e) = two_prod(x, x);
        let r = (*self - DoubleDouble { hi: p, lo: e }).hi;
        let (hi, lo) = quick_two_sum(x, r / (2.0 * x));
        DoubleDouble { hi, lo }
    }
    fn epsilon() -> f64 {
        2f64.powi(-104)
    }
    fn digits() -> u32 {
        31
    }
}

/// Binary floating-point number `mantissa * 2^exponent` whose mantissa has
/// exactly `PREC` significant bits (or is zero).
#[derive(Clone, PartialEq, Eq)]
pub struct BinaryFloat<const PREC: u32> {
    mantissa: BigInt,
    exponent: i64,
}

/// About 67 significant decimal digits.
pub type Float224 = BinaryFloat<224>;

impl<const PREC: u32> BinaryFloat<PREC> {
    fn normalized(mantissa: BigInt, exponent: i64) -> Self {
        if mantissa.is_zero() {
            return BinaryFloat { mantissa, exponent: 0 };
        }
        let (sign, mut mag) = mantissa.into_parts();
        let mut exponent = exponent;
        let bits = mag.bits() as i64;
        let prec = PREC as i64;
        if bits > prec {
            let shift = (bits - prec) as u64;
            mag = (mag + (BigUint::one() << (shift - 1))) >> shift;
            exponent += shift as i64;
            if mag.bits() as i64 > prec {
                mag >>= 1u32;
                exponent += 1;
            }
        } else if bits < prec {
            let shift = (prec - bits) as u64;
            mag <<= shift;
            exponent -= shift as i64;
        }
        BinaryFloat { mantissa: BigInt::from_biguint(sign, mag), exponent }
    }

    /// Exact rational value.
    pub fn to_rational(&self) -> BigRational {
        let m = BigRational::from_integer(self.mantissa.clone());
        let two = BigInt::from(2);
        if self.exponent >= 0 {
            m * BigRational::from_integer(num_traits::pow(two, self.exponent as usize))
        } else {
            m / BigRational::from_integer(num_traits::pow(two, (-self.exponent) as usize))
        }
    }
}

impl<const PREC: u32> fmt::Debug for BinaryFloat<PREC> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinaryFloat<{PREC}>({:e})", self.to_f64())
    }
}

impl<const PREC: u32> PartialOrd for BinaryFloat<PREC> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let d = self.clone() - other.clone();
        Some(match d.mantissa.sign() {
            Sign::Minus => Ordering::Less,
            Sign::NoSign => Ordering::Equal,
            Sign::Plus => Ordering::Greater,
        })
    }
}

impl<const PREC: u32> Add for BinaryFloat<PREC> {
    type Output = Self;
    fn add(self, b: Self) -> Self {
        if self.mantissa.is_zero() {
            return b;
        }
        if b.mantissa.is_zero() {
            return self;
        }
        let (big, small) = if self.exponent >= b.exponent { (self, b) } else { (b, self) };
        let d = big.exponent - small.exponent;
        if d > PREC as i64 + 2 {
            return big;
        }
        Self::normalized((big.mantissa << d as u64) + small.mantissa, small.exponent)
    }
}

impl<const PREC: u32> Sub for BinaryFloat<PREC> {
    type Output = Self;
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl<const PREC: u32> Neg for BinaryFloat<PREC> {
    type Output = Self;
    fn neg(self) -> Self {
        BinaryFloat { mantissa: -self.mantissa, exponent: self.exponent }
    }
}

impl<const PREC: u32> Mul for BinaryFloat<PREC> {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        Self::normalized(self.mantissa * b.mantissa, self.exponent + b.exponent)
    }
}

impl<const PREC: u32> Div for BinaryFloat<PREC> {
    type Output = Self;
    fn div(self, b: Self) -> Self {
        assert!(!b.mantissa.is_zero(), "division by zero");
        let shift = PREC as u64 + 2;
        Self::normalized((self.mantissa << shift) / b.mantissa, self.exponent - b.exponent - shift as i64)
    }
}

impl<const PREC: u32> Real for BinaryFloat<PREC> {
    fn zero() -> Self {
        BinaryFloat { mantissa: BigInt::zero(), exponent: 0 }
    }
    fn one() -> Self {
        Self::normalized(BigInt::one(), 0)
    }
    fn from_f64(x: f64) -> Self {
        Self::from_rational(&crate::rational::exact(x))
    }
    fn from_rational(q: &BigRational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        let num = q.numer();
        let den = q.denom();
        let shift = PREC as i64 + 2 + den.bits() as i64 - num.bits() as i64;
        if shift >= 0 {
            Self::normalized((num << shift as u64) / den, -shift)
        } else {
            Self::normalized(num / (den << (-shift) as u64), -shift)
        }
    }
    fn to_f64(&self) -> f64 {
        if self.mantissa.is_zero() {
            return 0.0;
        }
        let drop = PREC.saturating_sub(64) as u64;
        let top = (&self.mantissa >> drop).to_f64().unwrap_or(0.0);
        ldexp(top, self.exponent + drop as i64)
    }
    fn sqrt(&self) -> Self {
        if self.mantissa.sign() != Sign::Plus {
            return Self::zero();
        }
        let mut k = PREC as i64 + 2;
        if (self.exponent - k).rem_euclid(2) != 0 {
            k += 1;
        }
        let mag = self.mantissa.magnitude() << k as u64;
        Self::normalized(BigInt::from_biguint(Sign::Plus, mag.sqrt()), (self.exponent - k) / 2)
    }
    fn epsilon() -> f64 {
        2f64.powi(-(PREC as i32))
    }
    fn digits() -> u32 {
        (PREC as f64 * std::f64::consts::LOG10_2) as u32
    }
    fn abs(&self) -> Self {
        BinaryFloat { mantissa: self.mantissa.abs(), exponent: self.exponent }
    }
}

/// `x * 2^n` without intermediate overflow.
fn ldexp(mut x: f64, mut n: i64) -> f64 {
    while n > 1000 {
        x *= 2f64.powi(1000);
        n -= 1000;
    }
    while n < -1000 {
        x *= 2f64.powi(-1000);
        n += 1000;
    }
    x * 2f64.powi(n as i32)
}
