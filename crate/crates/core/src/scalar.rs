//! Coefficient domains shared by the combinatorics, jets and the engine.
//!
//! Two domains are supported: binary64 floats and exact rationals. The
//! combinatorial routines only need ring operations ([`Ring`]), which also
//! lets them run over symbolic [`crate::bell::Polynomial`] values.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational; always normalized with a positive denominator.
pub type ExactRational = BigRational;

/// Commutative ring with integer embedding.
pub trait Ring:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Mul<Output = Self>
    + Sub<Output = Self>
{
    fn from_integer(n: &BigInt) -> Self;

    fn from_i64(n: i64) -> Self {
        Self::from_integer(&BigInt::from(n))
    }

    fn pow_u32(&self, e: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
}

/// A field in which jets, expansions and quadrature brackets are evaluated.
///
/// Elementary functions return `None` when the value is not representable in
/// the domain (e.g. `exp(1)` over the rationals).
pub trait Scalar: Ring + Div<Output = Self> + Neg<Output = Self> + Send + Sync {
    fn from_f64(x: f64) -> Option<Self>;
    fn to_f64(&self) -> f64;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    fn exp(&self) -> Option<Self>;
    fn ln(&self) -> Option<Self>;
    fn sin(&self) -> Option<Self>;
    fn cos(&self) -> Option<Self>;
    fn sqrt(&self) -> Option<Self>;
    fn powf(&self, alpha: &Self) -> Option<Self>;
    fn abs_f64(&self) -> f64 {
        self.to_f64().abs()
    }
}

impl Ring for f64 {
    fn from_integer(n: &BigInt) -> Self {
        n.to_f64().unwrap_or(f64::NAN)
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn pow_u32(&self, e: u32) -> Self {
        self.powi(e as i32)
    }
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Option<Self> {
        Some(x)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn exp(&self) -> Option<Self> {
        Some(f64::exp(*self))
    }
    fn ln(&self) -> Option<Self> {
        (*self > 0.0).then(|| f64::ln(*self))
    }
    fn sin(&self) -> Option<Self> {
        Some(f64::sin(*self))
    }
    fn cos(&self) -> Option<Self> {
        Some(f64::cos(*self))
    }
    fn sqrt(&self) -> Option<Self> {
        (*self >= 0.0).then(|| f64::sqrt(*self))
    }
    fn powf(&self, alpha: &Self) -> Option<Self> {
        (*self > 0.0 || alpha.fract() == 0.0).then(|| f64::powf(*self, *alpha))
    }
}

impl Ring for BigRational {
    fn from_integer(n: &BigInt) -> Self {
        BigRational::from_integer(n.clone())
    }
}

fn exact_isqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

impl Scalar for BigRational {
    fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }
    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn exp(&self) -> Option<Self> {
        self.is_zero().then(BigRational::one)
    }
    fn ln(&self) -> Option<Self> {
        self.is_one().then(BigRational::zero)
    }
    fn sin(&self) -> Option<Self> {
        self.is_zero().then(BigRational::zero)
    }
    fn cos(&self) -> Option<Self> {
        self.is_zero().then(BigRational::one)
    }
    fn sqrt(&self) -> Option<Self> {
        let n = exact_isqrt(self.numer())?;
        let d = exact_isqrt(self.denom())?;
        Some(BigRational::new(n, d))
    }
    fn powf(&self, alpha: &Self) -> Option<Self> {
        if self.is_one() {
            return Some(BigRational::one());
        }
        if !alpha.is_integer() {
            return None;
        }
        let e = alpha.to_integer().to_i32()?;
        if e < 0 && self.is_zero() {
            return None;
        }
        Some(num_traits::pow::Pow::pow(self, e))
    }
}

/// Correctly scaled conversion that survives huge numerators/denominators.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift = nb - db - 60;
    let scaled = if shift > 0 {
        BigRational::new(r.numer().clone(), r.denom() << (shift as usize))
    } else {
        BigRational::new(r.numer() << ((-shift) as usize), r.denom().clone())
    };
    let q = scaled.to_integer().to_f64().unwrap_or(f64::NAN);
    libm::ldexp(q, shift as i32)
}

/// `n!` as a big integer.
pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// Neumaier-compensated sum in the iteration order of `values`.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
