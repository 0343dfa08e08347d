use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::scalar::{factorial, ratio_to_f64};

/// `Γ(q)` at a positive half-integer: `rational · π^{1/2}` when `q − 1/2` is an
/// integer, otherwise the factorial `(q − 1)!`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaValue {
    pub rational: BigRational,
    pub sqrt_pi: bool,
}

impl GammaValue {
    pub fn to_f64(&self) -> f64 {
        let r = ratio_to_f64(&self.rational);
        if self.sqrt_pi {
            r * PI.sqrt()
        } else {
            r
        }
    }
}

/// The doubled argument `2q` when it is a positive integer.
fn doubled(q: f64) -> Option<u64> {
    let t = 2.0 * q;
    (t > 0.0 && t.fract() == 0.0 && t < 1e6).then_some(t as u64)
}

pub fn half_integer_gamma(q: f64) -> Result<GammaValue> {
    if q <= 0.0 && q.fract() == 0.0 {
        return Err(Error::GammaPole(q));
    }
    let twice = doubled(q)
        .ok_or_else(|| Error::InvalidConfig(format!("{q} is not a positive half-integer")))?;
    if twice % 2 == 0 {
        let n = (twice / 2) as usize;
        return Ok(GammaValue {
            rational: BigRational::from_integer(factorial(n - 1)),
            sqrt_pi: false,
        });
    }
    // Γ(n + 1/2) = (2n)! / (4^n n!) · √π
    let n = ((twice - 1) / 2) as usize;
    let num = factorial(2 * n);
    let den = num_traits::pow(BigInt::from(4), n) * factorial(n);
    Ok(GammaValue {
        rational: BigRational::new(num, den),
        sqrt_pi: true,
    })
}

/// `Γ(x)` with the exact half-integer path where it applies.
pub fn gamma(x: f64) -> Result<f64> {
    if x <= 0.0 && x.fract() == 0.0 {
        return Err(Error::GammaPole(x));
    }
    if doubled(x).is_some() {
        return half_integer_gamma(x).map(|g| g.to_f64());
    }
    Ok(libm::tgamma(x))
}

/// `Γ(x + 1/2) / Γ(x + 1)` for positive integer `x`, as a product free of overflow.
pub fn half_step_gamma_ratio(n: u64) -> f64 {
    // Γ(n + 1/2)/Γ(n + 1) = √π · Π_{i=1}^{n} (2i − 1)/(2i)
    let mut r = PI.sqrt();
    for i in 1..=n {
        r *= (2 * i - 1) as f64 / (2 * i) as f64;
    }
    r
}
