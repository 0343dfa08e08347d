//! Truncated power series in one variable and the jet machinery built on them.
//!
//! A [`TruncatedSeries`] of order `N` stores `c_0, …, c_N` and stands for
//! `c_0 + c_1 t + … + c_N t^N + O(t^{N+1})`. Binary operations require equal
//! orders; nothing is ever silently extended.

mod expr;
mod taylor;
mod transport;

pub use expr::{parse_expr, Expr, Unary};
pub use taylor::{TaylorIntegrator, TaylorSolution};
pub use transport::{compose_scalar, ode_jet_transport, JetTrajectory};

use crate::bell::complete_exp_bell;
use crate::error::{Error, Result};
use crate::scalar::{factorial, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries<T> {
    coeffs: Vec<T>,
}

fn unrepresentable(what: &str) -> Error {
    Error::UnsupportedModel(format!(
        "{what} is not representable in this coefficient domain"
    ))
}

impl<T: Scalar> TruncatedSeries<T> {
    /// Series from explicit coefficients; an empty list becomes the zero series of order 0.
    pub fn new(coeffs: Vec<T>) -> Self {
        if coeffs.is_empty() {
            return Self {
                coeffs: vec![T::zero()],
            };
        }
        Self { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self {
            coeffs: vec![T::zero(); order + 1],
        }
    }

    pub fn constant(c: T, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// `c + t`.
    pub fn variable(c: T, order: usize) -> Self {
        let mut s = Self::constant(c, order);
        if order >= 1 {
            s.coeffs[1] = T::one();
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &T {
        &self.coeffs[i]
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.order() != other.order() {
            return Err(Error::OrderMismatch {
                left: self.order(),
                right: other.order(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        })
    }

    /// Cauchy product truncated to the common order.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let n = self.order();
        let mut out = vec![T::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == T::zero() {
                continue;
            }
            for (j, b) in other.coeffs[..=n - i].iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Ok(Self { coeffs: out })
    }

    pub fn neg(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }

    pub fn scale(&self, c: &T) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| a.clone() * c.clone()).collect(),
        }
    }

    pub fn add_constant(&self, c: &T) -> Self {
        let mut s = self.clone();
        s.coeffs[0] = s.coeffs[0].clone() + c.clone();
        s
    }

    /// `∫_0^t`, raising the order by one.
    pub fn integrate(&self) -> Self {
        let mut out = Vec::with_capacity(self.coeffs.len() + 1);
        out.push(T::zero());
        for (i, c) in self.coeffs.iter().enumerate() {
            out.push(c.clone() / T::from_i64(i as i64 + 1));
        }
        Self { coeffs: out }
    }

    /// `d/dt`, lowering the order by one (order 0 maps to the zero series of order 0).
    pub fn derivative(&self) -> Self {
        if self.order() == 0 {
            return Self::zero(0);
        }
        Self {
            coeffs: self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(i, c)| c.clone() * T::from_i64(i as i64 + 1))
                .collect(),
        }
    }

    /// Drop coefficients beyond `order`.
    pub fn truncate(&self, order: usize) -> Self {
        let keep = (order + 1).min(self.coeffs.len());
        let mut coeffs = self.coeffs[..keep].to_vec();
        coeffs.resize(order + 1, T::zero());
        Self { coeffs }
    }

    /// Horner evaluation of the polynomial part at `t`.
    pub fn eval(&self, t: &T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * t.clone() + c.clone())
    }

    pub fn recip(&self) -> Result<Self> {
        let c0 = self.coeffs[0].clone();
        if c0 == T::zero() {
            return Err(unrepresentable(
                "reciprocal of a series with zero constant term",
            ));
        }
        let n = self.order();
        let mut out: Vec<T> = Vec::with_capacity(n + 1);
        out.push(T::one() / c0.clone());
        for k in 1..=n {
            let mut acc = T::zero();
            for i in 1..=k {
                acc = acc + self.coeffs[i].clone() * out[k - i].clone();
            }
            out.push(-acc / c0.clone());
        }
        Ok(Self { coeffs: out })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        self.mul(&other.recip()?)
    }

    pub fn powi(&self, e: i32) -> Result<Self> {
        let base = if e < 0 { self.recip()? } else { self.clone() };
        let mut acc = Self::constant(T::one(), self.order());
        let mut b = base;
        let mut k = e.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&b)?;
            }
            k >>= 1;
            if k > 0 {
                b = b.mul(&b)?;
            }
        }
        Ok(acc)
    }

    /// `u = exp(h)` via `u' = h' u`: `n u_n = Σ_{k=1}^{n} k h_k u_{n−k}`.
    pub fn exp(&self) -> Result<Self> {
        let u0 = self.coeffs[0]
            .exp()
            .ok_or_else(|| unrepresentable("exp of the constant term"))?;
        let n = self.order();
        let mut out: Vec<T> = Vec::with_capacity(n + 1);
        out.push(u0);
        for m in 1..=n {
            let mut acc = T::zero();
            for k in 1..=m {
                acc = acc + T::from_i64(k as i64) * self.coeffs[k].clone() * out[m - k].clone();
            }
            out.push(acc / T::from_i64(m as i64));
        }
        Ok(Self { coeffs: out })
    }

    /// `l = ln(c)` via `c l' = c'`.
    pub fn ln(&self) -> Result<Self> {
        let c0 = self.coeffs[0].clone();
        let l0 = c0
            .ln()
            .ok_or_else(|| unrepresentable("ln of the constant term"))?;
        let n = self.order();
        let mut out: Vec<T> = Vec::with_capacity(n + 1);
        out.push(l0);
        for m in 1..=n {
            let mut acc = T::from_i64(m as i64) * self.coeffs[m].clone();
            for k in 1..m {
                acc = acc - T::from_i64(k as i64) * out[k].clone() * self.coeffs[m - k].clone();
            }
            out.push(acc / (T::from_i64(m as i64) * c0.clone()));
        }
        Ok(Self { coeffs: out })
    }

    /// `(sin h, cos h)` by the coupled recursion `s' = h' c`, `c' = −h' s`.
    pub fn sin_cos(&self) -> Result<(Self, Self)> {
        let h0 = &self.coeffs[0];
        let s0 = h0
            .sin()
            .ok_or_else(|| unrepresentable("sin of the constant term"))?;
        let c0 = h0
            .cos()
            .ok_or_else(|| unrepresentable("cos of the constant term"))?;
        let n = self.order();
        let mut s = Vec::with_capacity(n + 1);
        let mut c = Vec::with_capacity(n + 1);
        s.push(s0);
        c.push(c0);
        for m in 1..=n {
            let mut sa = T::zero();
            let mut ca = T::zero();
            for k in 1..=m {
                let kh = T::from_i64(k as i64) * self.coeffs[k].clone();
                sa = sa + kh.clone() * c[m - k].clone();
                ca = ca - kh * s[m - k].clone();
            }
            let mm = T::from_i64(m as i64);
            s.push(sa / mm.clone());
            c.push(ca / mm);
        }
        Ok((Self { coeffs: s }, Self { coeffs: c }))
    }

    pub fn sqrt(&self) -> Result<Self> {
        let c0 = self.coeffs[0].clone();
        if c0 == T::zero() {
            return Err(unrepresentable("sqrt of a series vanishing at the origin"));
        }
        let r0 = c0
            .sqrt()
            .ok_or_else(|| unrepresentable("sqrt of the constant term"))?;
        let n = self.order();
        let two_r0 = T::from_i64(2) * r0.clone();
        let mut out: Vec<T> = Vec::with_capacity(n + 1);
        out.push(r0);
        for m in 1..=n {
            let mut acc = self.coeffs[m].clone();
            for k in 1..m {
                acc = acc - out[k].clone() * out[m - k].clone();
            }
            out.push(acc / two_r0.clone());
        }
        Ok(Self { coeffs: out })
    }

    /// `c^α` via `c p' = α c' p`.
    pub fn powf(&self, alpha: &T) -> Result<Self> {
        let c0 = self.coeffs[0].clone();
        if c0 == T::zero() {
            return Err(unrepresentable(
                "real power of a series vanishing at the origin",
            ));
        }
        let p0 = c0
            .powf(alpha)
            .ok_or_else(|| unrepresentable("real power of the constant term"))?;
        let n = self.order();
        let mut out: Vec<T> = Vec::with_capacity(n + 1);
        out.push(p0);
        for m in 1..=n {
            let mut acc = T::zero();
            for k in 1..=m {
                let w = alpha.clone() * T::from_i64(k as i64) - T::from_i64((m - k) as i64);
                acc = acc + w * self.coeffs[k].clone() * out[m - k].clone();
            }
            out.push(acc / (T::from_i64(m as i64) * c0.clone()));
        }
        Ok(Self { coeffs: out })
    }
}

/// `exp(h)` by the first-order recursion `u' = h' u`.
pub fn exp_series<T: Scalar>(h: &TruncatedSeries<T>) -> Result<TruncatedSeries<T>> {
    h.exp()
}

/// `exp(h)` by Faà di Bruno: `u_j = exp(h_0) B_j(1! h_1, 2! h_2, …, j! h_j) / j!`.
pub fn exp_series_faa_di_bruno<T: Scalar>(h: &TruncatedSeries<T>) -> Result<TruncatedSeries<T>> {
    let n = h.order();
    let u0 = h
        .coeff(0)
        .exp()
        .ok_or_else(|| unrepresentable("exp of the constant term"))?;
    let derivs: Vec<T> = (1..=n)
        .map(|i| h.coeff(i).clone() * T::from_integer(&factorial(i)))
        .collect();
    let mut out = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let b = complete_exp_bell(j, &derivs[..j])?;
        out.push(u0.clone() * b / T::from_integer(&factorial(j)));
    }
    Ok(TruncatedSeries::new(out))
}
