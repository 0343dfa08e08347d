//! Coefficient assembly directly from iterated directional derivatives,
//! independent of the engine's `C_{m,r}` recursion.

use super::profile::geometric_jet;
use super::HamiltonianModel;
use crate::bell::{enumerate_compositions, enumerate_partitions, gen_binomial, multinomial_c};
use crate::engine::{gamma, SphereRule};
use crate::error::{Error, Result};
use crate::scalar::{compensated_sum, factorial, Scalar};

/// Derivatives at `x0` along one direction: `phi_derivs[p] = (JX)^p φ`,
/// `lap_derivs[p] = (JX)^p Δφ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricJet<T> {
    pub phi_derivs: Vec<T>,
    pub lap_derivs: Vec<T>,
}

fn ratio_of<T: Scalar>(r: &num_rational::BigRational) -> T {
    T::from_integer(r.numer()) / T::from_integer(r.denom())
}

/// `(1/n!) Σ_l Σ_{P(n,l)} c(n; ν) a^{Σν} Π_p ((JX)^{p−1}Δφ)^{ν_p}`, i.e. the
/// Taylor coefficient `g_n` of `e^{a h}`; equal to 1 for `n = 0`.
fn g_raw<T: Scalar>(n: usize, a: &T, lap: &[T]) -> Result<T> {
    if n == 0 {
        return Ok(T::one());
    }
    let mut acc = T::zero();
    for l in 1..=n {
        for tuple in enumerate_partitions(n, l) {
            let mut term = ratio_of::<T>(&multinomial_c(n, &tuple)?);
            term = term * a.pow_u32(tuple.part_count() as u32);
            for (p, &np) in tuple.entries().iter().enumerate() {
                if np > 0 {
                    term = term * lap[p].pow_u32(np);
                }
            }
            acc = acc + term;
        }
    }
    Ok(acc / T::from_integer(&factorial(n)))
}

/// `Σ_{r=1}^{m} C(−α, r) |X|^{−2r} Σ_{Q(m,r)} 2^r / Π(n_i+2)! · Π (JX)^{n_i+1}φ`; 1 for `m = 0`.
fn f_raw<T: Scalar>(m: usize, alpha: &T, phi: &[T]) -> T {
    if m == 0 {
        return T::one();
    }
    let x2 = phi[1].clone();
    let mut acc = T::zero();
    for r in 1..=m {
        let mut inner = T::zero();
        for comp in enumerate_compositions(m, r) {
            let mut term = T::from_i64(2).pow_u32(r as u32);
            for &ni in comp.entries() {
                let ni = ni as usize;
                term = term * phi[ni + 1].clone() / T::from_integer(&factorial(ni + 2));
            }
            inner = inner + term;
        }
        acc = acc + gen_binomial(&(-alpha.clone()), r) * inner / x2.pow_u32(r as u32);
    }
    acc
}

fn check_jet<T>(jet: &GeometricJet<T>, j: usize) -> Result<()> {
    if jet.phi_derivs.len() < j + 2 || jet.lap_derivs.len() < j.max(1) {
        return Err(Error::ShortInput {
            needed: j + 2,
            got: jet.phi_derivs.len(),
        });
    }
    Ok(())
}

fn leading<T: Scalar>(jet: &GeometricJet<T>, node: usize, omega: &[f64]) -> Result<f64> {
    let x2 = jet.phi_derivs[1].to_f64();
    if !(x2 > 0.0) {
        return Err(Error::NonPositiveLeading {
            node,
            omega: omega.to_vec(),
            value: x2,
        });
    }
    Ok(x2)
}

/// `ζ_j` in the raw triple-sum form, one jet per rule node, `ν = 2`, `λ = d`.
pub fn zeta_raw<T: Scalar>(
    j: usize,
    a: &T,
    rule: &SphereRule,
    jets: &[GeometricJet<T>],
) -> Result<f64> {
    if jets.len() != rule.len() {
        return Err(Error::InvalidConfig(format!(
            "{} jets for {} nodes",
            jets.len(),
            rule.len()
        )));
    }
    let d = rule.dim;
    let alpha_f = (d + j) as f64 / 2.0;
    let alpha = T::from_ratio((d + j) as i64, 2);
    let mut terms = Vec::with_capacity(jets.len());
    for (i, (jet, w)) in jets.iter().zip(&rule.weights).enumerate() {
        check_jet(jet, j)?;
        let x2 = leading(jet, i, &rule.nodes[i])?;
        let mut bracket = T::zero();
        for m in 0..=j {
            let g = g_raw(j - m, a, &jet.lap_derivs)?;
            if g.is_zero() {
                continue;
            }
            bracket = bracket + g * f_raw(m, &alpha, &jet.phi_derivs);
        }
        terms.push(w * x2.powf(-alpha_f) * bracket.to_f64());
    }
    Ok(0.5 * gamma(alpha_f)? * compensated_sum(terms))
}

/// Hand-transcribed closed form of `ζ_2`.
pub fn zeta2_reference<T: Scalar>(
    a: &T,
    rule: &SphereRule,
    jets: &[GeometricJet<T>],
) -> Result<f64> {
    if jets.len() != rule.len() {
        return Err(Error::InvalidConfig(format!(
            "{} jets for {} nodes",
            jets.len(),
            rule.len()
        )));
    }
    let d = rule.dim as i64;
    let mut terms = Vec::with_capacity(jets.len());
    for (i, (jet, w)) in jets.iter().zip(&rule.weights).enumerate() {
        check_jet(jet, 2)?;
        let x2f = leading(jet, i, &rule.nodes[i])?;
        let x2 = jet.phi_derivs[1].clone();
        let lap = jet.lap_derivs[0].clone();
        let jx_lap = jet.lap_derivs[1].clone();
        let jx2_phi = jet.phi_derivs[2].clone();
        let jx3_phi = jet.phi_derivs[3].clone();
        let half = T::from_ratio(1, 2);
        let first = half * (a.clone() * jx_lap + a.clone() * a.clone() * lap.clone() * lap.clone());
        let middle = T::from_ratio(-(d + 2), 2)
            * (a.clone() / T::from_i64(3) * lap * jx2_phi.clone() + jx3_phi / T::from_i64(12))
            / x2.clone();
        let c2 = gen_binomial(&T::from_ratio(-(d + 2), 2), 2);
        let last = c2 * jx2_phi.clone() * jx2_phi / (T::from_i64(9) * x2.clone() * x2);
        let bracket = first + middle + last;
        terms.push(w * x2f.powf(-(d as f64 + 2.0) / 2.0) * bracket.to_f64());
    }
    Ok(d as f64 / 4.0 * gamma(d as f64 / 2.0)? * compensated_sum(terms))
}

/// `ζ_j^{(a)}` for a model via the raw form, with jets extracted on each rule node.
pub fn zeta_geometric(
    j: usize,
    a: f64,
    model: &HamiltonianModel,
    x0: &[f64],
    rule: &SphereRule,
) -> Result<f64> {
    model.check_zero_level(x0)?;
    let jets: Vec<GeometricJet<f64>> = rule
        .nodes
        .iter()
        .map(|omega| geometric_jet(model, omega, x0, j + 1))
        .collect::<Result<_>>()?;
    zeta_raw(j, &a, rule, &jets)
}
