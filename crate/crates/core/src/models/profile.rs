use rayon::prelude::*;

use super::raw::GeometricJet;
use super::HamiltonianModel;
use crate::engine::{RadialProfile, SphereRule};
use crate::error::{Error, Result};
use crate::jets::{
    compose_scalar, exp_series, exp_series_faa_di_bruno, ode_jet_transport, TruncatedSeries,
};
use crate::scalar::{factorial, Scalar};

/// Taylor series in `ρ` of `f = 2∫_0^ρ φ_Ω(γ)`, `h = ∫_0^ρ Δφ_Ω(γ)` and `g = e^{a h}`
/// along `γ(t) = e^{itΩ} x0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSeries<T> {
    pub f: TruncatedSeries<T>,
    pub h: TruncatedSeries<T>,
    pub g: TruncatedSeries<T>,
}

impl<T: Scalar> RadialSeries<T> {
    /// `f_0, …, f_n` with `f = ρ² Σ f_p ρ^p`.
    pub fn f_coeffs(&self, n: usize) -> Result<Vec<T>> {
        let c = self.f.coeffs();
        if c.len() < n + 3 {
            return Err(Error::ShortInput {
                needed: n + 3,
                got: c.len(),
            });
        }
        Ok(c[2..n + 3].to_vec())
    }

    pub fn g_coeffs(&self, n: usize) -> Result<Vec<T>> {
        let c = self.g.coeffs();
        if c.len() < n + 1 {
            return Err(Error::ShortInput {
                needed: n + 1,
                got: c.len(),
            });
        }
        Ok(c[..=n].to_vec())
    }
}

/// Jet order of `γ` sufficient for coefficients `ζ_0 … ζ_J`.
pub fn default_jet_order(max_index: usize) -> usize {
    max_index + 2
}

pub fn radial_profile<T: Scalar>(
    model: &HamiltonianModel,
    omega: &[f64],
    x0: &[T],
    a: &T,
    order: usize,
) -> Result<RadialSeries<T>> {
    if omega.len() != model.group_dim {
        return Err(Error::InvalidConfig(format!(
            "direction has {} components, model has group dimension {}",
            omega.len(),
            model.group_dim
        )));
    }
    let x0f: Vec<f64> = x0.iter().map(Scalar::to_f64).collect();
    model.check_zero_level(&x0f)?;
    let gamma = ode_jet_transport(&model.flow_along(omega), x0, order.max(1))?;
    let f = compose_scalar(&model.moment_along(omega), &gamma)?
        .integrate()
        .scale(&T::from_i64(2));
    let h = compose_scalar(&model.laplacian_along(omega), &gamma)?.integrate();
    let g = exp_series(&h.scale(a))?;
    let f0 = f.coeff(2).to_f64();
    if !(f0 > 0.0) {
        return Err(Error::NonPositiveLeading {
            node: 0,
            omega: omega.to_vec(),
            value: f0,
        });
    }
    Ok(RadialSeries { f, h, g })
}

/// Iterated directional derivatives `(JX^Ω)^p φ_Ω(x0)` and `(JX^Ω)^p Δφ_Ω(x0)` for `p ≤ n`,
/// read off the jets as `p!` times the Taylor coefficients.
pub fn geometric_jet<T: Scalar>(
    model: &HamiltonianModel,
    omega: &[f64],
    x0: &[T],
    n: usize,
) -> Result<GeometricJet<T>> {
    let gamma = ode_jet_transport(&model.flow_along(omega), x0, n)?;
    let unscale = |s: TruncatedSeries<T>| -> Vec<T> {
        s.into_coeffs()
            .into_iter()
            .enumerate()
            .map(|(p, c)| c * T::from_integer(&factorial(p)))
            .collect()
    };
    Ok(GeometricJet {
        phi_derivs: unscale(compose_scalar(&model.moment_along(omega), &gamma)?),
        lap_derivs: unscale(compose_scalar(&model.laplacian_along(omega), &gamma)?),
    })
}

/// `(f_0…f_J, g_0…g_J)` from directional derivatives:
/// `f_p = 2/(p+2)! (JX)^{p+1}φ`, `p! h_p = (JX)^{p−1}Δφ`, `g = exp(a h)` by Faà di Bruno.
pub fn profile_from_geometric<T: Scalar>(
    jet: &GeometricJet<T>,
    a: &T,
    max_index: usize,
) -> Result<(Vec<T>, Vec<T>)> {
    let j = max_index;
    if jet.phi_derivs.len() < j + 2 || jet.lap_derivs.len() < j.max(1) {
        return Err(Error::ShortInput {
            needed: j + 2,
            got: jet.phi_derivs.len().min(jet.lap_derivs.len() + 2),
        });
    }
    let f: Vec<T> = (0..=j)
        .map(|p| {
            T::from_i64(2) * jet.phi_derivs[p + 1].clone() / T::from_integer(&factorial(p + 2))
        })
        .collect();
    let mut h = vec![T::zero(); j + 1];
    for (p, hp) in h.iter_mut().enumerate().skip(1) {
        *hp = a.clone() * jet.lap_derivs[p - 1].clone() / T::from_integer(&factorial(p));
    }
    let g = exp_series_faa_di_bruno(&TruncatedSeries::new(h))?.into_coeffs();
    Ok((f, g))
}

/// Engine input for the density `𝔧_a` at `x0` on the given sphere rule.
pub fn geometric_profile<T: Scalar>(
    model: &HamiltonianModel,
    x0: &[f64],
    a: f64,
    max_index: usize,
    rule: &SphereRule,
) -> Result<RadialProfile<T>> {
    let lift = |v: f64| {
        T::from_f64(v).ok_or_else(|| Error::InvalidConfig(format!("{v} is not representable")))
    };
    let x0t: Vec<T> = x0.iter().map(|&v| lift(v)).collect::<Result<_>>()?;
    let at = lift(a)?;
    let order = default_jet_order(max_index);
    let rows: Vec<Result<(Vec<T>, Vec<T>)>> = rule
        .nodes
        .par_iter()
        .enumerate()
        .map(|(i, omega)| {
            let s = radial_profile(model, omega, &x0t, &at, order).map_err(|e| match e {
                Error::NonPositiveLeading { omega, value, .. } => Error::NonPositiveLeading {
                    node: i,
                    omega,
                    value,
                },
                other => other,
            })?;
            Ok((s.f_coeffs(max_index)?, s.g_coeffs(max_index)?))
        })
        .collect();
    let mut f = Vec::with_capacity(rows.len());
    let mut g = Vec::with_capacity(rows.len());
    for r in rows {
        let (fr, gr) = r?;
        f.push(fr);
        g.push(gr);
    }
    RadialProfile::new(rule.clone(), f, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{builtin_quartic_model, builtin_sphere_model};
    use std::f64::consts::PI;

    #[test]
    fn sphere_profile_is_log_cosh() {
        let m = builtin_sphere_model();
        let s = radial_profile(&m, &[1.0], &[0.0, 0.0], &0.5, 8).unwrap();
        // 2 ln cosh(u) = u² − u⁴/6 + 2u⁶/45 − …, u = 2πρ
        let u = 2.0 * PI;
        let expect = [
            0.0,
            0.0,
            u * u,
            0.0,
            -u.powi(4) / 6.0,
            0.0,
            2.0 * u.powi(6) / 45.0,
        ];
        for (i, e) in expect.iter().enumerate() {
            assert!(
                (s.f.coeff(i) - e).abs() <= 1e-12 * e.abs().max(1.0),
                "f_{i}"
            );
        }
        assert!((s.f_coeffs(0).unwrap()[0] - 4.0 * PI * PI).abs() < 1e-12);
        // h = −2 ln cosh(2πρ), g = sech(2πρ) for a = 1/2
        assert!((s.h.coeff(2) + u * u).abs() < 1e-12);
        assert!((s.g.coeff(2) + u * u / 2.0).abs() < 1e-12);
        let s0 = radial_profile(&m, &[1.0], &[0.0, 0.0], &0.0, 6).unwrap();
        assert_eq!(s0.g, TruncatedSeries::constant(1.0, 7));
    }

    #[test]
    fn rejects_bad_points() {
        let m = builtin_sphere_model();
        assert!(matches!(
            radial_profile(&m, &[1.0], &[0.2, 0.0], &1.0, 4),
            Err(Error::OffZeroLevel { .. })
        ));
        let mut flat = builtin_quartic_model();
        flat.flow[0][0] = crate::jets::Expr::int(0);
        assert!(matches!(
            radial_profile(&flat, &[1.0], &[0.0, 0.0], &1.0, 4),
            Err(Error::NonPositiveLeading { .. })
        ));
    }

    #[test]
    fn quartic_profile() {
        let m = builtin_quartic_model();
        let s = radial_profile(&m, &[-1.0], &[0.0, 0.0], &1.0, 5).unwrap();
        assert_eq!(s.f_coeffs(3).unwrap(), vec![1.0, 0.0, 1.0, 0.0]);
    }
}
