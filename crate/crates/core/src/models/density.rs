use std::f64::consts::PI;

use serde::Serialize;

use super::profile::geometric_profile;
use super::HamiltonianModel;
use crate::engine::{
    numeric_laplace_integral, zeta_series, ArithmeticMode, BallIntegrand, ExpansionConfig,
    ExpansionResult, OracleOptions, OracleResult, SphereRule,
};
use crate::error::{Error, Result};
use crate::jets::{Expr, TaylorIntegrator};
use crate::ExactRational;

/// `ξ ↦ (2∫_0^1 φ_ξ(e^{itξ}x0) dt, exp{a ∫_0^1 Δφ_ξ(e^{itξ}x0) dt})` as a ball integrand.
///
/// Along the ray `ξ = ρΩ` both integrals become `∫_0^ρ` along `e^{isΩ}x0`, so each ray
/// is one Taylor-integrated solve of the augmented system `(x, F, H)`.
pub struct ModelIntegrand<'m> {
    pub model: &'m HamiltonianModel,
    pub x0: Vec<f64>,
    pub a: f64,
    pub integrator: TaylorIntegrator,
}

impl<'m> ModelIntegrand<'m> {
    pub fn new(model: &'m HamiltonianModel, x0: &[f64], a: f64) -> Result<Self> {
        model.check_zero_level(x0)?;
        Ok(Self {
            model,
            x0: x0.to_vec(),
            a,
            integrator: TaylorIntegrator::default(),
        })
    }

    fn augmented_field(&self, omega: &[f64]) -> Vec<Expr> {
        let mut field = self.model.flow_along(omega);
        field.push(Expr::product(vec![
            Expr::int(2),
            self.model.moment_along(omega),
        ]));
        field.push(self.model.laplacian_along(omega));
        field
    }
}

impl BallIntegrand for ModelIntegrand<'_> {
    fn dim(&self) -> usize {
        self.model.group_dim
    }

    fn ray<'a>(
        &'a self,
        omega: &[f64],
        radius: f64,
    ) -> Result<Box<dyn Fn(f64) -> (f64, f64) + 'a>> {
        let n = self.model.chart_dim;
        let mut y0 = self.x0.clone();
        y0.extend([0.0, 0.0]);
        let sol = self
            .integrator
            .solve(&self.augmented_field(omega), &y0, radius)?;
        let a = self.a;
        Ok(Box::new(move |rho| {
            let y = sol.eval(rho);
            (y[n], (a * y[n + 1]).exp())
        }))
    }
}

/// `𝔧_a(k, x0)` by brute-force quadrature over the ball of radius `opts.radius`.
pub fn j_a_numeric(
    model: &HamiltonianModel,
    x0: &[f64],
    a: f64,
    k: f64,
    opts: &OracleOptions,
) -> Result<OracleResult> {
    let integrand = ModelIntegrand::new(model, x0, a)?;
    numeric_laplace_integral(&integrand, k, opts)
}

fn check_k(k: f64) -> Result<()> {
    if !(k > 0.0) {
        return Err(Error::InvalidConfig(format!("k must be positive, got {k}")));
    }
    Ok(())
}

/// `I_k = (k/2π)^{d/2} vol² 𝔧_1`.
pub fn density_i(
    model: &HamiltonianModel,
    x0: &[f64],
    k: f64,
    opts: &OracleOptions,
) -> Result<f64> {
    check_k(k)?;
    let d = model.group_dim as f64;
    let vol = model.orbit_volume_at(x0);
    Ok((k / (2.0 * PI)).powf(d / 2.0) * vol * vol * j_a_numeric(model, x0, 1.0, k, opts)?.value)
}

/// `J_k = (k/π)^{d/2} vol 𝔧_{1/2}`.
pub fn density_j(
    model: &HamiltonianModel,
    x0: &[f64],
    k: f64,
    opts: &OracleOptions,
) -> Result<f64> {
    check_k(k)?;
    let d = model.group_dim as f64;
    let vol = model.orbit_volume_at(x0);
    Ok((k / PI).powf(d / 2.0) * vol * j_a_numeric(model, x0, 0.5, k, opts)?.value)
}

/// `Σ_j ζ_j k^{−j/2}`, which is finite at `k = ∞`.
fn normalized_series(result: &ExpansionResult, k: f64) -> f64 {
    let mut terms: Vec<f64> = result
        .zetas
        .iter()
        .enumerate()
        .map(|(j, z)| {
            if j == 0 {
                *z
            } else {
                z * k.powf(-(j as f64) / 2.0)
            }
        })
        .collect();
    terms.reverse();
    crate::scalar::compensated_sum(terms)
}

/// Series prediction of `I_k` from the `a = 1` expansion; `k = ∞` gives the limit.
pub fn density_i_series(
    model: &HamiltonianModel,
    x0: &[f64],
    k: f64,
    result: &ExpansionResult,
) -> Result<f64> {
    check_k(k)?;
    let d = model.group_dim as f64;
    let vol = model.orbit_volume_at(x0);
    Ok((2.0 * PI).powf(-d / 2.0) * vol * vol * normalized_series(result, k))
}

/// Series prediction of `J_k` from the `a = 1/2` expansion; `k = ∞` gives the limit.
pub fn density_j_series(
    model: &HamiltonianModel,
    x0: &[f64],
    k: f64,
    result: &ExpansionResult,
) -> Result<f64> {
    check_k(k)?;
    let d = model.group_dim as f64;
    let vol = model.orbit_volume_at(x0);
    Ok(PI.powf(-d / 2.0) * vol * normalized_series(result, k))
}

/// One row of a density sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityPoint {
    pub k: f64,
    pub i_numeric: Option<f64>,
    pub j_numeric: Option<f64>,
    pub i_series: f64,
    pub j_series: f64,
}

/// `ζ_0 … ζ_J` of `𝔧_a` at `x0` (`ν = 2`, `λ = d`) in floating point.
pub fn expand_model(
    model: &HamiltonianModel,
    x0: &[f64],
    a: f64,
    max_index: usize,
    rule: &SphereRule,
) -> Result<ExpansionResult> {
    expand_model_with(model, x0, a, max_index, rule, ArithmeticMode::Float)
}

/// As [`expand_model`]; in exact mode the jets and brackets are computed over the
/// rationals, which requires `a`, `x0` and every model constant to be dyadic-exact
/// floats and the expressions to be polynomial or rational.
pub fn expand_model_with(
    model: &HamiltonianModel,
    x0: &[f64],
    a: f64,
    max_index: usize,
    rule: &SphereRule,
    mode: ArithmeticMode,
) -> Result<ExpansionResult> {
    if rule.dim != model.group_dim {
        return Err(Error::InvalidConfig(format!(
            "sphere rule dimension {} differs from group dimension {}",
            rule.dim, model.group_dim
        )));
    }
    let cfg = ExpansionConfig {
        mode,
        ..ExpansionConfig::geometric(model.group_dim, max_index)
    };
    match mode {
        ArithmeticMode::Float => zeta_series(
            &geometric_profile::<f64>(model, x0, a, max_index, rule)?,
            &cfg,
        ),
        ArithmeticMode::Exact => zeta_series(
            &geometric_profile::<ExactRational>(model, x0, a, max_index, rule)?,
            &cfg,
        ),
    }
}

/// `(ζ_0, π^{d/2} / vol(G·x0))`.
pub fn leading_term_identity(
    model: &HamiltonianModel,
    x0: &[f64],
    rule: &SphereRule,
) -> Result<(f64, f64)> {
    let z0 = expand_model(model, x0, 1.0, 0, rule)?.zetas[0];
    let d = model.group_dim as f64;
    Ok((z0, PI.powf(d / 2.0) / model.orbit_volume_at(x0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::sphere_rule;
    use crate::models::{builtin_gaussian_model, builtin_sphere_model};

    fn ln_gamma(x: f64) -> f64 {
        libm::lgamma(x)
    }

    #[test]
    fn sphere_half_form_density() {
        let m = builtin_sphere_model();
        let opts = OracleOptions::default();
        for k in [3.0, 40.0] {
            let v = j_a_numeric(&m, &[0.0, 0.0], 0.5, k, &opts).unwrap().value;
            let expect = PI.sqrt() / (2.0 * PI) * (ln_gamma(k + 0.5) - ln_gamma(k + 1.0)).exp();
            assert!(
                (v - expect).abs() < 1e-13 * expect,
                "k={k}: {v} vs {expect}"
            );
        }
    }

    #[test]
    fn gaussian_density_is_closed_form() {
        let m = builtin_gaussian_model();
        let opts = OracleOptions {
            radius: 6.0,
            ..OracleOptions::default()
        };
        let v = j_a_numeric(&m, &[0.0, 0.0], 0.0, 2.0, &opts).unwrap().value;
        assert!((v - (PI / 2.0).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn series_limits_and_identity() {
        let m = builtin_sphere_model();
        let rule = sphere_rule(1, 1).unwrap();
        let rj = expand_model(&m, &[0.0, 0.0], 0.5, 4, &rule).unwrap();
        let ri = expand_model(&m, &[0.0, 0.0], 1.0, 4, &rule).unwrap();
        assert!(
            (density_j_series(&m, &[0.0, 0.0], f64::INFINITY, &rj).unwrap() - 1.0).abs() < 1e-14
        );
        let i_inf = density_i_series(&m, &[0.0, 0.0], f64::INFINITY, &ri).unwrap();
        assert!((i_inf - 2.0 * PI / 2f64.sqrt()).abs() < 1e-13);
        let (lhs, rhs) = leading_term_identity(&m, &[0.0, 0.0], &rule).unwrap();
        assert!((lhs - rhs).abs() < 1e-15);
        assert!(density_j(&m, &[0.0, 0.0], 0.0, &OracleOptions::default()).is_err());
    }

    #[test]
    fn exact_mode_matches_float_mode() {
        let m = builtin_sphere_model();
        let rule = sphere_rule(1, 1).unwrap();
        let float = expand_model(&m, &[0.0, 0.0], 0.5, 6, &rule).unwrap();
        let exact =
            expand_model_with(&m, &[0.0, 0.0], 0.5, 6, &rule, ArithmeticMode::Exact).unwrap();
        assert_eq!(exact.config.mode, ArithmeticMode::Exact);
        for (x, y) in exact.zetas.iter().zip(&float.zetas) {
            assert!((x - y).abs() <= 1e-13 * float.zetas[0].abs());
        }
        assert_eq!(exact.zetas[1], 0.0);
        assert_eq!(exact.zetas[3], 0.0);
    }
}
