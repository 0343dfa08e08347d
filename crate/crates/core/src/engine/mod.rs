//! Generic Laplace expansion
//! `∫_B e^{−k f} g d^dξ ~ Σ_j ζ_j k^{−(λ+j)/ν}` for
//! `f = ρ^ν Σ f_j(Ω) ρ^j`, `g = ρ^{λ−d} Σ g_j(Ω) ρ^j`, with
//!
//! `ζ_j = (1/ν) Γ((j+λ)/ν) ∫_{S^{d−1}} f_0^{−α} Σ_{m=0}^{j} g_{j−m} Σ_{r=0}^{m} C(−α, r) C_{m,r}(f_1, …, f_m) f_0^{−r} dΩ`,
//! `α = (j+λ)/ν`, where the `r = 0` term is `C_{0,0} = 1` for `m = 0` and
//! vanishes otherwise.

mod fit;
mod gamma;
mod quadrature;
mod sphere;

pub use fit::convergence_order_fit;
pub use gamma::{gamma, half_integer_gamma, half_step_gamma_ratio, GammaValue};
pub use quadrature::{
    adaptive_gauss_kronrod, numeric_laplace_integral, AngularRule, BallIntegrand,
    CartesianIntegrand, OracleOptions, OracleResult,
};
pub use sphere::{gauss_legendre, sphere_area, sphere_rule, RuleKind, SphereRule};

use rayon::prelude::*;
use serde::Serialize;

use crate::bell::{gen_binomial, series_power_table};
use crate::error::{Error, Result};
use crate::scalar::{compensated_sum, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ArithmeticMode {
    Float,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpansionConfig {
    pub dim: usize,
    pub nu: f64,
    pub lambda: f64,
    pub max_index: usize,
    pub mode: ArithmeticMode,
}

impl ExpansionConfig {
    /// `ν = 2`, `λ = d`: minimum with nondegenerate Hessian and `g(0) ≠ 0`.
    pub fn geometric(dim: usize, max_index: usize) -> Self {
        Self {
            dim,
            nu: 2.0,
            lambda: dim as f64,
            max_index,
            mode: ArithmeticMode::Float,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidConfig("dimension must be at least 1".into()));
        }
        if !(self.nu > 0.0) || !(self.lambda > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "need nu > 0 and lambda > 0, got nu = {}, lambda = {}",
                self.nu, self.lambda
            )));
        }
        Ok(())
    }

    /// Exponent `(λ + j)/ν` of `k^{−1}` in term `j`.
    pub fn exponent(&self, j: usize) -> f64 {
        (self.lambda + j as f64) / self.nu
    }
}

/// Per-node Taylor data `f_j(Ω)`, `g_j(Ω)` on a sphere rule.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile<T> {
    pub rule: SphereRule,
    pub f_coeffs: Vec<Vec<T>>,
    pub g_coeffs: Vec<Vec<T>>,
}

impl<T: Scalar> RadialProfile<T> {
    pub fn new(rule: SphereRule, f_coeffs: Vec<Vec<T>>, g_coeffs: Vec<Vec<T>>) -> Result<Self> {
        if f_coeffs.len() != rule.len() || g_coeffs.len() != rule.len() {
            return Err(Error::InvalidConfig(format!(
                "profile has {} f-rows and {} g-rows for {} nodes",
                f_coeffs.len(),
                g_coeffs.len(),
                rule.len()
            )));
        }
        Ok(Self {
            rule,
            f_coeffs,
            g_coeffs,
        })
    }

    /// Highest index available in every row.
    pub fn max_index(&self) -> usize {
        self.f_coeffs
            .iter()
            .chain(&self.g_coeffs)
            .map(|r| r.len())
            .min()
            .unwrap_or(0)
            .saturating_sub(1)
    }

    /// Replace `f` by `c·f`.
    pub fn scale_f(&self, c: &T) -> Self {
        Self {
            rule: self.rule.clone(),
            f_coeffs: self
                .f_coeffs
                .iter()
                .map(|r| r.iter().map(|v| v.clone() * c.clone()).collect())
                .collect(),
            g_coeffs: self.g_coeffs.clone(),
        }
    }

    fn check_positive(&self) -> Result<()> {
        for (i, row) in self.f_coeffs.iter().enumerate() {
            let f0 = row.first().map(|v| v.to_f64()).unwrap_or(0.0);
            if !(f0 > 0.0) {
                return Err(Error::NonPositiveLeading {
                    node: i,
                    omega: self.rule.nodes[i].clone(),
                    value: f0,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuleSummary {
    pub dim: usize,
    pub nodes: usize,
    pub resolution: usize,
    pub kind: RuleKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeDiagnostic {
    pub omega: Vec<f64>,
    pub weight: f64,
    pub f0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionResult {
    pub zetas: Vec<f64>,
    pub config: ExpansionConfig,
    pub rule: RuleSummary,
    pub nodes: Vec<NodeDiagnostic>,
    /// Standard errors when the sphere rule is Monte Carlo.
    pub std_errors: Option<Vec<f64>>,
}

/// Relative threshold for calling an odd coefficient zero.
pub const ODD_VANISHING_TOL: f64 = 1e-12;

impl ExpansionResult {
    pub fn partial_sum(&self, k: f64) -> f64 {
        partial_sum(self, k)
    }

    pub fn odd_vanished(&self, j: usize) -> bool {
        let scale = self.zetas.first().map_or(1.0, |z| z.abs()).max(1.0);
        j % 2 == 1 && self.zetas[j].abs() <= ODD_VANISHING_TOL * scale
    }
}

/// Per-node bracket values `f_0^{−α} Σ_m g_{j−m} Σ_r C(−α, r) C_{m,r} f_0^{−r}`.
fn node_terms<T: Scalar>(
    j: usize,
    profile: &RadialProfile<T>,
    cfg: &ExpansionConfig,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    if profile.rule.dim != cfg.dim {
        return Err(Error::InvalidConfig(format!(
            "rule dimension {} differs from config dimension {}",
            profile.rule.dim, cfg.dim
        )));
    }
    let available = profile.max_index();
    if available < j || profile.f_coeffs.is_empty() {
        return Err(Error::ShortInput {
            needed: j + 1,
            got: available + 1,
        });
    }
    profile.check_positive()?;
    let alpha_f = cfg.exponent(j);
    let alpha = T::from_f64(alpha_f)
        .ok_or_else(|| Error::InvalidConfig(format!("exponent {alpha_f} is not representable")))?;
    let binoms: Vec<T> = (0..=j)
        .map(|r| gen_binomial(&(-alpha.clone()), r))
        .collect();
    profile
        .f_coeffs
        .par_iter()
        .zip(&profile.g_coeffs)
        .map(|(f, g)| {
            let f0 = f[0].clone();
            let table = series_power_table(j, j, &f[1..=j]);
            let inv_f0 = T::one() / f0.clone();
            let mut bracket = T::zero();
            for m in 0..=j {
                let mut inner = T::zero();
                let mut inv_pow = T::one();
                for (r, row) in table.iter().enumerate().take(m + 1) {
                    if row[m] != T::zero() {
                        inner = inner + binoms[r].clone() * row[m].clone() * inv_pow.clone();
                    }
                    inv_pow = inv_pow * inv_f0.clone();
                }
                bracket = bracket + g[j - m].clone() * inner;
            }
            Ok(f0.to_f64().powf(-alpha_f) * bracket.to_f64())
        })
        .collect()
}

pub fn zeta_coefficient<T: Scalar>(
    j: usize,
    profile: &RadialProfile<T>,
    cfg: &ExpansionConfig,
) -> Result<f64> {
    let terms = node_terms(j, profile, cfg)?;
    let integral = compensated_sum(terms.iter().zip(&profile.rule.weights).map(|(t, w)| t * w));
    Ok(gamma(cfg.exponent(j))? / cfg.nu * integral)
}

pub fn zeta_series<T: Scalar>(
    profile: &RadialProfile<T>,
    cfg: &ExpansionConfig,
) -> Result<ExpansionResult> {
    let monte_carlo = matches!(profile.rule.kind, RuleKind::MonteCarlo { .. });
    let mut zetas = Vec::with_capacity(cfg.max_index + 1);
    let mut std_errors = Vec::new();
    for j in 0..=cfg.max_index {
        let terms = node_terms(j, profile, cfg)?;
        let factor = gamma(cfg.exponent(j))? / cfg.nu;
        let weighted: Vec<f64> = terms
            .iter()
            .zip(&profile.rule.weights)
            .map(|(t, w)| t * w)
            .collect();
        zetas.push(factor * compensated_sum(weighted.iter().copied()));
        if monte_carlo {
            // Antipodal pairs are the independent samples.
            let half = weighted.len() / 2;
            let pairs: Vec<f64> = (0..half)
                .map(|i| weighted[i] + weighted[i + half])
                .collect();
            let p = pairs.len() as f64;
            let mean = pairs.iter().sum::<f64>() / p;
            let var = if p > 1.0 {
                pairs.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (p - 1.0)
            } else {
                0.0
            };
            std_errors.push(factor.abs() * (p * var).sqrt());
        }
    }
    let rule = &profile.rule;
    Ok(ExpansionResult {
        zetas,
        config: *cfg,
        rule: RuleSummary {
            dim: rule.dim,
            nodes: rule.len(),
            resolution: rule.resolution,
            kind: rule.kind,
        },
        nodes: rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .zip(&profile.f_coeffs)
            .map(|((omega, &weight), f)| NodeDiagnostic {
                omega: omega.clone(),
                weight,
                f0: f[0].to_f64(),
            })
            .collect(),
        std_errors: monte_carlo.then_some(std_errors),
    })
}

/// `Σ_j ζ_j k^{−(λ+j)/ν}` for `k > 0`.
pub fn partial_sum(result: &ExpansionResult, k: f64) -> f64 {
    let terms: Vec<f64> = result
        .zetas
        .iter()
        .enumerate()
        .map(|(j, z)| z * k.powf(-result.config.exponent(j)))
        .collect();
    // Smallest terms first.
    compensated_sum(terms.into_iter().rev())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn one_d_profile(f: Vec<f64>, g: Vec<f64>) -> RadialProfile<f64> {
        let rule = sphere_rule(1, 1).unwrap();
        RadialProfile::new(rule, vec![f.clone(), f], vec![g.clone(), g]).unwrap()
    }

    #[test]
    fn gaussian_is_exact() {
        let mut f = vec![0.0; 9];
        f[0] = 1.0;
        let mut g = vec![0.0; 9];
        g[0] = 1.0;
        let p = one_d_profile(f, g);
        let cfg = ExpansionConfig::geometric(1, 8);
        let r = zeta_series(&p, &cfg).unwrap();
        assert!((r.zetas[0] - PI.sqrt()).abs() < 1e-15);
        assert!(r.zetas[1..].iter().all(|z| z.abs() < 1e-15));
        assert!((r.partial_sum(4.0) - PI.sqrt() / 2.0).abs() < 1e-15);
        assert!((r.partial_sum(1.0) - r.zetas.iter().sum::<f64>()).abs() < 1e-15);
    }

    #[test]
    fn linear_in_g() {
        let p = one_d_profile(
            vec![1.0, 0.3, 1.0, -0.2, 0.1],
            vec![1.0, 0.5, 0.25, 0.1, 0.0],
        );
        let mut q = p.clone();
        for row in &mut q.g_coeffs {
            for v in row.iter_mut() {
                *v *= 3.0;
            }
        }
        let cfg = ExpansionConfig::geometric(1, 4);
        let a = zeta_series(&p, &cfg).unwrap();
        let b = zeta_series(&q, &cfg).unwrap();
        for (x, y) in a.zetas.iter().zip(&b.zetas) {
            assert!((3.0 * x - y).abs() <= 1e-14 * y.abs().max(1.0));
        }
        let zero = one_d_profile(vec![1.0, 0.3, 1.0], vec![0.0; 3]);
        let z = zeta_series(&zero, &ExpansionConfig::geometric(1, 2)).unwrap();
        assert!(z.zetas.iter().all(|v| *v == 0.0));
        assert_eq!(partial_sum(&z, 3.0), 0.0);
    }

    #[test]
    fn quartic_second_coefficient() {
        // ∫ e^{−k(ρ²+ρ⁴)} dρ = Σ_n (−1)^n Γ(2n+1/2)/n! k^{−n−1/2}
        let p = one_d_profile(vec![1.0, 0.0, 1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        let r = zeta_series(&p, &ExpansionConfig::geometric(1, 4)).unwrap();
        assert!((r.zetas[2] + 0.75 * PI.sqrt()).abs() < 1e-14);
        assert!((r.zetas[4] - libm::tgamma(4.5) / 2.0).abs() < 1e-13);
    }

    #[test]
    fn positivity_and_shape_errors() {
        let p = one_d_profile(vec![-1.0, 0.0], vec![1.0, 0.0]);
        assert!(matches!(
            zeta_coefficient(0, &p, &ExpansionConfig::geometric(1, 0)),
            Err(Error::NonPositiveLeading { node: 0, .. })
        ));
        let p = one_d_profile(vec![1.0], vec![1.0]);
        assert!(matches!(
            zeta_coefficient(2, &p, &ExpansionConfig::geometric(1, 2)),
            Err(Error::ShortInput { .. })
        ));
        assert!(zeta_coefficient(0, &p, &ExpansionConfig::geometric(2, 0)).is_err());
    }

    #[test]
    fn non_geometric_exponents() {
        // f = ρ^4, g = 1 on ℝ: ∫ e^{−kρ⁴} dρ = 2 Γ(5/4) k^{−1/4}
        let p = one_d_profile(vec![1.0], vec![1.0]);
        let cfg = ExpansionConfig {
            dim: 1,
            nu: 4.0,
            lambda: 1.0,
            max_index: 0,
            mode: ArithmeticMode::Float,
        };
        let z = zeta_coefficient(0, &p, &cfg).unwrap();
        assert!((z - 2.0 * libm::tgamma(1.25)).abs() < 1e-14);
    }
}
