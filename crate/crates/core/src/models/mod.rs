//! Hamiltonian models and the geometric quantities derived from them.
//!
//! A model lives in one chart of `M`. For each basis element `b` of the Lie
//! algebra it supplies the moment component `φ_b`, the gradient flow field
//! `JX^b` and `Δφ_b` as expression trees. Directions `Ω` act through the
//! linear combinations `φ_Ω = Σ_b Ω_b φ_b`, so `φ_{−Ω} = −φ_Ω` holds by
//! construction.

mod config;
mod density;
mod profile;
mod raw;
mod tau;

pub use config::{load_model, model_from_json, model_to_json};
pub use density::{
    density_i, density_i_series, density_j, density_j_series, expand_model, expand_model_with,
    j_a_numeric, leading_term_identity, DensityPoint, ModelIntegrand,
};
pub use profile::{
    default_jet_order, geometric_jet, geometric_profile, profile_from_geometric, radial_profile,
    RadialSeries,
};
pub use raw::{zeta2_reference, zeta_geometric, zeta_raw, GeometricJet};
pub use tau::jacobian_tau_check;

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::jets::Expr;

/// Parametrization of `Φ^{−1}(0)` near the zero-level point, for the Jacobian check.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroLevelChart {
    /// Chart point as a function of the parameters (`x0, x1, …` denote parameters here).
    pub coords: Vec<Expr>,
    /// Riemannian volume density of `Φ^{−1}(0)` in the parameters.
    pub density: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianModel {
    pub name: String,
    pub group_dim: usize,
    pub chart_dim: usize,
    /// `φ_b`, one per basis element.
    pub moment: Vec<Expr>,
    /// `JX^b` chart components, one vector per basis element.
    pub flow: Vec<Vec<Expr>>,
    /// `Δφ_b`, one per basis element.
    pub laplacian: Vec<Expr>,
    pub zero_level_points: Vec<Vec<f64>>,
    /// Riemannian volume of the orbit through a chart point.
    pub orbit_volume: Expr,
    /// Riemannian volume density of `M` in chart coordinates.
    pub volume_density: Expr,
    pub zero_level_chart: Option<ZeroLevelChart>,
}

const ZERO_LEVEL_TOL: f64 = 1e-10;

fn combine(omega: &[f64], exprs: &[Expr]) -> Expr {
    Expr::sum(
        omega
            .iter()
            .zip(exprs)
            .filter(|(o, _)| **o != 0.0)
            .map(|(&o, e)| {
                let c = if o.fract() == 0.0 && o.abs() < 1e15 {
                    Expr::int(o as i64)
                } else {
                    Expr::Const(o)
                };
                Expr::product(vec![c, e.clone()])
            })
            .collect(),
    )
}

fn scaled(c: f64, e: &Expr) -> Expr {
    Expr::product(vec![Expr::Const(c), e.clone()])
}

impl HamiltonianModel {
    /// `φ_Ω`.
    pub fn moment_along(&self, omega: &[f64]) -> Expr {
        combine(omega, &self.moment)
    }

    /// `JX^Ω` chart components.
    pub fn flow_along(&self, omega: &[f64]) -> Vec<Expr> {
        (0..self.chart_dim)
            .map(|i| {
                let comps: Vec<Expr> = self.flow.iter().map(|v| v[i].clone()).collect();
                combine(omega, &comps)
            })
            .collect()
    }

    /// `Δφ_Ω`.
    pub fn laplacian_along(&self, omega: &[f64]) -> Expr {
        combine(omega, &self.laplacian)
    }

    pub fn orbit_volume_at(&self, x0: &[f64]) -> f64 {
        self.orbit_volume.eval_f64(x0)
    }

    pub fn default_point(&self) -> Result<&[f64]> {
        self.zero_level_points
            .first()
            .map(Vec::as_slice)
            .ok_or_else(|| {
                Error::UnsupportedModel(format!("model {} has no zero-level point", self.name))
            })
    }

    /// Reject points with `|φ_b(x0)| > tol` for some `b`.
    pub fn check_zero_level(&self, x0: &[f64]) -> Result<()> {
        let residual = self
            .moment
            .iter()
            .map(|p| p.eval_f64(x0).abs())
            .fold(0.0, f64::max);
        if residual > ZERO_LEVEL_TOL || !residual.is_finite() {
            return Err(Error::OffZeroLevel {
                point: x0.to_vec(),
                residual,
            });
        }
        Ok(())
    }

    /// Structural checks plus `φ = 0` and `(JX^b)φ_b > 0` at every zero-level point.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::UnsupportedModel(format!("{}: {msg}", self.name)));
        if self.group_dim == 0 || self.chart_dim == 0 {
            return bad("dimensions must be positive".into());
        }
        if self.moment.len() != self.group_dim
            || self.flow.len() != self.group_dim
            || self.laplacian.len() != self.group_dim
        {
            return bad(format!(
                "need {} moment, flow and laplacian entries",
                self.group_dim
            ));
        }
        if self.flow.iter().any(|v| v.len() != self.chart_dim) {
            return bad(format!(
                "flow fields must have {} components",
                self.chart_dim
            ));
        }
        let exprs = self
            .moment
            .iter()
            .chain(self.flow.iter().flatten())
            .chain(&self.laplacian)
            .chain([&self.orbit_volume, &self.volume_density]);
        for e in exprs {
            if let Some(v) = e.max_var() {
                if v >= self.chart_dim {
                    return bad(format!(
                        "expression uses x{v} beyond chart dimension {}",
                        self.chart_dim
                    ));
                }
            }
        }
        if self.zero_level_points.is_empty() {
            return bad("no zero-level point".into());
        }
        for p in &self.zero_level_points {
            if p.len() != self.chart_dim {
                return bad(format!("zero-level point {p:?} has wrong dimension"));
            }
            self.check_zero_level(p)?;
            for b in 0..self.group_dim {
                let speed = self.moment[b].lie_derivative(&self.flow[b]).eval_f64(p);
                if !(speed > 0.0) {
                    return bad(format!(
                        "(JX)phi = {speed} is not positive at {p:?} for basis element {b}"
                    ));
                }
            }
            if !(self.orbit_volume_at(p) > 0.0) {
                return bad(format!("orbit volume is not positive at {p:?}"));
            }
        }
        if let Some(chart) = &self.zero_level_chart {
            if chart.coords.len() != self.chart_dim {
                return bad("zero-level chart must return a full chart point".into());
            }
        }
        Ok(())
    }

    /// Rescale the generators by `s`, keeping the orbit volume fixed.
    ///
    /// For `s ≠ 1` this breaks the unit-mass normalization; used as a negative control.
    pub fn with_generator_scale(&self, s: f64) -> Self {
        let mut m = self.clone();
        m.name = format!("{}*gen{s}", self.name);
        m.moment = self.moment.iter().map(|e| scaled(s, e)).collect();
        m.flow = self
            .flow
            .iter()
            .map(|v| v.iter().map(|e| scaled(s, e)).collect())
            .collect();
        m.laplacian = self.laplacian.iter().map(|e| scaled(s, e)).collect();
        m
    }

    /// Multiply the reported orbit volume by `c`.
    pub fn scale_orbit_volume(&self, c: f64) -> Self {
        let mut m = self.clone();
        m.name = format!("{}*vol{c}", self.name);
        m.orbit_volume = scaled(c, &self.orbit_volume);
        m
    }
}

fn num(c: f64) -> Expr {
    Expr::Const(c)
}

/// Circle action by rotation about the `z` axis on the round sphere of radius `c`.
///
/// Chart `(x0, x1) = (z, θ)` with metric `c²(dz²/(1−z²) + (1−z²)dθ²)`. The
/// generator has period 1, so `φ = 2π c² z`, `JX = 2π(1−z²) ∂_z`,
/// `Δφ = −4π z` and the equatorial orbit has length `2π c`.
pub fn sphere_with_radius(c: f64) -> HamiltonianModel {
    let z = Expr::var(0);
    let one_minus_z2 = Expr::difference(Expr::int(1), Expr::power_int(z.clone(), 2));
    HamiltonianModel {
        name: if c == 1.0 {
            "sphere".into()
        } else {
            format!("sphere(r={c})")
        },
        group_dim: 1,
        chart_dim: 2,
        moment: vec![Expr::product(vec![num(2.0 * PI * c * c), z.clone()])],
        flow: vec![vec![
            Expr::product(vec![num(2.0 * PI), one_minus_z2]),
            Expr::int(0),
        ]],
        laplacian: vec![Expr::product(vec![num(-4.0 * PI), z])],
        zero_level_points: vec![vec![0.0, 0.0]],
        orbit_volume: num(2.0 * PI * c),
        volume_density: num(c * c),
        zero_level_chart: Some(ZeroLevelChart {
            coords: vec![Expr::int(0), Expr::var(0)],
            density: num(c),
        }),
    }
}

pub fn builtin_sphere_model() -> HamiltonianModel {
    sphere_with_radius(1.0)
}

/// Translation model on the flat plane: `φ = x0`, so `f = ρ²` and `g ≡ 1`.
pub fn builtin_gaussian_model() -> HamiltonianModel {
    HamiltonianModel {
        name: "gaussian".into(),
        group_dim: 1,
        chart_dim: 2,
        moment: vec![Expr::var(0)],
        flow: vec![vec![Expr::int(1), Expr::int(0)]],
        laplacian: vec![Expr::int(0)],
        zero_level_points: vec![vec![0.0, 0.0]],
        orbit_volume: Expr::int(1),
        volume_density: Expr::int(1),
        zero_level_chart: Some(ZeroLevelChart {
            coords: vec![Expr::int(0), Expr::var(0)],
            density: Expr::int(1),
        }),
    }
}

/// Synthetic model with `φ = x0 + 2 x0³` along a unit flow, giving `f = ρ² + ρ⁴`.
pub fn builtin_quartic_model() -> HamiltonianModel {
    let x = Expr::var(0);
    HamiltonianModel {
        name: "quartic".into(),
        group_dim: 1,
        chart_dim: 2,
        moment: vec![Expr::sum(vec![
            x.clone(),
            Expr::product(vec![Expr::int(2), Expr::power_int(x, 3)]),
        ])],
        flow: vec![vec![Expr::int(1), Expr::int(0)]],
        laplacian: vec![Expr::int(0)],
        zero_level_points: vec![vec![0.0, 0.0]],
        orbit_volume: Expr::int(1),
        volume_density: Expr::int(1),
        zero_level_chart: None,
    }
}

pub fn builtin_model(name: &str) -> Result<HamiltonianModel> {
    match name {
        "sphere" => Ok(builtin_sphere_model()),
        "gaussian" => Ok(builtin_gaussian_model()),
        "quartic" => Ok(builtin_quartic_model()),
        other => Err(Error::UnsupportedModel(format!(
            "unknown builtin model {other:?}"
        ))),
    }
}
