//! Fixed-order Taylor method for autonomous systems with dense output.
//!
//! Each step builds the local jet with [`ode_jet_transport`] and picks the
//! step from the decay of the two last coefficients.

use super::{ode_jet_transport, Expr, TruncatedSeries};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct TaylorIntegrator {
    pub order: usize,
    /// Fraction of the estimated radius of convergence used as step.
    pub safety: f64,
    pub max_steps: usize,
}

impl Default for TaylorIntegrator {
    fn default() -> Self {
        Self {
            order: 24,
            safety: 0.15,
            max_steps: 100_000,
        }
    }
}

#[derive(Debug, Clone)]
struct Segment {
    start: f64,
    end: f64,
    jets: Vec<TruncatedSeries<f64>>,
}

/// Piecewise-polynomial solution on `[0, t_end]` (or `[t_end, 0]`).
#[derive(Debug, Clone)]
pub struct TaylorSolution {
    segments: Vec<Segment>,
    forward: bool,
}

impl TaylorIntegrator {
    pub fn solve(&self, field: &[Expr], y0: &[f64], t_end: f64) -> Result<TaylorSolution> {
        let forward = t_end >= 0.0;
        let dir = if forward { 1.0 } else { -1.0 };
        let span = t_end.abs();
        let mut t = 0.0f64;
        let mut y = y0.to_vec();
        let mut segments = Vec::new();
        while t < span {
            if segments.len() >= self.max_steps {
                return Err(Error::InvalidConfig(format!(
                    "Taylor integrator exceeded {} steps before t = {t_end}",
                    self.max_steps
                )));
            }
            let jet = ode_jet_transport(field, &y, self.order)?;
            let scale = y.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            let mut h = f64::INFINITY;
            for q in [self.order - 1, self.order] {
                let norm = jet
                    .coordinates()
                    .iter()
                    .fold(0.0f64, |m, s| m.max(s.coeff(q).abs()));
                if norm > 0.0 {
                    h = h.min((scale / norm).powf(1.0 / q as f64));
                }
            }
            let mut step = if h.is_finite() {
                self.safety * h
            } else {
                span - t
            };
            if !(step > 0.0) {
                return Err(Error::InvalidConfig(
                    "Taylor integrator step collapsed".into(),
                ));
            }
            if t + step > span || (span - t - step) < 1e-12 * span {
                step = span - t;
            }
            let end = t + step;
            let jets = jet.coordinates().to_vec();
            y = jets.iter().map(|s| s.eval(&(dir * step))).collect();
            segments.push(Segment {
                start: dir * t,
                end: dir * end,
                jets,
            });
            t = end;
        }
        if segments.is_empty() {
            segments.push(Segment {
                start: 0.0,
                end: 0.0,
                jets: y0
                    .iter()
                    .map(|&c| TruncatedSeries::constant(c, 0))
                    .collect(),
            });
        }
        Ok(TaylorSolution { segments, forward })
    }
}

impl TaylorSolution {
    /// Dense output at `t` inside the integration interval.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let key = |s: &Segment| if self.forward { s.end } else { -s.end };
        let target = if self.forward { t } else { -t };
        let idx = self
            .segments
            .partition_point(|s| key(s) < target)
            .min(self.segments.len() - 1);
        let seg = &self.segments[idx];
        let dt = t - seg.start;
        seg.jets.iter().map(|s| s.eval(&dt)).collect()
    }

    pub fn end_time(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.end)
    }

    pub fn step_count(&self) -> usize {
        self.segments.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::parse_expr;
    use serde_json::json;

    #[test]
    fn tanh_dense_output() {
        let field = vec![parse_expr(&json!(["-", 1, ["^", "x0", 2]])).unwrap()];
        let sol = TaylorIntegrator::default()
            .solve(&field, &[0.0], 3.0)
            .unwrap();
        for &t in &[0.0, 0.01, 0.37, 1.0, 2.2, 3.0] {
            let y = sol.eval(t)[0];
            assert!((y - f64::tanh(t)).abs() < 1e-15, "t={t}: {y}");
        }
        let back = TaylorIntegrator::default()
            .solve(&field, &[0.0], -2.0)
            .unwrap();
        assert!((back.eval(-1.5)[0] + f64::tanh(1.5)).abs() < 1e-15);
    }

    #[test]
    fn jet_agrees_with_runge_kutta_near_origin() {
        let field = vec![parse_expr(&json!(["-", 1, ["^", "x0", 2]])).unwrap()];
        let jet = ode_jet_transport(&field, &[0.0f64], 12).unwrap();
        let rhs = |z: f64| 1.0 - z * z;
        let h = 1e-5;
        let mut z = 0.0f64;
        for i in 1..=1000 {
            let k1 = rhs(z);
            let k2 = rhs(z + 0.5 * h * k1);
            let k3 = rhs(z + 0.5 * h * k2);
            let k4 = rhs(z + h * k3);
            z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if i % 100 == 0 {
                let t = i as f64 * h;
                let a = jet.eval(&t)[0];
                assert!(
                    (a - z).abs() <= 10.0 * f64::EPSILON * t,
                    "t={t}: {a} vs {z}"
                );
            }
        }
    }

    #[test]
    fn harmonic_oscillator() {
        let field = vec![Expr::var(1), Expr::negate(Expr::var(0))];
        let sol = TaylorIntegrator::default()
            .solve(&field, &[1.0, 0.0], 10.0)
            .unwrap();
        let y = sol.eval(10.0);
        assert!((y[0] - 10f64.cos()).abs() < 1e-13 && (y[1] + 10f64.sin()).abs() < 1e-13);
    }
}
