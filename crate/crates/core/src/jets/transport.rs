use super::{Expr, TruncatedSeries};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Taylor jet of an integral curve `γ(t)` of a chart vector field.
#[derive(Debug, Clone, PartialEq)]
pub struct JetTrajectory<T> {
    coordinate_series: Vec<TruncatedSeries<T>>,
}

impl<T: Scalar> JetTrajectory<T> {
    pub fn dim(&self) -> usize {
        self.coordinate_series.len()
    }

    pub fn order(&self) -> usize {
        self.coordinate_series
            .first()
            .map_or(0, TruncatedSeries::order)
    }

    pub fn coordinates(&self) -> &[TruncatedSeries<T>] {
        &self.coordinate_series
    }

    pub fn eval(&self, t: &T) -> Vec<T> {
        self.coordinate_series.iter().map(|s| s.eval(t)).collect()
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self {
            coordinate_series: self
                .coordinate_series
                .iter()
                .map(|s| s.truncate(order))
                .collect(),
        }
    }
}

/// Series solution of `γ' = field(γ)`, `γ(0) = x0`, to `order`.
///
/// Each Picard sweep `γ ← x0 + ∫ field(γ)` fixes one more coefficient, so
/// exactly `order` sweeps are performed.
pub fn ode_jet_transport<T: Scalar>(
    field: &[Expr],
    x0: &[T],
    order: usize,
) -> Result<JetTrajectory<T>> {
    if field.len() != x0.len() {
        return Err(Error::UnsupportedModel(format!(
            "vector field has {} components but the point has {}",
            field.len(),
            x0.len()
        )));
    }
    let mut gamma: Vec<TruncatedSeries<T>> = x0
        .iter()
        .map(|c| TruncatedSeries::constant(c.clone(), 0))
        .collect();
    for n in 1..=order {
        let mut next = Vec::with_capacity(gamma.len());
        for (component, start) in field.iter().zip(x0) {
            let v = component.eval_series(&gamma, n - 1)?;
            let mut s = v.integrate();
            s = s.add_constant(start);
            next.push(s);
        }
        gamma = next;
    }
    Ok(JetTrajectory {
        coordinate_series: gamma,
    })
}

/// Taylor series of `t ↦ F(γ(t))`.
pub fn compose_scalar<T: Scalar>(f: &Expr, gamma: &JetTrajectory<T>) -> Result<TruncatedSeries<T>> {
    f.eval_series(gamma.coordinates(), gamma.order())
}
