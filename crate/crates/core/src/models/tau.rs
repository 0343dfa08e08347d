use super::HamiltonianModel;
use crate::error::{Error, Result};
use crate::jets::Expr;

const RK4_STEPS: usize = 2000;
const FD_STEP: f64 = 1e-4;

/// Classical RK4 for `y' = field(y)` over unit time.
fn rk4_unit_time(field: &[Expr], y0: &[f64]) -> Vec<f64> {
    let h = 1.0 / RK4_STEPS as f64;
    let eval = |y: &[f64]| -> Vec<f64> { field.iter().map(|e| e.eval_f64(y)).collect() };
    let axpy = |y: &[f64], k: &[f64], s: f64| -> Vec<f64> {
        y.iter().zip(k).map(|(a, b)| a + s * b).collect()
    };
    let mut y = y0.to_vec();
    for _ in 0..RK4_STEPS {
        let k1 = eval(&y);
        let k2 = eval(&axpy(&y, &k1, h / 2.0));
        let k3 = eval(&axpy(&y, &k2, h / 2.0));
        let k4 = eval(&axpy(&y, &k3, h));
        for i in 0..y.len() {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y
}

fn determinant(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))
            .unwrap();
        if m[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= m[c][c];
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..n {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    det
}

/// `Λ(ξ, s) = e^{iξ} x(s)` with `x(s)` the zero-level chart point.
fn lambda_map(model: &HamiltonianModel, coords: &[Expr], xi: &[f64], s: &[f64]) -> Vec<f64> {
    let x0: Vec<f64> = coords.iter().map(|c| c.eval_f64(s)).collect();
    rk4_unit_time(&model.flow_along(xi), &x0)
}

/// `(vol(G·x0) exp ∫_0^1 Δφ_ξ(e^{itξ}x0) dt, τ by finite differences)` at `x0 = x(s)`.
///
/// The finite-difference side differentiates `Λ` in all `d + p` arguments with central
/// differences and converts the determinant to a density through the volume densities of
/// `M` and of the zero-level chart.
pub fn jacobian_tau_check(
    model: &HamiltonianModel,
    xi: &[f64],
    params: &[f64],
) -> Result<(f64, f64)> {
    let chart = model.zero_level_chart.as_ref().ok_or_else(|| {
        Error::UnsupportedModel(format!("model {} has no zero-level chart", model.name))
    })?;
    let d = model.group_dim;
    let n = model.chart_dim;
    if xi.len() != d {
        return Err(Error::InvalidConfig(format!(
            "ξ has {} components, expected {d}",
            xi.len()
        )));
    }
    if d + params.len() != n {
        return Err(Error::InvalidConfig(format!(
            "{d} algebra and {} zero-level parameters do not span the {n}-dimensional chart",
            params.len()
        )));
    }
    let x0: Vec<f64> = chart.coords.iter().map(|c| c.eval_f64(params)).collect();
    model.check_zero_level(&x0)?;

    let mut field = model.flow_along(xi);
    field.push(model.laplacian_along(xi));
    let mut y0 = x0.clone();
    y0.push(0.0);
    let integral = rk4_unit_time(&field, &y0)[n];
    let formula = model.orbit_volume_at(&x0) * integral.exp();

    let mut args: Vec<f64> = xi.iter().chain(params).copied().collect();
    let eval = |args: &[f64]| lambda_map(model, &chart.coords, &args[..d], &args[d..]);
    let mut columns = Vec::with_capacity(n);
    for c in 0..n {
        let base = args[c];
        args[c] = base + FD_STEP;
        let plus = eval(&args);
        args[c] = base - FD_STEP;
        let minus = eval(&args);
        args[c] = base;
        columns.push(
            plus.iter()
                .zip(&minus)
                .map(|(p, m)| (p - m) / (2.0 * FD_STEP))
                .collect::<Vec<_>>(),
        );
    }
    let jac: Vec<Vec<f64>> = (0..n)
        .map(|r| (0..n).map(|c| columns[c][r]).collect())
        .collect();
    let image = eval(&args);
    let fd = determinant(jac).abs() * model.volume_density.eval_f64(&image)
        / chart.density.eval_f64(params);
    Ok((formula, fd))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{builtin_quartic_model, builtin_sphere_model};
    use std::f64::consts::PI;

    #[test]
    fn determinant_by_elimination() {
        let m = vec![
            vec![0.0, 2.0, 1.0],
            vec![1.0, 1.0, 0.0],
            vec![3.0, 0.0, 1.0],
        ];
        assert!((determinant(m) - (-5.0)).abs() < 1e-14);
    }

    #[test]
    fn sphere_tau_is_sech_squared() {
        let m = builtin_sphere_model();
        for xi in [0.0, 0.1, -0.3] {
            let (formula, fd) = jacobian_tau_check(&m, &[xi], &[0.7]).unwrap();
            let expect = 2.0 * PI / (2.0 * PI * xi).cosh().powi(2);
            assert!((formula - expect).abs() < 1e-10 * expect);
            assert!((fd - expect).abs() < 1e-6 * expect);
        }
    }

    #[test]
    fn needs_chart() {
        assert!(jacobian_tau_check(&builtin_quartic_model(), &[0.1], &[0.0]).is_err());
        assert!(jacobian_tau_check(&builtin_sphere_model(), &[0.1], &[]).is_err());
    }
}
