//! Brute-force oracle for `∫_{|ξ| ≤ R} e^{−k f(ξ)} g(ξ) d^dξ`.
//!
//! Polar coordinates: adaptive Gauss–Kronrod (7/15) in the radius on a
//! geometrically graded mesh, and a product rule in the angles that is built
//! here independently of [`super::SphereRule`].

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::sphere::{gauss_legendre, sphere_area};
use crate::error::{Error, Result};
use crate::scalar::compensated_sum;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One G7/K15 panel: (Kronrod value, |Kronrod − Gauss|).
fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Global adaptive integration over the union of `breaks` intervals.
///
/// Returns `(value, error_bound)` or an oracle-tolerance error once the panel
/// budget is exhausted.
pub fn adaptive_gauss_kronrod(
    f: &dyn Fn(f64) -> f64,
    breaks: &[f64],
    tol: f64,
    max_panels: usize,
) -> Result<(f64, f64)> {
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        let (value, error) = gk15(f, w[0], w[1]);
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }
    loop {
        let err: f64 = heap.iter().map(|p| p.error).sum();
        if err <= tol {
            break;
        }
        if heap.len() >= max_panels {
            let mut panels: Vec<Panel> = heap.into_vec();
            panels.sort_by(|x, y| x.a.total_cmp(&y.a));
            let est = compensated_sum(panels.iter().map(|p| p.value));
            return Err(Error::OracleTolerance {
                estimate: est,
                bound: err,
            });
        }
        let worst = heap.pop().expect("nonempty");
        let m = 0.5 * (worst.a + worst.b);
        if !(m > worst.a && m < worst.b) {
            // Panel cannot be split further in floating point.
            heap.push(Panel {
                error: 0.0,
                ..worst
            });
            continue;
        }
        for (a, b) in [(worst.a, m), (m, worst.b)] {
            let (value, error) = gk15(f, a, b);
            heap.push(Panel { a, b, value, error });
        }
    }
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = compensated_sum(panels.iter().map(|p| p.value));
    let bound = panels.iter().map(|p| p.error).sum();
    Ok((value, bound))
}

/// Integrand described along rays `ρ ↦ (f(ρΩ), g(ρΩ))`.
pub trait BallIntegrand: Sync {
    fn dim(&self) -> usize;

    /// Evaluator on the ray through `omega` for `0 ≤ ρ ≤ radius`.
    fn ray<'a>(&'a self, omega: &[f64], radius: f64)
        -> Result<Box<dyn Fn(f64) -> (f64, f64) + 'a>>;
}

/// Adapter for integrands given as functions of the Cartesian point `ξ`.
pub struct CartesianIntegrand<F, G> {
    pub dim: usize,
    pub f: F,
    pub g: G,
}

impl<F, G> BallIntegrand for CartesianIntegrand<F, G>
where
    F: Fn(&[f64]) -> f64 + Sync,
    G: Fn(&[f64]) -> f64 + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn ray<'a>(
        &'a self,
        omega: &[f64],
        _radius: f64,
    ) -> Result<Box<dyn Fn(f64) -> (f64, f64) + 'a>> {
        let omega = omega.to_vec();
        Ok(Box::new(move |rho| {
            let xi: Vec<f64> = omega.iter().map(|o| rho * o).collect();
            ((self.f)(&xi), (self.g)(&xi))
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AngularRule {
    /// Product rule with the given resolution (ignored for `d = 1`).
    Product(usize),
    MonteCarlo {
        samples: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Absolute error target.
    pub tol: f64,
    /// Ball radius `R`; values above 1 extend the domain for closed-form checks on `ℝ^d`.
    pub radius: f64,
    pub angular: AngularRule,
    pub max_panels: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            tol: 1e-14,
            radius: 1.0,
            angular: AngularRule::Product(16),
            max_panels: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult {
    pub value: f64,
    /// Sum of the radial error estimates, weighted by the angular rule.
    pub error_bound: f64,
    /// Standard error of the angular Monte Carlo average, when used.
    pub std_error: Option<f64>,
}

fn angular_nodes(d: usize, rule: AngularRule) -> Result<Vec<(Vec<f64>, f64)>> {
    match (d, rule) {
        (0, _) => Err(Error::InvalidConfig("dimension must be at least 1".into())),
        (1, _) => Ok(vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)]),
        (_, AngularRule::MonteCarlo { samples, seed }) => {
            if samples < 2 {
                return Err(Error::InvalidConfig(
                    "Monte Carlo needs at least 2 samples".into(),
                ));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w = sphere_area(d) / samples as f64;
            let mut out = Vec::with_capacity(samples);
            while out.len() < samples {
                let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
                let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                if n > 1e-12 {
                    out.push((v.into_iter().map(|c| c / n).collect(), w));
                }
            }
            Ok(out)
        }
        (2, AngularRule::Product(n)) => {
            let m = n.max(2);
            let w = 2.0 * PI / m as f64;
            Ok((0..m)
                .map(|i| {
                    let t = 2.0 * PI * i as f64 / m as f64;
                    (vec![t.cos(), t.sin()], w)
                })
                .collect())
        }
        (3, AngularRule::Product(n)) => {
            // Gauss–Legendre in the polar angle θ ∈ [0, π] with the sin θ
            // weight, trapezoid in azimuth.
            let n = n.max(2);
            let (x, w) = gauss_legendre(n);
            let m = 2 * n;
            let mut out = Vec::with_capacity(n * m);
            for (xi, wi) in x.iter().zip(&w) {
                let theta = 0.5 * PI * (xi + 1.0);
                let wt = 0.5 * PI * wi * theta.sin() * 2.0 * PI / m as f64;
                for a in 0..m {
                    let phi = 2.0 * PI * a as f64 / m as f64;
                    out.push((
                        vec![
                            theta.sin() * phi.cos(),
                            theta.sin() * phi.sin(),
                            theta.cos(),
                        ],
                        wt,
                    ));
                }
            }
            Ok(out)
        }
        (d, AngularRule::Product(_)) => Err(Error::UnsupportedDimension(d)),
    }
}

/// Breakpoints `0, R 2^{−40}, …, R/2, R`.
fn graded_breaks(radius: f64) -> Vec<f64> {
    let mut b = vec![0.0];
    for m in (0..=40).rev() {
        b.push(radius * 0.5f64.powi(m));
    }
    b
}

/// The oracle. Directions are integrated in parallel and reduced in node order.
pub fn numeric_laplace_integral(
    integrand: &dyn BallIntegrand,
    k: f64,
    opts: &OracleOptions,
) -> Result<OracleResult> {
    if !(k > 0.0) {
        return Err(Error::InvalidConfig(format!("k must be positive, got {k}")));
    }
    let d = integrand.dim();
    let nodes = angular_nodes(d, opts.angular)?;
    let breaks = graded_breaks(opts.radius);
    let area: f64 = nodes.iter().map(|(_, w)| w).sum();
    let per_dir_tol = opts.tol / area.max(1.0);
    let rays: Vec<Result<(f64, f64)>> = nodes
        .par_iter()
        .map(|(omega, _)| {
            let ray = integrand.ray(omega, opts.radius)?;
            let radial = |rho: f64| {
                let (f, g) = ray(rho);
                if g == 0.0 {
                    return 0.0;
                }
                rho.powi(d as i32 - 1) * (-k * f).exp() * g
            };
            adaptive_gauss_kronrod(&radial, &breaks, per_dir_tol, opts.max_panels)
        })
        .collect();
    let mut values = Vec::with_capacity(rays.len());
    let mut bound = 0.0;
    let mut failed = false;
    for ((_, w), r) in nodes.iter().zip(rays) {
        match r {
            Ok((v, e)) => {
                values.push(w * v);
                bound += w * e;
            }
            Err(Error::OracleTolerance { estimate, bound: b }) => {
                values.push(w * estimate);
                bound += w * b;
                failed = true;
            }
            Err(e) => return Err(e),
        }
    }
    if failed {
        return Err(Error::OracleTolerance {
            estimate: compensated_sum(values.iter().copied()),
            bound,
        });
    }
    let value = compensated_sum(values.iter().copied());
    let std_error = match opts.angular {
        AngularRule::MonteCarlo { .. } if d > 1 => {
            let n = values.len() as f64;
            let mean = value / n;
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
            Some((n * var).sqrt())
        }
        _ => None,
    };
    Ok(OracleResult {
        value,
        error_bound: bound,
        std_error,
    })
}
