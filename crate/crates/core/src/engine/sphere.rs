//! Antipodally symmetric quadrature rules on `S^{d-1}`.
//!
//! Every rule stores a half set `H` followed by `−H`, so the antipode of node
//! `i` is node `(i + n/2) mod n` and carries the same weight.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::gamma::gamma;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    /// `{+1, −1}` on `S^0`.
    TwoPoint,
    /// Equispaced circle nodes.
    Trapezoid,
    /// Gauss–Legendre in `cos θ` times equispaced azimuth.
    GaussProduct,
    MonteCarlo {
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SphereRule {
    pub dim: usize,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub kind: RuleKind,
    pub resolution: usize,
}

/// `|S^{d−1}| = 2 π^{d/2} / Γ(d/2)`.
pub fn sphere_area(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0).expect("d >= 1")
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

impl SphereRule {
    fn from_half(
        dim: usize,
        half: Vec<(Vec<f64>, f64)>,
        kind: RuleKind,
        resolution: usize,
    ) -> Self {
        let mut nodes = Vec::with_capacity(2 * half.len());
        let mut weights = Vec::with_capacity(2 * half.len());
        for (n, w) in &half {
            nodes.push(n.clone());
            weights.push(*w);
        }
        for (n, w) in half {
            nodes.push(n.iter().map(|c| -c).collect());
            weights.push(w);
        }
        Self {
            dim,
            nodes,
            weights,
            kind,
            resolution,
        }
    }

    /// Deterministic rule. `resolution` is the number of nodes on a half circle
    /// for `d = 2` and the Gauss–Legendre order (rounded up to even) for `d = 3`.
    pub fn new(d: usize, resolution: usize) -> Result<Self> {
        let res = resolution.max(1);
        match d {
            0 => Err(Error::InvalidConfig("dimension must be at least 1".into())),
            1 => Ok(Self::from_half(
                1,
                vec![(vec![1.0], 1.0)],
                RuleKind::TwoPoint,
                1,
            )),
            2 => {
                let w = PI / res as f64;
                let half = (0..res)
                    .map(|i| {
                        let t = PI * (i as f64 + 0.5) / res as f64;
                        (vec![t.cos(), t.sin()], w)
                    })
                    .collect();
                Ok(Self::from_half(2, half, RuleKind::Trapezoid, res))
            }
            3 => {
                let n = res + res % 2;
                let (ct, wt) = gauss_legendre(n);
                let m = 2 * n;
                let wa = 2.0 * PI / m as f64;
                let mut half = Vec::new();
                for (c, w) in ct.iter().zip(&wt).skip(n / 2) {
                    let s = (1.0 - c * c).sqrt();
                    for a in 0..m {
                        let phi = PI * (2.0 * a as f64 + 1.0) / m as f64;
                        half.push((vec![s * phi.cos(), s * phi.sin(), *c], w * wa));
                    }
                }
                Ok(Self::from_half(3, half, RuleKind::GaussProduct, n))
            }
            d => Err(Error::UnsupportedDimension(d)),
        }
    }

    /// Equal-weight random rule with `pairs` antipodal pairs.
    pub fn monte_carlo(d: usize, pairs: usize, seed: u64) -> Result<Self> {
        if d == 0 || pairs == 0 {
            return Err(Error::InvalidConfig(
                "Monte Carlo rule needs d >= 1 and at least one pair".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = sphere_area(d) / (2 * pairs) as f64;
        let mut half = Vec::with_capacity(pairs);
        while half.len() < pairs {
            let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm > 1e-12 {
                half.push((v.into_iter().map(|c| c / norm).collect(), w));
            }
        }
        Ok(Self::from_half(
            d,
            half,
            RuleKind::MonteCarlo { seed },
            pairs,
        ))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn antipode(&self, i: usize) -> usize {
        (i + self.len() / 2) % self.len()
    }

    pub fn total_weight(&self) -> f64 {
        crate::scalar::compensated_sum(self.weights.iter().copied())
    }
}

pub fn sphere_rule(d: usize, resolution: usize) -> Result<SphereRule> {
    SphereRule::new(d, resolution)
}
