//! Acceptance gate: one test per criterion, each printing a single pass/fail line.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use lapexp_cli::{bell_rows, cmd_bell_table, BellArgs, BellKind, Format};
use lapexp_core::bell::Polynomial;
use lapexp_core::engine::{
    convergence_order_fit, numeric_laplace_integral, sphere_rule, zeta_coefficient, zeta_series,
    AngularRule, CartesianIntegrand, ExpansionConfig, OracleOptions, RadialProfile, SphereRule,
};
use lapexp_core::jets::{Expr, Unary};
use lapexp_core::models::{
    builtin_sphere_model, density_i, density_j, expand_model, jacobian_tau_check,
    leading_term_identity, profile_from_geometric, radial_profile, zeta2_reference, zeta_raw,
    GeometricJet, HamiltonianModel,
};
use lapexp_core::ExactRational;
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Print the criterion line and fail the test if any check failed or time ran out.
fn report(id: u32, name: &str, limit: Duration, start: Instant, failures: &[String]) {
    let elapsed = start.elapsed();
    let ok = failures.is_empty() && elapsed < limit;
    let detail = if failures.is_empty() {
        String::new()
    } else {
        format!(" [{}]", failures.join("; "))
    };
    println!(
        "criterion {id} ({name}): {} in {:.3}s (limit {}s){detail}",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs_f64()
    );
    assert!(ok, "criterion {id} failed");
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

/// Relative tolerance with unit floor, so exact zeros compare absolutely.
fn unit_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn q(n: i64) -> BigInt {
    BigInt::from(n)
}

fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Bell numbers by counting restricted growth strings.
fn set_partitions(n: usize) -> u64 {
    fn walk(pos: usize, n: usize, max: usize) -> u64 {
        if pos == n {
            return 1;
        }
        (0..=max + 1).map(|b| walk(pos + 1, n, max.max(b))).sum()
    }
    if n == 0 {
        1
    } else {
        walk(1, n, 0)
    }
}

#[test]
fn criterion_1_combinatorial_exactness() {
    let start = Instant::now();
    let mut fails = Vec::new();
    let mono = |c: i64, e: Vec<u32>| Polynomial::monomial(q(c).into(), e);
    let mut expect = mono(6, vec![1, 1, 1]);
    expect = expect + mono(3, vec![2, 0, 0, 1]) + mono(1, vec![0, 3]);
    let rows = bell_rows(6, BellKind::Power).unwrap();
    let row = rows.iter().find(|r| r.n == 6 && r.l == Some(3)).unwrap();
    if row.polynomial != expect {
        fails.push(format!("C_(6,3) = {}", row.polynomial));
    }
    let csv = cmd_bell_table(&BellArgs {
        max: 6,
        kind: BellKind::Power,
        out: None,
        format: Format::Csv,
    })
    .unwrap();
    if !csv.lines().any(|l| l == format!("power,6,3,{expect},10")) {
        fails.push("bell-table csv row (6,3)".into());
    }
    let complete = bell_rows(6, BellKind::Complete).unwrap();
    for r in &complete {
        let want = set_partitions(r.n).to_string();
        if r.ones_value != want {
            fails.push(format!(
                "B_{} at ones = {} (want {want})",
                r.n, r.ones_value
            ));
        }
    }
    let counts: Vec<u64> = (0..=6).map(set_partitions).collect();
    if counts != [1, 1, 2, 5, 15, 52, 203] {
        fails.push(format!("enumerator gives {counts:?}"));
    }
    report(
        1,
        "combinatorial exactness",
        Duration::from_secs(1),
        start,
        &fails,
    );
}

#[test]
fn criterion_2_gaussian_exactness() {
    let start = Instant::now();
    let mut fails = Vec::new();
    let n = 8;
    let rule = sphere_rule(1, 1).unwrap();
    let mut f = vec![0.0; n + 1];
    f[0] = 1.0;
    let mut g = vec![0.0; n + 1];
    g[0] = 1.0;
    let profile = RadialProfile::new(rule, vec![f.clone(), f], vec![g.clone(), g]).unwrap();
    let r = zeta_series(&profile, &ExpansionConfig::geometric(1, n)).unwrap();
    if (r.zetas[0] - PI.sqrt()).abs() > 1e-14 {
        fails.push(format!("ζ_0 = {}", r.zetas[0]));
    }
    for j in 1..=n {
        if r.zetas[j].abs() > 1e-13 {
            fails.push(format!("ζ_{j} = {:e}", r.zetas[j]));
        }
    }
    let k = 1e4;
    let s = r.partial_sum(k);
    if !rel_close(s, (PI / k).sqrt(), 1e-15) {
        fails.push(format!("partial sum {s} vs {}", (PI / k).sqrt()));
    }
    report(
        2,
        "Gaussian exactness",
        Duration::from_secs(1),
        start,
        &fails,
    );
}

#[test]
fn criterion_3_oracle_convergence() {
    let start = Instant::now();
    let mut fails = Vec::new();
    let n = 4;
    let rule = sphere_rule(1, 1).unwrap();
    let mut f = vec![0.0; n + 1];
    f[0] = 1.0;
    f[2] = 1.0;
    let mut g = vec![0.0; n + 1];
    g[0] = 1.0;
    let profile = RadialProfile::new(rule, vec![f.clone(), f], vec![g.clone(), g]).unwrap();
    let r = zeta_series(&profile, &ExpansionConfig::geometric(1, n)).unwrap();
    let integrand = CartesianIntegrand {
        dim: 1,
        f: |x: &[f64]| x[0] * x[0] + x[0].powi(4),
        g: |_: &[f64]| 1.0,
    };
    let opts = OracleOptions {
        tol: 1e-19,
        angular: AngularRule::Product(1),
        ..OracleOptions::default()
    };
    let ks = [1e2, 1e3, 1e4];
    let errors: Vec<f64> = ks
        .iter()
        .map(|&k| {
            (numeric_laplace_integral(&integrand, k, &opts)
                .unwrap()
                .value
                - r.partial_sum(k))
            .abs()
        })
        .collect();
    let slope = convergence_order_fit(&ks, &errors).unwrap();
    println!("criterion 3 detail: errors {errors:?}, slope {slope:.4}");
    if slope > -3.4 {
        fails.push(format!("slope {slope}"));
    }
    report(
        3,
        "oracle convergence",
        Duration::from_secs(30),
        start,
        &fails,
    );
}

#[test]
fn criterion_4_sphere_closed_forms() {
    let start = Instant::now();
    let mut fails = Vec::new();
    // ∫_ℝ sech^{2s} u du = √π Γ(s)/Γ(s+½), checked by the trapezoid rule on [−8, 8].
    for s in [10.5, 11.0, 100.5, 101.0, 1000.5, 1001.0] {
        let h = 2e-4;
        let m = (8.0 / h) as i64;
        let trap: f64 = (-m..=m)
            .map(|i| (1.0 / (i as f64 * h).cosh()).powf(2.0 * s))
            .sum::<f64>()
            * h;
        let gamma = PI.sqrt() * (ln_gamma(s) - ln_gamma(s + 0.5)).exp();
        if !rel_close(trap, gamma, 1e-12) {
            fails.push(format!("sech identity at s={s}: {trap} vs {gamma}"));
        }
    }
    let m = builtin_sphere_model();
    let x0 = [0.0, 0.0];
    let opts = OracleOptions::default();
    for k in [10.0f64, 100.0, 1000.0] {
        let j_expect = k.sqrt() * (ln_gamma(k + 0.5) - ln_gamma(k + 1.0)).exp();
        let i_expect = PI * 2f64.sqrt() * k.sqrt() * (ln_gamma(k + 1.0) - ln_gamma(k + 1.5)).exp();
        let jk = density_j(&m, &x0, k, &opts).unwrap();
        let ik = density_i(&m, &x0, k, &opts).unwrap();
        if !rel_close(jk, j_expect, 1e-8) {
            fails.push(format!("J_{k} = {jk} vs {j_expect}"));
        }
        if !rel_close(ik, i_expect, 1e-8) {
            fails.push(format!("I_{k} = {ik} vs {i_expect}"));
        }
    }
    if let Ok(j100) = density_j(&m, &x0, 100.0, &opts) {
        if (j100 - 0.998_750_78).abs() > 1e-8 {
            fails.push(format!("J_100 = {j100}"));
        }
    }
    let j_inf = density_j(&m, &x0, 1e4, &opts).unwrap();
    let i_inf = density_i(&m, &x0, 1e4, &opts).unwrap();
    let i_lim = 2f64.powf(-0.5) * 2.0 * PI;
    if (j_inf - 1.0).abs() > 1e-4 {
        fails.push(format!("J_1e4 = {j_inf}"));
    }
    if !rel_close(i_inf, i_lim, 1e-4) {
        fails.push(format!("I_1e4 = {i_inf} vs {i_lim}"));
    }
    report(
        4,
        "sphere closed forms",
        Duration::from_secs(10),
        start,
        &fails,
    );
}

#[test]
fn criterion_5_leading_term_identity() {
    let start = Instant::now();
    let mut fails = Vec::new();
    let m = builtin_sphere_model();
    let x0 = [0.0, 0.0];
    let rule = sphere_rule(1, 1).unwrap();
    let (z0, rhs) = leading_term_identity(&m, &x0, &rule).unwrap();
    if (z0 - rhs).abs() > 1e-12 {
        fails.push(format!("ζ_0 = {z0} vs {rhs}"));
    }
    let bad = m.with_generator_scale(2.0);
    let (z0_bad, rhs_bad) = leading_term_identity(&bad, &x0, &rule).unwrap();
    let ratio = z0_bad / rhs_bad;
    if (z0_bad - rhs_bad).abs() <= 1e-12 || (ratio - 0.5).abs() > 1e-12 {
        fails.push(format!("negative control ratio {ratio}"));
    }
    report(
        5,
        "leading-term identity",
        Duration::from_secs(1),
        start,
        &fails,
    );
}

fn monomials(d: usize, degree: usize) -> Vec<Vec<usize>> {
    if d == 1 {
        return vec![vec![degree]];
    }
    (0..=degree)
        .flat_map(|e| {
            monomials(d - 1, degree - e)
                .into_iter()
                .map(move |mut rest| {
                    rest.insert(0, e);
                    rest
                })
        })
        .collect()
}

fn parity_poly(rng: &mut ChaCha8Rng, d: usize, parity: usize) -> Vec<(f64, Vec<usize>)> {
    (parity..=5)
        .step_by(2)
        .flat_map(|deg| monomials(d, deg))
        .map(|m| (rng.random_range(-1.0..1.0), m))
        .collect()
}

fn eval_poly(p: &[(f64, Vec<usize>)], omega: &[f64]) -> f64 {
    p.iter()
        .map(|(c, e)| {
            c * e
                .iter()
                .zip(omega)
                .map(|(k, o)| o.powi(*k as i32))
                .product::<f64>()
        })
        .sum()
}

/// Profile with `f_j(−Ω) = (−1)^j f_j(Ω)` and `g_j(−Ω) = (−1)^j g_j(Ω)`.
fn equivariant_profile(seed: u64, rule: &SphereRule, n: usize) -> RadialProfile<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rule.dim;
    let f_polys: Vec<_> = (0..=n).map(|j| parity_poly(&mut rng, d, j % 2)).collect();
    let g_polys: Vec<_> = (0..=n).map(|j| parity_poly(&mut rng, d, j % 2)).collect();
    let shift: f64 = rng.random_range(2.0..4.0);
    let mut f = Vec::new();
    let mut g = Vec::new();
    for omega in &rule.nodes {
        let mut row: Vec<f64> = f_polys.iter().map(|p| eval_poly(p, omega)).collect();
        row[0] = shift + 0.3 * row[0].tanh();
        f.push(row);
        g.push(g_polys.iter().map(|p| eval_poly(p, omega)).collect());
    }
    RadialProfile::new(rule.clone(), f, g).unwrap()
}

#[test]
fn criterion_6_odd_vanishing() {
    let start = Instant::now();
    let mut fails = Vec::new();
    let mut check = |name: &str, z: &[f64]| {
        for j in [1, 3, 5, 7] {
            if z[j].abs() > 1e-12 * z[0].abs() {
                fails.push(format!("{name} ζ_{j} = {:e}", z[j]));
            }
        }
    };
    let m = builtin_sphere_model();
    for a in [0.5, 1.0] {
        let r = expand_model(&m, &[0.0, 0.0], a, 7, &sphere_rule(1, 1).unwrap()).unwrap();
        check("sphere", &r.zetas);
    }
    let dims = [(1, 1), (2, 24), (3, 8)];
    for seed in 0..10u64 {
        let (d, res) = dims[seed as usize % 3];
        let rule = sphere_rule(d, res).unwrap();
        let p = equivariant_profile(100 + seed, &rule, 7);
        let r = zeta_series(&p, &ExpansionConfig::geometric(d, 7)).unwrap();
        check(&format!("profile {seed} (d={d})"), &r.zetas);
    }
    report(6, "odd vanishing", Duration::from_secs(5), start, &fails);
}

fn rational(rng: &mut ChaCha8Rng) -> ExactRational {
    ExactRational::new(q(rng.random_range(-20..=20)), q(rng.random_range(1..=9)))
}

fn random_jet(rng: &mut ChaCha8Rng, n: usize) -> GeometricJet<ExactRational> {
    let mut phi: Vec<ExactRational> = (0..n + 2).map(|_| rational(rng)).collect();
    phi[0] = ExactRational::from_integer(q(0));
    phi[1] = ExactRational::new(q(rng.random_range(1..=30)), q(rng.random_range(1..=7)));
    GeometricJet {
        phi_derivs: phi,
        lap_derivs: (0..n).map(|_| rational(rng)).collect(),
    }
}

#[test]
fn criterion_7_triple_agreement() {
    let start = Instant::now();
    let mut fails = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let setups = [(1, 1), (2, 3), (3, 2)];
    for case in 0..50 {
        let (d, res) = setups[case % 3];
        let rule = sphere_rule(d, res).unwrap();
        let a = rational(&mut rng);
        let jets: Vec<_> = (0..rule.len()).map(|_| random_jet(&mut rng, 3)).collect();
        let rows: Vec<_> = jets
            .iter()
            .map(|jet| profile_from_geometric(jet, &a, 2).unwrap())
            .collect();
        let profile = RadialProfile::new(
            rule.clone(),
            rows.iter().map(|r| r.0.clone()).collect(),
            rows.iter().map(|r| r.1.clone()).collect(),
        )
        .unwrap();
        let engine = zeta_coefficient(2, &profile, &ExpansionConfig::geometric(d, 2)).unwrap();
        let raw = zeta_raw(2, &a, &rule, &jets).unwrap();
        let display = zeta2_reference(&a, &rule, &jets).unwrap();
        for (x, y, what) in [
            (engine, raw, "engine/raw"),
            (engine, display, "engine/display"),
            (raw, display, "raw/display"),
        ] {
            if !rel_close(x, y, 1e-12) {
                fails.push(format!("case {case} {what}: {x} vs {y}"));
            }
        }
    }
    report(
        7,
        "triple agreement at j = 2",
        Duration::from_secs(5),
        start,
        &fails,
    );
}

#[test]
fn criterion_8_tau() {
    let start = Instant::now();
    let mut fails = Vec::new();
    let m = builtin_sphere_model();
    for xi in [0.0, 0.1, -0.1, 0.5, -0.5] {
        let (formula, fd) = jacobian_tau_check(&m, &[xi], &[0.3]).unwrap();
        if !rel_close(formula, fd, 1e-6) {
            fails.push(format!("ξ={xi}: {formula} vs {fd}"));
        }
    }
    report(
        8,
        "tau formula vs Jacobian",
        Duration::from_secs(5),
        start,
        &fails,
    );
}

fn c(v: f64) -> Expr {
    Expr::Const(v)
}

fn x(i: usize) -> Expr {
    Expr::var(i)
}

fn mul(v: Vec<Expr>) -> Expr {
    Expr::product(v)
}

/// Random perturbation of a flat model on a 3-dimensional chart, zero level through `(0, 0, s)`.
fn synthetic_model(seed: u64) -> HamiltonianModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = || rng.random_range(-0.3..0.3);
    let group_dim = if seed % 2 == 0 { 1 } else { 2 };
    let s = r();
    let mut moment = Vec::new();
    let mut flow = Vec::new();
    let mut laplacian = Vec::new();
    for b in 0..group_dim {
        let xb = x(b);
        moment.push(Expr::sum(vec![
            xb.clone(),
            mul(vec![c(r()), xb.clone(), x(2)]),
            mul(vec![c(r()), Expr::power_int(xb.clone(), 2)]),
            mul(vec![c(r()), xb.clone(), Expr::unary(Unary::Sin, x(2))]),
        ]));
        let mut field = vec![Expr::int(0); 3];
        field[b] = Expr::sum(vec![
            Expr::int(1),
            mul(vec![c(r()), x(2)]),
            mul(vec![c(r()), Expr::power_int(x(0), 2)]),
        ]);
        field[2] = Expr::sum(vec![
            mul(vec![c(r()), xb.clone()]),
            mul(vec![c(r()), Expr::unary(Unary::Cos, x(2))]),
        ]);
        flow.push(field);
        laplacian.push(Expr::sum(vec![
            mul(vec![c(r()), xb.clone()]),
            mul(vec![
                c(r()),
                Expr::unary(Unary::Sin, mul(vec![xb.clone(), x(2)])),
            ]),
            mul(vec![c(r()), Expr::unary(Unary::Exp, x(2)), xb]),
        ]));
    }
    HamiltonianModel {
        name: format!("synthetic{seed}"),
        group_dim,
        chart_dim: 3,
        moment,
        flow,
        laplacian,
        zero_level_points: vec![vec![0.0, 0.0, s]],
        orbit_volume: Expr::sum(vec![Expr::int(2), Expr::unary(Unary::Cos, x(2))]),
        volume_density: Expr::int(1),
        zero_level_chart: None,
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

#[test]
fn criterion_9_lemma_series() {
    let start = Instant::now();
    let mut fails = Vec::new();
    let mut models = vec![builtin_sphere_model()];
    models.extend((0..20).map(|s| synthetic_model(900 + s)));
    for m in &models {
        let x0 = m.zero_level_points[0].clone();
        let rule = sphere_rule(m.group_dim, 6).unwrap();
        // Symbolic derivatives grow quickly, so a spread of four directions per model.
        let stride = rule.len().div_ceil(4);
        for omega in rule.nodes.iter().step_by(stride) {
            let s = radial_profile(m, omega, &x0, &0.7, 6).unwrap();
            let field = m.flow_along(omega);
            let mut phi = m.moment_along(omega);
            let mut lap = m.laplacian_along(omega);
            // phi holds L^{p+1} φ, lap holds L^{p−1} Δφ.
            phi = phi.lie_derivative(&field);
            for p in 0..=4 {
                let f_sym = 2.0 / factorial(p + 2) * phi.eval_f64(&x0);
                if !unit_close(*s.f.coeff(p + 2), f_sym, 1e-10) {
                    fails.push(format!("{} f_{p}: {} vs {f_sym}", m.name, s.f.coeff(p + 2)));
                }
                if p >= 1 {
                    let h_sym = lap.eval_f64(&x0) / factorial(p);
                    if !unit_close(*s.h.coeff(p), h_sym, 1e-10) {
                        fails.push(format!("{} h_{p}: {} vs {h_sym}", m.name, s.h.coeff(p)));
                    }
                    lap = lap.lie_derivative(&field);
                }
                phi = phi.lie_derivative(&field);
            }
        }
    }
    report(
        9,
        "lemma-series identity",
        Duration::from_secs(10),
        start,
        &fails,
    );
}
