//! Command implementations for the `lapexp` binary.
//!
//! Every command renders its complete output into a `String` before anything
//! is written, so a failing run never leaves a partial file behind.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use lapexp_core::bell::{complete_exp_bell, partial_bell, series_power_c, Polynomial};
use lapexp_core::engine::{
    convergence_order_fit, sphere_rule, AngularRule, ArithmeticMode, ExpansionResult,
    OracleOptions, RuleKind, SphereRule,
};
use lapexp_core::models::{
    builtin_model, density_i, density_i_series, density_j, density_j_series, expand_model_with,
    j_a_numeric, load_model, HamiltonianModel,
};
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};

pub const EXPAND_HEADER: &str = "j,zeta,odd_vanished";
pub const VERIFY_HEADER: &str = "k,oracle,partial_sum,abs_error";
pub const DENSITY_HEADER: &str = "k,I_k,J_k,I_series,J_series";
pub const BELL_HEADER: &str = "kind,n,l,polynomial,ones_value";
pub const BELL_MAX: usize = 20;
pub const THREADS_ENV: &str = "LAPEXP_THREADS";

/// Margin added to the theoretical decay order before `verify` fails.
pub const SLOPE_MARGIN: f64 = 0.1;
/// Errors below this multiple of `ε |oracle|` are treated as rounding noise.
pub const FLOOR_FACTOR: f64 = 8.0;
const MONTE_CARLO_SEED: u64 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] lapexp_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    VerifyFailed(String),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        use lapexp_core::Error as E;
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io(_) => "io",
            CliError::VerifyFailed(_) => "verify-failed",
            CliError::Core(e) => match e {
                E::InvalidTuple { .. } => "invalid-tuple",
                E::ShortInput { .. } => "short-input",
                E::OrderMismatch { .. } => "order-mismatch",
                E::UnsupportedModel(_) => "unsupported-model",
                E::InvalidConfig(_) => "config",
                E::NonPositiveLeading { .. } => "strict-positivity",
                E::OffZeroLevel { .. } => "off-zero-level",
                E::UnsupportedDimension(_) => "unsupported-dimension",
                E::OracleTolerance { .. } => "oracle-tolerance",
                E::GammaPole(_) => "gamma-pole",
                E::ModelFile(_) => "model-file",
            },
        }
    }

    /// `error[code]: message` on one line.
    pub fn diagnostic(&self) -> String {
        let msg = self.to_string().replace(['\n', '\r'], " ");
        format!("error[{}]: {}", self.code(), msg)
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "lapexp",
    version,
    about = "Laplace-type asymptotic expansions and unitarity densities"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coefficients ζ_0 … ζ_N of 𝔧_a at a zero-level point.
    Expand(RunArgs),
    /// Partial sums against brute-force quadrature, with a fitted decay order.
    Verify(RunArgs),
    /// I_k and J_k by quadrature and by the series, over a k list.
    DensitySweep(RunArgs),
    /// Exact partial Bell, complete Bell and power-series-power polynomials.
    BellTable(BellArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Builtin model name (sphere, gaussian, quartic) or path to a JSON model file.
    #[arg(long)]
    pub model: Option<String>,
    /// Half-form weight a.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Highest coefficient index N.
    #[arg(long)]
    pub order: Option<usize>,
    /// Comma-separated k values; `inf` is accepted by density-sweep.
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<String>,
    /// Sphere-rule resolution for d ≥ 2 (pairs of samples for d ≥ 4).
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Exact rational arithmetic for jets and coefficient brackets.
    #[arg(long)]
    pub exact: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Absolute quadrature tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Comma-separated zero-level chart point (defaults to the model's first).
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    /// Ball radius for the quadrature oracle.
    #[arg(long)]
    pub radius: Option<f64>,
    /// JSON run configuration; command-line flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BellKind {
    All,
    Partial,
    Complete,
    Power,
}

#[derive(Debug, Clone, Args)]
pub struct BellArgs {
    /// Largest n (at most 20).
    #[arg(long, default_value_t = 6)]
    pub max: usize,
    #[arg(long, value_enum, default_value_t = BellKind::All)]
    pub kind: BellKind,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum KValue {
    Num(f64),
    Text(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum TolValue {
    One(f64),
    PerK(Vec<f64>),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    model: Option<String>,
    a: Option<f64>,
    order: Option<usize>,
    k: Option<Vec<KValue>>,
    resolution: Option<usize>,
    exact: Option<bool>,
    format: Option<Format>,
    tol: Option<TolValue>,
    point: Option<Vec<f64>>,
    radius: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Expand,
    Verify,
    DensitySweep,
}

impl CommandKind {
    fn default_ks(self) -> &'static [f64] {
        match self {
            CommandKind::Expand => &[],
            CommandKind::Verify => &[1e2, 1e3, 1e4],
            CommandKind::DensitySweep => &[10.0, 100.0, 1000.0, 1e4, f64::INFINITY],
        }
    }

    fn default_tol(self) -> f64 {
        match self {
            CommandKind::Verify => 1e-19,
            _ => 1e-15,
        }
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: HamiltonianModel,
    pub a: f64,
    pub order: usize,
    pub ks: Vec<f64>,
    pub resolution: usize,
    pub mode: ArithmeticMode,
    pub format: Format,
    /// One absolute tolerance per k.
    pub tols: Vec<f64>,
    pub point: Vec<f64>,
    pub radius: f64,
    pub out: Option<PathBuf>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Core(lapexp_core::Error::InvalidConfig(msg.into()))
}

fn parse_k(s: &str, allow_inf: bool) -> CliResult<f64> {
    let t = s.trim();
    let v = match t {
        "inf" | "infinity" | "Inf" | "∞" => f64::INFINITY,
        _ => t
            .parse::<f64>()
            .map_err(|_| CliError::Usage(format!("invalid k value {t:?}")))?,
    };
    if v.is_infinite() && v > 0.0 && !allow_inf {
        return Err(CliError::Usage(
            "k = inf is only meaningful for density-sweep".into(),
        ));
    }
    if !(v > 0.0) {
        return Err(CliError::Usage(format!("k must be positive, got {t}")));
    }
    Ok(v)
}

fn parse_k_list(s: &str, allow_inf: bool) -> CliResult<Vec<f64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|p| parse_k(p, allow_inf)).collect()
}

fn parse_point(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("invalid point coordinate {p:?}")))
        })
        .collect()
}

pub fn resolve_model(source: &str) -> CliResult<HamiltonianModel> {
    match builtin_model(source) {
        Ok(m) => Ok(m),
        Err(e) => {
            let path = Path::new(source);
            if path.exists() {
                Ok(load_model(path)?)
            } else {
                Err(e.into())
            }
        }
    }
}

impl RunConfig {
    pub fn resolve(args: &RunArgs, kind: CommandKind) -> CliResult<Self> {
        let file = match &args.config {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
                serde_json::from_str::<FileConfig>(&text)
                    .map_err(|e| config_err(format!("{}: {e}", p.display())))?
            }
            None => FileConfig::default(),
        };
        let allow_inf = kind == CommandKind::DensitySweep;
        let ks = match (&args.k, &file.k) {
            (Some(s), _) => parse_k_list(s, allow_inf)?,
            (None, Some(list)) => list
                .iter()
                .map(|v| match v {
                    KValue::Num(x) => parse_k(&x.to_string(), allow_inf),
                    KValue::Text(t) => parse_k(t, allow_inf),
                })
                .collect::<CliResult<_>>()?,
            (None, None) => kind.default_ks().to_vec(),
        };
        let tols = match (args.tol, file.tol.as_ref()) {
            (Some(t), _) | (None, Some(&TolValue::One(t))) => vec![t; ks.len()],
            (None, Some(TolValue::PerK(list))) => {
                if list.len() != ks.len() {
                    return Err(config_err(format!(
                        "mismatched list lengths: {} tolerances for {} k values",
                        list.len(),
                        ks.len()
                    )));
                }
                list.clone()
            }
            (None, None) => vec![kind.default_tol(); ks.len()],
        };
        if let Some(t) = tols.iter().find(|t| !(**t > 0.0)) {
            return Err(CliError::Usage(format!(
                "tolerance must be positive, got {t}"
            )));
        }
        let source = args
            .model
            .clone()
            .or(file.model)
            .unwrap_or_else(|| "sphere".into());
        let model = resolve_model(&source)?;
        let point = match (&args.point, &file.point) {
            (Some(s), _) => parse_point(s)?,
            (None, Some(p)) => p.clone(),
            (None, None) => model.default_point()?.to_vec(),
        };
        if point.len() != model.chart_dim {
            return Err(config_err(format!(
                "mismatched list lengths: point has {} coordinates, chart dimension is {}",
                point.len(),
                model.chart_dim
            )));
        }
        model.check_zero_level(&point)?;
        let radius = args.radius.or(file.radius).unwrap_or(1.0);
        if !(radius > 0.0) {
            return Err(CliError::Usage(format!(
                "radius must be positive, got {radius}"
            )));
        }
        let resolution = args.resolution.or(file.resolution).unwrap_or(32);
        if resolution == 0 {
            return Err(CliError::Usage("resolution must be positive".into()));
        }
        Ok(RunConfig {
            model,
            a: args.a.or(file.a).unwrap_or(0.5),
            order: args.order.or(file.order).unwrap_or(4),
            ks,
            resolution,
            mode: if args.exact || file.exact.unwrap_or(false) {
                ArithmeticMode::Exact
            } else {
                ArithmeticMode::Float
            },
            format: args.format.or(file.format).unwrap_or(Format::Csv),
            tols,
            point,
            radius,
            out: args.out.clone(),
        })
    }

    pub fn rule(&self) -> CliResult<SphereRule> {
        let d = self.model.group_dim;
        if d > 3 {
            return Ok(SphereRule::monte_carlo(
                d,
                self.resolution,
                MONTE_CARLO_SEED,
            )?);
        }
        Ok(sphere_rule(d, self.resolution)?)
    }

    fn oracle_options(&self, tol: f64) -> OracleOptions {
        let angular = if self.model.group_dim > 3 {
            AngularRule::MonteCarlo {
                samples: 2 * self.resolution,
                seed: MONTE_CARLO_SEED,
            }
        } else {
            AngularRule::Product(self.resolution)
        };
        OracleOptions {
            tol,
            radius: self.radius,
            angular,
            ..OracleOptions::default()
        }
    }

    fn expansion(&self, a: f64) -> CliResult<ExpansionResult> {
        Ok(expand_model_with(
            &self.model,
            &self.point,
            a,
            self.order,
            &self.rule()?,
            self.mode,
        )?)
    }
}

/// 17 significant digits, round-trip exact.
pub fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.16e}")
}

fn json_f64(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(fmt_f64(x))
    }
}

fn point_string(p: &[f64]) -> String {
    p.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(";")
}

fn rule_name(kind: RuleKind) -> String {
    match kind {
        RuleKind::TwoPoint => "two_point".into(),
        RuleKind::Trapezoid => "trapezoid".into(),
        RuleKind::GaussProduct => "gauss_product".into(),
        RuleKind::MonteCarlo { seed } => format!("monte_carlo:{seed}"),
    }
}

fn mode_name(mode: ArithmeticMode) -> &'static str {
    match mode {
        ArithmeticMode::Float => "float",
        ArithmeticMode::Exact => "exact",
    }
}

pub fn cmd_expand(cfg: &RunConfig) -> CliResult<String> {
    let result = cfg.expansion(cfg.a)?;
    match cfg.format {
        Format::Json => {
            let v = json!({
                "model": cfg.model.name,
                "a": cfg.a,
                "point": cfg.point,
                "odd_vanished": (0..result.zetas.len()).map(|j| result.odd_vanished(j)).collect::<Vec<_>>(),
                "result": result,
            });
            Ok(serde_json::to_string_pretty(&v).expect("serializable") + "\n")
        }
        Format::Csv => {
            let mut out = String::from(EXPAND_HEADER);
            out.push('\n');
            for (j, z) in result.zetas.iter().enumerate() {
                out.push_str(&format!("{j},{},{}\n", fmt_f64(*z), result.odd_vanished(j)));
            }
            out.push_str(&format!(
                "# model={} a={} point={} nu={} lambda={} d={} mode={} rule={} nodes={} resolution={}\n",
                cfg.model.name,
                fmt_f64(cfg.a),
                point_string(&cfg.point),
                result.config.nu,
                result.config.lambda,
                result.config.dim,
                mode_name(result.config.mode),
                rule_name(result.rule.kind),
                result.rule.nodes,
                result.rule.resolution,
            ));
            Ok(out)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyRow {
    pub k: f64,
    pub oracle: f64,
    pub oracle_bound: f64,
    pub partial_sum: f64,
    pub abs_error: f64,
    pub floor: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyStatus {
    Pass,
    Fail,
    FloorLimited,
}

impl VerifyStatus {
    pub fn name(self) -> &'static str {
        match self {
            VerifyStatus::Pass => "pass",
            VerifyStatus::Fail => "fail",
            VerifyStatus::FloorLimited => "floor-limited",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub rows: Vec<VerifyRow>,
    pub slope: Option<f64>,
    pub expected: f64,
    pub status: VerifyStatus,
}

/// `−(n + d)/2` for the first index `n > N` whose coefficient need not vanish.
pub fn expected_order(order: usize, d: usize) -> f64 {
    let next = if (order + 1) % 2 == 0 {
        order + 1
    } else {
        order + 2
    };
    -((next + d) as f64) / 2.0
}

/// Fitted slope over the rows above the rounding floor, and the resulting status.
pub fn classify(rows: &[VerifyRow], expected: f64) -> CliResult<(Option<f64>, VerifyStatus)> {
    let usable: Vec<&VerifyRow> = rows.iter().filter(|r| !r.floor).collect();
    if usable.len() < 3 {
        return Ok((None, VerifyStatus::FloorLimited));
    }
    let ks: Vec<f64> = usable.iter().map(|r| r.k).collect();
    let es: Vec<f64> = usable.iter().map(|r| r.abs_error).collect();
    let s = convergence_order_fit(&ks, &es)?;
    let status = if s <= expected + SLOPE_MARGIN {
        VerifyStatus::Pass
    } else {
        VerifyStatus::Fail
    };
    Ok((Some(s), status))
}

pub fn run_verify(cfg: &RunConfig) -> CliResult<VerifyReport> {
    if cfg.ks.len() < 3 {
        return Err(config_err(format!(
            "verify needs at least 3 k values, got {}",
            cfg.ks.len()
        )));
    }
    let result = cfg.expansion(cfg.a)?;
    let rows: Vec<CliResult<VerifyRow>> = cfg
        .ks
        .par_iter()
        .zip(&cfg.tols)
        .map(|(&k, &tol)| {
            let o = j_a_numeric(&cfg.model, &cfg.point, cfg.a, k, &cfg.oracle_options(tol))?;
            let s = result.partial_sum(k);
            let err = (o.value - s).abs();
            Ok(VerifyRow {
                k,
                oracle: o.value,
                oracle_bound: o.error_bound,
                partial_sum: s,
                abs_error: err,
                floor: err <= FLOOR_FACTOR * f64::EPSILON * o.value.abs(),
            })
        })
        .collect();
    let rows: Vec<VerifyRow> = rows.into_iter().collect::<CliResult<_>>()?;
    let expected = expected_order(cfg.order, cfg.model.group_dim);
    let (slope, status) = classify(&rows, expected)?;
    Ok(VerifyReport {
        rows,
        slope,
        expected,
        status,
    })
}

pub fn render_verify(cfg: &RunConfig, report: &VerifyReport) -> String {
    match cfg.format {
        Format::Json => {
            let v = json!({
                "model": cfg.model.name,
                "a": cfg.a,
                "order": cfg.order,
                "rows": report.rows.iter().map(|r| json!({
                    "k": r.k,
                    "oracle": r.oracle,
                    "oracle_error_bound": r.oracle_bound,
                    "partial_sum": r.partial_sum,
                    "abs_error": r.abs_error,
                    "floor": r.floor,
                })).collect::<Vec<_>>(),
                "slope": report.slope,
                "expected": report.expected,
                "status": report.status.name(),
            });
            serde_json::to_string_pretty(&v).expect("serializable") + "\n"
        }
        Format::Csv => {
            let mut out = String::from(VERIFY_HEADER);
            out.push('\n');
            for r in &report.rows {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt_f64(r.k),
                    fmt_f64(r.oracle),
                    fmt_f64(r.partial_sum),
                    fmt_f64(r.abs_error)
                ));
            }
            let slope = report.slope.map_or("none".to_string(), fmt_f64);
            out.push_str(&format!("# slope={slope}\n"));
            out.push_str(&format!("# expected={}\n", fmt_f64(report.expected)));
            out.push_str(&format!("# status={}\n", report.status.name()));
            out
        }
    }
}

/// Report plus a verification failure when the slope misses the bound.
pub fn cmd_verify(cfg: &RunConfig) -> CliResult<(String, VerifyReport)> {
    let report = run_verify(cfg)?;
    Ok((render_verify(cfg, &report), report))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityRow {
    pub k: f64,
    pub i_numeric: Option<f64>,
    pub j_numeric: Option<f64>,
    pub i_series: f64,
    pub j_series: f64,
}

pub fn run_density_sweep(cfg: &RunConfig) -> CliResult<Vec<DensityRow>> {
    if cfg.ks.is_empty() {
        return Ok(Vec::new());
    }
    let series_i = cfg.expansion(1.0)?;
    let series_j = cfg.expansion(0.5)?;
    let rows: Vec<CliResult<DensityRow>> = cfg
        .ks
        .par_iter()
        .zip(&cfg.tols)
        .map(|(&k, &tol)| {
            let opts = cfg.oracle_options(tol);
            let (i_numeric, j_numeric) = if k.is_finite() {
                (
                    Some(density_i(&cfg.model, &cfg.point, k, &opts)?),
                    Some(density_j(&cfg.model, &cfg.point, k, &opts)?),
                )
            } else {
                (None, None)
            };
            Ok(DensityRow {
                k,
                i_numeric,
                j_numeric,
                i_series: density_i_series(&cfg.model, &cfg.point, k, &series_i)?,
                j_series: density_j_series(&cfg.model, &cfg.point, k, &series_j)?,
            })
        })
        .collect();
    rows.into_iter().collect()
}

pub fn cmd_density_sweep(cfg: &RunConfig) -> CliResult<String> {
    let rows = run_density_sweep(cfg)?;
    let opt = |v: Option<f64>| v.map_or(String::new(), fmt_f64);
    match cfg.format {
        Format::Json => {
            let v: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "k": json_f64(r.k),
                        "I_k": r.i_numeric,
                        "J_k": r.j_numeric,
                        "I_series": r.i_series,
                        "J_series": r.j_series,
                    })
                })
                .collect();
            Ok(serde_json::to_string_pretty(
                &json!({ "model": cfg.model.name, "order": cfg.order, "rows": v }),
            )
            .expect("serializable")
                + "\n")
        }
        Format::Csv => {
            let mut out = String::from(DENSITY_HEADER);
            out.push('\n');
            for r in &rows {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    fmt_f64(r.k),
                    opt(r.i_numeric),
                    opt(r.j_numeric),
                    fmt_f64(r.i_series),
                    fmt_f64(r.j_series)
                ));
            }
            Ok(out)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BellRow {
    pub kind: &'static str,
    pub n: usize,
    pub l: Option<usize>,
    pub polynomial: Polynomial,
    pub ones_value: String,
}

pub fn bell_rows(max: usize, kind: BellKind) -> CliResult<Vec<BellRow>> {
    if max > BELL_MAX {
        return Err(config_err(format!(
            "bell-table bound {max} exceeds {BELL_MAX}"
        )));
    }
    let vars = Polynomial::vars(max);
    let ones = vec![lapexp_core::ExactRational::from_integer(1.into()); max];
    let mut rows = Vec::new();
    let row = |kind: &'static str, n: usize, l: Option<usize>, polynomial: Polynomial| BellRow {
        kind,
        n,
        l,
        ones_value: polynomial.eval(&ones).to_string(),
        polynomial,
    };
    if matches!(kind, BellKind::All | BellKind::Partial) {
        for n in 1..=max {
            for l in 1..=n {
                rows.push(row("partial", n, Some(l), partial_bell(n, l, &vars)?));
            }
        }
    }
    if matches!(kind, BellKind::All | BellKind::Complete) {
        for n in 0..=max {
            rows.push(row("complete", n, None, complete_exp_bell(n, &vars)?));
        }
    }
    if matches!(kind, BellKind::All | BellKind::Power) {
        for n in 1..=max {
            for l in 1..=n {
                rows.push(row("power", n, Some(l), series_power_c(n, l, &vars)?));
            }
        }
    }
    Ok(rows)
}

pub fn cmd_bell_table(args: &BellArgs) -> CliResult<String> {
    let rows = bell_rows(args.max, args.kind)?;
    match args.format {
        Format::Json => {
            let v: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "kind": r.kind,
                        "n": r.n,
                        "l": r.l,
                        "polynomial": r.polynomial.to_string(),
                        "ones_value": r.ones_value,
                    })
                })
                .collect();
            Ok(serde_json::to_string_pretty(&v).expect("serializable") + "\n")
        }
        Format::Csv => {
            let mut out = String::from(BELL_HEADER);
            out.push('\n');
            for r in &rows {
                let l = r.l.map_or(String::new(), |l| l.to_string());
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.kind, r.n, l, r.polynomial, r.ones_value
                ));
            }
            Ok(out)
        }
    }
}

pub fn configure_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().map_err(|_| {
            CliError::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))
        })?;
        if n == 0 {
            return Err(CliError::Usage(format!("{THREADS_ENV} must be positive")));
        }
        // A second initialization (e.g. in tests) keeps the existing pool.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(())
}

fn emit(text: &str, out: &Option<PathBuf>) -> CliResult<()> {
    match out {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
        }
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

/// Run a parsed command, writing its output.
pub fn run(cli: &Cli) -> CliResult<()> {
    configure_threads()?;
    match &cli.command {
        Command::Expand(a) => {
            let cfg = RunConfig::resolve(a, CommandKind::Expand)?;
            emit(&cmd_expand(&cfg)?, &cfg.out)
        }
        Command::Verify(a) => {
            let cfg = RunConfig::resolve(a, CommandKind::Verify)?;
            let (text, report) = cmd_verify(&cfg)?;
            emit(&text, &cfg.out)?;
            if report.status == VerifyStatus::Fail {
                return Err(CliError::VerifyFailed(format!(
                    "fitted slope {} exceeds expected {} + {SLOPE_MARGIN}",
                    report.slope.map_or("none".into(), fmt_f64),
                    fmt_f64(report.expected)
                )));
            }
            Ok(())
        }
        Command::DensitySweep(a) => {
            let cfg = RunConfig::resolve(a, CommandKind::DensitySweep)?;
            emit(&cmd_density_sweep(&cfg)?, &cfg.out)
        }
        Command::BellTable(b) => emit(&cmd_bell_table(b)?, &b.out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_parsing() {
        assert_eq!(parse_k_list("10, 1e3,inf", true).unwrap(), vec![10.0, 1e3, f64::INFINITY]);
        assert!(parse_k_list("inf", false).is_err());
        assert!(parse_k_list("nan", true).is_err());
        assert!(parse_k_list("x", true).is_err());
        assert!(parse_k_list("", false).unwrap().is_empty());
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, -2.5e-300, 1.0 / 3.0, 0.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
    }

    #[test]
    fn error_codes_are_single_line() {
        let e: CliError = lapexp_core::Error::InvalidConfig("a\nb".into()).into();
        assert_eq!(e.diagnostic(), "error[config]: invalid configuration: a b");
    }
}
