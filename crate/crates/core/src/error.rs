use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("tuple {tuple:?} is not a valid index tuple for j = {j}")]
    InvalidTuple { j: usize, tuple: Vec<u32> },

    #[error("need at least {needed} arguments, got {got}")]
    ShortInput { needed: usize, got: usize },

    #[error("series order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("strict positivity violated: f_0 = {value} at node {node} (omega = {omega:?})")]
    NonPositiveLeading {
        node: usize,
        omega: Vec<f64>,
        value: f64,
    },

    #[error("point {point:?} is off the zero level: |phi| = {residual}")]
    OffZeroLevel { point: Vec<f64>, residual: f64 },

    #[error("no deterministic sphere rule for d = {0}; use a Monte Carlo rule")]
    UnsupportedDimension(usize),

    #[error("quadrature tolerance not reached: best estimate {estimate}, error bound {bound}")]
    OracleTolerance { estimate: f64, bound: f64 },

    #[error("gamma function pole at {0}")]
    GammaPole(f64),

    #[error("model file: {0}")]
    ModelFile(String),
}
