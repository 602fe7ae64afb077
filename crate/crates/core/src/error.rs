use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("kernel weights must be nonnegative and sum to 1 (sum = {sum})")]
    WeightsNotNormalized { sum: f64 },
    #[error("kernel weight {index} is negative ({weight})")]
    NegativeWeight { index: usize, weight: f64 },
    #[error("kernel rate {index} must be strictly positive (got {rate})")]
    NonPositiveRate { index: usize, rate: f64 },
    #[error("kernel needs as many weights as rates ({weights} vs {rates})")]
    KernelShape { weights: usize, rates: usize },
    #[error("omega must lie in {range} (got {omega})")]
    OmegaOutOfRange { omega: f64, range: &'static str },
    #[error("expected a {expected} kernel, got a {found} kernel")]
    RegionMismatch { expected: &'static str, found: &'static str },
    #[error("kernel evaluated at negative time s = {s}")]
    NegativeTime { s: f64 },
    #[error("grid needs nx >= 4, ny >= 4 and positive lengths (nx = {nx}, ny = {ny}, lx = {lx}, ly = {ly})")]
    DegenerateGrid { nx: usize, ny: usize, lx: f64, ly: f64 },
    #[error("parameter {name} = {value} violates {constraint}")]
    ParameterDomain { name: &'static str, value: f64, constraint: &'static str },
    #[error("field length {found} does not match the grid ({expected} nodes)")]
    GridMismatch { expected: usize, found: usize },
    #[error("V^-1 norm needs a definite Gram operator (alpha > 0 or beta > 0)")]
    IndefiniteGram,
    #[error("linear solve did not converge: relative residual {residual:e} after {iterations} iterations")]
    SolverNonConvergence { residual: f64, iterations: usize },
    #[error("initial history must vanish at s = 0 (got {value})")]
    NonzeroInitialHistory { value: f64 },
    #[error("operation needs the direct (cumulative-integral) history representation")]
    ModeOnlyHistory,
    #[error("history series covers [0, {covered}] but t = {requested} was requested")]
    InsufficientCoverage { covered: f64, requested: f64 },
    #[error("nonlinearity {which}: {reason}")]
    Nonlinearity { which: &'static str, reason: String },
    #[error("c0 = {value} is not positive; the boundary kernel violates k_G(0) <= 4/(1-omega)")]
    NonPositiveDecayConstant { value: f64 },
    #[error("initial difference is zero")]
    ZeroInitialDifference,
    #[error("input {name} must be positive (got {value})")]
    NonPositiveInput { name: &'static str, value: f64 },
    #[error("need at least {needed} rows, got {found}")]
    InsufficientData { needed: usize, found: usize },
    #[error("non-finite state at t = {time} (step {step})")]
    NonFinite { time: f64, step: usize },
    #[error("invalid time step or horizon: {0}")]
    InvalidTiming(String),
}
