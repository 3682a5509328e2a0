use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("entry count {got} does not describe a square matrix of dimension {dim}")]
    BadShape { dim: usize, got: usize },

    #[error("non-finite value rejected in {context}")]
    NonFinite { context: &'static str },

    #[error("direction is not a unit vector (norm {norm})")]
    NonUnitDirection { norm: f64 },

    #[error("state vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("basis is not unitary (residual {residual:e})")]
    NotUnitary { residual: f64 },

    #[error("expected {expected} parameters, got {got}")]
    WrongParamCount { expected: usize, got: usize },

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error("series expansion requires equal momenta (p1 = {p1}, p2 = {p2})")]
    UnequalMomenta { p1: f64, p2: f64 },

    #[error("the linear-quadratic model has no qutrit formula")]
    UnsupportedModel,

    #[error("invalid deformation parameters: {0}")]
    InvalidParams(String),

    #[error("invalid experiment specification: {0}")]
    InvalidExperiment(String),

    #[error("objective returned a non-finite value at {point:?}")]
    NonFiniteObjective { point: Vec<f64> },

    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
