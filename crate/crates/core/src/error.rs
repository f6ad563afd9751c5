use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("denominator is the zero polynomial")]
    ZeroDenominator,
    #[error("function is identically zero")]
    IdenticallyZero,
    #[error("operation requires a rational map (alpha = 0), got alpha = {0}")]
    NotRational(f64),
    #[error("schwarzian undefined: derivative vanishes at {0}")]
    CriticalPoint(String),
    #[error("equation is degenerate: the map is identically equal to the target value")]
    DegenerateEquation,
    #[error("eigenvalue solver failed on a companion matrix of degree {0}")]
    EigenSolver(usize),
    #[error("point {0} is not a valid expansion point: {1}")]
    BadExpansionPoint(String, String),
    #[error("target mismatch: {0}")]
    WrongTarget(&'static str),
    #[error("metric degenerates at {0}")]
    DegenerateMetric(String),
    #[error("step size underflow while integrating segment {segment} near z = {near}")]
    StepUnderflow { segment: usize, near: String },
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("chart is not simply connected: {0}")]
    NotSimplyConnected(String),
    #[error("determinant drift {0:e} exceeds tolerance")]
    DeterminantDrift(f64),
    #[error("de Sitter point has no Poincare ball image")]
    NotHyperbolic,
    #[error("gauss map is constant; no dual data")]
    ConstantGaussMap,
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
