use thiserror::Error;

use crate::pipeline::SampleReport;
use crate::stepset::Step3;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("stepset is empty")]
    EmptyStepSet,

    #[error("the zero step (0,0,0) is not allowed")]
    ZeroStep,

    #[error("step {0} has weight 0; weights must be positive integers")]
    ZeroWeight(Step3),

    #[error("steps lie in the closed half-space u·s >= 0 with u = {witness:?}")]
    SpanViolation { witness: [i64; 3] },

    #[error("inventory evaluated at a point with a non-positive coordinate: {0:?}")]
    NonPositivePoint([f64; 3]),

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("projection vector {0:?} has a negative component; its half-space does not contain the orthant")]
    OrthantNotContained([f64; 3]),

    #[error("projection collapsed the model: 1D values are all {0}")]
    Degenerate(&'static str),

    #[error("1D stepset needs both positive and negative values")]
    DegenerateStepset,

    #[error("invalid grammar: {0}")]
    InvalidGrammar(String),

    #[error("generating function diverges at x = {x}")]
    Divergent { x: f64 },

    #[error("attempt budget exhausted after {} draws ({} accepted)", .0.counters.free_draws, .0.counters.accepted)]
    AttemptsExhausted(Box<SampleReport>),

    #[error("atom {0} is not part of the 1D stepset or has no 3D source")]
    UnknownAtom(usize),

    #[error("counting budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("endpoint {0:?} observed but has exact count 0")]
    ImpossibleEndpoint([i64; 3]),

    #[error("mismatched lengths: {0}")]
    LengthMismatch(String),

    #[error("unknown export format `{0}`")]
    UnknownFormat(String),

    #[error("points are coplanar or collinear; no 3D hull")]
    DegenerateHull,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable name.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptyStepSet => "EmptyStepSet",
            Error::ZeroStep => "ZeroStep",
            Error::ZeroWeight(_) => "ZeroWeight",
            Error::SpanViolation { .. } => "SpanViolation",
            Error::NonPositivePoint(_) => "NonPositivePoint",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::OrthantNotContained(_) => "OrthantNotContained",
            Error::Degenerate(_) => "Degenerate",
            Error::DegenerateStepset => "DegenerateStepset",
            Error::InvalidGrammar(_) => "InvalidGrammar",
            Error::Divergent { .. } => "Divergent",
            Error::AttemptsExhausted(_) => "AttemptsExhausted",
            Error::UnknownAtom(_) => "UnknownAtom",
            Error::BudgetExceeded(_) => "BudgetExceeded",
            Error::ImpossibleEndpoint(_) => "ImpossibleEndpoint",
            Error::LengthMismatch(_) => "LengthMismatch",
            Error::UnknownFormat(_) => "UnknownFormat",
            Error::DegenerateHull => "DegenerateHull",
            Error::Parse(_) => "ParseError",
            Error::Io(_) => "IoError",
        }
    }

    /// Process exit status: 2 validation, 3 attempts exhausted, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::AttemptsExhausted(_) => 3,
            Error::Io(_) => 4,
            _ => 2,
        }
    }
}
