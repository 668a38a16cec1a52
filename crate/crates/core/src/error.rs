use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("no Schmidt coefficients given")]
    EmptyState,

    #[error("negative coefficient {value} at position {index}")]
    NegativeCoefficient { index: usize, value: Rational },

    #[error("coefficient {value} at position {index} exceeds 1")]
    CoefficientAboveOne { index: usize, value: Rational },

    #[error("sum {sum} ≠ 1")]
    SumNotOne { sum: Rational },

    #[error("invalid step profile: {0}")]
    InvalidProfile(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("outcome label {0} is not an integer m ≥ 1")]
    NonIntegerLabel(String),

    #[error("invalid diagram: {0}")]
    InvalidDiagram(String),

    #[error("region out of bounds: {0}")]
    RegionOutOfBounds(String),

    #[error("destination occupied: {0}")]
    DestinationOccupied(String),

    #[error("diagram resolution 1/{denominator} is finer than the ascii cap 1/{cap}")]
    ResolutionTooFine { denominator: String, cap: u64 },

    #[error("target profile is not reachable from the start state (area would have to move down)")]
    NotReachable,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("target state is not reachable by deterministic LOCC conversion")]
    NotConvertible,

    #[error("internal colouring failure: {0}")]
    InternalColouringFailure(String),

    #[error("rows of the diagram are not colour-distinct")]
    RowsNotDistinct,

    #[error("slices of the diagram are not colour-distinct: {0}")]
    SlicesNotDistinct(String),

    #[error("outcome {index} has zero probability")]
    ZeroProbabilityOutcome { index: usize },

    #[error("float cross-check exceeded tolerance: {0}")]
    ToleranceExceeded(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
