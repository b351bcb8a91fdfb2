use thiserror::Error;

use crate::timeline::ValidationError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("invalid dimension {0}")]
    BadDimension(usize),

    #[error("total dimension {total} exceeds the cap of {cap} amplitudes")]
    DimensionCap { total: usize, cap: usize },

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("subsystem index {index} out of range for {count} subsystems")]
    BadSubsystem { index: usize, count: usize },

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("vector has zero norm")]
    ZeroVector,

    #[error("operator is not a valid density operator: {0}")]
    NotDensity(&'static str),

    #[error("backward and forward components are orthogonal (overlap {overlap:e})")]
    OrthogonalSelection { overlap: f64 },

    #[error("pre- and post-selection are inconsistent (total branch weight {weight:e})")]
    InconsistentSelection { weight: f64 },

    #[error("no branch survives post-selection (weight {weight:e})")]
    EmptyEnsemble { weight: f64 },

    #[error("no sampled shot survived post-selection out of {shots} (exact probability {probability:e})")]
    NoAcceptedShots { shots: usize, probability: f64 },

    #[error("branch count {needed} exceeds cap {cap}")]
    BranchCapExceeded { needed: usize, cap: usize },

    #[error("channel is invalid: {0}")]
    BadChannel(&'static str),

    #[error("unknown outcome {0}")]
    UnknownOutcome(String),

    #[error("unknown experiment `{name}`; available: {available}")]
    UnknownExperiment { name: String, available: String },

    #[error("timeline failed validation: {}", join(.0))]
    Invalid(Vec<ValidationError>),
}

fn join(errors: &[ValidationError]) -> String {
    errors
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
