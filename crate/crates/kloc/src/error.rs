//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by the analysis pipeline and its building blocks.
#[derive(Debug, Error)]
pub enum KlocError {
    /// The cokernel of a relation matrix is infinite.
    #[error("infinite cokernel: relation matrix does not present a finite group")]
    InfiniteCokernel,

    /// A Galois-module operation was given a group that is not a p-group.
    #[error("group is not a {0}-group")]
    NotPGroup(u64),

    /// An actor of a Galois module has no character value.
    #[error("missing character value for actor {0}")]
    MissingCharacter(String),

    /// Defining polynomial is not monic.
    #[error("polynomial is not monic")]
    NotMonic,

    /// Defining polynomial has degree zero.
    #[error("polynomial has degree zero")]
    DegreeZero,

    /// Defining polynomial factors over Q.
    #[error("polynomial is reducible over Q: factor {0}")]
    Reducible(String),

    /// Floating precision was insufficient to certify a numeric decision.
    #[error("precision exhausted at {0} bits")]
    PrecisionExhausted(u32),

    /// Two ideals belong to different fields.
    #[error("ideal operation across distinct fields")]
    FieldMismatch,

    /// Configured effort caps were hit before a computation finished.
    #[error("effort exceeded: {0}")]
    EffortExceeded(String),

    /// p = 2 with an exceptional base field: the splitting criterion does
    /// not apply.
    #[error("out of theorem scope: p = 2 and the field is exceptional")]
    OutOfTheoremScope,

    /// An even eigenspace index was passed where only odd indices make sense.
    #[error("even eigenspace index {0}")]
    EvenIndex(u64),

    /// Malformed polynomial text.
    #[error("polynomial parse error: {0}")]
    Parse(String),

    /// Malformed or unusable input to the CLI layer.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An unfactorable integer blocked a maximal-order computation.
    #[error("could not factor {0} while computing a maximal order")]
    FactoringFailed(String),
}

pub type Result<T> = std::result::Result<T, KlocError>;
