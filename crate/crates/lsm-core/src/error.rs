use thiserror::Error;

/// Errors raised by state construction, protocol execution, and composition.
#[derive(Debug, Error)]
pub enum LsmError {
    /// A precondition on an argument was violated (dimension mismatch,
    /// out-of-range index, non-normalized vector, incomplete basis, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A protocol node touches factors that do not all belong to its party.
    #[error("locality violation: {0}")]
    LocalityViolation(String),

    /// A teleportation resource is not a maximally entangled, disentangled pair.
    #[error("invalid teleportation resource: {0}")]
    ResourceInvalid(String),

    /// A composer was handed a sub-protocol that is not perfect on its set.
    #[error("composition invalid: {0}")]
    CompositionInvalid(String),

    /// An operation requiring product states was given an entangled member.
    #[error("not a product set: {0}")]
    NotProductSet(String),

    /// Two-state discrimination fell outside the implemented special cases.
    #[error("unsupported candidate pair: {0}")]
    UnsupportedPair(String),

    /// Serialized input could not be decoded.
    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, LsmError>;
