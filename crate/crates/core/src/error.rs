//! Error types shared across the crate.

use crate::lattice::PathViolation;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by construction, validation, and the alignment operations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A scalar or structural field failed validation. `name` matches the
    /// JSON field or CLI flag the value came from.
    #[error("invalid `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A 1-based `(i, j)` lattice index fell outside the table.
    #[error("index ({i}, {j}) out of range for a {num_inputs}x{max_outputs} lattice")]
    IndexOutOfRange {
        i: usize,
        j: usize,
        num_inputs: usize,
        max_outputs: usize,
    },

    /// An alignment path violated a structural invariant.
    #[error("invalid path: {0}")]
    Path(#[from] PathViolation),

    /// Exhaustive enumeration would exceed the path-count guard.
    #[error("enumeration would produce {count} paths, over the limit of {limit}")]
    EnumerationGuard { count: u128, limit: u64 },

    /// More inputs than output steps: no complete alignment exists.
    #[error(
        "infeasible lattice: {num_inputs} inputs cannot complete in {max_outputs} output steps"
    )]
    Infeasible {
        num_inputs: usize,
        max_outputs: usize,
    },

    /// A numeric computation produced a non-finite intermediate where one is
    /// not a meaningful result (distinct from a legitimate -inf log-mass).
    #[error("numeric failure in {context}")]
    NumericFailure { context: &'static str },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
