//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A text form could not be parsed.
    #[error("parse error in {what}: {detail}")]
    Parse { what: &'static str, detail: String },

    /// A structural validation failed while building a value.
    #[error("invalid {what}: {detail}")]
    Invalid { what: &'static str, detail: String },

    /// Two groups with different primes were combined.
    #[error("prime mismatch: p={left} vs p={right}")]
    PrimeMismatch { left: u64, right: u64 },

    /// An element does not belong to the group it was used with.
    #[error("element does not match group shape: {0}")]
    ElementMismatch(String),

    /// An operation that needs a finite group was handed an infinite one.
    #[error("operation requires a finite group: {0}")]
    InfiniteGroup(&'static str),

    /// A Cayley table failed the abelian-group or p-group validation.
    #[error("not a valid table group: {0}")]
    BadTable(String),

    /// A structure failed the axiom check and cannot be decoded.
    #[error("structure is not a model: failing axioms {0}")]
    NotAModel(String),

    /// The decoder produced a table that fails validation; this indicates a
    /// defect in the axiom checker, not in the input.
    #[error("decoded table failed validation (checker defect): {0}")]
    DecodeDefect(String),
}

impl Error {
    pub fn parse(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Parse { what, detail: detail.into() }
    }

    pub fn invalid(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Invalid { what, detail: detail.into() }
    }
}
