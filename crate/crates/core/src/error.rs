use thiserror::Error;

use crate::table::ElementId;

/// Everything that can go wrong while loading a table or evaluating
/// something over it.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("line {line}: {kind}")]
    Parse { line: usize, kind: ParseErrorKind },

    #[error("element {index} out of range for order {order}")]
    IndexOutOfRange { index: usize, order: usize },

    #[error("no solution for {equation}")]
    NoSolution { equation: String },

    #[error("multiple solutions for {equation}")]
    MultipleSolutions { equation: String },

    #[error("table has no left identity")]
    NoLeftIdentity,

    #[error("element {0} has no inverse")]
    NoInverse(ElementId),

    #[error("identity syntax error at column {column}: {message}")]
    IdentitySyntax { column: usize, message: String },

    #[error("'e' is reserved for the identity constant and cannot be a variable")]
    ReservedVariable,

    #[error("unknown preset '{0}'")]
    UnknownPreset(String),

    #[error("table is not a quasigroup: {0}")]
    NotQuasigroup(String),

    #[error("table is not an AG-group: {0}")]
    NotAgGroup(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("({a},{b},{c}) has {count} fourth vertices; table is not a parallelogram space")]
    NotParallelogramSpace {
        a: ElementId,
        b: ElementId,
        c: ElementId,
        count: usize,
    },

    #[error("{0} is not a parallelogram")]
    NotParallelogram(String),

    #[error("closure violated: {0}")]
    ClosureViolation(String),

    #[error("derived algebra is inconsistent: {0}")]
    Inconsistent(String),

    #[error("order {order} exceeds the bound {limit} for {what}; pass --force to override")]
    BoundExceeded {
        what: String,
        order: usize,
        limit: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("empty input")]
    Empty,
    #[error("malformed header '{0}': expected a positive decimal order")]
    MalformedHeader(String),
    #[error("expected {expected} rows, found {found}")]
    WrongRowCount { expected: usize, found: usize },
    #[error("expected {expected} entries, found {found}")]
    WrongRowLength { expected: usize, found: usize },
    #[error("entry {value} out of range [0, {order})")]
    EntryOutOfRange { value: u64, order: usize },
    #[error("'{0}' is not a non-negative integer")]
    NotAnInteger(String),
}

pub type Result<T> = std::result::Result<T, Error>;
