use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("matrix is singular")]
    Singular,

    #[error("matrix or space is not skew-symmetric: {0}")]
    NotSkew(String),

    #[error("enumeration cap exceeded: {0}")]
    CapExceeded(String),

    #[error("search budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("infeasible construction: {0}")]
    Infeasible(String),

    #[error("invalid characterization tuple: {0}")]
    InvalidTuple(String),

    #[error("semi-canonical form construction failed: {0}")]
    ConstructionFailed(String),

    #[error("semi-canonical form violates its zero pattern: {0}")]
    InvalidForm(String),

    #[error("normalization did not terminate: {0}")]
    NormalizationFailed(String),

    #[error("matrix is both type 1 and type 2: {0}")]
    Ambiguous(String),

    #[error("parse error: {0}")]
    ParseError(String),

    #[error("not a group: {0}")]
    NotAGroup(String),

    #[error("group order is not a prime power")]
    NotPPower,

    #[error("group has an element of order different from p: element {0}")]
    WrongExponent(usize),

    #[error("group is not of nilpotency class exactly 2: {0}")]
    NotClass2(String),

    #[error("degenerate bilinear map: {0}")]
    Degenerate(String),

    #[error("enumeration bounds below the guaranteed tuple sizes: {0}")]
    BoundsTooSmall(String),

    #[error("decision is inconclusive: {0}")]
    Inconclusive(String),
}

pub type Result<T> = std::result::Result<T, Error>;
