use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid plumbing graph: {0}")]
    InvalidGraph(String),

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("singular block in Schur complement split")]
    SingularBlock,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("plumbing matrix is not negative definite")]
    NotNegativeDefinite,

    #[error("plumbing graph is not weakly negative definite")]
    NotWeaklyNegativeDefinite,

    #[error("quadratic form is not positive definite")]
    NotPositiveDefinite,

    #[error("invalid pair ({a}, {w}): need 0 < w < a and gcd(a, w) = 1")]
    InvalidPair { a: i64, w: i64 },

    #[error("Brieskorn exponents must be pairwise coprime integers >= 2: {0:?}")]
    NotCoprime(Vec<i64>),

    #[error("move not applicable: {0}")]
    MoveNotApplicable(String),

    #[error("move would create a new node: {0}")]
    NodeCreatingMoveRejected(String),

    #[error("0-decorated leaf {leaf} is attached to node {node}; impossible for a weakly negative definite graph")]
    ImpossibleForWeaklyNegDef { leaf: String, node: String },

    #[error("normalization did not terminate after {0} moves")]
    NonTermination(usize),

    #[error("normalization reached a graph with empty normal form (S^3)")]
    EmptyNormalForm,

    #[error("vertex {0} is not a vertex of the splice diagram")]
    VertexNotInDiagram(String),

    #[error("constraint violation: {0}")]
    ConstraintViolation(String),

    #[error("lattice search exceeded its budget of {0} nodes")]
    CapExceeded(usize),

    #[error("certificate parse error on line {line}: {message}")]
    Certificate { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
