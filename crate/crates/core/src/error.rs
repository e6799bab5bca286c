use thiserror::Error;

use crate::MAX_DEGREE;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("degenerate triple: the three points must be pairwise distinct")]
    DegenerateTriple,
    #[error("degenerate Möbius transform: ad - bc = 0")]
    DegenerateMobius,
    #[error("the map is constant")]
    ConstantMap,
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("degree {0} exceeds the supported maximum of {MAX_DEGREE}")]
    DegreeTooLarge(usize),
    #[error("root finding failed: {0}")]
    RootFindingFailure(String),
    #[error("w must be finite and nonzero")]
    DegenerateW,
    #[error("not representable in the exact backend: {0}")]
    NotRepresentable(String),
    #[error("verification failed: {0}")]
    VerificationFailure(String),
    #[error("malformed passport: {0}")]
    MalformedPassport(String),
    #[error("path passes too close to a branch value near {0}")]
    PathThroughBranchValue(String),
    #[error("two sheets collided while tracking near {0}")]
    TrackingCollision(String),
    #[error("monodromy around {puncture} has cycle type {found:?}, fiber local degrees are {expected:?}")]
    CycleTypeMismatch {
        puncture: String,
        expected: Vec<usize>,
        found: Vec<usize>,
    },
    #[error("value {0} is not covered by the passport")]
    UnknownValue(String),
    #[error("no end has value class {0}")]
    UnknownValueClass(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("search space exceeds the node budget of {0}")]
    BoundsTooLarge(u64),
    #[error("invalid record: {0}")]
    InvalidRecord(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
