use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("group closure exceeded the order cap of {cap}")]
    CapExceeded { cap: usize },
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("not a subgroup: {0}")]
    NotASubgroup(String),
    #[error("subgroup is not normal")]
    NotNormal,
    #[error("invalid group action: {0}")]
    InvalidAction(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("linear system has no solution")]
    NoSolution,
    #[error("representations are over different groups")]
    GroupMismatch,
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("invalid exponents: {0}")]
    InvalidExponents(String),
    #[error("target polynomial is not invariant under the layer group")]
    NotInvariant,
    #[error("direction-tuple enumeration needs {needed} tuples, cap is {cap}")]
    EnumerationCapExceeded { needed: u128, cap: u128 },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("direction {index} is not in the kernel of its basis map")]
    KernelMembershipViolated { index: usize },
    #[error("least-squares system is singular")]
    SingularSystem,
    #[error("invalid layer: {0}")]
    InvalidLayer(String),
}
