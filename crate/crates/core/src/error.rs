//! Error type shared by the core modules.

use symcore::SymError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("the Jacobian of the action on the independent variables is singular")]
    SingularJacobian,
    #[error("the infinitesimal generators are not linearly independent")]
    GeneratorsNotIndependent,
    #[error("normalization equations are outside the solver's class: {0}")]
    NotSolvable(String),
    #[error("frame verification failed: {0}")]
    VerificationFailed(String),
    #[error("invariant operators are not independent")]
    BasisSolveFailed,
    #[error("syzygy rewriting exceeded the depth bound {0}")]
    RewriteNotTerminating(usize),
    #[error("Lagrangian is not invariant under generator {generator}: residual {residual}")]
    NotInvariant { generator: usize, residual: String },
    #[error("matrix of first minors is singular")]
    SingularMinors,
    #[error("entry is not invariant: {0}")]
    InvarianceFailed(String),
    #[error("identity check failed: {0}")]
    IdentityFailed(String),
    #[error("the group has no matrix form")]
    NotMatrixGroup,
    #[error("no group product is known for this action")]
    NoComposition,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
