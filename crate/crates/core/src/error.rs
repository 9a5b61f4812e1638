use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid step set: {0}")]
    InvalidStepSet(String),
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("degenerate direction")]
    DegenerateDirection,
    #[error("drift condition violated")]
    DriftConditionViolated,
    #[error("drift condition violated on cylinder")]
    CylinderDriftViolated,
    #[error("opposite step missing from the step set")]
    MissingOppositeStep,
    #[error("invalid orthogonal basis: {0}")]
    InvalidBasis(String),
    #[error("no step crosses the hyperplane in the positive direction")]
    EmptyEntrySet,
    #[error("cylinder divergence check failed at vertex {vertex}")]
    CylinderDivergence { vertex: usize },
    #[error("slab too thin: {0}")]
    SlabTooThin(String),
    #[error("weight divergence is nonzero at vertex {vertex}")]
    Unbalanced { vertex: usize },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid environment: {0}")]
    InvalidEnvironment(String),
    #[error("singular linear system: {0}")]
    SingularSystem(String),
    #[error("chain is not irreducible")]
    Reducible,
    #[error("linear solve residual {residual:e} exceeds tolerance")]
    Residual { residual: f64 },
    #[error("identity check failed: {0}")]
    IdentityMismatch(String),
    #[error("cannot parse `{input}`: {reason}")]
    Parse { input: String, reason: String },
}
