use crate::graph::NodeId;

/// Errors surfaced by graph construction, solvers and classification routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("self-loop at node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge between {0} and {1}")]
    DuplicateEdge(NodeId, NodeId),
    #[error("edge ({0}, {1}) has non-positive or non-finite len/mu")]
    BadEdgeWeight(NodeId, NodeId),
    #[error("graph is not connected")]
    Disconnected,
    #[error("ball radius must be positive, got {0}")]
    DegenerateRadius(f64),
    #[error("node set covers the whole graph; complement is empty")]
    SetCoversGraph,
    #[error("node set is empty")]
    EmptySet,
    #[error("node sets overlap")]
    OverlappingSets,
    #[error("exponent p must satisfy p > 1, got {0}")]
    BadExponent(f64),
    #[error("boundary value for node {0} is not finite")]
    NonFiniteBoundary(NodeId),
    #[error("empty boundary: use the free-problem entry point `solve_free` instead")]
    EmptyBoundary,
    #[error("solver did not converge after {sweeps} sweeps (residual {residual:.3e})")]
    NoConvergence { sweeps: u32, residual: f64 },
    #[error("modulus solver exhausted {rounds} constraint-generation rounds (gap {gap:.3e})")]
    ModulusNoConvergence { rounds: u32, gap: f64 },
    #[error("exhaustion level {0} exceeds available depth {1}")]
    DepthExceeded(u32, u32),
    #[error("chains belong to different exhaustions")]
    MismatchedExhaustion,
    #[error("chain is not nested at index {0}")]
    NonNestedChain(u32),
    #[error("chain set at index {0} is empty on the requested truncation")]
    ChainExhausted(u32),
    #[error("escape condition fails at radius index {0}: the set still meets the ball")]
    EscapeViolated(u32),
    #[error("radius schedule must be strictly increasing and positive")]
    BadRadiusSchedule,
    #[error("prescribed sets are not contained in truncation level {0}")]
    SetsOutsideTruncation(u32),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("tail behavior undeclared; refusing to decide improper-integral convergence numerically")]
    TailUndeclared,
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("unknown class name {0}")]
    UnknownClass(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
