use thiserror::Error;

/// Errors for every operation in the crate. Variants carry enough context to
/// act on: offending ids, sizes, names of the maps involved.
#[derive(Debug, Error)]
pub enum Error {
    #[error("graph is disconnected: {components} components, e.g. vertex {witness} unreachable from 0")]
    DisconnectedGraph { components: usize, witness: u32 },

    #[error("self loop at vertex {0}")]
    SelfLoop(u32),

    #[error("unknown vertex {0} (graph has {1} vertices)")]
    UnknownVertex(u32, usize),

    #[error("graph too large for exhaustive scan: {vertices} vertices, cap {cap}")]
    GraphTooLarge { vertices: usize, cap: usize },

    #[error("segment belongs to a different graph (digest {segment} vs {graph})")]
    SegmentGraphMismatch { segment: String, graph: String },

    #[error("vertex sequence is not a path: {0} and {1} are not adjacent")]
    NotAPath(u32, u32),

    #[error("empty set given where at least one vertex is required")]
    EmptySet,

    #[error("indices out of order: {0} then {1}")]
    OutOfOrder(usize, usize),

    #[error("map has no image for vertex {0}")]
    MapNotDefinedOnVertex(u32),

    #[error("calibration did not stabilise: {0}")]
    CalibrationFailed(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("attach map is not injective: vertices {0} and {1} share image {2}")]
    AttachMapNotInjective(u32, u32, u32),

    #[error("attach image {0} missing from target space ({1})")]
    AttachTargetMissing(u32, String),

    #[error("vertex {0} is the root; it has no parent edge")]
    VertexIsRoot(u32),

    #[error("endpoint {0} lies outside the domain of the extended map")]
    EndpointOutsideDomain(u32),

    #[error("constants must be nonnegative: {0}")]
    ConstantsNegative(String),

    #[error("family of segments is empty")]
    EmptyFamily,

    #[error("profiles were computed from different basepoints: {0} vs {1}")]
    InconsistentBasepoint(u32, u32),

    #[error("normal form is not idempotent for {0:?}")]
    NormalFormFailure(String),

    #[error("subgroup trace is empty inside the ball of radius {0}")]
    SubgroupBallEmpty(u32),

    #[error("matrix entry overflow at factor {0}; use smaller coefficients or fewer factors")]
    EntryOverflow(usize),

    #[error("twist coefficient a({0}) = {1} must be at least 2")]
    InvalidCoefficient(usize, i64),

    #[error("({p},{q}) is not a hyperbolic tiling: need (p-2)(q-2) > 4")]
    NotHyperbolicTiling { p: u32, q: u32 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
