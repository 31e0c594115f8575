use alloc::string::String;

/// Errors raised by every module of the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid group order {0}: need n >= 2")]
    InvalidOrder(u32),

    #[error("non-manifold edge ({0}, {1}) shared by {2} faces")]
    NonManifoldEdge(u32, u32, usize),

    #[error("mesh is not orientable")]
    NonOrientable,

    #[error("unsupported topology: {0}")]
    UnsupportedTopology(String),

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("balance equation has no roots for r = {r}, h = {h}")]
    NoRoots { r: f64, h: f64 },

    #[error("degenerate slice: {0}")]
    DegenerateSlice(String),

    #[error("degenerate mesh: {0}")]
    DegenerateMesh(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("width bracket violated: upper {upper} >= 3π")]
    BracketViolation { upper: f64 },

    #[error("side field does not contain the north pole region")]
    InconsistentWithOrigin,

    #[error("mesh carries no orbit bookkeeping")]
    MissingOrbits,

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
}

pub type Result<T> = core::result::Result<T, Error>;
