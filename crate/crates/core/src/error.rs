use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex {vertex} out of range (graph has {count} vertices)")]
    InvalidVertex { vertex: usize, count: usize },

    #[error("invalid edge ({u}, {v}): {reason}")]
    InvalidEdge { u: usize, v: usize, reason: String },

    #[error("graph is not connected ({components} components)")]
    Disconnected { components: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("radius {radius} at vertex {center} leaves the audit window (reach {reach}): {what}")]
    OutOfWindow {
        center: usize,
        radius: u64,
        reach: u64,
        what: &'static str,
    },

    #[error("vertex set is empty")]
    EmptySet,

    #[error("sets intersect, capacity is infinite")]
    InfiniteCapacity,

    #[error("domain contains every vertex, the walk never exits")]
    NoExit,

    #[error("solver stopped after {iterations} iterations with relative residual {residual:e}")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("need at least 3 points for a fit, got {0}")]
    TooFewPoints(usize),

    #[error("no level C1 <= 2^16 captures a quarter of the inner ball measure (r = {radius})")]
    EmptyLevelSet { radius: u64 },
}
