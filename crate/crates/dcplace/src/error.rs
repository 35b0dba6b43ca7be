use crate::graph::NodeId;

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An operation that requires connectivity was given a disconnected
    /// graph or region.
    #[error("disconnected input: {0}")]
    Disconnected(String),

    /// A node carries demand but cannot reach any placed site.
    #[error("unreachable demand at node {node}")]
    UnreachableDemand { node: NodeId },

    /// Text-format parse failure (edge list, demand file).
    #[error("parse error at line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    /// A protocol handler broke the simulation contract, e.g. sent a
    /// message to a non-neighbor.
    #[error("protocol error: {0}")]
    Protocol(String),

    /// The event cascade exceeded its budget; the protocol is presumed
    /// divergent.
    #[error("event budget of {budget} exceeded; protocol did not quiesce")]
    EventBudgetExceeded { budget: u64 },

    /// A bounded-retry generator (small-world connectivity) ran out of
    /// attempts.
    #[error("generation failed: {0}")]
    GenerationFailed(String),

    /// Exhaustive search refused to enumerate an instance this large.
    #[error("instance too large: {combinations} subsets exceeds budget {budget}")]
    InstanceTooLarge { combinations: u128, budget: u64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
