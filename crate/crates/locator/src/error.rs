//! Error types shared across the crate.

use thiserror::Error;

/// Errors from graph construction and validation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {0} out of range (n = {1})")]
    VertexOutOfRange(u32, u32),
    #[error("loop edge {0}-{0} not allowed")]
    LoopEdge(u32),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(u32, u32),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("edge {0}-{1} does not exist")]
    MissingEdge(u32, u32),
    #[error("subdivision length must be positive (edge {0}-{1})")]
    NonPositiveLength(u32, u32),
    #[error("total subdivided size too large ({0} vertices)")]
    TooLarge(u64),
    #[error("thread offset {2} out of range for edge {0}-{1}")]
    OffsetOutOfRange(u32, u32, u32),
    #[error("no off-midpoint: subdivision length {0} is even")]
    EvenLengthOffMidpoint(u32),
}

/// Errors raised by the game engine while simulating a play.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("probe result {dist} at {probe} is inconsistent with every tracked candidate")]
    ProtocolViolation { probe: u32, dist: u32 },
    #[error("robber move {to} is not the current vertex or a neighbour of {from}")]
    IllegalRobberMove { from: u32, to: u32 },
    #[error("robber script is empty (no starting vertex)")]
    EmptyScript,
    #[error("true robber position {pos} dropped from the belief at round {round}")]
    SoundnessViolation { pos: u32, round: u32 },
}

/// A strategy detected that the game left the case analysis it was built on.
///
/// This is the executable "alarm" contract: strategies validate every probe
/// result against their tracked belief and refuse to continue on a mismatch
/// rather than emit a probe they cannot justify.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("strategy error: {0}")]
pub struct StrategyError(pub String);

impl StrategyError {
    pub fn new(msg: impl Into<String>) -> Self {
        StrategyError(msg.into())
    }
}

/// Errors from strategy constructors (violated preconditions).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrategyBuildError {
    #[error("subdivision length {m} violates m >= k+1 = {required} (matching has size {k})")]
    MatchingSizeBound { m: u32, k: u32, required: u32 },
    #[error("subdivision length {m} violates m >= 12")]
    MinimumLengthBound { m: u32 },
    #[error("matching is not maximal for this graph (unmatched vertices {0} and {1} are adjacent)")]
    NotMaximal(u32, u32),
    #[error("not a matching: {0}")]
    NotAMatching(String),
    #[error("edge {u}-{v} has length {len}, below the required 2n = {required}")]
    EdgeLengthBound { u: u32, v: u32, len: u32, required: u32 },
    #[error("subdivision is not equal-length (edge {0}-{1} has length {2}, expected {3})")]
    UnequalLengths(u32, u32, u32, u32),
}

/// Errors from the exact solver.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("instance has {actual} vertices, above the configured budget of {limit} (raise the budget to override)")]
    VertexBudget { actual: u32, limit: u32 },
    #[error("state budget exceeded ({limit} beliefs explored) without reaching a fixpoint")]
    StateBudget { limit: u64 },
    #[error("strategy extraction requires a locatable instance")]
    NotLocatable,
    #[error("evasion certificate requires a non-locatable instance")]
    Locatable,
}

/// Errors from the adversarial verifier.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("memo budget exceeded ({0} states) without resolving the search")]
    StateBudget(u64),
    #[error("depth bound {0} exceeded without a repeated state; result inconclusive")]
    DepthBound(u32),
    #[error("engine error during verification: {0}")]
    Engine(#[from] EngineError),
}

/// Errors from graph enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumError {
    #[error("enumeration supports at most {limit} vertices (got {requested})")]
    TooManyVertices { requested: u32, limit: u32 },
}

/// Parse errors for the graph text format, with 1-based line numbers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error("line {line}: mixes edges with and without lengths")]
    MixedLengths { line: usize },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("empty input")]
    Empty,
}

impl ParseError {
    pub fn at(line: usize, msg: impl Into<String>) -> Self {
        ParseError::Line {
            line,
            msg: msg.into(),
        }
    }
}
