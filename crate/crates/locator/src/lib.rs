//! Distance-probe pursuit on graph subdivisions.
//!
//! A single cop repeatedly probes vertices of a graph and learns the exact
//! distance to an invisible robber who moves one step (or stays) per round;
//! the cop wins on determining the robber's position exactly. This crate
//! provides:
//!
//! - base graphs, matchings, and implicit subdivided graphs with an exact
//!   distance oracle ([`graph`], [`matching`], [`subdivision`]);
//! - the game engine with belief-state tracking and a deterministic
//!   strategy contract ([`engine`]);
//! - an exact solver deciding whether the cop can win in bounded time on
//!   small instances, with strategy extraction and evasion certificates
//!   ([`solver`]);
//! - probe strategies for equal and unequal subdivisions ([`strategy`]);
//! - exhaustive adversarial verification of strategies and small-graph
//!   enumeration utilities ([`verify`], [`enumerate`], [`sweep`]);
//! - the text formats used by the command-line tool ([`format`]).

pub mod engine;
pub mod enumerate;
pub mod error;
pub mod format;
pub mod graph;
pub mod matching;
pub mod solver;
pub mod strategy;
pub mod subdivision;
pub mod sweep;
pub mod verify;
pub mod vertex_set;

pub use engine::{expand, play, refine, Belief, CopStrategy, GameTrace, Outcome, RobberPolicy};
pub use graph::Graph;
pub use matching::{greedy_maximal_matching, min_maximal_matching, Matching};
pub use subdivision::{SubdividedGraph, Vertex};
pub use vertex_set::VertexSet;
