//! Probe strategies.
//!
//! [`matching`] implements the strategy for equal subdivisions driven by a
//! maximal matching; [`unequal`] the strategy for subdivisions whose every
//! thread is long relative to the base graph. [`windows`] holds the shared
//! distance-window arithmetic both are audited against.

pub mod matching;
pub mod unequal;
pub mod windows;

pub use matching::{build_matching_strategy, MatchingStrategy};
pub use unequal::{build_unequal_strategy, candidate_probes, UnequalStrategy};
