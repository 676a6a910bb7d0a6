//! Maximum cardinality f-matching on general multigraphs.
//!
//! The solver runs phases of shortest augmenting trails. Each phase runs an
//! f-matching search with blossoms and integral duals, extracts a blocking
//! set of edge-disjoint shortest trails and augments them all. The
//! [`petalevel`] module tracks trails against the phase duals and builds
//! the level graph used to bound the number of phases.

pub mod blocking;
pub mod blossom;
pub mod cli;
pub mod eg;
pub mod error;
pub mod graph;
pub mod oracle;
pub mod petalevel;
pub mod random;
pub mod search;

pub use error::{Error, Result};
