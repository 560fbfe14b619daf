//! Maximum matching through edge queries, with per-query guess accounting.

pub mod error;
pub mod events;
pub mod experiments;
pub mod graph;
pub mod guessing;
pub mod matcher;
pub mod oracle;
pub mod phase1;
pub mod phase2;
pub mod reference;
pub mod unionfind;

pub use error::{Error, Result};
pub use graph::{AlternatingPath, Edge, Graph, Matching, Vertex};
pub use matcher::{maximum_matching, solve, MatchConfig, MatchResult};
pub use oracle::{build_oracle, Oracle, QueryModel};
