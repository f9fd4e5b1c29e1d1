//! Skeleton generators and the bi-degree type laws of random skeletons.

mod empirical;
mod generators;
mod io;
mod skeleton;
mod type_laws;

pub use empirical::{empirical_laws, EmpiricalLaws};
pub use generators::{
    configuration_skeleton, poisson_skeleton, preferential_attachment, top_connected_subnetwork,
    ConfigurationReport, Subnetwork,
};
pub use io::{read_skeleton, read_skeleton_file, write_skeleton, write_skeleton_file};
pub use skeleton::{Edge, Skeleton};
pub use type_laws::{check_consistency, ConsistencyReport, EdgeTypeLaw, NodeTypeLaw};

use thiserror::Error;

/// Redraws allowed per edge before a self-loop or repeated edge is dropped.
pub const EDGE_RETRIES: usize = 100;

/// Degree-sequence draws allowed before balancing in- and out-stubs fails.
pub const BALANCE_ATTEMPTS: usize = 20_000;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("edge {0} -> {1} appears more than once")]
    DuplicateEdge(usize, usize),
    #[error("node {node} out of range for {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("invalid type law: {0}")]
    InvalidLaw(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("in- and out-degree totals did not balance after {0} draws")]
    Unbalanced(usize),
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("skeleton file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
