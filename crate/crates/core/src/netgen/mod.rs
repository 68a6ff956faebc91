//! Weighted contact networks: construction, random generators and
//! centrality measures.

mod centrality;
mod edgelist;
mod generators;
mod network;
pub(crate) mod spectral;

use thiserror::Error;

pub use centrality::{
    betweenness_centrality, bfs_distances, centrality, closeness_centrality, degree_centrality,
    eigenvector_centrality, CentralityKind, CentralityVector,
};
pub use edgelist::{format_edge_list, header_agent_count, parse_edge_list, read_edge_list};
pub use generators::{
    generate_random, generate_ring_lattice, generate_scale_free, generate_small_world, RngSeed,
};
pub use network::{density, Network};

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("network must have at least one agent")]
    Empty,
    #[error("edge #{index} ({i}, {j}): index out of range for n = {n}")]
    OutOfRange {
        index: usize,
        i: usize,
        j: usize,
        n: usize,
    },
    #[error("edge #{index}: self-loop on agent {node}")]
    SelfLoop { index: usize, node: usize },
    #[error("edge #{index} ({i}, {j}): weight must be positive and finite, got {weight}")]
    BadWeight {
        index: usize,
        i: usize,
        j: usize,
        weight: f64,
    },
    #[error("edge #{index} ({i}, {j}): duplicate pair")]
    DuplicateEdge { index: usize, i: usize, j: usize },
    #[error("invalid `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("need at least {needed} agents, got {n}")]
    TooSmall { n: usize, needed: usize },
    #[error("network has no edges")]
    NoEdges,
    #[error("power iteration did not converge within {iterations} iterations")]
    NotConverged { iterations: usize },
    #[error("edge list line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
