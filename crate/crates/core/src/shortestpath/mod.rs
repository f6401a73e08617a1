//! Bi-party multi-objective single-source shortest paths.

mod archive;
mod boxes;
mod consensus;
mod graph;
mod metrics;
mod mutation;
mod optimizers;

use thiserror::Error;

pub use archive::{BoxArchive, SpEntry, View};
pub use boxes::{
    box_index, box_of, epsilon_dominates, epsilon_dominates_strictly, floor_log, path_dominance, ApproxParams, BoxIndex,
};
pub use consensus::{
    consensus_at_level, responder_utility, ultimatum_consensus, ConsensusOutcome, EndpointConsensus, MAX_UTILITY,
};
pub use graph::{Edge, GraphBuilder, Path, WeightedDigraph, SOURCE};
pub use metrics::{epsilon_against, CommonReference, MetricSample};
pub use mutation::{add_candidates, delete_at, mutate_path, DEFAULT_WALK_FACTOR};
pub use optimizers::{
    population_bound, run_demo_sp, run_empmo_cons_sp, run_empmo_simple_sp, run_sp, SpAlgorithm, SpRunConfig, SpRunTrace,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpError {
    #[error("a graph needs at least 2 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("invalid party structure {0:?}")]
    PartyShape(Vec<usize>),
    #[error("vertex {vertex} outside 1..={n}")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0},{1})")]
    DuplicateEdge(usize, usize),
    #[error("edge ({from},{to}) has weight shape {got:?}, expected {expected:?}")]
    WeightShape {
        from: usize,
        to: usize,
        expected: Vec<usize>,
        got: Vec<usize>,
    },
    #[error("edge ({0},{1}) has a weight below 1")]
    NonPositiveWeight(usize, usize),
    #[error("vertex {0} is unreachable from the source")]
    Unreachable(usize),
    #[error("({0},{1}) is not an edge")]
    NotAnEdge(usize, usize),
    #[error("path {0:?} does not start at the source")]
    PathNotFromSource(Vec<usize>),
    #[error("{0}")]
    InvalidParams(String),
    #[error("box indices need objective values of at least 1")]
    BoxDomain,
    #[error("unknown algorithm {0:?}")]
    UnknownAlgorithm(String),
    #[error("path optimizers need exactly 2 parties, graph has {0}")]
    PartyCount(usize),
}
