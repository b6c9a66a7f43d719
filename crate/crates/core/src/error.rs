use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty graph undefined")]
    EmptyGraph,

    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("invalid target tuple: {0}")]
    InvalidTuple(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("brute force cap exceeded: {n} nodes (max {cap})")]
    BruteForceCap { n: usize, cap: usize },

    #[error("walk undefined on isolated node {0}")]
    IsolatedSource(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("personalized pagerank did not converge within {0} iterations")]
    NotConverged(usize),

    #[error("walk count overflow at length {0}")]
    Overflow(usize),

    #[error("2-FWL cap exceeded: {n} nodes (max {cap})")]
    FwlCap { n: usize, cap: usize },

    #[error("color hash collision between distinct signatures in round {0}")]
    HashCollision(usize),

    #[error("n*r must be even (n={n}, r={r})")]
    OddStubCount { n: usize, r: usize },

    #[error("no simple {r}-regular graph on {n} nodes after {tries} tries")]
    SamplingExhausted { n: usize, r: usize, tries: usize },

    #[error("graph is disconnected")]
    Disconnected,

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite value in forward pass at layer {0}")]
    NonFinite(usize),

    #[error("ring depth {requested} exceeds precomputed depth {available}")]
    RingDepth { requested: usize, available: usize },

    #[error("graph too dense to sample {wanted} negatives (found {found})")]
    NegativeSampling { wanted: usize, found: usize },

    #[error("AUC undefined: split contains a single class")]
    AucUndefined,

    #[error("empty dataset split: {0}")]
    EmptySplit(String),

    #[error("training diverged (loss is NaN) at epoch {epoch}; config: {config}")]
    Diverged { epoch: usize, config: String },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("bad checkpoint: {0}")]
    Checkpoint(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}
