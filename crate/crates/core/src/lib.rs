//! Distance encodings for structural representation learning on graphs.
//!
//! The crate covers the full stack needed to study distance-encoding (DE)
//! augmented graph neural networks:
//!
//! * [`graph`]: immutable sparse graphs, target node sets, permutations and a
//!   brute-force isomorphism oracle for tiny graphs.
//! * [`encoding`]: shortest-path, landing-probability and PageRank encodings.
//! * [`wl`]: 1-WL and 2-FWL color refinement oracles.
//! * [`generate`]: random regular graphs and distance-regular test graphs.
//! * [`nn`]: dense message-passing models with hand-written gradients.
//! * [`pipeline`]: ego-network minibatches, datasets, training and the
//!   expressiveness experiments.

pub mod catalog;
pub mod encoding;
pub mod error;
pub mod generate;
pub mod graph;
pub mod io;
pub mod nn;
pub mod numeric;
pub mod pipeline;
pub mod wl;

pub use error::{Error, Result};
pub use graph::{apply_permutation, brute_force_isomorphic, Graph, Permutation, TargetTuple};
