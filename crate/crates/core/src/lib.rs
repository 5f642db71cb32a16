//! Graph classification through BFS trees, topology-preserving tree images
//! and a two-dimensional recurrent classifier.
//!
//! The pipeline has three stages:
//!
//! 1. [`graph_algos::build_tree`]: root each graph at its center and grow a
//!    breadth-first spanning tree.
//! 2. [`projection::project`]: lay the tree out as a fixed `D_max x |V|_max`
//!    image where each node covers one column per node in its subtree.
//! 3. [`nn`]: a point-wise MLP, the row-by-row TreeRNN scan, max-pooling and a
//!    softmax head, trained with hand-written backpropagation and Adam.
//!
//! [`harness`] wires these into stratified cross-validation with JSON reports.

pub mod cache;
pub mod dataset;
pub mod error;
pub mod graph_algos;
pub mod harness;
pub mod nn;
pub mod projection;
mod seed;

pub use cache::{read_image_cache, write_image_cache, ImageLabel};
pub use dataset::{load_dataset, Connectivity, DatasetProfile, Graph};
pub use error::{Error, Result};
pub use graph_algos::{bfs_tree, build_tree, descendant_counts, select_root, shortest_path_matrix, DistanceMatrix, Tree};
pub use nn::{build_model, FeatureMap, Model, Pooling, Variant};
pub use projection::{project, required_width, verify_topology, GraphImage};
pub use seed::derive_seed;

/// Visit order for tree construction and child order for projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Order {
    /// Ascending node index.
    Canonical,
    /// Seeded random permutation.
    Shuffled(u64),
}

/// Build identifier baked in at compile time (`git describe`, or "unknown").
pub const BUILD_ID: &str = env!("TREERNN_BUILD_ID");
