//! Helpers shared by the integration test targets.
#![allow(dead_code)]

pub mod oracle;
pub mod props;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use treernn_core::nn::{build_model, FeatureMap, Model, Variant};
use treernn_core::Graph;

pub const NODE_LABELS: usize = 7;
pub const EDGE_LABELS: usize = 4;

/// Random image-like input: each pixel is empty with probability 0.3,
/// otherwise a node one-hot plus an edge one-hot.
pub fn random_feature_map(h: usize, w: usize, seed: u64) -> FeatureMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = NODE_LABELS + EDGE_LABELS;
    let mut data = vec![0.0; h * w * c];
    for px in data.chunks_exact_mut(c) {
        if rng.gen_bool(0.3) {
            continue;
        }
        px[rng.gen_range(0..NODE_LABELS)] = 1.0;
        px[NODE_LABELS + rng.gen_range(0..EDGE_LABELS)] = 1.0;
    }
    FeatureMap::new(h, w, c, data).unwrap()
}

/// Seeded model with non-zero biases.
pub fn random_model(variant: Variant, channels: usize, classes: usize, seed: u64) -> Model {
    let mut m = build_model(variant, channels, classes, seed).unwrap();
    m.randomize_biases(seed ^ 0x5eed, 0.1);
    m
}

/// Random connected graph on `n` nodes: a random spanning tree plus extra edges.
pub fn random_connected_graph(n: usize, extra: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.gen_range(0..v), v));
    }
    for _ in 0..extra {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        edges.push((a, b));
    }
    // random relabelling so the spanning tree is not index-ordered
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let edges: Vec<_> = edges.into_iter().map(|(a, b)| (perm[a], perm[b])).collect();
    let m = edges.len();
    let labels = (0..n).map(|_| rng.gen_range(0..NODE_LABELS)).collect();
    let edge_labels = (0..m).map(|_| rng.gen_range(0..EDGE_LABELS)).collect();
    Graph::new(n, edges, labels, Some(edge_labels), 0).unwrap()
}

pub fn star(n: usize, label: usize) -> Graph {
    Graph::new(n, (1..n).map(|v| (0, v)).collect(), vec![0; n], None, label).unwrap()
}

pub fn path(n: usize, label: usize) -> Graph {
    Graph::new(n, (1..n).map(|v| (v - 1, v)).collect(), vec![0; n], None, label).unwrap()
}

/// 20 stars (class 0) and 20 paths (class 1) on 4 to 8 nodes.
pub fn stars_and_paths() -> Vec<Graph> {
    let mut graphs = Vec::new();
    for i in 0..20 {
        graphs.push(star(4 + i % 5, 0));
        graphs.push(path(4 + i % 5, 1));
    }
    graphs
}

pub fn mutag_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}
