//! Inputs shared by the benchmarks.

use std::path::Path;

use treernn_core::harness::load_graphs;
use treernn_core::nn::FeatureMap;
use treernn_core::{build_tree, project, Connectivity, DatasetProfile, Graph, Order};

/// The bundled MUTAG graphs with `D_max` filled in.
pub fn mutag() -> (Vec<Graph>, DatasetProfile) {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
    load_graphs(&dir, "MUTAG", Connectivity::Strict).expect("MUTAG is bundled under data/")
}

/// Canonical MUTAG feature maps with their class labels.
pub fn mutag_inputs() -> (Vec<FeatureMap>, Vec<usize>, DatasetProfile) {
    let (graphs, profile) = mutag();
    let xs = graphs
        .iter()
        .map(|g| {
            let t = build_tree(g, Connectivity::Strict, Order::Canonical).unwrap();
            FeatureMap::from_image(&project(&t, g, &profile, Order::Canonical).unwrap()).unwrap()
        })
        .collect();
    let ys = graphs.iter().map(|g| g.graph_label()).collect();
    (xs, ys, profile)
}
