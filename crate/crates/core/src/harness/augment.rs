use crate::cache::ImageLabel;
use crate::dataset::{Connectivity, DatasetProfile, Graph};
use crate::error::{Error, Result};
use crate::graph_algos::{bfs_tree, build_tree, select_root, shortest_path_matrix, Tree};
use crate::projection::{project, GraphImage};
use crate::seed::derive_seed;
use crate::Order;

const AUG_STREAM: u64 = 0x4175_6720;

/// Canonical trees of every graph, with `D_max` written into the profile.
pub fn profile_depth(graphs: &[Graph], profile: &mut DatasetProfile) -> Result<Vec<Tree>> {
    let trees = graphs
        .iter()
        .enumerate()
        .map(|(i, g)| {
            build_tree(g, Connectivity::Strict, Order::Canonical).map_err(|e| match e {
                Error::Disconnected { components, .. } => Error::Disconnected { graph: Some(i), components },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    profile.max_tree_depth = Some(trees.iter().map(Tree::depth).max().unwrap_or(0));
    Ok(trees)
}

/// Seeds of augmented copy `copy` (1-based) of graph `graph`: one for the
/// cycle-cut BFS order and one for the leaf shuffle. `epoch` separates the
/// online draws; the fixed pool uses `None`.
fn copy_seeds(seed: u64, graph: usize, copy: usize, epoch: Option<usize>) -> (u64, u64) {
    let tag = epoch.map_or(0, |e| e as u64 + 1);
    let base = derive_seed(seed, &[AUG_STREAM, graph as u64, copy as u64, tag]);
    (derive_seed(base, &[0]), derive_seed(base, &[1]))
}

/// One augmented copy: shuffled BFS from the fixed center root, then a
/// shuffled leaf order. Returns the cycle-cut tree with its image.
pub fn augmented_image(
    g: &Graph,
    profile: &DatasetProfile,
    seed: u64,
    graph: usize,
    copy: usize,
    epoch: Option<usize>,
) -> Result<(Tree, GraphImage)> {
    let (tree_seed, leaf_seed) = copy_seeds(seed, graph, copy, epoch);
    let root = select_root(&shortest_path_matrix(g, Connectivity::Strict)?)?;
    let tree = bfs_tree(g, root, Order::Shuffled(tree_seed))?;
    let image = project(&tree, g, profile, Order::Shuffled(leaf_seed))?;
    Ok((tree, image))
}

/// Per graph: the canonical image (copy 0) followed by `k - 1` augmented
/// copies. Copy `j` of a graph depends only on `(seed, graph, j)`, so a
/// larger `k` extends a smaller one. `profile.max_tree_depth` must be set.
pub fn augment_dataset(graphs: &[Graph], profile: &DatasetProfile, k: usize, seed: u64) -> Result<(Vec<GraphImage>, Vec<ImageLabel>)> {
    if k < 1 {
        return Err(Error::InvalidArgument("augmentation multiplier must be at least 1".into()));
    }
    let mut images = Vec::with_capacity(graphs.len() * k);
    let mut labels = Vec::with_capacity(graphs.len() * k);
    for (i, g) in graphs.iter().enumerate() {
        let tree = build_tree(g, Connectivity::Strict, Order::Canonical)?;
        images.push(project(&tree, g, profile, Order::Canonical)?);
        for copy in 1..k {
            images.push(augmented_image(g, profile, seed, i, copy, None)?.1);
        }
        for copy in 0..k {
            labels.push(ImageLabel { class: g.graph_label() as u32, graph_id: i as u32, variant: copy as u32 });
        }
    }
    Ok((images, labels))
}
