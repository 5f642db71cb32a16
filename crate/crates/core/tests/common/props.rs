//! Structural checks shared by the property tests and the acceptance run.

use treernn_core::graph_algos::DistanceMatrix;
use treernn_core::{
    build_tree, project, shortest_path_matrix, verify_topology, Connectivity, DatasetProfile, Graph, GraphImage, Order, Tree,
};

/// Hop distances by enumerating every simple path from every source.
#[allow(clippy::needless_range_loop)]
pub fn brute_force_distances(g: &Graph) -> Vec<Vec<Option<usize>>> {
    let n = g.node_count();
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in g.edges() {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut out = vec![vec![None; n]; n];
    for s in 0..n {
        let mut on_path = vec![false; n];
        walk(&adj, s, 0, &mut on_path, &mut out[s]);
    }
    out
}

fn walk(adj: &[Vec<usize>], v: usize, len: usize, on_path: &mut [bool], best: &mut [Option<usize>]) {
    if best[v].is_none_or(|b| len < b) {
        best[v] = Some(len);
    }
    on_path[v] = true;
    for &u in &adj[v] {
        if !on_path[u] {
            walk(adj, u, len + 1, on_path, best);
        }
    }
    on_path[v] = false;
}

pub fn check_distances(g: &Graph) -> Result<(), String> {
    let h = shortest_path_matrix(g, Connectivity::Strict).map_err(|e| e.to_string())?;
    let oracle = brute_force_distances(g);
    for (x, row) in oracle.iter().enumerate() {
        for (y, d) in row.iter().enumerate() {
            let d = d.ok_or("oracle found an unreachable pair in a connected graph")?;
            if h.get(x, y) as usize != d {
                return Err(format!("H[{x}][{y}] = {}, brute force {d}", h.get(x, y)));
            }
        }
    }
    Ok(())
}

fn image_of(t: &Tree, g: &Graph, width: usize, order: Order) -> Result<(GraphImage, DatasetProfile), String> {
    let mut profile = DatasetProfile::from_graphs("props", std::slice::from_ref(g));
    profile.max_nodes = width;
    // one spare row so the padding rule is exercised too
    profile.max_tree_depth = Some(t.depth() + 1);
    let img = project(t, g, &profile, order).map_err(|e| e.to_string())?;
    Ok((img, profile))
}

/// Every tree and image invariant for one graph and one seed. `width` must
/// be at least the node count.
pub fn check_pipeline(g: &Graph, seed: u64, width: usize) -> Result<(), String> {
    let n = g.node_count();
    let h = shortest_path_matrix(g, Connectivity::Strict).map_err(|e| e.to_string())?;
    for order in [Order::Canonical, Order::Shuffled(seed)] {
        let t = build_tree(g, Connectivity::Strict, order).map_err(|e| e.to_string())?;
        t.check_invariants().map_err(|e| format!("{order:?}: {e}"))?;
        check_depths(&t, &h).map_err(|e| format!("{order:?}: {e}"))?;
        if t.descendant_count(t.root()) != n - 1 {
            return Err("root descendant count is not n - 1".into());
        }
        let (canonical, _) = image_of(&t, g, width, Order::Canonical)?;
        let (shuffled, _) = image_of(&t, g, width, Order::Shuffled(seed.wrapping_add(1)))?;
        for (name, img) in [("canonical", &canonical), ("shuffled", &shuffled)] {
            if !verify_topology(img, &t) {
                return Err(format!("{order:?} tree, {name} image fails verify_topology"));
            }
            check_layout(img, &t).map_err(|e| format!("{order:?} tree, {name} image: {e}"))?;
        }
        check_row_permutation(&canonical, &shuffled).map_err(|e| format!("{order:?} tree: {e}"))?;
    }
    Ok(())
}

fn check_depths(t: &Tree, h: &DistanceMatrix) -> Result<(), String> {
    for v in 0..t.len() {
        if t.layer(v) != h.get(t.root(), v) as usize + 1 {
            return Err(format!("layer({v}) = {}, H[root][{v}] = {}", t.layer(v), h.get(t.root(), v)));
        }
    }
    Ok(())
}

/// Width equality, span sizes, layer counts and the separator rule: in row
/// r + 1 a column is empty exactly when it is empty in row r or starts a
/// span there.
fn check_layout(img: &GraphImage, t: &Tree) -> Result<(), String> {
    let n = t.len();
    let max_col = (0..img.height())
        .flat_map(|r| (0..img.width()).filter(move |&c| img.is_occupied(r, c)))
        .max()
        .ok_or("image has no occupied pixel")?;
    if max_col + 1 != n {
        return Err(format!("max occupied column {max_col}, |V| = {n}"));
    }
    if (0..n).any(|c| img.source_node(0, c) != Some(t.root())) {
        return Err("root does not fill the first row".into());
    }
    let layers = t.layers();
    let mut self_columns = 0;
    for r in 0..img.height() {
        let mut spans: Vec<(usize, usize, usize)> = Vec::new();
        for c in 0..img.width() {
            let Some(v) = img.source_node(r, c) else { continue };
            match spans.last_mut() {
                Some((u, _, len)) if *u == v => *len += 1,
                _ => spans.push((v, c, 1)),
            }
        }
        let expect = layers.get(r).map_or(0, Vec::len);
        if spans.len() != expect {
            return Err(format!("row {r} has {} spans, layer size {expect}", spans.len()));
        }
        for &(v, _, len) in &spans {
            if t.layer(v) != r + 1 || len != t.descendant_count(v) + 1 {
                return Err(format!("span of node {v} in row {r} has width {len}"));
            }
        }
        self_columns += spans.len();
        if r + 1 < img.height() {
            for c in 0..img.width() {
                let starts = spans.iter().any(|&(_, s, _)| s == c);
                let below_empty = !img.is_occupied(r + 1, c);
                let expect_empty = !img.is_occupied(r, c) || starts;
                if below_empty != expect_empty {
                    return Err(format!("row {} column {c} breaks the separator rule", r + 1));
                }
            }
        }
    }
    if self_columns != n {
        return Err(format!("{self_columns} spans in total, |V| = {n}"));
    }
    Ok(())
}

/// Both images hold the same pixels row by row, up to a column permutation.
fn check_row_permutation(a: &GraphImage, b: &GraphImage) -> Result<(), String> {
    for r in 0..a.height() {
        let row = |img: &GraphImage| {
            let mut px: Vec<(Vec<u32>, Option<usize>)> =
                (0..img.width()).map(|c| (img.pixel(r, c).iter().map(|x| x.to_bits()).collect(), img.source_node(r, c))).collect();
            px.sort();
            px
        };
        if row(a) != row(b) {
            return Err(format!("row {r} differs beyond a column permutation"));
        }
    }
    Ok(())
}
