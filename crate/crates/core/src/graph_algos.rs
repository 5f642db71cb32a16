//! Hop distances, center selection and breadth-first spanning trees.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{Connectivity, Graph};
use crate::error::{Error, Result};
use crate::Order;

pub const UNREACHABLE: u32 = u32::MAX;

/// All-pairs hop counts. Unit edge weights, so one BFS per source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    hops: Vec<u32>,
}

impl DistanceMatrix {
    pub fn from_rows(rows: Vec<Vec<u32>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Shape("distance matrix must be square".into()));
        }
        Ok(DistanceMatrix { n, hops: rows.into_iter().flatten().collect() })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.hops[x * self.n + y]
    }

    pub fn row(&self, x: usize) -> &[u32] {
        &self.hops[x * self.n..(x + 1) * self.n]
    }

    pub fn is_finite(&self) -> bool {
        !self.hops.contains(&UNREACHABLE)
    }

    /// Largest distance from `x`; `UNREACHABLE` if some node cannot be reached.
    pub fn eccentricity(&self, x: usize) -> u32 {
        self.row(x).iter().copied().max().unwrap_or(0)
    }
}

/// `H` with `H[x][y]` the minimum hop count between `x` and `y`.
///
/// In strict mode a disconnected graph is an error naming its components; in
/// lenient mode unreachable pairs hold [`UNREACHABLE`].
pub fn shortest_path_matrix(g: &Graph, mode: Connectivity) -> Result<DistanceMatrix> {
    let n = g.node_count();
    let adj = g.adjacency();
    let mut hops = vec![UNREACHABLE; n * n];
    let mut queue = VecDeque::with_capacity(n);
    for src in 0..n {
        let row = &mut hops[src * n..(src + 1) * n];
        row[src] = 0;
        queue.clear();
        queue.push_back(src);
        while let Some(v) = queue.pop_front() {
            let d = row[v] + 1;
            for &(w, _) in &adj[v] {
                if row[w] == UNREACHABLE {
                    row[w] = d;
                    queue.push_back(w);
                }
            }
        }
    }
    let h = DistanceMatrix { n, hops };
    if mode == Connectivity::Strict && !h.is_finite() {
        return Err(Error::Disconnected { graph: None, components: g.components() });
    }
    Ok(h)
}

/// Graph center: minimum eccentricity, lowest index on ties.
pub fn select_root(h: &DistanceMatrix) -> Result<usize> {
    if h.is_empty() {
        return Err(Error::InvalidArgument("empty distance matrix".into()));
    }
    if !h.is_finite() {
        return Err(Error::InvalidArgument("distance matrix has unreachable pairs".into()));
    }
    Ok((0..h.len()).min_by_key(|&x| (h.eccentricity(x), x)).expect("non-empty"))
}

/// Rooted spanning tree. Layers are 1-based: the root sits in layer 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    root: usize,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    layer: Vec<usize>,
    edge_label: Vec<Option<usize>>,
    descendants: Vec<usize>,
}

impl Tree {
    /// Builds a tree from parent links. Children are ordered by ascending index.
    pub fn from_parents(root: usize, parent: Vec<Option<usize>>, edge_label: Vec<Option<usize>>) -> Result<Self> {
        let n = parent.len();
        if root >= n || edge_label.len() != n {
            return Err(Error::InvalidArgument("tree arrays disagree in length".into()));
        }
        let mut children = vec![Vec::new(); n];
        for (v, p) in parent.iter().enumerate() {
            match *p {
                None if v != root => return Err(Error::InvalidArgument(format!("node {v} has no parent"))),
                Some(_) if v == root => return Err(Error::InvalidArgument("root has a parent".into())),
                Some(p) if p >= n => return Err(Error::InvalidArgument(format!("parent {p} out of range"))),
                Some(p) => children[p].push(v),
                None => {}
            }
        }
        Self::assemble(root, parent, children, edge_label)
    }

    fn assemble(root: usize, parent: Vec<Option<usize>>, children: Vec<Vec<usize>>, edge_label: Vec<Option<usize>>) -> Result<Self> {
        let n = parent.len();
        let mut layer = vec![0usize; n];
        let mut order = Vec::with_capacity(n);
        layer[root] = 1;
        order.push(root);
        let mut i = 0;
        while i < order.len() {
            let v = order[i];
            i += 1;
            for &c in &children[v] {
                if layer[c] != 0 {
                    return Err(Error::InvalidArgument("cycle in parent links".into()));
                }
                layer[c] = layer[v] + 1;
                order.push(c);
            }
        }
        if order.len() != n {
            return Err(Error::InvalidArgument("parent links do not reach every node from the root".into()));
        }
        let mut descendants = vec![0usize; n];
        for &v in order.iter().rev() {
            if let Some(p) = parent[v] {
                descendants[p] += descendants[v] + 1;
            }
        }
        Ok(Tree { root, parent, children, layer, edge_label, descendants })
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// 1-based layer of `v`.
    pub fn layer(&self, v: usize) -> usize {
        self.layer[v]
    }

    /// `D(T)`: number of layers.
    pub fn depth(&self) -> usize {
        self.layer.iter().copied().max().unwrap_or(0)
    }

    /// Label of the graph edge joining `v` to its parent.
    pub fn edge_label(&self, v: usize) -> Option<usize> {
        self.edge_label[v]
    }

    pub fn descendant_count(&self, v: usize) -> usize {
        self.descendants[v]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.len()).filter_map(|v| self.parent[v].map(|p| (p.min(v), p.max(v)))).collect()
    }

    /// Nodes grouped by layer, in breadth-first order following `children`.
    pub fn layers(&self) -> Vec<Vec<usize>> {
        let mut out = vec![vec![self.root]];
        loop {
            let next: Vec<usize> = out.last().unwrap().iter().flat_map(|&v| self.children[v].iter().copied()).collect();
            if next.is_empty() {
                return out;
            }
            out.push(next);
        }
    }

    /// Same tree with every children list permuted by a seeded generator.
    pub fn with_shuffled_children(&self, seed: u64) -> Tree {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = self.clone();
        for v in self.layers().into_iter().flatten() {
            t.children[v].shuffle(&mut rng);
        }
        t
    }

    /// Checks every structural invariant; returns a description of the first violation.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let n = self.len();
        let roots: Vec<usize> = (0..n).filter(|&v| self.parent[v].is_none()).collect();
        if roots != [self.root] {
            return Err(format!("parentless nodes {roots:?}, root {}", self.root));
        }
        if self.edges().len() != n - 1 {
            return Err("edge count is not |V| - 1".into());
        }
        let mut seen = vec![false; n];
        for v in self.layers().into_iter().flatten() {
            if std::mem::replace(&mut seen[v], true) {
                return Err(format!("node {v} reached twice"));
            }
        }
        if seen.iter().any(|s| !s) {
            return Err("some node is unreachable from the root".into());
        }
        for v in 0..n {
            if let Some(p) = self.parent[v] {
                if self.layer[v] != self.layer[p] + 1 {
                    return Err(format!("layer({v}) != layer({p}) + 1"));
                }
                if !self.children[p].contains(&v) {
                    return Err(format!("{v} missing from children of {p}"));
                }
            }
            let expect: usize = self.children[v].iter().map(|&c| self.descendants[c] + 1).sum();
            if self.descendants[v] != expect {
                return Err(format!("descendant count of {v} is {}, expected {expect}", self.descendants[v]));
            }
        }
        Ok(())
    }
}

/// Breadth-first spanning tree from `root`.
///
/// `Canonical` visits neighbors in ascending index. `Shuffled(seed)` permutes
/// each dequeued node's unvisited neighbors, which changes which parent
/// discovers a node reachable along several shortest paths. Each node's
/// children keep discovery order.
pub fn bfs_tree(g: &Graph, root: usize, order: Order) -> Result<Tree> {
    let n = g.node_count();
    if root >= n {
        return Err(Error::InvalidArgument(format!("root {root} outside 0..{n}")));
    }
    let adj = g.adjacency();
    let mut rng = match order {
        Order::Canonical => None,
        Order::Shuffled(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
    };
    let mut parent = vec![None; n];
    let mut edge_label = vec![None; n];
    let mut children = vec![Vec::new(); n];
    let mut visited = vec![false; n];
    visited[root] = true;
    let mut queue = VecDeque::from([root]);
    let mut fresh = Vec::new();
    while let Some(v) = queue.pop_front() {
        fresh.clear();
        fresh.extend(adj[v].iter().filter(|(w, _)| !visited[*w]).copied());
        if let Some(rng) = rng.as_mut() {
            fresh.shuffle(rng);
        }
        for &(w, label) in &fresh {
            visited[w] = true;
            parent[w] = Some(v);
            edge_label[w] = Some(label);
            children[v].push(w);
            queue.push_back(w);
        }
    }
    if visited.contains(&false) {
        return Err(Error::Disconnected { graph: None, components: g.components() });
    }
    Tree::assemble(root, parent, children, edge_label)
}

/// Proper descendant count of every node.
pub fn descendant_counts(t: &Tree) -> Vec<usize> {
    t.descendants.clone()
}

/// Graph to tree: hop distances, center root, then BFS from the center.
pub fn build_tree(g: &Graph, mode: Connectivity, order: Order) -> Result<Tree> {
    let h = shortest_path_matrix(g, mode)?;
    let root = select_root(&h)?;
    bfs_tree(g, root, order)
}
