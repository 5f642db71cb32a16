//! TU-style graph classification datasets.
//!
//! A dataset `DS` is a directory holding `DS_A.txt`, `DS_graph_indicator.txt`,
//! `DS_graph_labels.txt`, `DS_node_labels.txt` and optionally
//! `DS_edge_labels.txt`. Node ids in the files are 1-based and global; after
//! loading every [`Graph`] uses 0-based local node indices.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected graph with categorical node and edge labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    node_count: usize,
    edges: Vec<(usize, usize)>,
    node_labels: Vec<usize>,
    edge_labels: Vec<usize>,
    graph_label: usize,
}

/// What [`Graph::with_cleanup`] removed from the raw edge list.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EdgeCleanup {
    pub self_loops: usize,
    pub duplicates: usize,
}

impl Graph {
    pub fn new(
        node_count: usize,
        edges: Vec<(usize, usize)>,
        node_labels: Vec<usize>,
        edge_labels: Option<Vec<usize>>,
        graph_label: usize,
    ) -> Result<Self> {
        Self::with_cleanup(node_count, edges, node_labels, edge_labels, graph_label).map(|(g, _)| g)
    }

    /// Builds a graph, dropping self-loops and merging both directions of an
    /// undirected edge (the first occurrence keeps its label). Repeats of the
    /// same direction are counted as duplicates. Edges are stored as
    /// `(min, max)` in first-appearance order.
    pub fn with_cleanup(
        node_count: usize,
        edges: Vec<(usize, usize)>,
        node_labels: Vec<usize>,
        edge_labels: Option<Vec<usize>>,
        graph_label: usize,
    ) -> Result<(Self, EdgeCleanup)> {
        if node_count == 0 {
            return Err(Error::InvalidArgument("graph has zero nodes".into()));
        }
        if node_labels.len() != node_count {
            return Err(Error::InvalidArgument(format!("{} node labels for {node_count} nodes", node_labels.len())));
        }
        let raw_labels = match edge_labels {
            Some(l) if l.len() != edges.len() => {
                return Err(Error::InvalidArgument(format!("{} edge labels for {} edges", l.len(), edges.len())))
            }
            Some(l) => l,
            None => vec![0; edges.len()],
        };

        let mut cleanup = EdgeCleanup::default();
        let mut seen: HashMap<(usize, usize), (bool, bool)> = HashMap::with_capacity(edges.len());
        let mut kept = Vec::with_capacity(edges.len());
        let mut kept_labels = Vec::with_capacity(edges.len());
        for (&(a, b), &label) in edges.iter().zip(&raw_labels) {
            if a >= node_count || b >= node_count {
                return Err(Error::InvalidArgument(format!("edge ({a}, {b}) references a node outside 0..{node_count}")));
            }
            if a == b {
                cleanup.self_loops += 1;
                continue;
            }
            let key = (a.min(b), a.max(b));
            let forward = a < b;
            match seen.get_mut(&key) {
                Some(dirs) => {
                    // The reverse direction of a known edge is the usual
                    // symmetric listing; only a repeated direction is a duplicate.
                    let dir: &mut bool = if forward { &mut dirs.0 } else { &mut dirs.1 };
                    if *dir {
                        cleanup.duplicates += 1;
                    }
                    *dir = true;
                    continue;
                }
                None => {
                    seen.insert(key, (forward, !forward));
                }
            }
            kept.push(key);
            kept_labels.push(label);
        }

        Ok((Graph { node_count, edges: kept, node_labels, edge_labels: kept_labels, graph_label }, cleanup))
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn node_labels(&self) -> &[usize] {
        &self.node_labels
    }

    pub fn edge_labels(&self) -> &[usize] {
        &self.edge_labels
    }

    /// Contiguous class index in `0..class_count`.
    pub fn graph_label(&self) -> usize {
        self.graph_label
    }

    /// Neighbor lists as `(neighbor, edge label)`, sorted by neighbor index.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for (&(a, b), &l) in self.edges.iter().zip(&self.edge_labels) {
            adj[a].push((b, l));
            adj[b].push((a, l));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Connected components, each sorted ascending, ordered by their lowest node.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let adj = self.adjacency();
        let mut comp = vec![usize::MAX; self.node_count];
        let mut out = Vec::new();
        for start in 0..self.node_count {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![start];
            comp[start] = id;
            let mut i = 0;
            while i < members.len() {
                let v = members[i];
                i += 1;
                for &(w, _) in &adj[v] {
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        members.push(w);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    /// The largest connected component, relabelled to `0..k` in ascending
    /// original order. Ties go to the component holding the lowest node index.
    pub fn largest_component(&self) -> Graph {
        let comps = self.components();
        if comps.len() == 1 {
            return self.clone();
        }
        // components are ordered by lowest node, so the first maximum wins ties
        let best = comps.iter().enumerate().fold(0, |best, (i, c)| if c.len() > comps[best].len() { i } else { best });
        let keep = &comps[best];
        let mut remap = vec![usize::MAX; self.node_count];
        for (new, &old) in keep.iter().enumerate() {
            remap[old] = new;
        }
        let mut edges = Vec::new();
        let mut labels = Vec::new();
        for (&(a, b), &l) in self.edges.iter().zip(&self.edge_labels) {
            if remap[a] != usize::MAX {
                edges.push((remap[a], remap[b]));
                labels.push(l);
            }
        }
        Graph {
            node_count: keep.len(),
            edges,
            node_labels: keep.iter().map(|&v| self.node_labels[v]).collect(),
            edge_labels: labels,
            graph_label: self.graph_label,
        }
    }
}

/// How disconnected graphs are treated downstream of loading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Connectivity {
    /// Reject disconnected graphs.
    #[default]
    Strict,
    /// Keep only the largest connected component.
    Lenient,
}

/// Dataset-wide sizes that fix the image geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetProfile {
    pub name: String,
    pub graph_count: usize,
    pub class_count: usize,
    /// `S_V`: max node label index + 1.
    pub node_label_cardinality: usize,
    /// `S_E`: max edge label index + 1, or 1 when the dataset has no edge labels.
    pub edge_label_cardinality: usize,
    /// `|V|_max`.
    pub max_nodes: usize,
    /// `D_max`, filled in once canonical trees are built.
    pub max_tree_depth: Option<usize>,
    /// Original graph label for each contiguous class index.
    pub class_values: Vec<i64>,
    pub has_edge_labels: bool,
    pub self_loops_dropped: usize,
    pub duplicate_edges_collapsed: usize,
    /// Indices of graphs that are not connected.
    pub disconnected_graphs: Vec<usize>,
}

impl DatasetProfile {
    /// Profile of an in-memory collection. Class values are the class indices.
    pub fn from_graphs(name: &str, graphs: &[Graph]) -> Self {
        let class_count = graphs.iter().map(|g| g.graph_label + 1).max().unwrap_or(0);
        let has_edge_labels = graphs.iter().any(|g| g.edge_labels.iter().any(|&l| l != 0));
        DatasetProfile {
            name: name.to_string(),
            graph_count: graphs.len(),
            class_count,
            node_label_cardinality: graphs.iter().flat_map(|g| g.node_labels.iter()).max().map_or(1, |m| m + 1),
            edge_label_cardinality: graphs.iter().flat_map(|g| g.edge_labels.iter()).max().map_or(1, |m| m + 1),
            max_nodes: graphs.iter().map(|g| g.node_count).max().unwrap_or(0),
            max_tree_depth: None,
            class_values: (0..class_count as i64).collect(),
            has_edge_labels,
            self_loops_dropped: 0,
            duplicate_edges_collapsed: 0,
            disconnected_graphs: graphs.iter().enumerate().filter(|(_, g)| !g.is_connected()).map(|(i, _)| i).collect(),
        }
    }

    /// Per-pixel feature width `S_V + S_E`.
    pub fn channels(&self) -> usize {
        self.node_label_cardinality + self.edge_label_cardinality
    }
}

/// Applies the connectivity policy. Strict mode fails on the first
/// disconnected graph; lenient mode shrinks each one to its largest component
/// and updates `max_nodes`.
pub fn apply_connectivity(graphs: Vec<Graph>, profile: &mut DatasetProfile, mode: Connectivity) -> Result<Vec<Graph>> {
    match mode {
        Connectivity::Strict => {
            for (i, g) in graphs.iter().enumerate() {
                let comps = g.components();
                if comps.len() > 1 {
                    return Err(Error::Disconnected { graph: Some(i), components: comps });
                }
            }
            Ok(graphs)
        }
        Connectivity::Lenient => {
            let graphs: Vec<Graph> = graphs.iter().map(Graph::largest_component).collect();
            profile.max_nodes = graphs.iter().map(Graph::node_count).max().unwrap_or(0);
            Ok(graphs)
        }
    }
}

struct TuFile {
    name: String,
    lines: Vec<(usize, String)>,
}

impl TuFile {
    fn path(dir: &Path, ds: &str, suffix: &str) -> PathBuf {
        dir.join(format!("{ds}_{suffix}.txt"))
    }

    fn read(dir: &Path, ds: &str, suffix: &str) -> Result<Option<Self>> {
        let path = Self::path(dir, ds, suffix);
        let name = format!("{ds}_{suffix}.txt");
        let text = match fs::read(&path) {
            Ok(bytes) => bytes,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(Error::io(path, e)),
        };
        let text = String::from_utf8(text).map_err(|_| Error::format(&name, None, "file is not valid ASCII/UTF-8"))?;
        let mut lines: Vec<(usize, String)> =
            text.split('\n').enumerate().map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l).to_string())).collect();
        while lines.last().is_some_and(|(_, l)| l.trim().is_empty()) {
            lines.pop();
        }
        if let Some((n, _)) = lines.iter().find(|(_, l)| l.trim().is_empty()) {
            return Err(Error::format(&name, Some(*n), "empty line"));
        }
        Ok(Some(TuFile { name, lines }))
    }

    fn require(dir: &Path, ds: &str, suffix: &str) -> Result<Self> {
        Self::read(dir, ds, suffix)?.ok_or_else(|| Error::format(format!("{ds}_{suffix}.txt"), None, "mandatory file is missing"))
    }

    fn ints(&self) -> Result<Vec<i64>> {
        self.lines
            .iter()
            .map(|(n, l)| {
                l.trim().parse::<i64>().map_err(|_| Error::format(&self.name, Some(*n), format!("expected an integer, got {l:?}")))
            })
            .collect()
    }

    fn label_indices(&self) -> Result<Vec<usize>> {
        self.ints()?
            .into_iter()
            .zip(&self.lines)
            .map(|(v, (n, _))| usize::try_from(v).map_err(|_| Error::format(&self.name, Some(*n), format!("negative label {v}"))))
            .collect()
    }

    fn pairs(&self) -> Result<Vec<(usize, i64, i64)>> {
        self.lines
            .iter()
            .map(|(n, l)| {
                let mut fields = l.split(',').map(str::trim);
                let parse = |f: Option<&str>| -> Result<i64> {
                    f.and_then(|s| s.parse().ok()).ok_or_else(|| Error::format(&self.name, Some(*n), format!("expected `a, b`, got {l:?}")))
                };
                let a = parse(fields.next())?;
                let b = parse(fields.next())?;
                if fields.next().is_some() {
                    return Err(Error::format(&self.name, Some(*n), "more than two fields"));
                }
                Ok((*n, a, b))
            })
            .collect()
    }
}

/// Loads dataset `name` from `root`, which is either the dataset directory
/// itself or its parent.
pub fn load_dataset(root: &Path, name: &str) -> Result<(Vec<Graph>, DatasetProfile)> {
    let dir = if TuFile::path(root, name, "A").exists() || !root.join(name).is_dir() { root.to_path_buf() } else { root.join(name) };

    let adjacency = TuFile::require(&dir, name, "A")?;
    let indicator = TuFile::require(&dir, name, "graph_indicator")?;
    let graph_labels = TuFile::require(&dir, name, "graph_labels")?;
    let node_labels = TuFile::require(&dir, name, "node_labels")?;
    let edge_labels = TuFile::read(&dir, name, "edge_labels")?;

    let raw_classes = graph_labels.ints()?;
    let graph_count = raw_classes.len();
    let class_values: Vec<i64> = {
        let mut v = raw_classes.clone();
        v.sort_unstable();
        v.dedup();
        v
    };
    let class_index: BTreeMap<i64, usize> = class_values.iter().enumerate().map(|(i, &v)| (v, i)).collect();

    let owner = indicator.ints()?;
    let labels = node_labels.label_indices()?;
    if labels.len() != owner.len() {
        return Err(Error::format(&node_labels.name, None, format!("{} lines, but graph indicator has {}", labels.len(), owner.len())));
    }

    // global node (0-based) -> (graph, local index)
    let mut local = Vec::with_capacity(owner.len());
    let mut sizes = vec![0usize; graph_count];
    let mut graph_node_labels = vec![Vec::new(); graph_count];
    for ((&gid, &label), (n, _)) in owner.iter().zip(&labels).zip(&indicator.lines) {
        if gid < 1 || gid as usize > graph_count {
            return Err(Error::format(&indicator.name, Some(*n), format!("graph id {gid} outside 1..={graph_count}")));
        }
        let g = gid as usize - 1;
        local.push((g, sizes[g]));
        sizes[g] += 1;
        graph_node_labels[g].push(label);
    }
    if let Some(g) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::format(&indicator.name, None, format!("graph {} has zero nodes", g + 1)));
    }

    let pairs = adjacency.pairs()?;
    let raw_edge_labels = match &edge_labels {
        Some(f) => {
            let l = f.label_indices()?;
            if l.len() != pairs.len() {
                return Err(Error::format(&f.name, None, format!("{} lines, but {} has {}", l.len(), adjacency.name, pairs.len())));
            }
            l
        }
        None => vec![0; pairs.len()],
    };

    let mut graph_edges = vec![Vec::new(); graph_count];
    let mut graph_edge_labels = vec![Vec::new(); graph_count];
    for (&(n, a, b), &label) in pairs.iter().zip(&raw_edge_labels) {
        let node = |x: i64| -> Result<(usize, usize)> {
            if x < 1 || x as usize > local.len() {
                return Err(Error::format(&adjacency.name, Some(n), format!("edge references nonexistent node {x}")));
            }
            Ok(local[x as usize - 1])
        };
        let (ga, la) = node(a)?;
        let (gb, lb) = node(b)?;
        if ga != gb {
            return Err(Error::format(&adjacency.name, Some(n), format!("edge joins graphs {} and {}", ga + 1, gb + 1)));
        }
        graph_edges[ga].push((la, lb));
        graph_edge_labels[ga].push(label);
    }

    let mut graphs = Vec::with_capacity(graph_count);
    let mut self_loops = 0;
    let mut duplicates = 0;
    for (g, ((edges, elabels), nlabels)) in graph_edges.into_iter().zip(graph_edge_labels).zip(graph_node_labels).enumerate() {
        let (graph, cleanup) = Graph::with_cleanup(sizes[g], edges, nlabels, Some(elabels), class_index[&raw_classes[g]])?;
        self_loops += cleanup.self_loops;
        duplicates += cleanup.duplicates;
        graphs.push(graph);
    }

    let mut profile = DatasetProfile::from_graphs(name, &graphs);
    profile.class_count = class_values.len();
    profile.class_values = class_values;
    profile.has_edge_labels = edge_labels.is_some();
    profile.self_loops_dropped = self_loops;
    profile.duplicate_edges_collapsed = duplicates;
    if !profile.has_edge_labels {
        profile.edge_label_cardinality = 1;
    }
    Ok((graphs, profile))
}

/// Writes graphs back in canonical TU form: each undirected edge as two
/// directed lines, graphs in order, labels restored to their original values.
pub fn write_tu_dataset(dir: &Path, graphs: &[Graph], profile: &DatasetProfile) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut a = String::new();
    let mut el = String::new();
    let mut ind = String::new();
    let mut nl = String::new();
    let mut gl = String::new();
    let mut offset = 0usize;
    for (gi, g) in graphs.iter().enumerate() {
        for (&(u, v), &l) in g.edges.iter().zip(&g.edge_labels) {
            let _ = writeln!(a, "{}, {}", u + offset + 1, v + offset + 1);
            let _ = writeln!(a, "{}, {}", v + offset + 1, u + offset + 1);
            let _ = writeln!(el, "{l}\n{l}");
        }
        for &label in &g.node_labels {
            let _ = writeln!(ind, "{}", gi + 1);
            let _ = writeln!(nl, "{label}");
        }
        let value = profile.class_values.get(g.graph_label).copied().unwrap_or(g.graph_label as i64);
        let _ = writeln!(gl, "{value}");
        offset += g.node_count;
    }
    let ds = &profile.name;
    let mut files = vec![("A", a), ("graph_indicator", ind), ("graph_labels", gl), ("node_labels", nl)];
    if profile.has_edge_labels {
        files.push(("edge_labels", el));
    }
    for (suffix, body) in files {
        let path = TuFile::path(dir, ds, suffix);
        fs::write(&path, body).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, ds: &str, suffix: &str, body: &str) {
        fs::write(dir.join(format!("{ds}_{suffix}.txt")), body).unwrap();
    }

    fn two_graph_fixture(dir: &Path) {
        // triangle 1-2-3, path 4-5-6
        write(dir, "T", "A", "1, 2\n2, 1\n2, 3\n3, 2\n3, 1\n1, 3\n4, 5\n5, 4\n5, 6\n6, 5\n");
        write(dir, "T", "graph_indicator", "1\n1\n1\n2\n2\n2\n");
        write(dir, "T", "graph_labels", "1\n-1\n");
        write(dir, "T", "node_labels", "0\n1\n2\n0\n0\n1\n");
    }

    #[test]
    fn single_node_graph() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "S", "A", "");
        write(dir.path(), "S", "graph_indicator", "1\n");
        write(dir.path(), "S", "graph_labels", "0\n");
        write(dir.path(), "S", "node_labels", "0\n");
        let (graphs, profile) = load_dataset(dir.path(), "S").unwrap();
        assert_eq!(graphs.len(), 1);
        assert_eq!(graphs[0].node_count(), 1);
        assert!(graphs[0].edges().is_empty());
        assert_eq!(profile.edge_label_cardinality, 1);
        assert!(!profile.has_edge_labels);
    }

    #[test]
    fn triangle_and_path() {
        let dir = tempfile::tempdir().unwrap();
        two_graph_fixture(dir.path());
        let (graphs, profile) = load_dataset(dir.path(), "T").unwrap();
        assert_eq!(graphs[0].edges().len(), 3);
        assert_eq!(graphs[1].edges().len(), 2);
        assert_eq!(profile.max_nodes, 3);
        assert_eq!(profile.class_values, vec![-1, 1]);
        assert_eq!(graphs[0].graph_label(), 1);
        assert_eq!(graphs[1].graph_label(), 0);
        assert_eq!(profile.duplicate_edges_collapsed, 0);
        assert_eq!(profile.node_label_cardinality, 3);
    }

    #[test]
    fn crlf_and_spaces_accepted() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "C", "A", "1,2\r\n2 ,  1\r\n");
        write(dir.path(), "C", "graph_indicator", "1\r\n1\r\n");
        write(dir.path(), "C", "graph_labels", "3\r\n");
        write(dir.path(), "C", "node_labels", "0\r\n0\r\n");
        let (graphs, _) = load_dataset(dir.path(), "C").unwrap();
        assert_eq!(graphs[0].edges(), &[(0, 1)]);
    }

    #[test]
    fn missing_file_names_it() {
        let dir = tempfile::tempdir().unwrap();
        two_graph_fixture(dir.path());
        fs::remove_file(dir.path().join("T_node_labels.txt")).unwrap();
        let err = load_dataset(dir.path(), "T").unwrap_err().to_string();
        assert!(err.contains("T_node_labels.txt"), "{err}");
    }

    #[test]
    fn bad_edge_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        two_graph_fixture(dir.path());
        write(dir.path(), "T", "A", "1, 2\n2, 9\n");
        match load_dataset(dir.path(), "T").unwrap_err() {
            Error::Format { line, message, .. } => {
                assert_eq!(line, Some(2));
                assert!(message.contains("nonexistent"));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn empty_graph_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "E", "A", "");
        write(dir.path(), "E", "graph_indicator", "1\n");
        write(dir.path(), "E", "graph_labels", "0\n1\n");
        write(dir.path(), "E", "node_labels", "0\n");
        let err = load_dataset(dir.path(), "E").unwrap_err().to_string();
        assert!(err.contains("zero nodes"), "{err}");
    }

    #[test]
    fn self_loops_dropped_and_counted() {
        let (g, c) = Graph::with_cleanup(2, vec![(0, 0), (0, 1), (1, 0)], vec![0, 0], None, 0).unwrap();
        assert_eq!(g.edges(), &[(0, 1)]);
        assert_eq!(c, EdgeCleanup { self_loops: 1, duplicates: 0 });
        let (g, c) =
            Graph::with_cleanup(3, vec![(1, 0), (0, 1), (1, 0), (1, 2), (1, 2)], vec![0; 3], Some(vec![3, 4, 5, 6, 7]), 0).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(g.edge_labels(), &[3, 6]);
        assert_eq!(c, EdgeCleanup { self_loops: 0, duplicates: 2 });
    }

    #[test]
    fn largest_component_tie_prefers_lowest_node() {
        // {0,1} and {2,3}: equal size, keep the one with node 0
        let g = Graph::new(4, vec![(2, 3), (0, 1)], vec![5, 6, 7, 8], None, 0).unwrap();
        let c = g.largest_component();
        assert_eq!(c.node_count(), 2);
        assert_eq!(c.node_labels(), &[5, 6]);

        let g = Graph::new(5, vec![(0, 1), (2, 3), (3, 4)], vec![0; 5], None, 0).unwrap();
        let c = g.largest_component();
        assert_eq!(c.node_count(), 3);
        assert_eq!(c.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn strict_rejects_disconnected() {
        let g = Graph::new(3, vec![(0, 1)], vec![0; 3], None, 0).unwrap();
        let mut p = DatasetProfile::from_graphs("x", std::slice::from_ref(&g));
        assert_eq!(p.disconnected_graphs, vec![0]);
        let err = apply_connectivity(vec![g.clone()], &mut p, Connectivity::Strict).unwrap_err();
        assert!(matches!(err, Error::Disconnected { graph: Some(0), ref components } if components.len() == 2));
        let kept = apply_connectivity(vec![g], &mut p, Connectivity::Lenient).unwrap();
        assert_eq!(kept[0].node_count(), 2);
        assert_eq!(p.max_nodes, 2);
    }

    #[test]
    fn canonical_rewrite_is_idempotent() {
        let dir = tempfile::tempdir().unwrap();
        two_graph_fixture(dir.path());
        let (graphs, profile) = load_dataset(dir.path(), "T").unwrap();
        let first = tempfile::tempdir().unwrap();
        write_tu_dataset(first.path(), &graphs, &profile).unwrap();
        let (again, profile2) = load_dataset(first.path(), "T").unwrap();
        assert_eq!(again, graphs);
        let second = tempfile::tempdir().unwrap();
        write_tu_dataset(second.path(), &again, &profile2).unwrap();
        for suffix in ["A", "graph_indicator", "graph_labels", "node_labels"] {
            let a = fs::read(TuFile::path(first.path(), "T", suffix)).unwrap();
            let b = fs::read(TuFile::path(second.path(), "T", suffix)).unwrap();
            assert_eq!(a, b, "{suffix}");
        }
    }
}
