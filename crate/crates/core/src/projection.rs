//! Tree to image projection.
//!
//! Row `i` of the image holds layer `i + 1` of the tree. A node with `d`
//! proper descendants covers `d + 1` contiguous columns, its feature vector
//! replicated across the span. The row below starts the node's region with
//! one empty separator pixel followed by the spans of its children; an empty
//! pixel propagates a single empty pixel straight down. Every row therefore
//! has the same laid-out width, `|V(T)|`.

use std::io::{self, Write};

use crate::dataset::{DatasetProfile, Graph};
use crate::error::{Error, Result};
use crate::graph_algos::Tree;
use crate::Order;

/// Fixed-size `H x W x C` image with an occupancy mask.
///
/// Channels are `one_hot(node label) ++ one_hot(edge-to-parent label)`; the
/// root's edge block is zero. Empty pixels are all-zero.
#[derive(Debug, Clone)]
pub struct GraphImage {
    height: usize,
    width: usize,
    channels: usize,
    pixels: Vec<f32>,
    occupancy: Vec<bool>,
    source_node: Vec<Option<usize>>,
}

/// Equality over geometry, pixels and occupancy. `source_node` is debugging
/// metadata and is not persisted in caches, so it is ignored.
impl PartialEq for GraphImage {
    fn eq(&self, other: &Self) -> bool {
        self.height == other.height
            && self.width == other.width
            && self.channels == other.channels
            && self.occupancy == other.occupancy
            && self.pixels.iter().map(|p| p.to_bits()).eq(other.pixels.iter().map(|p| p.to_bits()))
    }
}

impl GraphImage {
    pub fn empty(height: usize, width: usize, channels: usize) -> Self {
        GraphImage {
            height,
            width,
            channels,
            pixels: vec![0.0; height * width * channels],
            occupancy: vec![false; height * width],
            source_node: vec![None; height * width],
        }
    }

    /// Rebuilds an image from raw pixels (row-major `[row][col][channel]`).
    /// A pixel is occupied when any of its channels is non-zero.
    pub fn from_pixels(height: usize, width: usize, channels: usize, pixels: Vec<f32>) -> Result<Self> {
        if pixels.len() != height * width * channels {
            return Err(Error::Shape(format!("{} pixels values for {height}x{width}x{channels}", pixels.len())));
        }
        let occupancy = if channels == 0 {
            vec![false; height * width]
        } else {
            pixels.chunks_exact(channels).map(|p| p.iter().any(|&x| x != 0.0)).collect()
        };
        Ok(GraphImage { height, width, channels, pixels, occupancy, source_node: vec![None; height * width] })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixels(&self) -> &[f32] {
        &self.pixels
    }

    pub fn pixel(&self, row: usize, col: usize) -> &[f32] {
        let at = (row * self.width + col) * self.channels;
        &self.pixels[at..at + self.channels]
    }

    pub fn is_occupied(&self, row: usize, col: usize) -> bool {
        self.occupancy[row * self.width + col]
    }

    /// Graph node painted at `(row, col)`, when the image came from [`project`].
    pub fn source_node(&self, row: usize, col: usize) -> Option<usize> {
        self.source_node[row * self.width + col]
    }

    fn paint(&mut self, row: usize, col: usize, node: usize, features: &[f32]) {
        let at = row * self.width + col;
        self.occupancy[at] = true;
        self.source_node[at] = Some(node);
        self.pixels[at * self.channels..(at + 1) * self.channels].copy_from_slice(features);
    }

    /// Swaps two pixels of one row, including their metadata.
    pub fn swap_pixels(&mut self, row: usize, a: usize, b: usize) {
        let (ia, ib) = (row * self.width + a, row * self.width + b);
        self.occupancy.swap(ia, ib);
        self.source_node.swap(ia, ib);
        for c in 0..self.channels {
            self.pixels.swap(ia * self.channels + c, ib * self.channels + c);
        }
    }

    /// Binary P6 dump, white where a pixel is occupied.
    pub fn write_ppm<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "P6\n{} {}\n255\n", self.width, self.height)?;
        let body: Vec<u8> = self.occupancy.iter().flat_map(|&o| [if o { 255 } else { 0 }; 3]).collect();
        out.write_all(&body)
    }
}

/// Columns needed for `t`, from the per-layer recurrence
/// `n_i = n_{i+1} + |V|_{L_i}` with `n_D = |V|_{L_D}`. The layout achieves the
/// `N_col >= |V(T)|` bound with equality.
pub fn required_width(t: &Tree) -> usize {
    t.layers().iter().rev().fold(0, |below, layer| below + layer.len())
}

#[derive(Clone, Copy)]
enum Slot {
    Empty,
    Node(usize),
}

/// Projects `t` (built from `g`) into a `D_max x |V|_max` image.
/// `Shuffled(seed)` permutes every children list before layout.
pub fn project(t: &Tree, g: &Graph, profile: &DatasetProfile, leaf_order: Order) -> Result<GraphImage> {
    let height = profile.max_tree_depth.ok_or_else(|| Error::Sizing("profile has no maximum tree depth yet".into()))?;
    let width = profile.max_nodes;
    if t.len() != g.node_count() {
        return Err(Error::InvalidArgument(format!("tree has {} nodes, graph has {}", t.len(), g.node_count())));
    }
    if t.len() > width || t.depth() > height {
        return Err(Error::Sizing(format!("tree with {} nodes and depth {} exceeds {width} columns x {height} rows", t.len(), t.depth())));
    }
    let sv = profile.node_label_cardinality;
    let se = profile.edge_label_cardinality;
    let mut image = GraphImage::empty(height, width, sv + se);

    let shuffled;
    let t = match leaf_order {
        Order::Canonical => t,
        Order::Shuffled(seed) => {
            shuffled = t.with_shuffled_children(seed);
            &shuffled
        }
    };

    let mut features = vec![0.0f32; sv + se];
    let mut current = vec![Slot::Node(t.root())];
    for row in 0..t.depth() {
        let mut col = 0;
        let mut next = Vec::with_capacity(current.len() + t.len());
        for slot in current {
            match slot {
                Slot::Node(v) => {
                    features.fill(0.0);
                    let label = g.node_labels()[v];
                    if label >= sv {
                        return Err(Error::Sizing(format!("node label {label} >= S_V = {sv}")));
                    }
                    features[label] = 1.0;
                    if let Some(e) = t.edge_label(v) {
                        if e >= se {
                            return Err(Error::Sizing(format!("edge label {e} >= S_E = {se}")));
                        }
                        features[sv + e] = 1.0;
                    }
                    let span = t.descendant_count(v) + 1;
                    for c in col..col + span {
                        image.paint(row, c, v, &features);
                    }
                    col += span;
                    next.push(Slot::Empty);
                    next.extend(t.children(v).iter().map(|&c| Slot::Node(c)));
                }
                Slot::Empty => {
                    col += 1;
                    next.push(Slot::Empty);
                }
            }
        }
        current = next;
    }
    Ok(image)
}

/// Node spans `(row, start, end)` recovered from `source_node`, or `None`
/// when some node is split into several runs.
fn spans(img: &GraphImage, n: usize) -> Option<Vec<Option<(usize, usize, usize)>>> {
    let mut out = vec![None; n];
    for row in 0..img.height {
        let mut col = 0;
        while col < img.width {
            let Some(v) = img.source_node(row, col) else {
                col += 1;
                continue;
            };
            let start = col;
            while col < img.width && img.source_node(row, col) == Some(v) {
                col += 1;
            }
            if v >= n || out[v].is_some() {
                return None;
            }
            out[v] = Some((row, start, col));
        }
    }
    Some(out)
}

/// Checks the two topology properties of a projected image:
/// siblings form one contiguous run of columns in their row, and each child
/// span lies inside its parent's span after the parent's separator column.
/// Also requires every node to appear once, in its own layer's row, with a
/// span of `descendant_count + 1` columns.
pub fn verify_topology(img: &GraphImage, t: &Tree) -> bool {
    for (i, &occupied) in img.occupancy.iter().enumerate() {
        let empty_pixel = img.pixels[i * img.channels..(i + 1) * img.channels].iter().all(|&x| x == 0.0);
        if occupied != img.source_node[i].is_some() || occupied == empty_pixel {
            return false;
        }
    }
    let Some(spans) = spans(img, t.len()) else {
        return false;
    };
    let mut placed = Vec::with_capacity(t.len());
    for (v, span) in spans.iter().enumerate() {
        let Some((row, start, end)) = *span else {
            return false;
        };
        if row + 1 != t.layer(v) || end - start != t.descendant_count(v) + 1 {
            return false;
        }
        placed.push((row, start, end));
    }
    for v in 0..t.len() {
        let (row, start, end) = placed[v];
        if row + 1 < img.height && img.source_node(row + 1, start).is_some() {
            return false;
        }
        let mut kids: Vec<(usize, usize)> = t.children(v).iter().map(|&c| (placed[c].1, placed[c].2)).collect();
        kids.sort_unstable();
        let mut cursor = start + 1;
        for (s, e) in kids {
            if s != cursor || e > end {
                return false;
            }
            cursor = e;
        }
    }
    true
}
