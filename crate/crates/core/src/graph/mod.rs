//! Stable graphs with ordered edges.
//!
//! A [`StableGraph`] is the dual graph of a boundary stratum of the moduli
//! space of stable curves. Half-edges are first class: a graph with `n` legs
//! and `e` edges has `n + 2e` half-edges, numbered so that leg `m` (marking
//! `m + 1`) is half-edge `m` and side `s` of edge `i` is half-edge
//! `n + 2i + s`. The half-edges at a vertex, in increasing order, give the
//! marking order of that vertex's moduli space.

mod canon;
mod deco;
mod enumerate;
mod ops;

use std::fmt;

use thiserror::Error;

pub use canon::{automorphisms, canonical_form, isomorphisms, Canonical};
pub use deco::Decoration;
pub use enumerate::enumerate_stable_graphs;
pub use ops::{component_without, contract_edge, contract_edges, degenerations, is_bridge, side_genus, variant_filter, Contraction, Degeneration, Variant};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("unstable type (g={g}, n={n})")]
    UnstableType { g: u32, n: usize },
    #[error("vertex {0} is unstable")]
    UnstableVertex(usize),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("vertex index {0} out of range")]
    VertexOutOfRange(usize),
    #[error("edge index {0} out of range")]
    EdgeOutOfRange(usize),
    #[error("malformed graph encoding: {0}")]
    Parse(String),
}

/// A connected stable graph with legs `1..=n` and an ordered edge list.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StableGraph {
    genera: Vec<u32>,
    legs: Vec<usize>,
    edges: Vec<(usize, usize)>,
}

impl StableGraph {
    /// Builds a graph and checks connectivity and stability.
    pub fn new(
        genera: Vec<u32>,
        legs: Vec<usize>,
        edges: Vec<(usize, usize)>,
    ) -> Result<Self, GraphError> {
        let g = Self { genera, legs, edges };
        g.validate()?;
        Ok(g)
    }

    pub(crate) fn from_parts_unchecked(
        genera: Vec<u32>,
        legs: Vec<usize>,
        edges: Vec<(usize, usize)>,
    ) -> Self {
        Self { genera, legs, edges }
    }

    /// The graph with a single vertex of genus `g` carrying all `n` legs.
    pub fn smooth(g: u32, n: usize) -> Result<Self, GraphError> {
        if 2 * g as i64 - 2 + n as i64 <= 0 {
            return Err(GraphError::UnstableType { g, n });
        }
        Ok(Self { genera: vec![g], legs: vec![0; n], edges: vec![] })
    }

    fn validate(&self) -> Result<(), GraphError> {
        let nv = self.genera.len();
        if nv == 0 {
            return Err(GraphError::Disconnected);
        }
        for &v in &self.legs {
            if v >= nv {
                return Err(GraphError::VertexOutOfRange(v));
            }
        }
        for &(a, b) in &self.edges {
            if a >= nv || b >= nv {
                return Err(GraphError::VertexOutOfRange(a.max(b)));
            }
        }
        for v in 0..nv {
            if !self.vertex_is_stable(v) {
                return Err(GraphError::UnstableVertex(v));
            }
        }
        if !self.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(())
    }

    fn vertex_is_stable(&self, v: usize) -> bool {
        2 * self.genera[v] as i64 - 2 + self.valence(v) as i64 > 0
    }

    fn is_connected(&self) -> bool {
        let nv = self.genera.len();
        let mut seen = vec![false; nv];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(a, b) in &self.edges {
                for (x, y) in [(a, b), (b, a)] {
                    if x == v && !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn genera(&self) -> &[u32] {
        &self.genera
    }

    /// `legs()[m]` is the vertex carrying marking `m + 1`.
    pub fn legs(&self) -> &[usize] {
        &self.legs
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.genera.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_legs(&self) -> usize {
        self.legs.len()
    }

    pub fn num_half_edges(&self) -> usize {
        self.legs.len() + 2 * self.edges.len()
    }

    /// First Betti number of the underlying multigraph.
    pub fn betti(&self) -> u32 {
        (self.edges.len() + 1 - self.genera.len()) as u32
    }

    /// Arithmetic genus of the curve the graph describes.
    pub fn genus(&self) -> u32 {
        self.genera.iter().sum::<u32>() + self.betti()
    }

    /// Dimension of the moduli space of the whole graph type, `3g - 3 + n`.
    pub fn ambient_dim(&self) -> usize {
        (3 * self.genus() as usize + self.num_legs()) - 3
    }

    pub fn is_loop(&self, e: usize) -> bool {
        self.edges[e].0 == self.edges[e].1
    }

    pub fn edge_half(&self, e: usize, side: usize) -> usize {
        self.legs.len() + 2 * e + side
    }

    /// Vertex a half-edge is attached to.
    pub fn half_edge_vertex(&self, h: usize) -> usize {
        let n = self.legs.len();
        if h < n {
            self.legs[h]
        } else {
            let e = (h - n) / 2;
            if (h - n) % 2 == 0 {
                self.edges[e].0
            } else {
                self.edges[e].1
            }
        }
    }

    /// The opposite half-edge of an edge half, `None` for legs.
    pub fn partner(&self, h: usize) -> Option<usize> {
        let n = self.legs.len();
        (h >= n).then(|| n + ((h - n) ^ 1))
    }

    /// Half-edges at `v` in increasing order.
    pub fn vertex_half_edges(&self, v: usize) -> Vec<usize> {
        (0..self.num_half_edges()).filter(|&h| self.half_edge_vertex(h) == v).collect()
    }

    pub fn valence(&self, v: usize) -> usize {
        let legs = self.legs.iter().filter(|&&x| x == v).count();
        let edges: usize = self
            .edges
            .iter()
            .map(|&(a, b)| (a == v) as usize + (b == v) as usize)
            .sum();
        legs + edges
    }

    /// `(g(v), n(v))`.
    pub fn vertex_type(&self, v: usize) -> (u32, usize) {
        (self.genera[v], self.valence(v))
    }

    pub fn vertex_dim(&self, v: usize) -> usize {
        let (g, n) = self.vertex_type(v);
        3 * g as usize + n - 3
    }

    /// Dimension of the product of vertex moduli spaces.
    pub fn dim(&self) -> usize {
        (0..self.num_vertices()).map(|v| self.vertex_dim(v)).sum()
    }

    /// Canonical text encoding `G[..];L[..];E[..]`.
    pub fn encode(&self) -> String {
        let g: Vec<String> = self.genera.iter().map(|x| x.to_string()).collect();
        let l: Vec<String> = self.legs.iter().map(|x| x.to_string()).collect();
        let e: Vec<String> = self.edges.iter().map(|(a, b)| format!("({a},{b})")).collect();
        format!("G[{}];L[{}];E[{}]", g.join(","), l.join(","), e.join(","))
    }

    /// Parses the text encoding produced by [`StableGraph::encode`].
    pub fn decode(s: &str) -> Result<Self, GraphError> {
        let err = || GraphError::Parse(s.to_string());
        let parts: Vec<&str> = s.trim().split(';').collect();
        if parts.len() != 3 {
            return Err(err());
        }
        let inner = |p: &str, tag: &str| -> Result<String, GraphError> {
            p.strip_prefix(tag)
                .and_then(|r| r.strip_prefix('['))
                .and_then(|r| r.strip_suffix(']'))
                .map(str::to_string)
                .ok_or_else(err)
        };
        let nums = |body: &str| -> Result<Vec<usize>, GraphError> {
            if body.is_empty() {
                return Ok(vec![]);
            }
            body.split(',').map(|x| x.trim().parse::<usize>().map_err(|_| err())).collect()
        };
        let genera = nums(&inner(parts[0], "G")?)?.into_iter().map(|x| x as u32).collect();
        let legs = nums(&inner(parts[1], "L")?)?;
        let eb = inner(parts[2], "E")?;
        let flat = nums(&eb.replace(['(', ')'], ""))?;
        if flat.len() % 2 != 0 {
            return Err(err());
        }
        let edges = flat.chunks(2).map(|c| (c[0], c[1])).collect();
        Self::new(genera, legs, edges)
    }
}

impl fmt::Debug for StableGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode())
    }
}

impl fmt::Display for StableGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode())
    }
}

/// An isomorphism between stable graphs, possibly permuting markings.
///
/// `edge_map[i] = (j, flip)` sends source edge `i` to target edge `j`, with
/// the two sides exchanged when `flip` is set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GraphIso {
    pub vertex_map: Vec<usize>,
    pub edge_map: Vec<(usize, bool)>,
    pub marking_map: Vec<usize>,
}

impl GraphIso {
    pub fn identity(g: &StableGraph) -> Self {
        Self {
            vertex_map: (0..g.num_vertices()).collect(),
            edge_map: (0..g.num_edges()).map(|e| (e, false)).collect(),
            marking_map: (0..g.num_legs()).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.vertex_map.iter().enumerate().all(|(i, &v)| i == v)
            && self.edge_map.iter().enumerate().all(|(i, &(e, f))| i == e && !f)
            && self.marking_map.iter().enumerate().all(|(i, &m)| i == m)
    }

    /// Image of a half-edge (indices as in the respective graphs; both graphs
    /// have the same number of legs).
    pub fn map_half_edge(&self, h: usize) -> usize {
        let n = self.marking_map.len();
        if h < n {
            self.marking_map[h]
        } else {
            let e = (h - n) / 2;
            let s = (h - n) % 2;
            let (te, flip) = self.edge_map[e];
            n + 2 * te + (s ^ flip as usize)
        }
    }

    /// Sign of the induced permutation of edges.
    pub fn edge_sign(&self) -> i32 {
        perm_sign(&self.edge_map.iter().map(|&(e, _)| e).collect::<Vec<_>>())
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &GraphIso) -> GraphIso {
        GraphIso {
            vertex_map: self.vertex_map.iter().map(|&v| other.vertex_map[v]).collect(),
            edge_map: self
                .edge_map
                .iter()
                .map(|&(e, f)| {
                    let (e2, f2) = other.edge_map[e];
                    (e2, f ^ f2)
                })
                .collect(),
            marking_map: self.marking_map.iter().map(|&m| other.marking_map[m]).collect(),
        }
    }

    pub fn inverse(&self) -> GraphIso {
        let mut vertex_map = vec![0; self.vertex_map.len()];
        for (i, &v) in self.vertex_map.iter().enumerate() {
            vertex_map[v] = i;
        }
        let mut edge_map = vec![(0, false); self.edge_map.len()];
        for (i, &(e, f)) in self.edge_map.iter().enumerate() {
            edge_map[e] = (i, f);
        }
        let mut marking_map = vec![0; self.marking_map.len()];
        for (i, &m) in self.marking_map.iter().enumerate() {
            marking_map[m] = i;
        }
        GraphIso { vertex_map, edge_map, marking_map }
    }

    /// Applies the map to `source`, producing the relabeled graph. When the
    /// map is an isomorphism onto `t`, the result equals `t`.
    pub fn apply(&self, source: &StableGraph) -> StableGraph {
        let nv = source.num_vertices();
        let mut genera = vec![0; nv];
        for v in 0..nv {
            genera[self.vertex_map[v]] = source.genera[v];
        }
        let mut legs = vec![0; source.num_legs()];
        for (m, &v) in source.legs.iter().enumerate() {
            legs[self.marking_map[m]] = self.vertex_map[v];
        }
        let mut edges = vec![(0, 0); source.num_edges()];
        for (e, &(a, b)) in source.edges.iter().enumerate() {
            let (te, flip) = self.edge_map[e];
            let (x, y) = (self.vertex_map[a], self.vertex_map[b]);
            edges[te] = if flip { (y, x) } else { (x, y) };
        }
        StableGraph { genera, legs, edges }
    }
}

/// Sign of a permutation given as an image list.
pub fn perm_sign(p: &[usize]) -> i32 {
    let mut seen = vec![false; p.len()];
    let mut sign = 1;
    for i in 0..p.len() {
        if seen[i] {
            continue;
        }
        let mut len = 0;
        let mut j = i;
        while !seen[j] {
            seen[j] = true;
            j = p[j];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}
