use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{GraphError, StableGraph};

/// Result of contracting one edge.
#[derive(Clone, Debug)]
pub struct Contraction {
    pub graph: StableGraph,
    /// `edge_origin[j]` is the index in the original graph of edge `j`
    /// (the inherited ordering β).
    pub edge_origin: Vec<usize>,
    /// Old vertex → new vertex.
    pub vertex_map: Vec<usize>,
    /// The vertex the contracted edge collapsed into.
    pub merged: usize,
    /// Old half-edge → new half-edge; `None` for the two contracted halves.
    pub half_edge_map: Vec<Option<usize>>,
}

/// Contracts edge `i` (0-based). A loop raises its vertex genus by one; a
/// non-loop edge merges its endpoints into the lower-indexed one.
pub fn contract_edge(g: &StableGraph, i: usize) -> Result<Contraction, GraphError> {
    if i >= g.num_edges() {
        return Err(GraphError::EdgeOutOfRange(i));
    }
    let (a, b) = g.edges[i];
    let nv = g.num_vertices();
    let (keep, drop) = (a.min(b), a.max(b));
    let vertex_map: Vec<usize> = (0..nv)
        .map(|v| {
            if a == b {
                v
            } else if v == drop {
                keep
            } else if v > drop {
                v - 1
            } else {
                v
            }
        })
        .collect();
    let mut genera: Vec<u32> = Vec::with_capacity(nv);
    for v in 0..nv {
        if a != b && v == drop {
            continue;
        }
        genera.push(g.genera[v]);
    }
    if a == b {
        genera[a] += 1;
    } else {
        genera[keep] = g.genera[a] + g.genera[b];
    }
    let legs = g.legs.iter().map(|&v| vertex_map[v]).collect();
    let edge_origin: Vec<usize> = (0..g.num_edges()).filter(|&e| e != i).collect();
    let edges = edge_origin
        .iter()
        .map(|&e| (vertex_map[g.edges[e].0], vertex_map[g.edges[e].1]))
        .collect();
    let graph = StableGraph::from_parts_unchecked(genera, legs, edges);
    let n = g.num_legs();
    let half_edge_map = (0..g.num_half_edges())
        .map(|h| {
            if h < n {
                return Some(h);
            }
            let e = (h - n) / 2;
            let s = (h - n) % 2;
            match e.cmp(&i) {
                std::cmp::Ordering::Less => Some(h),
                std::cmp::Ordering::Equal => None,
                std::cmp::Ordering::Greater => Some(n + 2 * (e - 1) + s),
            }
        })
        .collect();
    let merged = vertex_map[a];
    Ok(Contraction { graph, edge_origin, vertex_map, merged, half_edge_map })
}

/// Contracts a set of edges at once. The surviving edges keep their relative
/// order; maps are composed as in [`Contraction`].
pub fn contract_edges(g: &StableGraph, edges: &[usize]) -> Result<Contraction, GraphError> {
    let mut set: Vec<usize> = edges.to_vec();
    set.sort_unstable();
    set.dedup();
    let mut cur = Contraction {
        graph: g.clone(),
        edge_origin: (0..g.num_edges()).collect(),
        vertex_map: (0..g.num_vertices()).collect(),
        merged: 0,
        half_edge_map: (0..g.num_half_edges()).map(Some).collect(),
    };
    // highest first so lower indices stay valid
    for &e in set.iter().rev() {
        let c = contract_edge(&cur.graph, e)?;
        cur = Contraction {
            edge_origin: c.edge_origin.iter().map(|&j| cur.edge_origin[j]).collect(),
            vertex_map: cur.vertex_map.iter().map(|&v| c.vertex_map[v]).collect(),
            merged: c.merged,
            half_edge_map: cur.half_edge_map.iter().map(|h| h.and_then(|h| c.half_edge_map[h])).collect(),
            graph: c.graph,
        };
    }
    Ok(cur)
}

/// A one-edge degeneration of a vertex. The new edge is the last edge of
/// `graph`; all old half-edges keep their indices.
#[derive(Clone, Debug)]
pub struct Degeneration {
    pub graph: StableGraph,
    pub vertex: usize,
    /// Half-edges of the original vertex moved to the new vertex (splits
    /// only; the new vertex is the last one). `None` for a loop.
    pub moved: Option<Vec<usize>>,
}

/// All stable one-edge degenerations at vertex `v`: splittings of `v` into
/// two vertices joined by a new edge, and adding a loop while lowering the
/// genus by one. Each unordered splitting appears once.
pub fn degenerations(g: &StableGraph, v: usize) -> Vec<Degeneration> {
    let hs = g.vertex_half_edges(v);
    let gv = g.genera[v];
    let nv = g.num_vertices();
    let mut out = Vec::new();
    let k = hs.len();
    // side one contains hs[0] when there are half-edges; otherwise g1 <= g2
    for mask in 0..(1usize << k) {
        if k > 0 && mask & 1 == 0 {
            continue;
        }
        let side1: Vec<usize> = (0..k).filter(|&i| mask >> i & 1 == 1).map(|i| hs[i]).collect();
        let side2: Vec<usize> = (0..k).filter(|&i| mask >> i & 1 == 0).map(|i| hs[i]).collect();
        for g1 in 0..=gv {
            let g2 = gv - g1;
            if k == 0 && g1 > g2 {
                continue;
            }
            let st = |gg: u32, nn: usize| 2 * gg as i64 - 2 + nn as i64 + 1 > 0;
            if !st(g1, side1.len()) || !st(g2, side2.len()) {
                continue;
            }
            let mut genera = g.genera.clone();
            genera[v] = g1;
            genera.push(g2);
            let n = g.num_legs();
            let mut legs = g.legs.clone();
            let mut edges = g.edges.clone();
            for &h in &side2 {
                if h < n {
                    legs[h] = nv;
                } else {
                    let e = (h - n) / 2;
                    if (h - n) % 2 == 0 {
                        edges[e].0 = nv;
                    } else {
                        edges[e].1 = nv;
                    }
                }
            }
            edges.push((v, nv));
            out.push(Degeneration {
                graph: StableGraph::from_parts_unchecked(genera, legs, edges),
                vertex: v,
                moved: Some(side2.clone()),
            });
        }
    }
    if gv > 0 {
        let mut genera = g.genera.clone();
        genera[v] -= 1;
        let mut edges = g.edges.clone();
        edges.push((v, v));
        out.push(Degeneration {
            graph: StableGraph::from_parts_unchecked(genera, g.legs.clone(), edges),
            vertex: v,
            moved: None,
        });
    }
    out
}

/// Which open subspace of the moduli of stable curves is computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Smooth curves.
    Open,
    /// Curves of compact type.
    Ct,
    /// Curves with rational tails.
    Rt,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Open, Variant::Ct, Variant::Rt];
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Open => "open",
            Variant::Ct => "ct",
            Variant::Rt => "rt",
        })
    }
}

impl FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "open" => Ok(Variant::Open),
            "ct" => Ok(Variant::Ct),
            "rt" => Ok(Variant::Rt),
            _ => Err(format!("unknown variant {s:?}")),
        }
    }
}

/// Vertices reachable from `start` without using edge `skip`.
pub fn component_without(g: &StableGraph, start: usize, skip: usize) -> Vec<bool> {
    let mut seen = vec![false; g.num_vertices()];
    seen[start] = true;
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for (e, &(a, b)) in g.edges.iter().enumerate() {
            if e == skip {
                continue;
            }
            for (x, y) in [(a, b), (b, a)] {
                if x == v && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    seen
}

/// Whether edge `e` disconnects the graph.
pub fn is_bridge(g: &StableGraph, e: usize) -> bool {
    let (a, b) = g.edges[e];
    a != b && !component_without(g, a, e)[b]
}

/// Total genus (vertex genera plus loops of the induced subgraph) of the
/// component containing `start` after removing bridge `e`.
pub fn side_genus(g: &StableGraph, start: usize, e: usize) -> u32 {
    let side = component_without(g, start, e);
    let verts = side.iter().filter(|&&s| s).count();
    let gen: u32 = (0..g.num_vertices()).filter(|&v| side[v]).map(|v| g.genera[v]).sum();
    let inner = g
        .edges
        .iter()
        .enumerate()
        .filter(|&(i, &(a, b))| i != e && side[a] && side[b])
        .count();
    gen + (inner + 1 - verts) as u32
}

/// Graph admissibility for each variant: `ct` excludes graphs with a bridge,
/// `rt` excludes graphs with a bridge cutting off a genus-zero side.
pub fn variant_filter(g: &StableGraph, variant: Variant) -> bool {
    match variant {
        Variant::Open => true,
        Variant::Ct => (0..g.num_edges()).all(|e| !is_bridge(g, e)),
        Variant::Rt => (0..g.num_edges()).all(|e| {
            if !is_bridge(g, e) {
                return true;
            }
            let (a, b) = g.edges[e];
            side_genus(g, a, e) > 0 && side_genus(g, b, e) > 0
        }),
    }
}
