//! Canonical forms and isomorphisms by individualization and refinement.
//!
//! Graphs here have at most a dozen or so vertices, so the search simply
//! explores every branch of the individualization tree and keeps the
//! lexicographically smallest leaf encoding.

use std::collections::BTreeMap;

use super::{Decoration, GraphIso, StableGraph};

/// Output of [`canonical_form`]: the canonical graph, the transported
/// decoration (if one was given) and an isomorphism from the input.
#[derive(Clone, Debug)]
pub struct Canonical {
    pub graph: StableGraph,
    pub deco: Option<Decoration>,
    pub iso: GraphIso,
}

struct Ctx<'a> {
    g: &'a StableGraph,
    deco: Option<&'a Decoration>,
    colors: Option<&'a [usize]>,
}

impl Ctx<'_> {
    fn psi(&self, h: usize) -> u64 {
        self.deco.map_or(0, |d| d.psi[h] as u64)
    }

    fn initial_keys(&self) -> Vec<Vec<u64>> {
        let g = self.g;
        let n = g.num_legs();
        (0..g.num_vertices())
            .map(|v| {
                let mut key = vec![g.genera[v] as u64, g.valence(v) as u64];
                let kap = self.deco.map(|d| d.kappa[v].clone()).unwrap_or_default();
                key.push(kap.len() as u64);
                key.extend(kap.iter().map(|&k| k as u64));
                let mut legs: Vec<(u64, u64)> = (0..n)
                    .filter(|&m| g.legs[m] == v)
                    .map(|m| {
                        let label = match self.colors {
                            Some(c) => c[m] as u64,
                            None => m as u64,
                        };
                        (label, self.psi(m))
                    })
                    .collect();
                legs.sort_unstable();
                key.push(legs.len() as u64);
                for (a, b) in legs {
                    key.extend([a, b]);
                }
                let mut loops: Vec<(u64, u64)> = (0..g.num_edges())
                    .filter(|&e| g.edges[e] == (v, v))
                    .map(|e| {
                        let (p, q) = (self.psi(g.edge_half(e, 0)), self.psi(g.edge_half(e, 1)));
                        (p.min(q), p.max(q))
                    })
                    .collect();
                loops.sort_unstable();
                key.push(loops.len() as u64);
                for (a, b) in loops {
                    key.extend([a, b]);
                }
                key
            })
            .collect()
    }

    fn refine(&self, mut colors: Vec<usize>) -> Vec<usize> {
        let g = self.g;
        let mut classes = count_classes(&colors);
        loop {
            let keys: Vec<Vec<u64>> = (0..g.num_vertices())
                .map(|v| {
                    let mut nb: Vec<(u64, u64, u64)> = Vec::new();
                    for (e, &(a, b)) in g.edges.iter().enumerate() {
                        if a == b {
                            continue;
                        }
                        if a == v {
                            nb.push((
                                colors[b] as u64,
                                self.psi(g.edge_half(e, 0)),
                                self.psi(g.edge_half(e, 1)),
                            ));
                        }
                        if b == v {
                            nb.push((
                                colors[a] as u64,
                                self.psi(g.edge_half(e, 1)),
                                self.psi(g.edge_half(e, 0)),
                            ));
                        }
                    }
                    nb.sort_unstable();
                    let mut key = vec![colors[v] as u64];
                    for (x, y, z) in nb {
                        key.extend([x, y, z]);
                    }
                    key
                })
                .collect();
            colors = rank_keys(&keys);
            let c = count_classes(&colors);
            if c == classes {
                return colors;
            }
            classes = c;
        }
    }

    fn search(&self, colors: Vec<usize>, best: &mut Option<(Vec<u64>, Vec<usize>)>) {
        let colors = self.refine(colors);
        let nv = colors.len();
        if count_classes(&colors) == nv {
            let enc = self.leaf_encoding(&colors);
            if best.as_ref().is_none_or(|(b, _)| enc < *b) {
                *best = Some((enc, colors));
            }
            return;
        }
        let mut sizes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (v, &c) in colors.iter().enumerate() {
            sizes.entry(c).or_default().push(v);
        }
        let (_, cell) = sizes.into_iter().find(|(_, vs)| vs.len() > 1).unwrap();
        for &v in &cell {
            let keys: Vec<Vec<u64>> = (0..nv)
                .map(|w| vec![colors[w] as u64, (w != v) as u64])
                .collect();
            self.search(rank_keys(&keys), best);
        }
    }

    fn edge_tuple(&self, pos: &[usize], e: usize) -> ((u64, u64, u64, u64), bool) {
        let g = self.g;
        let (a, b) = g.edges[e];
        let (pa, pb) = (self.psi(g.edge_half(e, 0)), self.psi(g.edge_half(e, 1)));
        if a == b {
            let flip = pa > pb;
            ((pos[a] as u64, pos[a] as u64, pa.min(pb), pa.max(pb)), flip)
        } else if pos[a] < pos[b] {
            ((pos[a] as u64, pos[b] as u64, pa, pb), false)
        } else {
            ((pos[b] as u64, pos[a] as u64, pb, pa), true)
        }
    }

    /// Marking slot assignment for the vertex order `pos`.
    fn marking_map(&self, pos: &[usize]) -> Vec<usize> {
        let g = self.g;
        let n = g.num_legs();
        match self.colors {
            None => (0..n).collect(),
            Some(colors) => {
                let mut by_color: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
                for m in 0..n {
                    by_color.entry(colors[m]).or_default().push(m);
                }
                let mut map = vec![0; n];
                for slots in by_color.values() {
                    let mut ms = slots.clone();
                    ms.sort_by_key(|&m| (pos[g.legs[m]], self.psi(m), m));
                    for (slot, m) in slots.iter().zip(ms) {
                        map[m] = *slot;
                    }
                }
                map
            }
        }
    }

    fn leaf_encoding(&self, pos: &[usize]) -> Vec<u64> {
        let g = self.g;
        let nv = g.num_vertices();
        let mut order = vec![0; nv];
        for v in 0..nv {
            order[pos[v]] = v;
        }
        let mut enc = Vec::new();
        for &v in &order {
            enc.push(g.genera[v] as u64);
            if let Some(d) = self.deco {
                enc.push(d.kappa[v].len() as u64);
                enc.extend(d.kappa[v].iter().map(|&k| k as u64));
            }
        }
        let mm = self.marking_map(pos);
        let mut legs = vec![(0u64, 0u64); g.num_legs()];
        for m in 0..g.num_legs() {
            legs[mm[m]] = (pos[g.legs[m]] as u64, self.psi(m));
        }
        for (a, b) in legs {
            enc.extend([a, b]);
        }
        let mut edges: Vec<_> = (0..g.num_edges()).map(|e| self.edge_tuple(pos, e).0).collect();
        edges.sort_unstable();
        for (a, b, c, d) in edges {
            enc.extend([a, b, c, d]);
        }
        enc
    }

    fn build(&self, pos: &[usize]) -> Canonical {
        let g = self.g;
        let nv = g.num_vertices();
        let marking_map = self.marking_map(pos);
        let mut tuples: Vec<((u64, u64, u64, u64), usize)> =
            (0..g.num_edges()).map(|e| (self.edge_tuple(pos, e).0, e)).collect();
        tuples.sort();
        let mut edge_map = vec![(0, false); g.num_edges()];
        for (idx, &(_, e)) in tuples.iter().enumerate() {
            edge_map[e] = (idx, self.edge_tuple(pos, e).1);
        }
        let iso = GraphIso { vertex_map: pos.to_vec(), edge_map, marking_map };
        let graph = iso.apply(g);
        debug_assert_eq!(graph.num_vertices(), nv);
        let deco = self.deco.map(|d| d.transport(&iso));
        Canonical { graph, deco, iso }
    }
}

fn count_classes(colors: &[usize]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

fn rank_keys(keys: &[Vec<u64>]) -> Vec<usize> {
    let mut sorted: Vec<&Vec<u64>> = keys.iter().collect();
    sorted.sort();
    sorted.dedup();
    keys.iter().map(|k| sorted.binary_search(&k).unwrap()).collect()
}

/// Canonical representative of `g` (optionally decorated, optionally with
/// markings colored so that same-colored markings may be permuted).
///
/// Isomorphic inputs give identical outputs; the returned iso maps the input
/// onto the output, and the output's edges are sorted.
pub fn canonical_form(
    g: &StableGraph,
    deco: Option<&Decoration>,
    colors: Option<&[usize]>,
) -> Canonical {
    let ctx = Ctx { g, deco, colors };
    let init = rank_keys(&ctx.initial_keys());
    let mut best = None;
    ctx.search(init, &mut best);
    let (_, pos) = best.expect("search visits at least one leaf");
    ctx.build(&pos)
}

struct IsoData {
    key: Vec<Vec<u64>>,
    mult: Vec<Vec<usize>>,
}

fn iso_data(g: &StableGraph, colors: Option<&[usize]>) -> IsoData {
    let nv = g.num_vertices();
    let mut mult = vec![vec![0; nv]; nv];
    for &(a, b) in &g.edges {
        mult[a][b] += 1;
        if a != b {
            mult[b][a] += 1;
        }
    }
    let key = (0..nv)
        .map(|v| {
            let mut legs: Vec<u64> = (0..g.num_legs())
                .filter(|&m| g.legs[m] == v)
                .map(|m| colors.map_or(m, |c| c[m]) as u64)
                .collect();
            legs.sort_unstable();
            let mut k = vec![g.genera[v] as u64, g.valence(v) as u64, mult[v][v] as u64];
            k.extend(legs);
            k
        })
        .collect();
    IsoData { key, mult }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, k - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// All isomorphisms `a → b` of undecorated graphs. With `colors`, markings
/// may be permuted within color classes; otherwise markings are fixed.
pub fn isomorphisms(a: &StableGraph, b: &StableGraph, colors: Option<&[usize]>) -> Vec<GraphIso> {
    if a.num_vertices() != b.num_vertices()
        || a.num_edges() != b.num_edges()
        || a.num_legs() != b.num_legs()
    {
        return vec![];
    }
    let da = iso_data(a, colors);
    let db = iso_data(b, colors);
    let nv = a.num_vertices();
    // BFS order for early adjacency pruning.
    let mut order = Vec::with_capacity(nv);
    let mut seen = vec![false; nv];
    for s in 0..nv {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        order.push(s);
        let mut i = order.len() - 1;
        while i < order.len() {
            let v = order[i];
            for w in 0..nv {
                if !seen[w] && da.mult[v][w] > 0 {
                    seen[w] = true;
                    order.push(w);
                }
            }
            i += 1;
        }
    }
    let mut vmaps = Vec::new();
    let mut map = vec![usize::MAX; nv];
    let mut used = vec![false; nv];
    vertex_backtrack(a, b, &da, &db, colors, &order, 0, &mut map, &mut used, &mut vmaps);
    let mut out = Vec::new();
    for vm in vmaps {
        expand(a, b, colors, &vm, &mut out);
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn vertex_backtrack(
    a: &StableGraph,
    b: &StableGraph,
    da: &IsoData,
    db: &IsoData,
    colors: Option<&[usize]>,
    order: &[usize],
    depth: usize,
    map: &mut Vec<usize>,
    used: &mut Vec<bool>,
    out: &mut Vec<Vec<usize>>,
) {
    if depth == order.len() {
        out.push(map.clone());
        return;
    }
    let v = order[depth];
    let forced = if colors.is_none() {
        (0..a.num_legs()).find(|&m| a.legs[m] == v).map(|m| b.legs[m])
    } else {
        None
    };
    let candidates: Vec<usize> = match forced {
        Some(t) => vec![t],
        None => (0..b.num_vertices()).collect(),
    };
    for t in candidates {
        if used[t] || da.key[v] != db.key[t] {
            continue;
        }
        let ok = order[..depth].iter().all(|&u| da.mult[v][u] == db.mult[t][map[u]]);
        if !ok {
            continue;
        }
        map[v] = t;
        used[t] = true;
        vertex_backtrack(a, b, da, db, colors, order, depth + 1, map, used, out);
        used[t] = false;
        map[v] = usize::MAX;
    }
}

enum Choice {
    Edges(Vec<Vec<(usize, usize, bool)>>),
    Marks(Vec<Vec<(usize, usize)>>),
}

fn expand(
    a: &StableGraph,
    b: &StableGraph,
    colors: Option<&[usize]>,
    vm: &[usize],
    out: &mut Vec<GraphIso>,
) {
    let mut choices: Vec<Choice> = Vec::new();
    let key = |x: usize, y: usize| (x.min(y), x.max(y));
    let mut src: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (e, &(x, y)) in a.edges.iter().enumerate() {
        src.entry(key(x, y)).or_default().push(e);
    }
    let mut tgt: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (e, &(x, y)) in b.edges.iter().enumerate() {
        tgt.entry(key(x, y)).or_default().push(e);
    }
    for ((x, y), es) in &src {
        let Some(ts) = tgt.get(&key(vm[*x], vm[*y])) else { return };
        if ts.len() != es.len() {
            return;
        }
        let mut opts = Vec::new();
        for p in permutations(es.len()) {
            if x == y {
                for mask in 0..(1usize << es.len()) {
                    opts.push(
                        es.iter()
                            .enumerate()
                            .map(|(i, &e)| (e, ts[p[i]], mask >> i & 1 == 1))
                            .collect(),
                    );
                }
            } else {
                opts.push(
                    es.iter()
                        .enumerate()
                        .map(|(i, &e)| {
                            let t = ts[p[i]];
                            (e, t, vm[a.edges[e].0] != b.edges[t].0)
                        })
                        .collect(),
                );
            }
        }
        choices.push(Choice::Edges(opts));
    }
    let n = a.num_legs();
    match colors {
        None => {
            if (0..n).any(|m| vm[a.legs[m]] != b.legs[m]) {
                return;
            }
        }
        Some(c) => {
            let mut groups: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
            for m in 0..n {
                groups.entry((a.legs[m], c[m])).or_default().push(m);
            }
            for ((v, col), ms) in groups {
                let ts: Vec<usize> =
                    (0..n).filter(|&m| b.legs[m] == vm[v] && c[m] == col).collect();
                if ts.len() != ms.len() {
                    return;
                }
                let opts = permutations(ms.len())
                    .into_iter()
                    .map(|p| ms.iter().enumerate().map(|(i, &m)| (m, ts[p[i]])).collect())
                    .collect();
                choices.push(Choice::Marks(opts));
            }
        }
    }
    let base = GraphIso {
        vertex_map: vm.to_vec(),
        edge_map: vec![(0, false); a.num_edges()],
        marking_map: (0..n).collect(),
    };
    fn rec(choices: &[Choice], cur: &mut GraphIso, out: &mut Vec<GraphIso>) {
        let Some((first, rest)) = choices.split_first() else {
            out.push(cur.clone());
            return;
        };
        match first {
            Choice::Edges(opts) => {
                for o in opts {
                    for &(e, t, f) in o {
                        cur.edge_map[e] = (t, f);
                    }
                    rec(rest, cur, out);
                }
            }
            Choice::Marks(opts) => {
                for o in opts {
                    for &(m, t) in o {
                        cur.marking_map[m] = t;
                    }
                    rec(rest, cur, out);
                }
            }
        }
    }
    let mut cur = base;
    rec(&choices, &mut cur, out);
}

/// The automorphism group of `g` (with `colors`, the extended group that may
/// permute same-colored markings).
pub fn automorphisms(g: &StableGraph, colors: Option<&[usize]>) -> Vec<GraphIso> {
    isomorphisms(g, g, colors)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(genera: Vec<u32>, legs: Vec<usize>, edges: Vec<(usize, usize)>) -> StableGraph {
        StableGraph::new(genera, legs, edges).unwrap()
    }

    #[test]
    fn canonical_is_idempotent() {
        let x = g(vec![0, 1, 2], vec![0, 0], vec![(2, 1), (1, 0)]);
        let c = canonical_form(&x, None, None);
        assert_eq!(c.iso.apply(&x), c.graph);
        let c2 = canonical_form(&c.graph, None, None);
        assert_eq!(c2.graph, c.graph);
        assert!(c2.iso.is_identity());
    }

    #[test]
    fn dumbbell_relabelings_agree() {
        let d1 = g(vec![0, 0], vec![], vec![(0, 0), (0, 1), (1, 1)]);
        let d2 = g(vec![0, 0], vec![], vec![(1, 0), (1, 1), (0, 0)]);
        assert_eq!(canonical_form(&d1, None, None).graph, canonical_form(&d2, None, None).graph);
    }

    #[test]
    fn loop_automorphisms() {
        let x = g(vec![1], vec![], vec![(0, 0)]);
        let aut = automorphisms(&x, None);
        assert_eq!(aut.len(), 2);
        assert!(aut.iter().all(|a| a.edge_sign() == 1));
        let y = g(vec![1, 1], vec![], vec![(0, 1)]);
        assert_eq!(automorphisms(&y, None).len(), 2);
    }

    #[test]
    fn colored_markings() {
        let x = g(vec![0, 0], vec![0, 0, 1, 1], vec![(0, 1)]);
        assert_eq!(automorphisms(&x, None).len(), 1);
        assert_eq!(automorphisms(&x, Some(&[0, 0, 0, 0])).len(), 8);
        let y = g(vec![0, 0], vec![0, 1, 0, 1], vec![(0, 1)]);
        let cx = canonical_form(&x, None, Some(&[0, 0, 0, 0]));
        let cy = canonical_form(&y, None, Some(&[0, 0, 0, 0]));
        assert_eq!(cx.graph, cy.graph);
        assert_eq!(cy.iso.apply(&y), cy.graph);
    }
}
