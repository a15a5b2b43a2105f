//! Intersection numbers on moduli of stable curves.
//!
//! A decorated stratum `[Γ, θ]` denotes `ξ_{Γ*}θ / |Aut Γ|`, where `θ` is a
//! κ/ψ monomial on the vertices of `Γ`. Products of two strata are computed
//! by pulling one back along the gluing map of the other: the pullback is a
//! sum over generic structures (refine every vertex of `A`, keep a subset
//! `T` of the edges of `A`, identify the result with `B`), each carrying the
//! excess factor `-ψ_h - ψ_h'` on the edges in `T`.

mod psi;

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::Zero;

use crate::graph::{automorphisms, component_without, contract_edges, enumerate_stable_graphs, is_bridge, isomorphisms, side_genus, Decoration, StableGraph};
use crate::linalg::Q;

pub use psi::{export_correlators, import_correlators, integrate_vertex, psi_correlator};

/// A graph with a κ/ψ monomial; see the module docs for the normalization.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DecoratedStratum {
    pub graph: StableGraph,
    pub deco: Decoration,
}

impl DecoratedStratum {
    pub fn new(graph: StableGraph, deco: Decoration) -> Self {
        assert_eq!(deco.kappa.len(), graph.num_vertices());
        assert_eq!(deco.psi.len(), graph.num_half_edges());
        Self { graph, deco }
    }

    pub fn undecorated(graph: StableGraph) -> Self {
        let deco = Decoration::trivial(&graph);
        Self { graph, deco }
    }

    /// Chow degree: edges plus monomial degree.
    pub fn degree(&self) -> usize {
        self.graph.num_edges() + self.deco.degree()
    }

    pub fn encode(&self) -> String {
        format!("{};{}", self.graph.encode(), self.deco.encode())
    }
}

/// One generic structure for the pair `(A, B)`.
#[derive(Debug)]
struct Structure {
    parts: Vec<StableGraph>,
    gamma: StableGraph,
    /// Γ vertex → (A vertex, vertex of the part).
    local_vertex: Vec<(usize, usize)>,
    /// Γ half-edge → (A vertex, half-edge of the part).
    local_half: Vec<(usize, usize)>,
    b_vertex_of: Vec<usize>,
    /// B half-edge → Γ half-edge.
    b_half: Vec<usize>,
    excess: Vec<(usize, usize)>,
    inv_aut_parts: Q,
}

type StructKey = (StableGraph, StableGraph);

fn structure_cache() -> &'static RwLock<HashMap<StructKey, Arc<Vec<Structure>>>> {
    static C: OnceLock<RwLock<HashMap<StructKey, Arc<Vec<Structure>>>>> = OnceLock::new();
    C.get_or_init(Default::default)
}

fn aut_cache() -> &'static RwLock<HashMap<StableGraph, usize>> {
    static C: OnceLock<RwLock<HashMap<StableGraph, usize>>> = OnceLock::new();
    C.get_or_init(Default::default)
}

/// Order of the automorphism group fixing markings (memoized).
pub fn aut_order(g: &StableGraph) -> usize {
    if let Some(&k) = aut_cache().read().unwrap().get(g) {
        return k;
    }
    let k = automorphisms(g, None).len();
    aut_cache().write().unwrap().insert(g.clone(), k);
    k
}

fn qu(n: usize) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Glues the parts into A's vertices. A's half-edges keep their indices; the
/// parts' internal edges follow A's edges, part by part.
pub(crate) fn assemble(a: &StableGraph, parts: &[StableGraph]) -> (StableGraph, Vec<(usize, usize)>, Vec<(usize, usize)>) {
    let n = a.num_legs();
    let mut offsets = vec![];
    let mut genera = vec![];
    let mut local_vertex = vec![];
    for (v, p) in parts.iter().enumerate() {
        offsets.push(genera.len());
        for (w, &gw) in p.genera().iter().enumerate() {
            genera.push(gw);
            local_vertex.push((v, w));
        }
    }
    let hs: Vec<Vec<usize>> = (0..a.num_vertices()).map(|v| a.vertex_half_edges(v)).collect();
    let mut local_half = vec![(0, 0); a.num_half_edges()];
    let mut place = vec![0usize; a.num_half_edges()];
    for v in 0..a.num_vertices() {
        for (pos, &h) in hs[v].iter().enumerate() {
            local_half[h] = (v, pos);
            place[h] = offsets[v] + parts[v].legs()[pos];
        }
    }
    let legs: Vec<usize> = (0..n).map(|m| place[m]).collect();
    let mut edges: Vec<(usize, usize)> =
        (0..a.num_edges()).map(|e| (place[a.edge_half(e, 0)], place[a.edge_half(e, 1)])).collect();
    for (v, p) in parts.iter().enumerate() {
        let nv = p.num_legs();
        for (k, &(x, y)) in p.edges().iter().enumerate() {
            edges.push((offsets[v] + x, offsets[v] + y));
            local_half.push((v, nv + 2 * k));
            local_half.push((v, nv + 2 * k + 1));
        }
    }
    (StableGraph::from_parts_unchecked(genera, legs, edges), local_vertex, local_half)
}

fn sorted_genera(g: &StableGraph) -> Vec<u32> {
    let mut x = g.genera().to_vec();
    x.sort_unstable();
    x
}

fn build_structures(a: &StableGraph, b: &StableGraph) -> Vec<Structure> {
    let ea = a.num_edges();
    let eb = b.num_edges();
    let mut out = vec![];
    if a.genus() != b.genus() || a.num_legs() != b.num_legs() {
        return out;
    }
    let types: Vec<(u32, usize)> = (0..a.num_vertices()).map(|v| a.vertex_type(v)).collect();
    let b_genera = sorted_genera(b);
    // choose part edge counts summing to between eb - ea and eb
    let mut counts = vec![0usize; types.len()];
    fn rec(
        i: usize,
        left: usize,
        counts: &mut Vec<usize>,
        types: &[(u32, usize)],
        f: &mut dyn FnMut(&[usize]),
    ) {
        if i == types.len() {
            f(counts);
            return;
        }
        let (g, n) = types[i];
        let max = (3 * g as usize + n).saturating_sub(3).min(left);
        for k in 0..=max {
            counts[i] = k;
            rec(i + 1, left - k, counts, types, f);
        }
        counts[i] = 0;
    }
    let mut choices: Vec<Vec<usize>> = vec![];
    rec(0, eb, &mut counts, &types, &mut |c| {
        let s: usize = c.iter().sum();
        if s + ea >= eb {
            choices.push(c.to_vec());
        }
    });
    for c in choices {
        let t_size = eb - c.iter().sum::<usize>();
        let lists: Vec<Arc<Vec<StableGraph>>> = types
            .iter()
            .zip(&c)
            .map(|(&(g, n), &k)| enumerate_stable_graphs(g, n, k).expect("stable vertex"))
            .collect();
        let mut idx = vec![0usize; lists.len()];
        if lists.iter().any(|l| l.is_empty()) {
            continue;
        }
        loop {
            let parts: Vec<StableGraph> = idx.iter().zip(&lists).map(|(&i, l)| l[i].clone()).collect();
            let (gamma, local_vertex, local_half) = assemble(a, &parts);
            let inv_aut_parts = Q::from_integer(BigInt::from(1))
                / qu(parts.iter().map(aut_order).product::<usize>());
            for tmask in 0..(1usize << ea) {
                if tmask.count_ones() as usize != t_size {
                    continue;
                }
                let contract: Vec<usize> = (0..ea).filter(|&e| tmask >> e & 1 == 0).collect();
                let con = contract_edges(&gamma, &contract).expect("edge in range");
                if con.graph.num_vertices() != b.num_vertices() || sorted_genera(&con.graph) != b_genera {
                    continue;
                }
                let mut inv_half = vec![usize::MAX; con.graph.num_half_edges()];
                for (h, m) in con.half_edge_map.iter().enumerate() {
                    if let Some(m) = m {
                        inv_half[*m] = h;
                    }
                }
                let excess: Vec<(usize, usize)> = (0..ea)
                    .filter(|&e| tmask >> e & 1 == 1)
                    .map(|e| (gamma.edge_half(e, 0), gamma.edge_half(e, 1)))
                    .collect();
                for phi in isomorphisms(&con.graph, b, None) {
                    let inv = phi.inverse();
                    let b_half = (0..b.num_half_edges()).map(|h| inv_half[inv.map_half_edge(h)]).collect();
                    let b_vertex_of = con.vertex_map.iter().map(|&v| phi.vertex_map[v]).collect();
                    out.push(Structure {
                        parts: parts.clone(),
                        gamma: gamma.clone(),
                        local_vertex: local_vertex.clone(),
                        local_half: local_half.clone(),
                        b_vertex_of,
                        b_half,
                        excess: excess.clone(),
                        inv_aut_parts: inv_aut_parts.clone(),
                    });
                }
            }
            // next tuple
            let mut k = 0;
            loop {
                if k == idx.len() {
                    break;
                }
                idx[k] += 1;
                if idx[k] < lists[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == idx.len() {
                break;
            }
        }
    }
    out
}

fn structures(a: &StableGraph, b: &StableGraph) -> Arc<Vec<Structure>> {
    let key = (a.clone(), b.clone());
    if let Some(s) = structure_cache().read().unwrap().get(&key) {
        return s.clone();
    }
    let s = Arc::new(build_structures(a, b));
    structure_cache().write().unwrap().insert(key, s.clone());
    s
}

/// A monomial on Γ with an integer multiplicity.
type Monomials = HashMap<Decoration, i64>;

/// Distributes κ classes of a contracted vertex over the Γ vertices mapping
/// to it (`π^*κ_d = Σ_w κ_d(w)` along gluing maps).
fn spread_kappa(mons: Monomials, ks: &[u32], targets: &[usize]) -> Monomials {
    let mut cur = mons;
    for &k in ks {
        let mut next = Monomials::new();
        for (m, c) in cur {
            for &w in targets {
                let mut m2 = m.clone();
                let pos = m2.kappa[w].partition_point(|&x| x <= k);
                m2.kappa[w].insert(pos, k);
                *next.entry(m2).or_insert(0) += c;
            }
        }
        cur = next;
    }
    cur
}

/// θ_B and the excess factors, written on Γ.
fn b_side(s: &Structure, b: &DecoratedStratum) -> Monomials {
    let mut base = Decoration::trivial(&s.gamma);
    for (hb, &p) in b.deco.psi.iter().enumerate() {
        base.psi[s.b_half[hb]] += p;
    }
    let mut mons = Monomials::new();
    mons.insert(base, 1);
    for (u, ks) in b.deco.kappa.iter().enumerate() {
        if ks.is_empty() {
            continue;
        }
        let targets: Vec<usize> = (0..s.gamma.num_vertices()).filter(|&w| s.b_vertex_of[w] == u).collect();
        mons = spread_kappa(mons, ks, &targets);
    }
    for &(h1, h2) in &s.excess {
        let mut next = Monomials::new();
        for (m, c) in mons {
            for h in [h1, h2] {
                let mut m2 = m.clone();
                m2.psi[h] += 1;
                *next.entry(m2).or_insert(0) -= c;
            }
        }
        mons = next;
    }
    mons.retain(|_, c| *c != 0);
    mons
}

/// θ_A written on Γ.
fn a_side(s: &Structure, a: &DecoratedStratum) -> Monomials {
    let mut base = Decoration::trivial(&s.gamma);
    for (h, &p) in a.deco.psi.iter().enumerate() {
        base.psi[h] += p;
    }
    let mut mons = Monomials::new();
    mons.insert(base, 1);
    for (v, ks) in a.deco.kappa.iter().enumerate() {
        if ks.is_empty() {
            continue;
        }
        let targets: Vec<usize> = (0..s.gamma.num_vertices()).filter(|&w| s.local_vertex[w].0 == v).collect();
        mons = spread_kappa(mons, ks, &targets);
    }
    mons
}

/// `∫_{M̄_Γ} m` for a monomial on Γ: the product of vertex integrals.
fn integrate_on_graph(g: &StableGraph, m: &Decoration) -> Q {
    let mut total = Q::from_integer(BigInt::from(1));
    for w in 0..g.num_vertices() {
        let (gw, _) = g.vertex_type(w);
        let psi: Vec<u32> = g.vertex_half_edges(w).iter().map(|&h| m.psi[h]).collect();
        let v = integrate_vertex(gw, &psi, &m.kappa[w]);
        if v.is_zero() {
            return v;
        }
        total *= v;
    }
    total
}

/// `∫ [A, θ_A] · [B, θ_B]` with `A` the stratum pulled back along.
fn product_ordered(a: &DecoratedStratum, b: &DecoratedStratum) -> Q {
    let structs = structures(&a.graph, &b.graph);
    let mut acc = Q::zero();
    for s in structs.iter() {
        let bs = b_side(s, b);
        if bs.is_empty() {
            continue;
        }
        let as_ = a_side(s, a);
        let mut sub: HashMap<Decoration, i64> = HashMap::new();
        for (ma, ca) in &as_ {
            for (mb, cb) in &bs {
                *sub.entry(ma.mul(mb)).or_insert(0) += ca * cb;
            }
        }
        let mut part = Q::zero();
        for (m, c) in sub {
            if c != 0 {
                part += integrate_on_graph(&s.gamma, &m) * Q::from_integer(BigInt::from(c));
            }
        }
        acc += part * &s.inv_aut_parts;
    }
    acc / qu(aut_order(&a.graph) * aut_order(&b.graph))
}

/// Separating edges as `(genus, marking mask)` of one side.
fn separating_splits(g: &StableGraph) -> Vec<(u32, u64)> {
    (0..g.num_edges())
        .filter(|&e| is_bridge(g, e))
        .map(|e| {
            let (a, _) = g.edges()[e];
            let side = component_without(g, a, e);
            let genus = side_genus(g, a, e);
            let mask = (0..g.num_legs()).filter(|&m| side[g.legs()[m]]).fold(0u64, |acc, m| acc | 1 << m);
            (genus, mask)
        })
        .collect()
}

/// Whether two separating boundary divisors meet: equal, or one side of the
/// first sits inside one side of the second with a stable middle piece.
fn splits_meet(a: (u32, u64), b: (u32, u64), g: u32, full: u64) -> bool {
    let sides = |(h, s): (u32, u64)| [(h, s), (g - h, full & !s)];
    let sa = sides(a);
    let sb = sides(b);
    if sa.contains(&sb[0]) {
        return true;
    }
    sa.iter().any(|&(h, s)| {
        sb.iter().any(|&(k, t)| s & !t == 0 && h <= k && (k > h || t & !s != 0))
    })
}

fn splits_cache() -> &'static RwLock<HashMap<StableGraph, Arc<Vec<(u32, u64)>>>> {
    static C: OnceLock<RwLock<HashMap<StableGraph, Arc<Vec<(u32, u64)>>>>> = OnceLock::new();
    C.get_or_init(Default::default)
}

fn cached_splits(g: &StableGraph) -> Arc<Vec<(u32, u64)>> {
    if let Some(s) = splits_cache().read().unwrap().get(g) {
        return s.clone();
    }
    let s = Arc::new(separating_splits(g));
    splits_cache().write().unwrap().insert(g.clone(), s.clone());
    s
}

/// False when the supports of the two strata are disjoint because some
/// separating node types of the two graphs cannot coexist on one curve.
pub fn supports_may_meet(a: &StableGraph, b: &StableGraph) -> bool {
    let (sa, sb) = (cached_splits(a), cached_splits(b));
    let g = a.genus();
    let full = if a.num_legs() == 64 { u64::MAX } else { (1u64 << a.num_legs()) - 1 };
    sa.iter().all(|&x| sb.iter().all(|&y| splits_meet(x, y, g, full)))
}

/// Intersection number of two decorated strata of complementary degree
/// (zero otherwise).
pub fn integrate_product(a: &DecoratedStratum, b: &DecoratedStratum) -> Q {
    let d = a.graph.ambient_dim();
    if a.degree() + b.degree() != d || a.graph.genus() != b.graph.genus() || a.graph.num_legs() != b.graph.num_legs() {
        return Q::zero();
    }
    if !supports_may_meet(&a.graph, &b.graph) {
        return Q::zero();
    }
    // refining the graph with more edges needs fewer new edges
    if a.graph.num_edges() >= b.graph.num_edges() {
        product_ordered(a, b)
    } else {
        product_ordered(b, a)
    }
}

/// Integral of a single decorated stratum of top degree.
pub fn integrate_stratum(s: &DecoratedStratum) -> Q {
    if s.degree() != s.graph.ambient_dim() {
        return Q::zero();
    }
    integrate_on_graph(&s.graph, &s.deco) / qu(aut_order(&s.graph))
}

/// `ξ_A^*[B, θ_B]` as a sum of tensor products, one decorated stratum per
/// vertex of `A` (in the vertex's own marking order).
pub fn pullback(a: &StableGraph, b: &DecoratedStratum) -> Vec<(Q, Vec<DecoratedStratum>)> {
    let structs = structures(a, &b.graph);
    let inv_b = Q::from_integer(BigInt::from(1)) / qu(aut_order(&b.graph));
    let mut out: HashMap<Vec<DecoratedStratum>, Q> = HashMap::new();
    for s in structs.iter() {
        for (m, c) in b_side(s, b) {
            let mut decos: Vec<Decoration> = s.parts.iter().map(Decoration::trivial).collect();
            for (h, &p) in m.psi.iter().enumerate() {
                let (v, lh) = s.local_half[h];
                decos[v].psi[lh] += p;
            }
            for (w, ks) in m.kappa.iter().enumerate() {
                let (v, lw) = s.local_vertex[w];
                decos[v].kappa[lw].extend(ks.iter().copied());
                decos[v].kappa[lw].sort_unstable();
            }
            let key: Vec<DecoratedStratum> = s
                .parts
                .iter()
                .zip(decos)
                .map(|(p, d)| DecoratedStratum::new(p.clone(), d))
                .collect();
            *out.entry(key).or_insert_with(Q::zero) += Q::from_integer(BigInt::from(c)) * &inv_b;
        }
    }
    let mut v: Vec<(Q, Vec<DecoratedStratum>)> =
        out.into_iter().filter(|(_, c)| !c.is_zero()).map(|(k, c)| (c, k)).collect();
    v.sort_by(|x, y| x.1.cmp(&y.1));
    v
}

#[cfg(test)]
mod tests;
