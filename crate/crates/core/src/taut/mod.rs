//! The strata algebra and its pairing-based quotient.
//!
//! Generators of degree `r` are decorated strata `[Γ, θ]` with
//! `|E(Γ)| + deg θ = r`, where each vertex carries a κ/ψ monomial of degree at
//! most the dimension of its own moduli space. Relations come only from the
//! intersection pairing, which is assumed perfect on the supported spaces.

mod basis;
mod table;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{canonical_form, enumerate_stable_graphs, Decoration, StableGraph};
use crate::intersect::aut_order;
use crate::linalg::Q;

pub use crate::intersect::DecoratedStratum;
pub use basis::{full_generator_rank, pairing_supported, ring_basis, RingBasis, PERFECT_PAIRING_LIMIT};
pub use table::{action_matrix, invariants, ring_table, symmetric_ring_table, RingTable};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TautError {
    #[error("unsupported ring model for ({g},{n}): pairing perfectness not asserted")]
    UnsupportedRingModel { g: u32, n: usize },
    #[error("degree {r} out of range for ({g},{n})")]
    DegreeOutOfRange { g: u32, n: usize, r: usize },
    #[error("pairing imperfect on ({g},{n}) in degree {r}: class not in the span of the basis")]
    PairingImperfect { g: u32, n: usize, r: usize },
    #[error("degree-one shortcut did not reach full rank on ({g},{n})")]
    ShortcutIncomplete { g: u32, n: usize },
    #[error("invalid argument: {0}")]
    Invalid(String),
}

/// Canonical representative of a decorated stratum.
pub fn canonicalize(s: &DecoratedStratum) -> DecoratedStratum {
    let c = canonical_form(&s.graph, Some(&s.deco), None);
    DecoratedStratum { graph: c.graph, deco: c.deco.expect("decoration transported") }
}

/// κ/ψ monomials of exact degree `k` on a vertex with half-edges `hs`.
fn vertex_monomials(k: u32, num_half: usize) -> Vec<(Vec<u32>, Vec<u32>)> {
    let mut out = vec![];
    for kdeg in 0..=k {
        for kap in partitions_of(kdeg) {
            for psi in compositions(k - kdeg, num_half) {
                out.push((kap.clone(), psi));
            }
        }
    }
    out
}

/// Partitions of `k` into positive parts, each sorted ascending.
pub(crate) fn partitions_of(k: u32) -> Vec<Vec<u32>> {
    fn rec(left: u32, min: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for p in min..=left {
            cur.push(p);
            rec(left - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = vec![];
    rec(k, 1, &mut vec![], &mut out);
    out
}

/// Weak compositions of `k` into `parts` parts.
fn compositions(k: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 0 {
        return if k == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = vec![];
    for first in 0..=k {
        for mut rest in compositions(k - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// All decorations of `g` of total degree `k`, vertex degrees bounded by the
/// vertex dimensions.
pub(crate) fn decorations(g: &StableGraph, k: usize) -> Vec<Decoration> {
    decorations_capped(g, k, |g, v| g.vertex_dim(v))
}

/// Largest degree in which the tautological ring of the open moduli space
/// of type `(g, n)` can be nonzero: `g - 1` with markings, `g - 2` without.
pub fn open_vanishing_bound(g: u32, n: usize) -> usize {
    let b = if n == 0 { g as i64 - 2 } else { g as i64 - 1 };
    b.max(0) as usize
}

fn decorations_capped(g: &StableGraph, k: usize, cap: impl Fn(&StableGraph, usize) -> usize) -> Vec<Decoration> {
    let nv = g.num_vertices();
    let hs: Vec<Vec<usize>> = (0..nv).map(|v| g.vertex_half_edges(v)).collect();
    let mut out = vec![];
    let mut per: Vec<(Vec<u32>, Vec<u32>)> = vec![];
    fn rec(
        v: usize,
        left: usize,
        g: &StableGraph,
        hs: &[Vec<usize>],
        caps: &[usize],
        per: &mut Vec<(Vec<u32>, Vec<u32>)>,
        out: &mut Vec<Decoration>,
    ) {
        if v == hs.len() {
            if left == 0 {
                let mut d = Decoration::trivial(g);
                for (w, (kap, psi)) in per.iter().enumerate() {
                    d.kappa[w] = kap.clone();
                    for (i, &h) in hs[w].iter().enumerate() {
                        d.psi[h] = psi[i];
                    }
                }
                out.push(d);
            }
            return;
        }
        let cap = caps[v].min(left);
        for kv in 0..=cap {
            for m in vertex_monomials(kv as u32, hs[v].len()) {
                per.push(m);
                rec(v + 1, left - kv, g, hs, caps, per, out);
                per.pop();
            }
        }
    }
    let caps: Vec<usize> = (0..nv).map(|v| cap(g, v)).collect();
    rec(0, k, g, &hs, &caps, &mut per, &mut out);
    out
}

type GenKey = (u32, usize, usize, bool);

fn gen_cache() -> &'static Mutex<HashMap<GenKey, Arc<Vec<DecoratedStratum>>>> {
    static C: OnceLock<Mutex<HashMap<GenKey, Arc<Vec<DecoratedStratum>>>>> = OnceLock::new();
    C.get_or_init(Default::default)
}

/// The degree-`r` decorated strata of `(g, n)` up to isomorphism, ordered by
/// edge count, then graph, then decoration.
pub fn generators(g: u32, n: usize, r: usize) -> Result<Arc<Vec<DecoratedStratum>>, TautError> {
    let d = dim(g, n)?;
    if r > d {
        return Err(TautError::DegreeOutOfRange { g, n, r });
    }
    build_generators(g, n, r, false, |g, v| g.vertex_dim(v))
}

/// A spanning subset of the degree-`r` generators: vertex monomials are
/// kept only in degrees where the open moduli space of the vertex can have
/// nonzero tautological classes. Any other monomial equals a combination of
/// boundary-supported classes, which are again generators of this form.
pub fn spanning_generators(g: u32, n: usize, r: usize) -> Result<Arc<Vec<DecoratedStratum>>, TautError> {
    let d = dim(g, n)?;
    if r > d {
        return Err(TautError::DegreeOutOfRange { g, n, r });
    }
    build_generators(g, n, r, true, |g, v| {
        let (gv, nv) = g.vertex_type(v);
        g.vertex_dim(v).min(open_vanishing_bound(gv, nv))
    })
}

fn build_generators(
    g: u32,
    n: usize,
    r: usize,
    spanning: bool,
    cap: impl Fn(&StableGraph, usize) -> usize + Sync,
) -> Result<Arc<Vec<DecoratedStratum>>, TautError> {
    let key = (g, n, r, spanning);
    if let Some(v) = gen_cache().lock().unwrap().get(&key) {
        return Ok(v.clone());
    }
    let mut out = vec![];
    for e in 0..=r {
        let graphs = enumerate_stable_graphs(g, n, e).map_err(|x| TautError::Invalid(x.to_string()))?;
        let per_graph: Vec<BTreeSet<DecoratedStratum>> = graphs
            .par_iter()
            .map(|gr| {
                decorations_capped(gr, r - e, &cap)
                    .into_iter()
                    .map(|deco| canonicalize(&DecoratedStratum::new(gr.clone(), deco)))
                    .collect()
            })
            .collect();
        for set in per_graph {
            out.extend(set);
        }
    }
    let out = Arc::new(out);
    gen_cache().lock().unwrap().insert(key, out.clone());
    Ok(out)
}

/// Marking colors for the group generated by swapping markings `2i-1, 2i`
/// for `i = 1..=m`; remaining markings are fixed.
pub fn pair_swap_colors(n: usize, m: usize) -> Vec<usize> {
    (0..n).map(|j| if j < 2 * m { j / 2 } else { n + j }).collect()
}

/// Orbits of degree-`r` generators under marking permutations preserving
/// `colors`, one canonical representative each.
pub fn generator_orbits(g: u32, n: usize, r: usize, colors: &[usize]) -> Result<Vec<DecoratedStratum>, TautError> {
    let gens = generators(g, n, r)?;
    let set: BTreeSet<DecoratedStratum> = gens
        .iter()
        .map(|s| {
            let c = canonical_form(&s.graph, Some(&s.deco), Some(colors));
            DecoratedStratum { graph: c.graph, deco: c.deco.expect("decoration transported") }
        })
        .collect();
    Ok(set.into_iter().collect())
}

pub fn dim(g: u32, n: usize) -> Result<usize, TautError> {
    if 2 * g as i64 - 2 + n as i64 <= 0 {
        return Err(TautError::Invalid(format!("unstable type ({g},{n})")));
    }
    Ok(3 * g as usize + n - 3)
}

/// Relabels markings: marking `j` becomes marking `perm[j]`.
pub fn relabel(s: &DecoratedStratum, perm: &[usize]) -> DecoratedStratum {
    let n = s.graph.num_legs();
    assert_eq!(perm.len(), n, "permutation length");
    let mut legs = vec![0; n];
    let mut deco = s.deco.clone();
    for j in 0..n {
        legs[perm[j]] = s.graph.legs()[j];
        deco.psi[perm[j]] = s.deco.psi[j];
    }
    let graph = StableGraph::from_parts_unchecked(s.graph.genera().to_vec(), legs, s.graph.edges().to_vec());
    canonicalize(&DecoratedStratum { graph, deco })
}

/// A tautological class: canonical strata with nonzero rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TautClass {
    pub g: u32,
    pub n: usize,
    pub terms: BTreeMap<DecoratedStratum, Q>,
}

impl TautClass {
    pub fn zero(g: u32, n: usize) -> Self {
        Self { g, n, terms: BTreeMap::new() }
    }

    pub fn from_stratum(s: &DecoratedStratum) -> Self {
        let mut x = Self::zero(s.graph.genus(), s.graph.num_legs());
        x.add_term(s, Q::from_integer(BigInt::from(1)));
        x
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, s: &DecoratedStratum, c: Q) {
        if c.is_zero() {
            return;
        }
        let key = canonicalize(s);
        let e = self.terms.entry(key.clone()).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, other: &TautClass) -> TautClass {
        let mut x = self.clone();
        for (s, c) in &other.terms {
            x.add_term(s, c.clone());
        }
        x
    }

    pub fn scale(&self, c: &Q) -> TautClass {
        if c.is_zero() {
            return TautClass::zero(self.g, self.n);
        }
        TautClass { g: self.g, n: self.n, terms: self.terms.iter().map(|(s, x)| (s.clone(), x * c)).collect() }
    }

    /// The degree if homogeneous.
    pub fn degree(&self) -> Option<usize> {
        let mut ds = self.terms.keys().map(DecoratedStratum::degree);
        let first = ds.next()?;
        ds.all(|d| d == first).then_some(first)
    }

    /// Marking permutation action: marking `j` becomes `perm[j]`.
    pub fn act(&self, perm: &[usize]) -> TautClass {
        let mut x = TautClass::zero(self.g, self.n);
        for (s, c) in &self.terms {
            x.add_term(&relabel(s, perm), c.clone());
        }
        x
    }

    /// `∫ self · other`.
    pub fn pair(&self, other: &TautClass) -> Q {
        let mut acc = Q::zero();
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                acc += crate::intersect::integrate_product(a, b) * x * y;
            }
        }
        acc
    }
}

/// `ξ_{outer*}(⊗_v [part_v])` as `coef · [glued]`. Part `v` lives on the
/// moduli space of vertex `v` of `outer`, markings in the vertex's
/// half-edge order; the decoration of the glued stratum is the union.
pub fn glue(outer: &StableGraph, parts: &[DecoratedStratum]) -> (Q, DecoratedStratum) {
    let graphs: Vec<StableGraph> = parts.iter().map(|p| p.graph.clone()).collect();
    let (glued, local_vertex, local_half) = crate::intersect::assemble(outer, &graphs);
    let mut deco = Decoration::trivial(&glued);
    for (w, &(v, lw)) in local_vertex.iter().enumerate() {
        deco.kappa[w] = parts[v].deco.kappa[lw].clone();
    }
    for (h, &(v, lh)) in local_half.iter().enumerate() {
        deco.psi[h] = parts[v].deco.psi[lh];
    }
    let s = DecoratedStratum::new(glued, deco);
    let denom: usize = graphs.iter().map(aut_order).product();
    let coef = Q::new(BigInt::from(aut_order(&s.graph)), BigInt::from(denom));
    (coef, s)
}

/// Pushforward along the gluing of edge `i` of `gamma`: the factors on the
/// endpoint vertices (in their half-edge orders; one factor for a loop) go
/// to a class on the merged vertex, whose markings follow the half-edges of
/// the contracted graph.
pub fn glue_pushforward(gamma: &StableGraph, i: usize, factors: &[TautClass]) -> Result<TautClass, TautError> {
    if i >= gamma.num_edges() {
        return Err(TautError::Invalid(format!("edge {i} out of range")));
    }
    let (a, b) = gamma.edges()[i];
    let ends: Vec<usize> = if a == b { vec![a] } else { vec![a, b] };
    if factors.len() != ends.len() {
        return Err(TautError::Invalid("one factor per endpoint".into()));
    }
    let (ha, hb) = (gamma.edge_half(i, 0), gamma.edge_half(i, 1));
    // merged half-edges, ascending, keep their relative order under contraction
    let mut merged: Vec<usize> = ends.iter().flat_map(|&v| gamma.vertex_half_edges(v)).filter(|&h| h != ha && h != hb).collect();
    merged.sort_unstable();
    let genus = if a == b { gamma.genera()[a] + 1 } else { gamma.genera()[a] + gamma.genera()[b] };
    let nw = merged.len();
    let local_legs: Vec<usize> =
        merged.iter().map(|&h| ends.iter().position(|&v| v == gamma.half_edge_vertex(h)).unwrap()).collect();
    let genera: Vec<u32> = ends.iter().map(|&v| gamma.genera()[v]).collect();
    let edges = if a == b { vec![(0, 0)] } else { vec![(0, 1)] };
    let outer = StableGraph::from_parts_unchecked(genera, local_legs, edges);
    // marking permutations from the gamma-vertex order into the outer-vertex order
    let perms: Vec<Vec<usize>> = ends
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let outer_hs = outer.vertex_half_edges(k);
            gamma
                .vertex_half_edges(v)
                .iter()
                .map(|&h| {
                    let oh = if h == ha {
                        outer.edge_half(0, 0)
                    } else if h == hb {
                        outer.edge_half(0, 1)
                    } else {
                        merged.iter().position(|&x| x == h).unwrap()
                    };
                    outer_hs.iter().position(|&x| x == oh).unwrap()
                })
                .collect()
        })
        .collect();
    let mut out = TautClass::zero(genus, nw);
    let f0: Vec<(DecoratedStratum, Q)> = factors[0].act(&perms[0]).terms.into_iter().collect();
    let f1: Vec<(DecoratedStratum, Q)> = if ends.len() == 2 {
        factors[1].act(&perms[1]).terms.into_iter().collect()
    } else {
        vec![]
    };
    for (s0, c0) in &f0 {
        if ends.len() == 1 {
            let (c, s) = glue(&outer, std::slice::from_ref(s0));
            out.add_term(&s, c * c0);
        } else {
            for (s1, c1) in &f1 {
                let (c, s) = glue(&outer, &[s0.clone(), s1.clone()]);
                out.add_term(&s, c * c0 * c1);
            }
        }
    }
    Ok(out)
}

/// Pullback of `x` along the gluing map of the one-edge graph `d`; each
/// term is a tensor product of canonical strata on the vertices of `d`.
pub fn glue_pullback(x: &TautClass, d: &StableGraph) -> Vec<(Q, Vec<DecoratedStratum>)> {
    let mut acc: BTreeMap<Vec<DecoratedStratum>, Q> = BTreeMap::new();
    for (s, c) in &x.terms {
        for (k, parts) in crate::intersect::pullback(d, s) {
            let key: Vec<DecoratedStratum> = parts.iter().map(canonicalize).collect();
            *acc.entry(key).or_insert_with(Q::zero) += k * c;
        }
    }
    acc.into_iter().filter(|(_, c)| !c.is_zero()).map(|(k, c)| (c, k)).collect()
}
