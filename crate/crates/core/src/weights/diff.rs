use std::collections::BTreeMap;

use num_traits::Zero;

use super::page::{transport, Block};
use super::{Artifacts, Direction};
use crate::graph::{automorphisms, canonical_form, contract_edge, degenerations, Degeneration, StableGraph};
use crate::linalg::{SparseRow, Q};
use crate::taut::{glue_pullback, glue_pushforward, TautClass, TautError};

/// Image of one ambient basis element, before projection, grouped by the
/// target representative. Targets are not filtered by variant.
pub type Images = Vec<(StableGraph, SparseRow<Q>)>;

struct Acc(BTreeMap<StableGraph, BTreeMap<usize, Q>>);

impl Acc {
    fn add(&mut self, target: StableGraph, row: SparseRow<Q>, sign: i32) {
        let e = self.0.entry(target).or_default();
        for (i, v) in row {
            let x = e.entry(i).or_insert_with(Q::zero);
            if sign > 0 {
                *x += v;
            } else {
                *x -= v;
            }
        }
    }

    fn finish(self) -> Images {
        self.0
            .into_iter()
            .map(|(g, m)| (g, m.into_iter().filter(|(_, v)| !v.is_zero()).collect::<SparseRow<Q>>()))
            .filter(|(_, r)| !r.is_empty())
            .collect()
    }
}

/// Sends classes on `graph` to the colored representative and embeds them
/// in its block; returns the representative, the vector and the sign of the
/// induced edge permutation.
fn land(art: &Artifacts, graph: &StableGraph, classes: &[TautClass], degree: usize, colors: &[usize]) -> Result<(StableGraph, SparseRow<Q>, i32), TautError> {
    let canon = canonical_form(graph, None, Some(colors));
    let moved = transport(graph, &canon.iso, &canon.graph, classes);
    let target = art.block(&canon.graph, degree, colors)?;
    let row = target.embed(&moved)?;
    Ok((canon.graph, row, canon.iso.edge_sign()))
}

/// Contraction of edge `i` carries sign `(-1)^i` times the sign of the
/// surviving edges' permutation onto the representative.
fn push_images(art: &Artifacts, block: &Block, j: usize, colors: &[usize]) -> Result<Images, TautError> {
    let g = &block.graph;
    let (_, classes) = block.element(j);
    let mut acc = Acc(BTreeMap::new());
    for i in 0..g.num_edges() {
        let c = contract_edge(g, i).map_err(|e| TautError::Invalid(e.to_string()))?;
        let (a, b) = g.edges()[i];
        let factors: Vec<TautClass> = if a == b { vec![classes[a].clone()] } else { vec![classes[a].clone(), classes[b].clone()] };
        let merged = glue_pushforward(g, i, &factors)?;
        if merged.is_zero() {
            continue;
        }
        let mut out: Vec<Option<TautClass>> = vec![None; c.graph.num_vertices()];
        for u in 0..g.num_vertices() {
            if u != a && u != b {
                out[c.vertex_map[u]] = Some(classes[u].clone());
            }
        }
        out[c.merged] = Some(merged);
        let out: Vec<TautClass> = out.into_iter().map(|x| x.expect("every vertex covered")).collect();
        let (target, row, sign) = land(art, &c.graph, &out, block.degree + 1, colors)?;
        let parity = if i % 2 == 0 { 1 } else { -1 };
        acc.add(target, row, sign * parity);
    }
    Ok(acc.finish())
}

/// Local one-edge graph of a degeneration at `v`, on the markings of `v`.
fn local_graph(g: &StableGraph, v: usize, degen: &Degeneration) -> StableGraph {
    let hs = g.vertex_half_edges(v);
    let dg = &degen.graph;
    match &degen.moved {
        Some(moved) => {
            let legs: Vec<usize> = hs.iter().map(|h| moved.contains(h) as usize).collect();
            let nv = dg.num_vertices() - 1;
            StableGraph::new(vec![dg.genera()[v], dg.genera()[nv]], legs, vec![(0, 1)]).expect("stable split")
        }
        None => StableGraph::new(vec![dg.genera()[v]], vec![0; hs.len()], vec![(0, 0)]).expect("stable loop"),
    }
}

/// Automorphisms of a degeneration that fix the new edge and induce the
/// identity on the original graph. Labeled degenerations overcount each
/// edge of the target by this factor.
fn trivial_on_contraction(degen: &Degeneration, old_vertices: usize) -> usize {
    let gr = &degen.graph;
    let new = gr.num_edges() - 1;
    let v = degen.vertex;
    automorphisms(gr, None)
        .iter()
        .filter(|a| {
            a.edge_map[new].0 == new
                && (0..new).all(|e| a.edge_map[e] == (e, false))
                && (0..old_vertices).filter(|&u| u != v).all(|u| a.vertex_map[u] == u)
        })
        .count()
}

struct Degen {
    vertex: usize,
    degen: Degeneration,
    local: StableGraph,
    weight: Q,
}

fn pull_degenerations(g: &StableGraph) -> Vec<Degen> {
    let mut out = vec![];
    for v in 0..g.num_vertices() {
        for degen in degenerations(g, v) {
            let local = local_graph(g, v, &degen);
            let k = trivial_on_contraction(&degen, g.num_vertices());
            out.push(Degen { vertex: v, degen, local, weight: Q::new(1.into(), (k as i64).into()) });
        }
    }
    out
}

/// Pullback along every one-edge degeneration, each weighted by the inverse
/// of its overcount; the new edge is last, so the sign is that of the edge
/// permutation onto the representative.
fn pull_images(art: &Artifacts, block: &Block, degens: &[Degen], j: usize, colors: &[usize]) -> Result<Images, TautError> {
    let (_, classes) = block.element(j);
    let mut acc = Acc(BTreeMap::new());
    for d in degens {
        let v = d.vertex;
        for (coef, parts) in glue_pullback(&classes[v], &d.local) {
            let mut out = classes.clone();
            out[v] = TautClass::from_stratum(&parts[0]).scale(&(coef * &d.weight));
            if let Some(p1) = parts.get(1) {
                out.push(TautClass::from_stratum(p1));
            }
            let (target, row, sign) = land(art, &d.degen.graph, &out, block.degree, colors)?;
            acc.add(target, row, sign);
        }
    }
    Ok(acc.finish())
}

pub fn images(art: &Artifacts, block: &Block, colors: &[usize], dir: Direction) -> Result<Vec<Images>, TautError> {
    let degens = if dir == Direction::Pull { pull_degenerations(&block.graph) } else { vec![] };
    (0..block.ambient)
        .map(|j| match dir {
            Direction::Push => push_images(art, block, j, colors),
            Direction::Pull => pull_images(art, block, &degens, j, colors),
        })
        .collect()
}
