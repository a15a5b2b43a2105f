use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use num_traits::Zero;

use crate::graph::{automorphisms, GraphIso, StableGraph};
use crate::linalg::{Echelon, Rationals, SparseRow, Q};
use crate::taut::{ring_basis, RingBasis, TautClass, TautError};

/// Moves per-vertex classes along an isomorphism `src → tgt`; each class is
/// relabeled so its markings follow the target vertex's half-edge order.
pub fn transport(src: &StableGraph, iso: &GraphIso, tgt: &StableGraph, classes: &[TautClass]) -> Vec<TautClass> {
    let mut out: Vec<Option<TautClass>> = vec![None; tgt.num_vertices()];
    for (u, x) in classes.iter().enumerate() {
        let w = iso.vertex_map[u];
        let hs_t = tgt.vertex_half_edges(w);
        let perm: Vec<usize> = src
            .vertex_half_edges(u)
            .iter()
            .map(|&h| {
                let t = iso.map_half_edge(h);
                hs_t.iter().position(|&x| x == t).expect("iso respects incidence")
            })
            .collect();
        let moved = if perm.iter().enumerate().all(|(i, &p)| i == p) { x.clone() } else { x.act(&perm) };
        out[w] = Some(moved);
    }
    out.into_iter().map(|x| x.expect("iso is onto")).collect()
}

/// Sparse coordinates of a homogeneous class in a ring basis.
pub fn coords(b: &RingBasis, x: &TautClass) -> Result<SparseRow<Q>, TautError> {
    let mut acc: BTreeMap<usize, Q> = BTreeMap::new();
    for (s, c) in &x.terms {
        for (i, v) in b.reduce_stratum(s)? {
            *acc.entry(i).or_insert_with(Q::zero) += v * c;
        }
    }
    Ok(acc.into_iter().filter(|(_, v)| !v.is_zero()).collect())
}

/// One graph of a page term in a fixed total degree: the tensor product of
/// vertex ring bases summed over degree vectors, with the colored
/// automorphism group acting through `det(E)`.
#[derive(Debug)]
pub struct Block {
    pub graph: StableGraph,
    pub degree: usize,
    degree_vectors: Vec<Vec<usize>>,
    lookup: HashMap<Vec<usize>, usize>,
    bases: Vec<Vec<Arc<RingBasis>>>,
    offsets: Vec<usize>,
    pub ambient: usize,
    /// Colored automorphisms with their edge-permutation signs.
    group: Vec<(GraphIso, i32)>,
    action: RwLock<HashMap<(usize, usize), SparseRow<Q>>>,
    /// Basis of the projector image in ambient coordinates; `None` when the
    /// group is trivial and every ambient vector is invariant.
    invariant: Option<Vec<SparseRow<Q>>>,
}

fn degree_vectors(dims: &[usize], r: usize) -> Vec<Vec<usize>> {
    fn rec(dims: &[usize], i: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == dims.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for k in 0..=dims[i].min(left) {
            cur.push(k);
            rec(dims, i + 1, left - k, cur, out);
            cur.pop();
        }
    }
    let mut out = vec![];
    rec(dims, 0, r, &mut vec![], &mut out);
    out
}

impl Block {
    /// Builds the block and its invariant subspace. `colors` assigns each
    /// marking its block of the Young subgroup.
    pub fn new(graph: StableGraph, degree: usize, colors: &[usize]) -> Result<Block, TautError> {
        let mut block = Self::bare(graph, degree, colors)?;
        block.compute_invariant()?;
        Ok(block)
    }

    /// The block without its invariant subspace (treated as trivial until
    /// [`Block::compute_invariant`] or [`Block::set_invariant_rows`]).
    pub fn bare(graph: StableGraph, degree: usize, colors: &[usize]) -> Result<Block, TautError> {
        let types: Vec<(u32, usize)> = (0..graph.num_vertices()).map(|v| graph.vertex_type(v)).collect();
        let vdims: Vec<usize> = (0..graph.num_vertices()).map(|v| graph.vertex_dim(v)).collect();
        let mut degree_vectors = vec![];
        let mut bases = vec![];
        let mut offsets = vec![];
        let mut ambient = 0;
        for kv in self::degree_vectors(&vdims, degree) {
            let bs: Vec<Arc<RingBasis>> = types.iter().zip(&kv).map(|(&(g, n), &k)| ring_basis(g, n, k)).collect::<Result<_, _>>()?;
            let size: usize = bs.iter().map(|b| b.dim()).product();
            if size == 0 {
                continue;
            }
            offsets.push(ambient);
            ambient += size;
            degree_vectors.push(kv);
            bases.push(bs);
        }
        let lookup = degree_vectors.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        let group = automorphisms(&graph, Some(colors)).into_iter().map(|a| {
            let s = a.edge_sign();
            (a, s)
        });
        Ok(Block {
            graph,
            degree,
            degree_vectors,
            lookup,
            bases,
            offsets,
            ambient,
            group: group.collect(),
            action: RwLock::new(HashMap::new()),
            invariant: None,
        })
    }

    pub fn compute_invariant(&mut self) -> Result<(), TautError> {
        if self.group.len() > 1 && self.ambient > 0 {
            let mut ech = Echelon::new(Rationals, false);
            let mut rows = vec![];
            for j in 0..self.ambient {
                let v = self.project(&vec![(j, Q::from_integer(1.into()))])?;
                if !v.is_empty() && ech.insert(v.clone()).is_some() {
                    rows.push(v);
                }
            }
            self.invariant = Some(rows);
        }
        Ok(())
    }

    pub fn group_order(&self) -> usize {
        self.group.len()
    }

    /// Dimension of the invariant part.
    pub fn dim(&self) -> usize {
        self.invariant.as_ref().map_or(self.ambient, Vec::len)
    }

    /// Invariant basis vector `i` in ambient coordinates.
    pub fn invariant_vector(&self, i: usize) -> SparseRow<Q> {
        match &self.invariant {
            Some(rows) => rows[i].clone(),
            None => vec![(i, Q::from_integer(1.into()))],
        }
    }

    pub fn invariant_rows(&self) -> Option<&[SparseRow<Q>]> {
        self.invariant.as_deref()
    }

    /// Replaces the invariant basis with stored rows.
    pub fn set_invariant_rows(&mut self, rows: Option<Vec<SparseRow<Q>>>) {
        self.invariant = rows;
    }

    /// The decorated strata at each vertex for ambient index `j`, with the
    /// degree vector.
    pub fn element(&self, j: usize) -> (Vec<usize>, Vec<TautClass>) {
        let kv = self.offsets.partition_point(|&o| o <= j) - 1;
        let mut rest = j - self.offsets[kv];
        let bs = &self.bases[kv];
        let mut idx = vec![0; bs.len()];
        for v in (0..bs.len()).rev() {
            idx[v] = rest % bs[v].dim();
            rest /= bs[v].dim();
        }
        let classes = idx.iter().zip(bs).map(|(&i, b)| TautClass::from_stratum(&b.basis[i])).collect();
        (self.degree_vectors[kv].clone(), classes)
    }

    /// Ambient vector of a tensor product of homogeneous vertex classes
    /// (zero if a class vanishes or the degrees do not fit this block).
    pub fn embed(&self, classes: &[TautClass]) -> Result<SparseRow<Q>, TautError> {
        let mut kv = vec![];
        for x in classes {
            match x.degree() {
                Some(d) => kv.push(d),
                None => return Ok(vec![]),
            }
        }
        let Some(&ki) = self.lookup.get(&kv) else {
            return Ok(vec![]);
        };
        let bs = &self.bases[ki];
        let mut acc: Vec<(usize, Q)> = vec![(0, Q::from_integer(1.into()))];
        for (b, x) in bs.iter().zip(classes) {
            let c = coords(b, x)?;
            if c.is_empty() {
                return Ok(vec![]);
            }
            let mut next = Vec::with_capacity(acc.len() * c.len());
            for (i, a) in &acc {
                for (k, y) in &c {
                    next.push((i * b.dim() + k, a * y));
                }
            }
            acc = next;
        }
        let off = self.offsets[ki];
        let mut out: SparseRow<Q> = acc.into_iter().map(|(i, v)| (i + off, v)).collect();
        out.sort_by_key(|e| e.0);
        Ok(out)
    }

    fn act(&self, g: usize, j: usize) -> Result<SparseRow<Q>, TautError> {
        if let Some(r) = self.action.read().unwrap().get(&(g, j)) {
            return Ok(r.clone());
        }
        let (_, classes) = self.element(j);
        let moved = transport(&self.graph, &self.group[g].0, &self.graph, &classes);
        let row = self.embed(&moved)?;
        self.action.write().unwrap().insert((g, j), row.clone());
        Ok(row)
    }

    /// The twisted averaging projector `|G|^{-1} Σ sgn(g) g`.
    pub fn project(&self, u: &SparseRow<Q>) -> Result<SparseRow<Q>, TautError> {
        if self.group.len() <= 1 {
            return Ok(u.clone());
        }
        let mut acc: BTreeMap<usize, Q> = BTreeMap::new();
        for (j, c) in u {
            for g in 0..self.group.len() {
                let s = self.group[g].1;
                for (i, v) in self.act(g, *j)? {
                    let t = v * c;
                    let e = acc.entry(i).or_insert_with(Q::zero);
                    if s > 0 {
                        *e += t;
                    } else {
                        *e -= t;
                    }
                }
            }
        }
        let n = Q::from_integer((self.group.len() as i64).into());
        Ok(acc.into_iter().filter(|(_, v)| !v.is_zero()).map(|(i, v)| (i, v / &n)).collect())
    }
}
