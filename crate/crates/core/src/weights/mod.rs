//! First pages of the pushforward and pullback weight spectral sequences,
//! their differentials, and second-page dimensions per symmetry sector.
//!
//! Conventions. A page term is a sum over colored representatives of
//! stable graphs, where markings in the same block of the Young subgroup
//! `S_λ` share a color. Each graph contributes the `det(E)`-twisted
//! invariants of its colored automorphism group in the tensor product of
//! vertex ring bases. Differentials are assembled from unprojected images
//! of ambient basis elements, then projected onto the target invariants.
//! Restricting to `S_λ`-invariants rescales each graph block by a constant,
//! which leaves ranks and the complex property unchanged.

mod diff;
mod page;
mod table;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, RwLock};

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use diff::Images;
pub use page::{coords, transport, Block};
pub use table::{
    assemble, duality_check, e2_table, partition_key, parse_partition_key, request_sectors, request_weights, sector_result, DualityReport, Entry, SectorColumn,
    SectorResult, TableRequest, WeightTable,
};

use crate::graph::{canonical_form, enumerate_stable_graphs, variant_filter, StableGraph, Variant};
use crate::linalg::{q_from_str, q_to_string, RankMode, SparseMatrix, SparseRow, Q};
use crate::taut::TautError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Cohomology of the open space; terms `H^{q-2p}` of `p`-edge graphs.
    Push,
    /// Compactly supported cohomology; terms `H^q` of `p`-edge graphs.
    Pull,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Push => "push",
            Direction::Pull => "pull",
        })
    }
}

impl FromStr for Direction {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "push" => Ok(Direction::Push),
            "pull" => Ok(Direction::Pull),
            _ => Err(format!("unknown direction {s:?}")),
        }
    }
}

/// Marking colors of the Young subgroup of `λ`: consecutive blocks.
pub fn colors(lambda: &[usize]) -> Vec<usize> {
    lambda.iter().enumerate().flat_map(|(i, &k)| std::iter::repeat_n(i, k)).collect()
}

/// Persistent backing for artifacts, keyed by text.
pub trait Store: Send + Sync {
    fn load(&self, key: &str) -> Option<String>;
    fn save(&self, key: &str, value: &str);
}

type BlockKey = (StableGraph, usize, Vec<usize>);
type ImageKey = (StableGraph, usize, Vec<usize>, Direction);

/// Hit and miss counts of the per-graph artifact caches.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheStats {
    pub hits: usize,
    pub misses: usize,
    /// Differential ranks computed (not served from a cache).
    #[serde(default)]
    pub ranks: usize,
}

impl CacheStats {
    pub fn reuse(&self) -> f64 {
        let total = self.hits + self.misses;
        if total == 0 {
            1.0
        } else {
            self.hits as f64 / total as f64
        }
    }
}

/// Per-graph artifacts shared across pages, weights and variants: blocks
/// (invariant bases) and unprojected differential images. Neither depends
/// on the variant, so ct and rt runs reuse what an open run produced.
#[derive(Default)]
pub struct Artifacts {
    blocks: RwLock<HashMap<BlockKey, Arc<Block>>>,
    images: RwLock<HashMap<ImageKey, Arc<Vec<Images>>>>,
    store: Option<Arc<dyn Store>>,
    hits: AtomicUsize,
    misses: AtomicUsize,
    ranks: AtomicUsize,
}

fn row_to_json(r: &SparseRow<Q>) -> Vec<(usize, String)> {
    r.iter().map(|(i, v)| (*i, q_to_string(v))).collect()
}

fn row_from_json(r: Vec<(usize, String)>) -> Option<SparseRow<Q>> {
    r.into_iter().map(|(i, s)| q_from_str(&s).map(|v| (i, v))).collect()
}

fn colors_key(c: &[usize]) -> String {
    c.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

impl Artifacts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_store(store: Arc<dyn Store>) -> Self {
        Self { store: Some(store), ..Self::default() }
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats { hits: self.hits.load(Ordering::Relaxed), misses: self.misses.load(Ordering::Relaxed), ranks: self.ranks.load(Ordering::Relaxed) }
    }

    pub fn reset_stats(&self) {
        self.hits.store(0, Ordering::Relaxed);
        self.misses.store(0, Ordering::Relaxed);
        self.ranks.store(0, Ordering::Relaxed);
    }

    pub(crate) fn count_rank(&self) {
        self.ranks.fetch_add(1, Ordering::Relaxed);
    }

    fn hit(&self) {
        self.hits.fetch_add(1, Ordering::Relaxed);
    }

    fn miss(&self) {
        self.misses.fetch_add(1, Ordering::Relaxed);
    }

    /// The block of a colored representative in total degree `degree`.
    pub fn block(&self, graph: &StableGraph, degree: usize, colors: &[usize]) -> Result<Arc<Block>, TautError> {
        let key = (graph.clone(), degree, colors.to_vec());
        if let Some(b) = self.blocks.read().unwrap().get(&key) {
            return Ok(b.clone());
        }
        let skey = format!("block|{}|{}|{}", graph.encode(), degree, colors_key(colors));
        let mut block = Block::bare(graph.clone(), degree, colors)?;
        let stored = self.store.as_ref().and_then(|s| s.load(&skey)).and_then(|text| {
            let rows: Option<Vec<Vec<(usize, String)>>> = serde_json::from_str(&text).ok()?;
            Some(match rows {
                Some(rows) => Some(rows.into_iter().map(row_from_json).collect::<Option<Vec<_>>>()?),
                None => None,
            })
        });
        match stored {
            Some(rows) => block.set_invariant_rows(rows),
            None => {
                block.compute_invariant()?;
                if let Some(s) = &self.store {
                    let rows = block.invariant_rows().map(|r| r.iter().map(row_to_json).collect::<Vec<_>>());
                    s.save(&skey, &serde_json::to_string(&rows).expect("serializable"));
                }
            }
        }
        let block = Arc::new(block);
        Ok(self.blocks.write().unwrap().entry(key).or_insert(block).clone())
    }

    /// Unprojected images of every ambient basis element of a block; counted
    /// as one per-graph artifact.
    pub fn images(&self, block: &Block, colors: &[usize], dir: Direction) -> Result<Arc<Vec<Images>>, TautError> {
        let key = (block.graph.clone(), block.degree, colors.to_vec(), dir);
        if let Some(v) = self.images.read().unwrap().get(&key) {
            self.hit();
            return Ok(v.clone());
        }
        let skey = format!("image|{dir}|{}|{}|{}", block.graph.encode(), block.degree, colors_key(colors));
        let stored = self.store.as_ref().and_then(|s| s.load(&skey)).and_then(|text| {
            let raw: Vec<Vec<(String, Vec<(usize, String)>)>> = serde_json::from_str(&text).ok()?;
            raw.into_iter()
                .map(|per| per.into_iter().map(|(g, r)| Some((StableGraph::decode(&g).ok()?, row_from_json(r)?))).collect::<Option<Images>>())
                .collect::<Option<Vec<Images>>>()
        });
        let v = match stored {
            Some(v) => {
                self.hit();
                v
            }
            None => {
                self.miss();
                let v = diff::images(self, block, colors, dir)?;
                if let Some(s) = &self.store {
                    let raw: Vec<Vec<(String, Vec<(usize, String)>)>> =
                        v.iter().map(|per| per.iter().map(|(g, r)| (g.encode(), row_to_json(r))).collect()).collect();
                    s.save(&skey, &serde_json::to_string(&raw).expect("serializable"));
                }
                v
            }
        };
        let v = Arc::new(v);
        Ok(self.images.write().unwrap().entry(key).or_insert(v).clone())
    }
}

/// One column `p` of a first page at weight `q` in one sector.
pub struct Page {
    pub direction: Direction,
    pub variant: Variant,
    pub q: usize,
    pub p: usize,
    pub lambda: Vec<usize>,
    colors: Vec<usize>,
    pub blocks: Vec<Arc<Block>>,
    offsets: Vec<usize>,
    index: HashMap<StableGraph, usize>,
    pub ambient: usize,
}

/// Summary of a page term for reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageTerm {
    pub direction: Direction,
    pub variant: Variant,
    pub q: usize,
    pub p: usize,
    pub lambda: Vec<usize>,
    /// Representatives with their invariant dimensions.
    pub graphs: Vec<(String, usize)>,
    pub dimension: usize,
    /// Power of `L` tensored onto the term.
    pub tate: usize,
}

/// Chow degree of the vertex classes in column `p` at weight `q`.
pub fn term_degree(dir: Direction, q: usize, p: usize) -> Option<usize> {
    if q % 2 == 1 {
        return None;
    }
    match dir {
        Direction::Push => (q / 2).checked_sub(p),
        Direction::Pull => Some(q / 2),
    }
}

/// Colored representatives of `p`-edge graphs admitted by the variant.
pub fn representatives(g: u32, n: usize, p: usize, variant: Variant, colors: &[usize]) -> Vec<StableGraph> {
    let Ok(all) = enumerate_stable_graphs(g, n, p) else {
        return vec![];
    };
    let reps: BTreeSet<StableGraph> =
        all.iter().filter(|gr| variant_filter(gr, variant)).map(|gr| canonical_form(gr, None, Some(colors)).graph).collect();
    reps.into_iter().collect()
}

impl Page {
    #[allow(clippy::too_many_arguments)]
    pub fn build(art: &Artifacts, g: u32, n: usize, q: usize, p: usize, lambda: &[usize], variant: Variant, dir: Direction) -> Result<Page, TautError> {
        let colors = colors(lambda);
        let blocks: Vec<Arc<Block>> = match term_degree(dir, q, p) {
            None => vec![],
            Some(r) => representatives(g, n, p, variant, &colors)
                .par_iter()
                .map(|gr| art.block(gr, r, &colors))
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .filter(|b| b.ambient > 0)
                .collect(),
        };
        let mut offsets = vec![];
        let mut ambient = 0;
        for b in &blocks {
            offsets.push(ambient);
            ambient += b.ambient;
        }
        let index = blocks.iter().enumerate().map(|(i, b)| (b.graph.clone(), i)).collect();
        Ok(Page { direction: dir, variant, q, p, lambda: lambda.to_vec(), colors, blocks, offsets, index, ambient })
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim()).sum()
    }

    pub fn term(&self) -> PageTerm {
        PageTerm {
            direction: self.direction,
            variant: self.variant,
            q: self.q,
            p: self.p,
            lambda: self.lambda.clone(),
            graphs: self.blocks.iter().map(|b| (b.graph.encode(), b.dim())).collect(),
            dimension: self.dim(),
            tate: if self.direction == Direction::Push { self.p } else { 0 },
        }
    }

    /// Invariant basis vectors in global ambient coordinates.
    pub fn basis(&self) -> Vec<SparseRow<Q>> {
        self.blocks
            .iter()
            .zip(&self.offsets)
            .flat_map(|(b, &off)| (0..b.dim()).map(move |i| b.invariant_vector(i).into_iter().map(|(j, v)| (j + off, v)).collect()))
            .collect()
    }
}

/// `d₁` applied to a vector of `src` (global ambient coordinates), landing
/// projected in `tgt`. Targets outside `tgt` are dropped, which is how the
/// ct and rt variants restrict the pullback differential.
pub fn apply(art: &Artifacts, src: &Page, tgt: &Page, v: &SparseRow<Q>) -> Result<SparseRow<Q>, TautError> {
    let mut per_target: HashMap<usize, std::collections::BTreeMap<usize, Q>> = HashMap::new();
    for (x, c) in v {
        let bi = src.offsets.partition_point(|&o| o <= *x) - 1;
        let block = &src.blocks[bi];
        let j = x - src.offsets[bi];
        let imgs = art.images(block, &src.colors, src.direction)?;
        for (graph, row) in &imgs[j] {
            let Some(&ti) = tgt.index.get(graph) else {
                continue;
            };
            let acc = per_target.entry(ti).or_default();
            for (i, y) in row {
                *acc.entry(*i).or_insert_with(Q::zero) += y * c;
            }
        }
    }
    let mut keys: Vec<usize> = per_target.keys().copied().collect();
    keys.sort_unstable();
    let mut out = vec![];
    for ti in keys {
        let u: SparseRow<Q> = per_target.remove(&ti).unwrap().into_iter().filter(|(_, y)| !y.is_zero()).collect();
        let pu = tgt.blocks[ti].project(&u)?;
        out.extend(pu.into_iter().map(|(i, y)| (i + tgt.offsets[ti], y)));
    }
    Ok(out)
}

/// Images of the invariant basis of `src`; their rank is the rank of `d₁`.
pub fn differential_rows(art: &Artifacts, src: &Page, tgt: &Page) -> Result<Vec<SparseRow<Q>>, TautError> {
    if tgt.ambient == 0 {
        return Ok(vec![vec![]; src.dim()]);
    }
    src.basis().par_iter().map(|y| apply(art, src, tgt, y)).collect()
}

pub fn rank_of(rows: Vec<SparseRow<Q>>, ncols: usize) -> usize {
    if rows.iter().all(|r| r.is_empty()) {
        return 0;
    }
    SparseMatrix::from_rows(ncols, rows).rank(&RankMode::Exact).expect("exact rank").rank
}

/// Whether `d₁ ∘ d₁` vanishes on all of `a` (through `b` into `c`).
pub fn composite_vanishes(art: &Artifacts, a: &Page, b: &Page, c: &Page) -> Result<bool, TautError> {
    for r in differential_rows(art, a, b)? {
        if !apply(art, b, c, &r)?.is_empty() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests;
