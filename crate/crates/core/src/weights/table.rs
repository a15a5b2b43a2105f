use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{differential_rows, rank_of, Artifacts, Direction, Page};
use crate::graph::Variant;
use crate::repthy::{kostka_system, partitions, render, Partition};
use crate::taut::{dim, TautError};

/// What to compute: a space, a variant and direction, even weights, and
/// symmetry sectors (partitions of `n`; empty means only `(1^n)`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRequest {
    pub g: u32,
    pub n: usize,
    pub variant: Variant,
    pub direction: Direction,
    pub weights: Vec<usize>,
    pub lambdas: Vec<Partition>,
    /// Compute nontrivial sectors even where the trivial sector vanishes.
    #[serde(default)]
    pub exhaustive: bool,
}

impl TableRequest {
    pub fn new(g: u32, n: usize, variant: Variant, direction: Direction, weights: Vec<usize>) -> Self {
        Self { g, n, variant, direction, weights, lambdas: vec![], exhaustive: false }
    }

    pub fn all_sectors(mut self) -> Self {
        self.lambdas = partitions(self.n.max(1));
        if self.n == 0 {
            self.lambdas = vec![vec![]];
        }
        self
    }

    fn sectors(&self) -> Vec<Partition> {
        let full = vec![1; self.n];
        let mut out = vec![full.clone()];
        out.extend(self.lambdas.iter().filter(|l| **l != full).cloned());
        out
    }
}

/// One column of a first page in one sector, with the rank of the outgoing
/// differential and the resulting second-page dimension.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorColumn {
    pub q: usize,
    pub lambda: Partition,
    pub p: usize,
    pub e1: usize,
    pub rank_out: usize,
    pub e2: usize,
}

/// One graded piece: `gr_q H^r` (push) or `gr_q H_c^r` (pull).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub q: usize,
    pub r: usize,
    /// Invariant dimension per sector, keyed by the rendered partition.
    pub sectors: BTreeMap<String, u64>,
    /// Irreducible multiplicities, present when every sector was computed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplicities: Option<BTreeMap<String, u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polynomial: Option<String>,
}

/// Result document of one run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightTable {
    pub space: [u32; 2],
    pub variant: Variant,
    pub direction: Direction,
    pub weights: Vec<usize>,
    /// `"H"` for the push direction, `"Hc"` for pull.
    pub cohomology: String,
    pub entries: Vec<Entry>,
    pub columns: Vec<SectorColumn>,
    /// Sectors for which some columns were skipped by the vanishing rule.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<String>,
}

pub fn partition_key(p: &[usize]) -> String {
    format!("[{}]", p.iter().map(usize::to_string).collect::<Vec<_>>().join(","))
}

pub fn parse_partition_key(s: &str) -> Option<Partition> {
    let inner = s.trim().strip_prefix('[')?.strip_suffix(']')?;
    if inner.is_empty() {
        return Some(vec![]);
    }
    inner.split(',').map(|x| x.trim().parse().ok()).collect()
}

impl WeightTable {
    /// Dimension of the graded piece in a sector; zero for uncomputed
    /// degrees of a computed weight.
    pub fn get(&self, q: usize, r: usize, lambda: &[usize]) -> u64 {
        let key = partition_key(lambda);
        self.entries.iter().find(|e| e.q == q && e.r == r).and_then(|e| e.sectors.get(&key).copied()).unwrap_or(0)
    }

    pub fn entry(&self, q: usize, r: usize) -> Option<&Entry> {
        self.entries.iter().find(|e| e.q == q && e.r == r)
    }

    /// Nonzero full dimensions (`λ = 1^n`) as `(q, r, dim)`.
    pub fn nonzero(&self) -> Vec<(usize, usize, u64)> {
        let n = self.space[1] as usize;
        let full = vec![1; n];
        self.entries.iter().map(|e| (e.q, e.r, self.get(e.q, e.r, &full))).filter(|x| x.2 > 0).collect()
    }

    /// `Σ_p (-1)^p dim E₁ = Σ_p (-1)^p dim E₂` for every fully computed
    /// `(q, λ)`.
    pub fn euler_invariant(&self) -> bool {
        let d = 3 * self.space[0] as usize + self.space[1] as usize - 3;
        let mut sums: HashMap<(usize, Partition), (i64, i64, usize)> = HashMap::new();
        for c in &self.columns {
            let s = if c.p % 2 == 0 { 1 } else { -1 };
            let e = sums.entry((c.q, c.lambda.clone())).or_default();
            e.0 += s * c.e1 as i64;
            e.1 += s * c.e2 as i64;
            e.2 += 1;
        }
        // sectors gated off in some column have no complete first page
        sums.iter().filter(|((q, _), v)| v.2 == column_range(self.direction, *q, d).len()).all(|(_, (a, b, _))| a == b)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// Columns `p` with a nonzero term at weight `q`, for a space of dimension
/// `d`.
fn column_range(dir: Direction, q: usize, d: usize) -> Vec<usize> {
    let h = q / 2;
    match dir {
        Direction::Push => (0..=h.min(d)).collect(),
        Direction::Pull if h <= d => (0..=d - h).collect(),
        Direction::Pull => vec![],
    }
}

/// The column that `d₁` maps `p` into, if any.
fn next_column(dir: Direction, p: usize) -> Option<usize> {
    match dir {
        Direction::Push => p.checked_sub(1),
        Direction::Pull => Some(p + 1),
    }
}

fn prev_column(dir: Direction, p: usize) -> Option<usize> {
    match dir {
        Direction::Push => Some(p + 1),
        Direction::Pull => p.checked_sub(1),
    }
}

fn cohomological_degree(dir: Direction, q: usize, p: usize) -> Option<usize> {
    match dir {
        Direction::Push => q.checked_sub(p),
        Direction::Pull => Some(p + q),
    }
}

struct Sector<'a> {
    art: &'a Artifacts,
    req: &'a TableRequest,
    q: usize,
    lambda: Partition,
    pages: BTreeMap<usize, Page>,
    ranks: BTreeMap<usize, usize>,
}

impl Sector<'_> {
    fn page(&mut self, p: usize) -> Result<&Page, TautError> {
        if !self.pages.contains_key(&p) {
            let r = self.req;
            let page = Page::build(self.art, r.g, r.n, self.q, p, &self.lambda, r.variant, r.direction)?;
            self.pages.insert(p, page);
        }
        Ok(&self.pages[&p])
    }

    /// Rank of `d₁` out of column `p`.
    fn rank_out(&mut self, p: usize) -> Result<usize, TautError> {
        if let Some(&r) = self.ranks.get(&p) {
            return Ok(r);
        }
        let rank = match next_column(self.req.direction, p) {
            None => 0,
            Some(t) => {
                self.page(p)?;
                self.page(t)?;
                let (src, tgt) = (&self.pages[&p], &self.pages[&t]);
                if src.dim() == 0 || tgt.dim() == 0 {
                    0
                } else {
                    let rows = differential_rows(self.art, src, tgt)?;
                    self.art.count_rank();
                    rank_of(rows, tgt.ambient)
                }
            }
        };
        self.ranks.insert(p, rank);
        Ok(rank)
    }

    fn column(&mut self, p: usize) -> Result<SectorColumn, TautError> {
        let e1 = self.page(p)?.dim();
        let rank_out = if e1 == 0 { 0 } else { self.rank_out(p)? };
        let rank_in = match prev_column(self.req.direction, p) {
            Some(s) if e1 > 0 => self.rank_out(s)?,
            _ => 0,
        };
        Ok(SectorColumn { q: self.q, lambda: self.lambda.clone(), p, e1, rank_out, e2: e1 - rank_out - rank_in })
    }
}

/// Outcome of one `(weight, sector)` unit of work.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorResult {
    pub q: usize,
    pub lambda: Partition,
    /// `(r, dim)` for every column of the weight, zero where skipped.
    pub values: Vec<(usize, u64)>,
    pub columns: Vec<SectorColumn>,
    pub skipped: bool,
}

impl SectorResult {
    /// Columns with a nonzero second-page term.
    pub fn support(&self) -> BTreeSet<usize> {
        self.columns.iter().filter(|c| c.e2 > 0).map(|c| c.p).collect()
    }
}

/// Weights of a request that lie in range, sorted and deduplicated.
pub fn request_weights(req: &TableRequest) -> Result<Vec<usize>, TautError> {
    let d = dim(req.g, req.n)?;
    let mut weights: Vec<usize> = req.weights.iter().copied().filter(|&q| q <= 2 * d).collect();
    weights.sort_unstable();
    weights.dedup();
    Ok(weights)
}

/// Sectors of a request; the trivial sector `(1^n)` comes first.
pub fn request_sectors(req: &TableRequest) -> Vec<Partition> {
    req.sectors()
}

/// One sector at one weight. `allowed` restricts the columns computed
/// (the support of the trivial sector); `None` computes all of them.
pub fn sector_result(art: &Artifacts, req: &TableRequest, q: usize, lambda: &[usize], allowed: Option<&BTreeSet<usize>>) -> Result<SectorResult, TautError> {
    let d = dim(req.g, req.n)?;
    let range = column_range(req.direction, q, d);
    let mut out = SectorResult { q, lambda: lambda.to_vec(), values: vec![], columns: vec![], skipped: false };
    let mut sector = Sector { art, req, q, lambda: lambda.to_vec(), pages: BTreeMap::new(), ranks: BTreeMap::new() };
    for &p in &range {
        let Some(r) = cohomological_degree(req.direction, q, p) else {
            continue;
        };
        // odd weights are outside the Tate-type scope: structural zeros
        if q % 2 == 1 || allowed.is_some_and(|a| !a.contains(&p)) {
            out.skipped |= q % 2 == 0;
            out.values.push((r, 0));
            continue;
        }
        let col = sector.column(p)?;
        out.values.push((r, col.e2 as u64));
        out.columns.push(col);
    }
    Ok(out)
}

/// Merges sector results, given in the order weights then sectors, into a
/// table, decomposing into irreducibles when every sector is present.
pub fn assemble(req: &TableRequest, results: Vec<SectorResult>) -> Result<WeightTable, TautError> {
    let weights = request_weights(req)?;
    let sectors = req.sectors();
    let mut entries: BTreeMap<(usize, usize), BTreeMap<String, u64>> = BTreeMap::new();
    let mut columns = vec![];
    let mut skipped = BTreeSet::new();
    for res in results {
        let key = partition_key(&res.lambda);
        if res.skipped {
            skipped.insert(key.clone());
        }
        for &(r, v) in &res.values {
            entries.entry((res.q, r)).or_default().insert(key.clone(), v);
        }
        columns.extend(res.columns);
    }
    let want: BTreeSet<String> = if req.n == 0 { BTreeSet::new() } else { partitions(req.n).iter().map(|p| partition_key(p)).collect() };
    let have: BTreeSet<String> = sectors.iter().map(|p| partition_key(p)).collect();
    let decompose = req.n > 0 && want.is_subset(&have);
    let kostka = if decompose { Some(kostka_system(req.n).expect("n positive")) } else { None };
    let mut out = vec![];
    for ((q, r), sec) in entries {
        let (mut multiplicities, mut polynomial) = (None, None);
        if let Some(k) = &kostka {
            let dims: BTreeMap<Partition, u64> = sec.iter().map(|(s, &v)| (parse_partition_key(s).expect("own key"), v)).collect();
            let m = k.multiplicities(&dims).map_err(|e| TautError::Invalid(format!("gr_{q} degree {r}: {e}")))?;
            polynomial = Some(render(&m, q / 2));
            multiplicities = Some(m.into_iter().map(|(p, c)| (partition_key(&p), c)).collect());
        }
        if req.n == 0 {
            let v = sec.get("[]").copied().unwrap_or(0);
            polynomial = Some(if v == 0 {
                "0".into()
            } else if q == 0 {
                v.to_string()
            } else if v == 1 {
                format!("L^{}", q / 2)
            } else {
                format!("{v}*L^{}", q / 2)
            });
        }
        out.push(Entry { q, r, sectors: sec, multiplicities, polynomial });
    }
    Ok(WeightTable {
        space: [req.g, req.n as u32],
        variant: req.variant,
        direction: req.direction,
        weights,
        cohomology: if req.direction == Direction::Push { "H".into() } else { "Hc".into() },
        entries: out,
        columns,
        skipped: skipped.into_iter().collect(),
    })
}

/// Second-page dimensions for the requested weights and sectors, serially.
/// The trivial sector `(1^n)` is always computed first; other sectors are
/// computed only where it is nonzero unless the request is exhaustive.
pub fn e2_table(art: &Artifacts, req: &TableRequest) -> Result<WeightTable, TautError> {
    let mut results = vec![];
    for q in request_weights(req)? {
        let mut support = None;
        for (i, lambda) in req.sectors().iter().enumerate() {
            let allowed = if i == 0 || req.exhaustive { None } else { support.as_ref() };
            let res = sector_result(art, req, q, lambda, allowed)?;
            if i == 0 {
                support = Some(res.support());
            }
            results.push(res);
        }
    }
    assemble(req, results)
}

/// Outcome of comparing a push table with a pull table through
/// `gr_q H_c^r = gr_{2d-q} H^{2d-r}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualityReport {
    pub ok: bool,
    /// `(q, r, sector, push value, pull value)` with `(q, r)` on the push
    /// side.
    pub mismatches: Vec<(usize, usize, String, u64, u64)>,
    /// Number of compared values.
    pub compared: usize,
}

pub fn duality_check(push: &WeightTable, pull: &WeightTable, g: u32, n: usize) -> DualityReport {
    let d2 = 2 * (3 * g as usize + n - 3);
    let mut mismatches = vec![];
    let mut compared = 0;
    let sectors: BTreeSet<String> = push
        .entries
        .iter()
        .flat_map(|e| e.sectors.keys().cloned())
        .filter(|s| pull.entries.iter().any(|e| e.sectors.contains_key(s)))
        .collect();
    for &q in &push.weights {
        if q > d2 || !pull.weights.contains(&(d2 - q)) {
            continue;
        }
        for r in 0..=d2 {
            for s in &sectors {
                let lambda = parse_partition_key(s).expect("own key");
                let a = push.get(q, r, &lambda);
                let b = pull.get(d2 - q, d2 - r, &lambda);
                compared += 1;
                if a != b {
                    mismatches.push((q, r, s.clone(), a, b));
                }
            }
        }
    }
    DualityReport { ok: mismatches.is_empty() && compared > 0, mismatches, compared }
}
