use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_traits::Zero;
use rayon::prelude::*;

use super::{canonicalize, decorations, dim, generators, spanning_generators, DecoratedStratum, TautClass, TautError};
use crate::graph::{enumerate_stable_graphs, Decoration, StableGraph};
use crate::intersect::integrate_product;
use crate::linalg::{Echelon, Rationals, SparseMatrix, SparseRow, SpanSolver, Q};

/// Spaces with `2g + n` at most this value are asserted to have a perfect
/// pairing on tautological cohomology.
pub const PERFECT_PAIRING_LIMIT: u32 = 12;

pub fn pairing_supported(g: u32, n: usize) -> bool {
    2 * g + n as u32 <= PERFECT_PAIRING_LIMIT
}

/// A basis of `RH^r` of `(g, n)` with the data to reduce any class into it.
#[derive(Debug)]
pub struct RingBasis {
    pub g: u32,
    pub n: usize,
    pub r: usize,
    /// The basis strata, in generator order.
    pub basis: Vec<DecoratedStratum>,
    /// Complementary-degree strata whose pairings determine a class.
    pub complement: Vec<DecoratedStratum>,
    /// Whether the degree-one shortcut produced this basis.
    pub shortcut: bool,
    solver: SpanSolver,
    reduced: RwLock<HashMap<DecoratedStratum, SparseRow<Q>>>,
}

impl RingBasis {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Coordinates of a stratum (canonicalized first); sparse, indexed by
    /// basis position.
    pub fn reduce_stratum(&self, s: &DecoratedStratum) -> Result<SparseRow<Q>, TautError> {
        if s.degree() != self.r {
            return Err(TautError::Invalid(format!("degree {} class against degree {} basis", s.degree(), self.r)));
        }
        let s = canonicalize(s);
        if let Some(v) = self.reduced.read().unwrap().get(&s) {
            return Ok(v.clone());
        }
        let row: SparseRow<Q> = self
            .complement
            .iter()
            .enumerate()
            .map(|(j, c)| (j, integrate_product(&s, c)))
            .filter(|(_, x)| !x.is_zero())
            .collect();
        let v = self
            .solver
            .solve_sparse(row)
            .ok_or(TautError::PairingImperfect { g: self.g, n: self.n, r: self.r })?;
        self.reduced.write().unwrap().insert(s, v.clone());
        Ok(v)
    }

    pub fn reduce(&self, x: &TautClass) -> Result<Vec<Q>, TautError> {
        let mut out = vec![Q::zero(); self.dim()];
        for (s, c) in &x.terms {
            for (i, v) in self.reduce_stratum(s)? {
                out[i] += v * c;
            }
        }
        Ok(out)
    }
}

type Key = (u32, usize, usize);

fn cache() -> &'static RwLock<HashMap<Key, Arc<RingBasis>>> {
    static C: OnceLock<RwLock<HashMap<Key, Arc<RingBasis>>>> = OnceLock::new();
    C.get_or_init(Default::default)
}

/// Basis of `RH^r` on `(g, n)`, built once per key.
pub fn ring_basis(g: u32, n: usize, r: usize) -> Result<Arc<RingBasis>, TautError> {
    let d = dim(g, n)?;
    if r > d {
        return Err(TautError::DegreeOutOfRange { g, n, r });
    }
    if !pairing_supported(g, n) {
        return Err(TautError::UnsupportedRingModel { g, n });
    }
    if let Some(b) = cache().read().unwrap().get(&(g, n, r)) {
        return Ok(b.clone());
    }
    let built = if r == 0 || r == d {
        extremes(g, n, d)
    } else if g >= 3 && d >= 2 && (r == 1 || r == d - 1) {
        shortcut(g, n, d)?
    } else {
        full(g, n, r.min(d - r), d)?
    };
    let mut c = cache().write().unwrap();
    for b in built {
        c.entry((g, n, b.r)).or_insert_with(|| Arc::new(b));
    }
    Ok(c[&(g, n, r)].clone())
}

fn pairing_rows(rows: &[DecoratedStratum], cols: &[DecoratedStratum]) -> Vec<SparseRow<Q>> {
    rows.par_iter()
        .map(|a| {
            cols.iter()
                .enumerate()
                .map(|(j, b)| (j, integrate_product(a, b)))
                .filter(|(_, x)| !x.is_zero())
                .collect()
        })
        .collect()
}

fn make(g: u32, n: usize, r: usize, basis: Vec<DecoratedStratum>, complement: Vec<DecoratedStratum>, square: &SparseMatrix, shortcut: bool) -> RingBasis {
    let solver = SpanSolver::new(square);
    debug_assert_eq!(solver.rank(), basis.len());
    RingBasis { g, n, r, basis, complement, shortcut, solver, reduced: RwLock::new(HashMap::new()) }
}

/// Degrees zero and `d`: the fundamental class against `κ_d`, whose
/// integral is a positive correlator.
fn extremes(g: u32, n: usize, d: usize) -> Vec<RingBasis> {
    let smooth = StableGraph::smooth(g, n).expect("stable type");
    let one = DecoratedStratum::undecorated(smooth.clone());
    let top = if d == 0 {
        one.clone()
    } else {
        let mut deco = Decoration::trivial(&smooth);
        deco.kappa[0] = vec![d as u32];
        DecoratedStratum::new(smooth, deco)
    };
    let square = SparseMatrix::from_rows(1, vec![vec![(0, integrate_product(&one, &top))]]);
    let mut out = vec![make(g, n, 0, vec![one.clone()], vec![top.clone()], &square, false)];
    if d > 0 {
        out.push(make(g, n, d, vec![top], vec![one], &square, false));
    }
    out
}

/// Both bases of degrees `r <= d - r` from the full pairing matrix.
fn full(g: u32, n: usize, r: usize, d: usize) -> Result<Vec<RingBasis>, TautError> {
    let rows = spanning_generators(g, n, r)?;
    let cols = spanning_generators(g, n, d - r)?;
    let m = SparseMatrix::from_rows(cols.len(), pairing_rows(&rows, &cols));
    let limit = rows.len().min(cols.len());
    let mut ech = Echelon::new(Rationals, false);
    let mut ri = vec![];
    for i in 0..m.nrows() {
        if ech.rank() == limit {
            break;
        }
        if ech.insert(m.row(i).clone()).is_some() {
            ri.push(i);
        }
    }
    let mt = m.select_rows(&ri).transpose();
    let mut ech = Echelon::new(Rationals, false);
    let mut ci = vec![];
    for j in 0..mt.nrows() {
        if ci.len() == ri.len() {
            break;
        }
        if ech.insert(mt.row(j).clone()).is_some() {
            ci.push(j);
        }
    }
    let square = m.select_rows(&ri).select_columns(&ci);
    let rb: Vec<DecoratedStratum> = ri.iter().map(|&i| rows[i].clone()).collect();
    let cb: Vec<DecoratedStratum> = ci.iter().map(|&j| cols[j].clone()).collect();
    let mut out = vec![make(g, n, r, rb.clone(), cb.clone(), &square, false)];
    if d - r != r {
        out.push(make(g, n, d - r, cb, rb, &square.transpose(), false));
    }
    Ok(out)
}

/// Rank of the pairing between all degree-`r` and degree-`d - r`
/// generators; an independent route to `dim RH^r` for small spaces.
pub fn full_generator_rank(g: u32, n: usize, r: usize) -> Result<usize, TautError> {
    let d = dim(g, n)?;
    let rows = generators(g, n, r)?;
    let cols = generators(g, n, d - r)?;
    let m = SparseMatrix::from_rows(cols.len(), pairing_rows(&rows, &cols));
    Ok(m.rank(&crate::linalg::RankMode::Exact).map_err(|e| TautError::Invalid(e.to_string()))?.rank)
}

/// Candidate complementary strata for the degree-one shortcut: decorated
/// smooth strata first, then one-edge strata, fewer factors first.
fn shortcut_candidates(g: u32, n: usize, k: usize) -> Vec<DecoratedStratum> {
    let mut out = vec![];
    for e in 0..=1usize.min(k) {
        let graphs: Vec<StableGraph> = enumerate_stable_graphs(g, n, e).map(|v| v.to_vec()).unwrap_or_default();
        let mut level = vec![];
        for gr in &graphs {
            for deco in decorations(gr, k - e) {
                let factors = deco.kappa.iter().map(Vec::len).sum::<usize>() + deco.psi.iter().filter(|&&p| p > 0).count();
                level.push((factors, canonicalize(&DecoratedStratum::new(gr.clone(), deco))));
            }
        }
        level.sort();
        level.dedup_by(|a, b| a.1 == b.1);
        out.extend(level.into_iter().map(|(_, s)| s));
    }
    out
}

/// Degree one and `d - 1` when the divisor generators are independent:
/// pair them against candidates until the rank is full.
fn shortcut(g: u32, n: usize, d: usize) -> Result<Vec<RingBasis>, TautError> {
    let divisors = generators(g, n, 1)?;
    let want = divisors.len();
    let mut ech = Echelon::new(Rationals, false);
    let mut chosen: Vec<DecoratedStratum> = vec![];
    let mut cols: Vec<SparseRow<Q>> = vec![];
    let cands = shortcut_candidates(g, n, d - 1);
    for batch in cands.chunks(16) {
        let colvals = pairing_rows(batch, &divisors);
        for (c, v) in batch.iter().zip(colvals) {
            if ech.rank() < want && ech.insert(v.clone()).is_some() {
                chosen.push(c.clone());
                cols.push(v);
            }
        }
        if ech.rank() == want {
            break;
        }
    }
    if ech.rank() < want {
        return Err(TautError::ShortcutIncomplete { g, n });
    }
    // rows: chosen candidates, columns: divisors
    let square = SparseMatrix::from_rows(want, cols);
    let mut out = vec![make(g, n, d - 1, chosen.clone(), divisors.to_vec(), &square, true)];
    if d - 1 != 1 {
        out.push(make(g, n, 1, divisors.to_vec(), chosen, &square.transpose(), true));
    }
    Ok(out)
}
