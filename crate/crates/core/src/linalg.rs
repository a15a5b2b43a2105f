//! Exact sparse linear algebra over the rationals and prime fields.
//!
//! Everything is built on one incremental row-echelon structure,
//! [`Echelon`], which eliminates each new row against the pivots found so
//! far. Inserting rows in order therefore selects the first linearly
//! independent rows, which is how bases are chosen downstream.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// `num/den` text form used by every interchange format.
pub fn q_to_string(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn q_from_str(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((a, b)) => {
            let d: BigInt = b.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Q::new(a.trim().parse().ok()?, d))
        }
        None => Some(Q::from_integer(s.parse().ok()?)),
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("entry ({0}, {1}) out of range")]
    OutOfRange(usize, usize),
    #[error("duplicate entry at ({0}, {1})")]
    Duplicate(usize, usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("modular rank needs at least one prime")]
    NoPrimes,
    #[error("malformed matrix dump: {0}")]
    Parse(String),
}

/// Arithmetic of a field whose elements are plain values.
pub trait Field: Clone + Send + Sync {
    type E: Clone + PartialEq + std::fmt::Debug + Send + Sync;
    fn zero(&self) -> Self::E;
    fn one(&self) -> Self::E;
    fn is_zero(&self, a: &Self::E) -> bool;
    fn add(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn sub(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn inv(&self, a: &Self::E) -> Self::E;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Rationals;

impl Field for Rationals {
    type E = Q;
    fn zero(&self) -> Q {
        Q::zero()
    }
    fn one(&self) -> Q {
        Q::one()
    }
    fn is_zero(&self, a: &Q) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &Q, b: &Q) -> Q {
        a + b
    }
    fn sub(&self, a: &Q, b: &Q) -> Q {
        a - b
    }
    fn mul(&self, a: &Q, b: &Q) -> Q {
        a * b
    }
    fn inv(&self, a: &Q) -> Q {
        a.recip()
    }
}

/// The field with `p` elements for a prime `p < 2^63`.
#[derive(Clone, Copy, Debug)]
pub struct PrimeField {
    pub p: u64,
}

impl PrimeField {
    fn pow(&self, mut b: u64, mut e: u64) -> u64 {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(&r, &b);
            }
            b = self.mul(&b, &b);
            e >>= 1;
        }
        r
    }

    /// Image of a rational; `None` when `p` divides the denominator.
    pub fn reduce(&self, x: &Q) -> Option<u64> {
        let p = BigInt::from(self.p);
        let n = ((x.numer() % &p) + &p) % &p;
        let d = ((x.denom() % &p) + &p) % &p;
        let (n, d) = (n.to_u64()?, d.to_u64()?);
        if d == 0 {
            return None;
        }
        Some(self.mul(&n, &self.inv(&d)))
    }
}

impl Field for PrimeField {
    type E = u64;
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 + *b as u128) % self.p as u128) as u64
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 + self.p as u128 - *b as u128) % self.p as u128) as u64
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.p as u128) as u64
    }
    fn inv(&self, a: &u64) -> u64 {
        self.pow(*a, self.p - 2)
    }
}

pub type SparseRow<E> = Vec<(usize, E)>;

/// `a - f * b` for sorted sparse rows.
fn axpy<F: Field>(field: &F, a: &SparseRow<F::E>, f: &F::E, b: &SparseRow<F::E>) -> SparseRow<F::E> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i].clone());
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            let v = field.sub(&field.zero(), &field.mul(f, &b[j].1));
            out.push((b[j].0, v));
            j += 1;
        } else {
            let v = field.sub(&a[i].1, &field.mul(f, &b[j].1));
            if !field.is_zero(&v) {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

fn scale<F: Field>(field: &F, a: &SparseRow<F::E>, f: &F::E) -> SparseRow<F::E> {
    a.iter().map(|(c, v)| (*c, field.mul(v, f))).collect()
}

/// Incremental row echelon form. Pivot rows are normalized to a leading 1;
/// with tracking enabled every pivot row remembers its expression in terms
/// of the inserted rows.
#[derive(Clone, Debug)]
pub struct Echelon<F: Field> {
    field: F,
    pivots: BTreeMap<usize, usize>,
    rows: Vec<SparseRow<F::E>>,
    combos: Option<Vec<SparseRow<F::E>>>,
    inserted: usize,
}

impl<F: Field> Echelon<F> {
    pub fn new(field: F, track: bool) -> Self {
        Self { field, pivots: BTreeMap::new(), rows: vec![], combos: track.then(Vec::new), inserted: 0 }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivot_columns(&self) -> Vec<usize> {
        self.pivots.keys().copied().collect()
    }

    /// Reduces `row` by the stored pivots. Returns the remainder and, when
    /// tracking, the combination of inserted rows that was subtracted.
    fn reduce_row(&self, row: SparseRow<F::E>) -> (SparseRow<F::E>, SparseRow<F::E>) {
        let f = &self.field;
        let mut r = row;
        let mut combo: SparseRow<F::E> = vec![];
        let mut start = 0;
        loop {
            let hit = r[start.min(r.len())..]
                .iter()
                .position(|(c, _)| self.pivots.contains_key(c))
                .map(|i| i + start.min(r.len()));
            let Some(i) = hit else { break };
            let (col, val) = r[i].clone();
            let pr = self.pivots[&col];
            if let Some(cs) = &self.combos {
                combo = axpy(f, &combo, &f.sub(&f.zero(), &val), &cs[pr]);
            }
            r = axpy(f, &r, &val, &self.rows[pr]);
            start = r.partition_point(|(c, _)| *c <= col);
        }
        (r, combo)
    }

    /// Inserts a row; returns its pivot column if it was independent.
    pub fn insert(&mut self, row: SparseRow<F::E>) -> Option<usize> {
        let idx = self.inserted;
        self.inserted += 1;
        let (r, combo) = self.reduce_row(row);
        if r.is_empty() {
            return None;
        }
        let f = &self.field;
        let lead = r[0].0;
        let inv = f.inv(&r[0].1);
        let r = scale(f, &r, &inv);
        if let Some(cs) = &mut self.combos {
            let c = axpy(f, &vec![(idx, f.one())], &f.one(), &combo);
            cs.push(scale(f, &c, &inv));
        }
        self.pivots.insert(lead, self.rows.len());
        self.rows.push(r);
        Some(lead)
    }

    /// Whether `row` lies in the span of the inserted rows.
    pub fn contains(&self, row: SparseRow<F::E>) -> bool {
        self.reduce_row(row).0.is_empty()
    }

    /// Coefficients (indexed by insertion order) expressing `row` in the
    /// inserted rows, or `None` when it is outside their span.
    pub fn express(&self, row: SparseRow<F::E>) -> Option<SparseRow<F::E>> {
        assert!(self.combos.is_some(), "express needs a tracking echelon");
        let (r, combo) = self.reduce_row(row);
        if !r.is_empty() {
            return None;
        }
        Some(combo)
    }
}

/// Exact sparse rational matrix; rows are sorted and hold no zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    rows: Vec<SparseRow<Q>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RankMode {
    Exact,
    Modular(Vec<u64>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankReport {
    pub rank: usize,
    /// Exact mode: always true. Modular mode: whether every prime gave the
    /// same rank.
    pub agree: bool,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, rows: vec![vec![]; nrows] }
    }

    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        entries: impl IntoIterator<Item = (usize, usize, Q)>,
    ) -> Result<Self, LinalgError> {
        let mut rows: Vec<SparseRow<Q>> = vec![vec![]; nrows];
        for (i, j, v) in entries {
            if i >= nrows || j >= ncols {
                return Err(LinalgError::OutOfRange(i, j));
            }
            if !v.is_zero() {
                rows[i].push((j, v));
            }
        }
        for (i, r) in rows.iter_mut().enumerate() {
            r.sort_by_key(|(c, _)| *c);
            if let Some(w) = r.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(LinalgError::Duplicate(i, w[0].0));
            }
        }
        Ok(Self { nrows, ncols, rows })
    }

    /// Builds from sparse rows that may be unsorted and contain zeros;
    /// duplicate columns within a row are summed.
    pub fn from_rows(ncols: usize, rows: Vec<SparseRow<Q>>) -> Self {
        let rows = rows
            .into_iter()
            .map(|r| {
                let mut m: BTreeMap<usize, Q> = BTreeMap::new();
                for (c, v) in r {
                    assert!(c < ncols, "column {c} out of range");
                    *m.entry(c).or_insert_with(Q::zero) += v;
                }
                m.into_iter().filter(|(_, v)| !v.is_zero()).collect()
            })
            .collect::<Vec<_>>();
        Self { nrows: rows.len(), ncols, rows }
    }

    pub fn from_dense(d: &[Vec<Q>]) -> Self {
        let ncols = d.first().map_or(0, Vec::len);
        Self::from_rows(ncols, d.iter().map(|r| r.iter().cloned().enumerate().collect()).collect())
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &SparseRow<Q> {
        &self.rows[i]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(Vec::is_empty)
    }

    pub fn get(&self, i: usize, j: usize) -> Q {
        self.rows[i]
            .binary_search_by_key(&j, |(c, _)| *c)
            .map(|k| self.rows[i][k].1.clone())
            .unwrap_or_else(|_| Q::zero())
    }

    pub fn transpose(&self) -> Self {
        let mut rows: Vec<SparseRow<Q>> = vec![vec![]; self.ncols];
        for (i, r) in self.rows.iter().enumerate() {
            for (j, v) in r {
                rows[*j].push((i, v.clone()));
            }
        }
        Self { nrows: self.ncols, ncols: self.nrows, rows }
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &SparseMatrix) -> Result<SparseMatrix, LinalgError> {
        if self.ncols != other.nrows {
            return Err(LinalgError::Dimension { expected: self.ncols, got: other.nrows });
        }
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut acc: BTreeMap<usize, Q> = BTreeMap::new();
                for (k, a) in r {
                    for (j, b) in &other.rows[*k] {
                        *acc.entry(*j).or_insert_with(Q::zero) += a * b;
                    }
                }
                acc.into_iter().filter(|(_, v)| !v.is_zero()).collect()
            })
            .collect();
        Ok(SparseMatrix { nrows: self.nrows, ncols: other.ncols, rows })
    }

    /// Restriction to the given columns (renumbered in the given order).
    pub fn select_columns(&self, cols: &[usize]) -> SparseMatrix {
        let mut pos = vec![usize::MAX; self.ncols];
        for (k, &c) in cols.iter().enumerate() {
            pos[c] = k;
        }
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut out: SparseRow<Q> = r
                    .iter()
                    .filter(|(c, _)| pos[*c] != usize::MAX)
                    .map(|(c, v)| (pos[*c], v.clone()))
                    .collect();
                out.sort_by_key(|(c, _)| *c);
                out
            })
            .collect();
        SparseMatrix { nrows: self.nrows, ncols: cols.len(), rows }
    }

    pub fn select_rows(&self, rows: &[usize]) -> SparseMatrix {
        SparseMatrix {
            nrows: rows.len(),
            ncols: self.ncols,
            rows: rows.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    /// Column order by increasing fill, a static Markowitz-style ordering.
    fn sparse_column_order(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.ncols];
        for r in &self.rows {
            for (c, _) in r {
                counts[*c] += 1;
            }
        }
        let mut order: Vec<usize> = (0..self.ncols).collect();
        order.sort_by_key(|&c| (counts[c], c));
        order
    }

    fn rank_exact(&self) -> usize {
        let order = self.sparse_column_order();
        let m = self.select_columns(&order);
        let mut rows: Vec<&SparseRow<Q>> = m.rows.iter().collect();
        rows.sort_by_key(|r| r.len());
        let mut ech = Echelon::new(Rationals, false);
        for r in rows {
            ech.insert(r.clone());
        }
        ech.rank()
    }

    /// Rank modulo `p`; `None` when `p` divides some denominator.
    pub fn rank_mod(&self, p: u64) -> Option<usize> {
        let f = PrimeField { p };
        let mut ech = Echelon::new(f, false);
        for r in &self.rows {
            let mut red = Vec::with_capacity(r.len());
            for (c, v) in r {
                let x = f.reduce(v)?;
                if x != 0 {
                    red.push((*c, x));
                }
            }
            ech.insert(red);
        }
        Some(ech.rank())
    }

    pub fn rank(&self, mode: &RankMode) -> Result<RankReport, LinalgError> {
        match mode {
            RankMode::Exact => Ok(RankReport { rank: self.rank_exact(), agree: true }),
            RankMode::Modular(primes) => {
                if primes.is_empty() {
                    return Err(LinalgError::NoPrimes);
                }
                let ranks: Vec<Option<usize>> = primes.iter().map(|&p| self.rank_mod(p)).collect();
                let best = ranks.iter().flatten().copied().max().unwrap_or(0);
                let agree = ranks.iter().all(|r| *r == Some(best));
                Ok(RankReport { rank: best, agree })
            }
        }
    }

    /// Indices of the first linearly independent rows, in order.
    pub fn independent_rows(&self) -> Vec<usize> {
        let mut ech = Echelon::new(Rationals, false);
        (0..self.nrows).filter(|&i| ech.insert(self.rows[i].clone()).is_some()).collect()
    }

    pub fn mul_vec(&self, v: &[Q]) -> Result<Vec<Q>, LinalgError> {
        if v.len() != self.ncols {
            return Err(LinalgError::Dimension { expected: self.ncols, got: v.len() });
        }
        Ok(self.rows.iter().map(|r| r.iter().map(|(c, x)| x * &v[*c]).sum()).collect())
    }

    /// Debug dump: `r c` then one `i j num/den` line per entry.
    pub fn to_dump(&self) -> String {
        let mut s = format!("{} {}\n", self.nrows, self.ncols);
        for (i, r) in self.rows.iter().enumerate() {
            for (j, v) in r {
                writeln!(s, "{i} {j} {}", q_to_string(v)).unwrap();
            }
        }
        s
    }

    pub fn from_dump(s: &str) -> Result<Self, LinalgError> {
        let mut lines = s.lines().filter(|l| !l.trim().is_empty());
        let bad = |m: &str| LinalgError::Parse(m.to_string());
        let head = lines.next().ok_or_else(|| bad("empty"))?;
        let dims: Vec<usize> =
            head.split_whitespace().map(|x| x.parse().map_err(|_| bad(head))).collect::<Result<_, _>>()?;
        if dims.len() != 2 {
            return Err(bad(head));
        }
        let mut entries = vec![];
        for l in lines {
            let p: Vec<&str> = l.split_whitespace().collect();
            if p.len() != 3 {
                return Err(bad(l));
            }
            let i = p[0].parse().map_err(|_| bad(l))?;
            let j = p[1].parse().map_err(|_| bad(l))?;
            let v = q_from_str(p[2]).ok_or_else(|| bad(l))?;
            entries.push((i, j, v));
        }
        Self::from_triplets(dims[0], dims[1], entries)
    }
}

/// Solves `cᵀ B = v` for the rows of `B`, returning `None` when `v` is not
/// in the row span.
pub fn solve_in_span(b: &SparseMatrix, v: &[Q]) -> Result<Option<Vec<Q>>, LinalgError> {
    if v.len() != b.ncols {
        return Err(LinalgError::Dimension { expected: b.ncols, got: v.len() });
    }
    let solver = SpanSolver::new(b);
    Ok(solver.solve(v))
}

/// Reusable solver for `cᵀ B = v` against a fixed `B`.
#[derive(Clone, Debug)]
pub struct SpanSolver {
    ech: Echelon<Rationals>,
    nrows: usize,
    ncols: usize,
}

impl SpanSolver {
    pub fn new(b: &SparseMatrix) -> Self {
        let mut ech = Echelon::new(Rationals, true);
        for r in &b.rows {
            ech.insert(r.clone());
        }
        Self { ech, nrows: b.nrows, ncols: b.ncols }
    }

    pub fn rank(&self) -> usize {
        self.ech.rank()
    }

    pub fn solve_sparse(&self, v: SparseRow<Q>) -> Option<SparseRow<Q>> {
        self.ech.express(v)
    }

    pub fn solve(&self, v: &[Q]) -> Option<Vec<Q>> {
        assert_eq!(v.len(), self.ncols);
        let row: SparseRow<Q> =
            v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (i, x.clone())).collect();
        let c = self.ech.express(row)?;
        let mut out = vec![Q::zero(); self.nrows];
        for (i, x) in c {
            out[i] = x;
        }
        Some(out)
    }
}

/// Dense textbook Gaussian elimination, kept as an independent check.
pub fn dense_rank(rows: &[Vec<Q>]) -> usize {
    let mut m: Vec<Vec<Q>> = rows.to_vec();
    let ncols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..ncols {
        let Some(p) = (rank..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(rank, p);
        let piv = m[rank][c].clone();
        for i in 0..m.len() {
            if i != rank && !m[i][c].is_zero() {
                let f = &m[i][c] / &piv;
                for k in c..ncols {
                    let t = &f * &m[rank][k];
                    m[i][k] -= t;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Basis of `{x : M x = 0}` for a dense matrix with `ncols` columns, one
/// vector per free column of the reduced row echelon form.
pub fn dense_nullspace(rows: &[Vec<Q>], ncols: usize) -> Vec<Vec<Q>> {
    let mut m: Vec<Vec<Q>> = rows.to_vec();
    let mut pivots = vec![];
    let mut rank = 0;
    for c in 0..ncols {
        let Some(p) = (rank..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(rank, p);
        let inv = m[rank][c].recip();
        for k in c..ncols {
            m[rank][k] = &m[rank][k] * &inv;
        }
        for i in 0..m.len() {
            if i != rank && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for k in c..ncols {
                    let t = &f * &m[rank][k];
                    m[i][k] -= t;
                }
            }
        }
        pivots.push(c);
        rank += 1;
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); ncols];
            v[f] = Q::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[r][f].clone();
            }
            v
        })
        .collect()
}

pub fn is_integral(x: &Q) -> bool {
    x.denom().is_one()
}

pub fn abs(x: &Q) -> Q {
    x.abs()
}
