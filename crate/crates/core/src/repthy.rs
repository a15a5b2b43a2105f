//! Symmetric-group bookkeeping: per-sector invariant dimensions to
//! multiplicities of irreducibles.

use std::collections::{BTreeMap, HashMap};
use std::sync::{OnceLock, RwLock};

use thiserror::Error;

pub type Partition = Vec<usize>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RepError {
    #[error("missing invariant dimension for sector {0:?}")]
    Missing(Partition),
    #[error("negative multiplicity {value} for s{part:?}; the input is inconsistent")]
    Negative { part: Partition, value: i64 },
    #[error("n must be positive")]
    Empty,
}

/// Partitions of `n` in reverse lexicographic order, `(n)` first and
/// `(1^n)` last. This order refines dominance.
pub fn partitions(n: usize) -> Vec<Partition> {
    fn rec(n: usize, max: usize, cur: &mut Partition, out: &mut Vec<Partition>) {
        if n == 0 {
            out.push(cur.clone());
            return;
        }
        for k in (1..=n.min(max)).rev() {
            cur.push(k);
            rec(n - k, k, cur, out);
            cur.pop();
        }
    }
    let mut out = vec![];
    rec(n, n, &mut vec![], &mut out);
    out
}

fn kostka_cache() -> &'static RwLock<HashMap<(Partition, Partition), u64>> {
    static C: OnceLock<RwLock<HashMap<(Partition, Partition), u64>>> = OnceLock::new();
    C.get_or_init(Default::default)
}

/// Number of semistandard tableaux of shape `mu` and content `lambda`
/// (any composition). Peels off the largest entry as a horizontal strip.
pub fn kostka(mu: &[usize], lambda: &[usize]) -> u64 {
    let mu: Partition = mu.iter().copied().filter(|&x| x > 0).collect();
    let content: Partition = lambda.iter().copied().filter(|&x| x > 0).collect();
    if mu.iter().sum::<usize>() != content.iter().sum::<usize>() {
        return 0;
    }
    if content.is_empty() {
        return 1;
    }
    let key = (mu.clone(), content.clone());
    if let Some(&k) = kostka_cache().read().unwrap().get(&key) {
        return k;
    }
    let (&last, rest) = content.split_last().unwrap();
    let mut total = 0;
    // inner shape nu with mu/nu a horizontal strip of size `last`:
    // mu[i+1] <= nu[i] <= mu[i]
    fn strips(mu: &[usize], i: usize, left: usize, nu: &mut Vec<usize>, rest: &[usize], total: &mut u64) {
        if i == mu.len() {
            if left == 0 {
                *total += kostka(nu, rest);
            }
            return;
        }
        let lo = mu.get(i + 1).copied().unwrap_or(0);
        for take in 0..=(mu[i] - lo).min(left) {
            nu.push(mu[i] - take);
            strips(mu, i + 1, left - take, nu, rest, total);
            nu.pop();
        }
    }
    strips(&mu, 0, last, &mut vec![], rest, &mut total);
    kostka_cache().write().unwrap().insert(key, total);
    total
}

/// Dimension of the irreducible `s_mu` by the hook length formula.
pub fn irrep_dim(mu: &[usize]) -> u64 {
    let n: usize = mu.iter().sum();
    let num: u128 = (1..=n as u128).product();
    // hook of cell (i, j): arm + leg + 1
    let hooks: u128 = mu
        .iter()
        .enumerate()
        .flat_map(|(i, &row)| (0..row).map(move |j| (i, row, j)))
        .map(|(i, row, j)| (row - j + mu[i + 1..].iter().filter(|&&r| r > j).count()) as u128)
        .product();
    (num / hooks) as u64
}

/// Kostka matrix for `n`: `matrix[i][j] = K[partitions[i]][partitions[j]]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KostkaSystem {
    pub n: usize,
    pub partitions: Vec<Partition>,
    pub matrix: Vec<Vec<u64>>,
}

pub fn kostka_system(n: usize) -> Result<KostkaSystem, RepError> {
    if n == 0 {
        return Err(RepError::Empty);
    }
    let partitions = partitions(n);
    let matrix = partitions.iter().map(|mu| partitions.iter().map(|la| kostka(mu, la)).collect()).collect();
    Ok(KostkaSystem { n, partitions, matrix })
}

impl KostkaSystem {
    /// Solves `dims[λ] = Σ_μ m[μ] K[μ][λ]` by forward substitution; the
    /// matrix is unitriangular in the partition order.
    pub fn multiplicities(&self, dims: &BTreeMap<Partition, u64>) -> Result<BTreeMap<Partition, u64>, RepError> {
        let mut m: Vec<i64> = vec![];
        for (j, la) in self.partitions.iter().enumerate() {
            let d = *dims.get(la).ok_or_else(|| RepError::Missing(la.clone()))? as i64;
            let acc: i64 = (0..j).map(|i| m[i] * self.matrix[i][j] as i64).sum();
            let value = d - acc;
            if value < 0 {
                return Err(RepError::Negative { part: la.clone(), value });
            }
            m.push(value);
        }
        Ok(self.partitions.iter().cloned().zip(m.into_iter().map(|x| x as u64)).collect())
    }

    /// Invariant dimensions of a representation with the given
    /// multiplicities.
    pub fn invariant_dims(&self, mult: &BTreeMap<Partition, u64>) -> BTreeMap<Partition, u64> {
        self.partitions
            .iter()
            .enumerate()
            .map(|(j, la)| {
                let d = self.partitions.iter().enumerate().map(|(i, mu)| mult.get(mu).copied().unwrap_or(0) * self.matrix[i][j]).sum();
                (la.clone(), d)
            })
            .collect()
    }
}

pub fn multiplicities(dims: &BTreeMap<Partition, u64>) -> Result<BTreeMap<Partition, u64>, RepError> {
    let n = dims.keys().next().map(|p| p.iter().sum()).unwrap_or(0);
    kostka_system(n)?.multiplicities(dims)
}

fn schur(p: &[usize]) -> String {
    format!("s[{}]", p.iter().map(usize::to_string).collect::<Vec<_>>().join(","))
}

/// Renders `Σ m_μ s_μ` times `L^k`, e.g. `(2*s[3] + s[2,1])*L^1`; the Tate
/// factor is omitted for `k = 0`.
pub fn render(mult: &BTreeMap<Partition, u64>, tate: usize) -> String {
    let order = mult.keys().next().map(|p| partitions(p.iter().sum())).unwrap_or_default();
    let terms: Vec<String> = order
        .iter()
        .filter_map(|p| match mult.get(p).copied().unwrap_or(0) {
            0 => None,
            1 => Some(schur(p)),
            c => Some(format!("{c}*{}", schur(p))),
        })
        .collect();
    if terms.is_empty() {
        return "0".into();
    }
    let body = terms.join(" + ");
    if tate == 0 {
        body
    } else if terms.len() == 1 && !body.contains('*') {
        format!("{body}*L^{tate}")
    } else {
        format!("({body})*L^{tate}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(x: &[usize]) -> Partition {
        x.to_vec()
    }

    /// Brute-force semistandard tableau count.
    fn ssyt_oracle(mu: &[usize], content: &[usize]) -> u64 {
        let cells: Vec<(usize, usize)> = mu.iter().enumerate().flat_map(|(i, &r)| (0..r).map(move |j| (i, j))).collect();
        fn fill(idx: usize, cells: &[(usize, usize)], t: &mut BTreeMap<(usize, usize), usize>, left: &mut Vec<usize>) -> u64 {
            if idx == cells.len() {
                return left.iter().all(|&x| x == 0) as u64;
            }
            let (i, j) = cells[idx];
            let mut total = 0;
            for v in 0..left.len() {
                if left[v] == 0 {
                    continue;
                }
                if j > 0 && t[&(i, j - 1)] > v {
                    continue;
                }
                if i > 0 && t[&(i - 1, j)] >= v {
                    continue;
                }
                left[v] -= 1;
                t.insert((i, j), v);
                total += fill(idx + 1, cells, t, left);
                t.remove(&(i, j));
                left[v] += 1;
            }
            total
        }
        fill(0, &cells, &mut BTreeMap::new(), &mut content.to_vec())
    }

    #[test]
    fn small_kostka_numbers() {
        assert_eq!(kostka(&[2], &[2]), 1);
        assert_eq!(kostka(&[1, 1], &[2]), 0);
        assert_eq!(kostka(&[2], &[1, 1]), 1);
        assert_eq!(kostka(&[1, 1], &[1, 1]), 1);
        assert_eq!(kostka(&[2, 1], &[2, 1]), 1);
        assert_eq!(kostka(&[2, 1], &[1, 1, 1]), ssyt_oracle(&[2, 1], &[1, 1, 1]));
        assert_eq!(kostka(&[2, 1], &[1, 1, 1]), 2);
        for n in 1..=6 {
            assert!(partitions(n).iter().all(|la| kostka(&[n], la) == 1));
        }
    }

    #[test]
    fn kostka_matches_tableau_enumeration() {
        for n in 1..=6 {
            for mu in partitions(n) {
                for la in partitions(n) {
                    assert_eq!(kostka(&mu, &la), ssyt_oracle(&mu, &la), "{mu:?} {la:?}");
                }
            }
        }
    }

    #[test]
    fn unitriangular() {
        let k = kostka_system(6).unwrap();
        for i in 0..k.partitions.len() {
            assert_eq!(k.matrix[i][i], 1);
            for j in 0..i {
                assert_eq!(k.matrix[i][j], 0);
            }
        }
        assert_eq!(partitions(5).len(), 7);
        assert_eq!(partitions(3), vec![p(&[3]), p(&[2, 1]), p(&[1, 1, 1])]);
    }

    #[test]
    fn regular_representation() {
        // invariants of a Young subgroup in the regular representation
        // number n! / |S_λ|; the multiplicities are the irreducible dims
        for n in 1..=7 {
            let fact = |k: usize| (1..=k as u64).product::<u64>();
            let dims: BTreeMap<Partition, u64> =
                partitions(n).into_iter().map(|la| { let d = fact(n) / la.iter().map(|&x| fact(x)).product::<u64>(); (la, d) }).collect();
            let m = multiplicities(&dims).unwrap();
            for (mu, c) in m {
                assert_eq!(c, irrep_dim(&mu), "{mu:?}");
            }
        }
    }

    #[test]
    fn trivial_and_inconsistent_inputs() {
        let dims: BTreeMap<Partition, u64> = partitions(4).into_iter().map(|la| (la, 1)).collect();
        let m = multiplicities(&dims).unwrap();
        assert_eq!(m[&p(&[4])], 1);
        assert!(m.iter().filter(|(k, _)| **k != p(&[4])).all(|(_, &c)| c == 0));
        let mut bad = dims.clone();
        bad.insert(p(&[1, 1, 1, 1]), 0);
        assert!(matches!(multiplicities(&bad), Err(RepError::Negative { .. })));
        bad.remove(&p(&[2, 2]));
        assert_eq!(multiplicities(&bad), Err(RepError::Missing(p(&[2, 2]))));
    }

    #[test]
    fn rendering() {
        let m: BTreeMap<Partition, u64> = [(p(&[3]), 2), (p(&[2, 1]), 1), (p(&[1, 1, 1]), 0)].into_iter().collect();
        assert_eq!(render(&m, 1), "(2*s[3] + s[2,1])*L^1");
        let one: BTreeMap<Partition, u64> = [(p(&[3]), 1), (p(&[2, 1]), 0)].into_iter().collect();
        assert_eq!(render(&one, 0), "s[3]");
        assert_eq!(render(&one, 2), "s[3]*L^2");
        assert_eq!(render(&BTreeMap::new(), 1), "0");
    }

    fn mult_strategy(n: usize) -> impl Strategy<Value = BTreeMap<Partition, u64>> {
        let parts = partitions(n);
        proptest::collection::vec(0u64..5, parts.len()).prop_map(move |v| parts.iter().cloned().zip(v).collect())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn round_trip(n in 1usize..=8, seed in any::<u64>()) {
            let parts = partitions(n);
            let m: BTreeMap<Partition, u64> = parts.iter().enumerate().map(|(i, la)| (la.clone(), (seed >> (i % 60)) % 4)).collect();
            let k = kostka_system(n).unwrap();
            let dims = k.invariant_dims(&m);
            prop_assert_eq!(k.multiplicities(&dims).unwrap(), m.clone());
            let total: u64 = m.iter().map(|(mu, c)| c * irrep_dim(mu)).sum();
            prop_assert_eq!(dims[&vec![1; n]], total);
        }

        #[test]
        fn round_trip_small(m in mult_strategy(4)) {
            let k = kostka_system(4).unwrap();
            prop_assert_eq!(k.multiplicities(&k.invariant_dims(&m)).unwrap(), m);
        }
    }
}
