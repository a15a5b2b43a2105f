use serde::{Deserialize, Serialize};

use super::{generators, ring_basis, RingBasis, TautClass, TautError};
use crate::linalg::{dense_nullspace, q_to_string, Q};

/// Ring-table interchange document for one `(g, n, r)` and symmetry.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingTable {
    pub space: [u32; 2],
    pub degree: usize,
    pub symmetry: String,
    pub dimension: usize,
    pub basis: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reduction_probe: Vec<(String, Vec<String>)>,
    /// Spanning generators before reduction, when requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<String>>,
    /// Coordinates of an invariant basis, for a symmetric table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invariants: Option<Vec<Vec<String>>>,
}

/// The plain ring table with up to `probes` non-basis generators reduced.
pub fn ring_table(g: u32, n: usize, r: usize, probes: usize) -> Result<RingTable, TautError> {
    let b = ring_basis(g, n, r)?;
    let mut reduction_probe = vec![];
    if probes > 0 {
        for s in generators(g, n, r)?.iter().filter(|s| !b.basis.contains(s)).take(probes) {
            let v = b.reduce(&TautClass::from_stratum(s))?;
            reduction_probe.push((s.encode(), v.iter().map(q_to_string).collect()));
        }
    }
    Ok(RingTable {
        space: [g, n as u32],
        degree: r,
        symmetry: "none".into(),
        dimension: b.dim(),
        basis: b.basis.iter().map(|s| s.encode()).collect(),
        reduction_probe,
        generators: None,
        invariants: None,
    })
}

/// Ring table restricted to the invariants of a Young subgroup (blocks of
/// consecutive markings), optionally sign-twisted.
pub fn symmetric_ring_table(g: u32, n: usize, r: usize, blocks: &[usize], twist: bool) -> Result<RingTable, TautError> {
    let mut t = ring_table(g, n, r, 0)?;
    let inv = invariants(g, n, r, blocks, twist)?;
    let key = format!("[{}]", blocks.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(","));
    t.symmetry = if twist { format!("{key}/twist") } else { key };
    t.dimension = inv.len();
    t.invariants = Some(inv.iter().map(|v| v.iter().map(q_to_string).collect()).collect());
    Ok(t)
}

/// Matrix of a marking permutation on the basis: row `i` holds the
/// coordinates of `σ · b_i`.
pub fn action_matrix(b: &RingBasis, perm: &[usize]) -> Result<Vec<Vec<Q>>, TautError> {
    b.basis
        .iter()
        .map(|s| b.reduce(&TautClass::from_stratum(s).act(perm)))
        .collect()
}

/// Invariant subspace of `RH^r` under the Young subgroup permuting the
/// consecutive marking blocks of sizes `blocks` (starting at marking 1),
/// optionally twisted by the sign character. Returned as coordinate vectors.
pub fn invariants(g: u32, n: usize, r: usize, blocks: &[usize], twist: bool) -> Result<Vec<Vec<Q>>, TautError> {
    if blocks.iter().sum::<usize>() > n {
        return Err(TautError::Invalid(format!("blocks {blocks:?} exceed {n} markings")));
    }
    let b = ring_basis(g, n, r)?;
    let dim = b.dim();
    let mut constraints: Vec<Vec<Q>> = vec![];
    let mut start = 0;
    for &k in blocks {
        for j in start..start + k.saturating_sub(1) {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.swap(j, j + 1);
            let a = action_matrix(&b, &perm)?;
            let chi = if twist { Q::from_integer((-1).into()) } else { Q::from_integer(1.into()) };
            // x (A - χ I) = 0, written column by column
            for col in 0..dim {
                let mut row: Vec<Q> = (0..dim).map(|i| a[i][col].clone()).collect();
                row[col] -= &chi;
                constraints.push(row);
            }
        }
        start += k;
    }
    Ok(dense_nullspace(&constraints, dim))
}
