//! Reference tables and entrywise verification of result documents.

use serde::{Deserialize, Serialize};

use crate::graph::Variant;
use crate::weights::{Direction, WeightTable};

/// Reference tables shipped with the crate.
pub const BUNDLED: &str = include_str!("../data/known.json");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnownEntry {
    pub q: usize,
    pub r: usize,
    pub sector: String,
    pub dim: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnownTable {
    pub space: [u32; 2],
    pub variant: Variant,
    pub direction: Direction,
    /// Where the numbers come from.
    pub source: String,
    /// Weights and sectors the table is complete for; entries absent there
    /// are zero.
    pub weights: Vec<usize>,
    pub sectors: Vec<String>,
    pub entries: Vec<KnownEntry>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnownFile {
    pub tables: Vec<KnownTable>,
}

impl KnownTable {
    fn expected(&self, q: usize, r: usize, sector: &str) -> u64 {
        self.entries.iter().find(|e| e.q == q && e.r == r && e.sector == sector).map_or(0, |e| e.dim)
    }

    /// Nonzero entries of a result document, complete for its weights.
    pub fn from_result(t: &WeightTable) -> KnownTable {
        let entries = t
            .entries
            .iter()
            .flat_map(|e| e.sectors.iter().filter(|(_, &v)| v > 0).map(move |(s, &v)| KnownEntry { q: e.q, r: e.r, sector: s.clone(), dim: v }))
            .collect();
        let sectors: std::collections::BTreeSet<String> = t.entries.iter().flat_map(|e| e.sectors.keys().cloned()).collect();
        KnownTable {
            space: t.space,
            variant: t.variant,
            direction: t.direction,
            source: "result document".into(),
            weights: t.weights.clone(),
            sectors: sectors.into_iter().collect(),
            entries,
        }
    }
}

impl KnownFile {
    pub fn bundled() -> KnownFile {
        serde_json::from_str(BUNDLED).expect("bundled known results parse")
    }

    /// Either a known-results file or a single result document.
    pub fn parse(text: &str) -> Result<KnownFile, serde_json::Error> {
        serde_json::from_str::<KnownFile>(text).or_else(|e| match WeightTable::from_json(text) {
            Ok(t) => Ok(KnownFile { tables: vec![KnownTable::from_result(&t)] }),
            Err(_) => Err(e),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub space: [u32; 2],
    pub variant: Variant,
    pub direction: Direction,
    pub q: usize,
    pub r: usize,
    pub sector: String,
    pub got: u64,
    pub expected: u64,
}

impl std::fmt::Display for Mismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let [g, n] = self.space;
        let h = if self.direction == Direction::Push { "H" } else { "Hc" };
        write!(f, "M_{{{g},{n}}} {} {}: gr_{} {h}^{} {} got {} expected {}", self.variant, self.direction, self.q, self.r, self.sector, self.got, self.expected)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    /// Entries compared.
    pub compared: usize,
    pub mismatches: Vec<Mismatch>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Compares every sector value of `result` at a weight and sector some
/// matching known table is complete for. Gated-off sectors hold genuine
/// zeros, since the `(1^n)` sector is the whole space.
pub fn verify(result: &WeightTable, known: &KnownFile) -> VerifyReport {
    let mut rep = VerifyReport::default();
    for k in known.tables.iter().filter(|k| k.space == result.space && k.variant == result.variant && k.direction == result.direction) {
        for e in result.entries.iter().filter(|e| k.weights.contains(&e.q)) {
            for (sector, &got) in e.sectors.iter().filter(|(s, _)| k.sectors.contains(s)) {
                let expected = k.expected(e.q, e.r, sector);
                rep.compared += 1;
                if got != expected {
                    rep.mismatches.push(Mismatch { space: k.space, variant: k.variant, direction: k.direction, q: e.q, r: e.r, sector: sector.clone(), got, expected });
                }
            }
        }
        // known nonzero entries the result should contain
        for ke in k.entries.iter().filter(|ke| result.weights.contains(&ke.q)) {
            let present = result.entry(ke.q, ke.r).is_some_and(|e| e.sectors.contains_key(&ke.sector));
            let computed_sector = result.entries.iter().any(|e| e.sectors.contains_key(&ke.sector));
            if !present && computed_sector {
                rep.compared += 1;
                rep.mismatches.push(Mismatch { space: k.space, variant: k.variant, direction: k.direction, q: ke.q, r: ke.r, sector: ke.sector.clone(), got: 0, expected: ke.dim });
            }
        }
    }
    rep
}
