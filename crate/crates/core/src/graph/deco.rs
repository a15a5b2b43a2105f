use super::{GraphIso, StableGraph};

/// A κ/ψ monomial on each vertex of a graph.
///
/// `kappa[v]` is the sorted multiset of κ-indices at `v` (so `[1, 1, 2]` is
/// κ₁²κ₂); `psi[h]` is the ψ-exponent at half-edge `h`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Decoration {
    pub kappa: Vec<Vec<u32>>,
    pub psi: Vec<u32>,
}

impl Decoration {
    pub fn trivial(g: &StableGraph) -> Self {
        Self { kappa: vec![vec![]; g.num_vertices()], psi: vec![0; g.num_half_edges()] }
    }

    pub fn is_trivial(&self) -> bool {
        self.kappa.iter().all(Vec::is_empty) && self.psi.iter().all(|&p| p == 0)
    }

    /// Degree of the monomial at vertex `v`.
    pub fn vertex_degree(&self, g: &StableGraph, v: usize) -> usize {
        let k: u32 = self.kappa[v].iter().sum();
        let p: u32 = g.vertex_half_edges(v).iter().map(|&h| self.psi[h]).sum();
        (k + p) as usize
    }

    pub fn degree(&self) -> usize {
        let k: u32 = self.kappa.iter().flatten().sum();
        let p: u32 = self.psi.iter().sum();
        (k + p) as usize
    }

    /// Transports the decoration along an isomorphism out of `g`.
    pub fn transport(&self, iso: &GraphIso) -> Decoration {
        let mut kappa = vec![vec![]; self.kappa.len()];
        for (v, k) in self.kappa.iter().enumerate() {
            kappa[iso.vertex_map[v]] = k.clone();
        }
        let mut psi = vec![0; self.psi.len()];
        for (h, &p) in self.psi.iter().enumerate() {
            psi[iso.map_half_edge(h)] = p;
        }
        Decoration { kappa, psi }
    }

    /// Product of two monomials on the same graph.
    pub fn mul(&self, other: &Decoration) -> Decoration {
        let kappa = self
            .kappa
            .iter()
            .zip(&other.kappa)
            .map(|(a, b)| {
                let mut k: Vec<u32> = a.iter().chain(b).copied().collect();
                k.sort_unstable();
                k
            })
            .collect();
        let psi = self.psi.iter().zip(&other.psi).map(|(a, b)| a + b).collect();
        Decoration { kappa, psi }
    }

    pub fn encode(&self) -> String {
        let k: Vec<String> = self
            .kappa
            .iter()
            .map(|ks| ks.iter().map(u32::to_string).collect::<Vec<_>>().join(","))
            .map(|s| format!("[{s}]"))
            .collect();
        let p: Vec<String> = self.psi.iter().map(u32::to_string).collect();
        format!("K[{}];P[{}]", k.join(""), p.join(","))
    }
}
