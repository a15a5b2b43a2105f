use super::*;
use crate::linalg::{q, qi};

fn sg(genera: Vec<u32>, legs: Vec<usize>, edges: Vec<(usize, usize)>) -> StableGraph {
    StableGraph::new(genera, legs, edges).unwrap()
}

fn plain(g: StableGraph) -> DecoratedStratum {
    DecoratedStratum::undecorated(g)
}

fn smooth_with(g: u32, n: usize, kappa: Vec<u32>, psi: Vec<u32>) -> DecoratedStratum {
    let gr = StableGraph::smooth(g, n).unwrap();
    DecoratedStratum::new(gr, Decoration { kappa: vec![kappa], psi })
}

/// Boundary divisor of genus-zero curves with markings `side` (0-based) on
/// the first component.
fn d0(n: usize, side: &[usize]) -> DecoratedStratum {
    let legs = (0..n).map(|m| if side.contains(&m) { 0 } else { 1 }).collect();
    plain(sg(vec![0, 0], legs, vec![(0, 1)]))
}

#[test]
fn self_intersection_of_divisor_in_five_pointed_genus_zero() {
    let d = d0(5, &[0, 1]);
    assert_eq!(integrate_product(&d, &d), qi(-1));
}

#[test]
fn psi_squared_and_psi_against_divisors() {
    let psi1 = smooth_with(0, 5, vec![], vec![1, 0, 0, 0, 0]);
    assert_eq!(integrate_product(&psi1, &psi1), qi(1));
    assert_eq!(integrate_stratum(&smooth_with(0, 5, vec![], vec![2, 0, 0, 0, 0])), qi(1));
    assert_eq!(integrate_product(&psi1, &d0(5, &[0, 1])), qi(0));
    assert_eq!(integrate_product(&psi1, &d0(5, &[2, 3])), qi(1));
    // ψ₁ is the sum of the divisors separating 1 from {2, 3}
    let sum: Q = [&[0usize, 3][..], &[0, 4], &[0, 3, 4]]
        .iter()
        .map(|s| integrate_product(&psi1, &d0(5, s)))
        .sum();
    assert_eq!(sum, qi(1));
}

#[test]
fn genus_one_values() {
    let lp = plain(sg(vec![0], vec![0], vec![(0, 0)]));
    assert_eq!(integrate_stratum(&lp), q(1, 2));
    let one = plain(StableGraph::smooth(1, 1).unwrap());
    assert_eq!(integrate_product(&lp, &one), q(1, 2));
    assert_eq!(integrate_stratum(&smooth_with(1, 1, vec![1], vec![0])), q(1, 24));
    assert_eq!(integrate_stratum(&smooth_with(0, 4, vec![1], vec![0; 4])), qi(1));
}

#[test]
fn kappa_products() {
    let k1 = smooth_with(0, 5, vec![1], vec![0; 5]);
    assert_eq!(integrate_product(&k1, &k1), qi(5));
    // π_*(ψ²ψ²ψ²) = κ₁³ + 3κ₁κ₂ + 2κ₃ and π_*(ψ²ψ³) = κ₁κ₂ + κ₃
    let k111 = integrate_vertex(2, &[], &[1, 1, 1]);
    let k12 = integrate_vertex(2, &[], &[1, 2]);
    let k3 = integrate_vertex(2, &[], &[3]);
    assert_eq!(&k111 + qi(3) * &k12 + qi(2) * &k3, psi_correlator(2, &[2, 2, 2]));
    assert_eq!(&k12 + &k3, psi_correlator(2, &[2, 3]));
    assert_eq!(psi_correlator(2, &[2, 2, 2]), q(7, 240));
    assert_eq!(k111, q(43, 2880));
}

#[test]
fn genus_two_kappa_relation() {
    // κ₁ = 12λ₁ - δ with λ₁ = δ₀/10 + δ₁/5 on the genus-two moduli space
    let k2 = smooth_with(2, 0, vec![1, 1], vec![]);
    let delta0 = plain(sg(vec![1], vec![], vec![(0, 0)]));
    let delta1 = plain(sg(vec![1, 1], vec![], vec![(0, 1)]));
    let lhs = integrate_product(&k2, &delta0) * q(1, 5) + integrate_product(&k2, &delta1) * q(7, 5);
    assert_eq!(lhs, integrate_vertex(2, &[], &[1, 1, 1]));
}

#[test]
fn pullback_matches_product() {
    let a = sg(vec![0, 0], vec![0, 0, 1, 1, 1], vec![(0, 1)]);
    let b = d0(5, &[0, 1]);
    let terms = pullback(&a, &b);
    // ∫[A]·[B] = (1/|Aut A|) Σ c ∏_v ∫ [part_v]
    let via: Q = terms
        .iter()
        .map(|(c, parts)| parts.iter().map(integrate_stratum).fold(c.clone(), |x, y| x * y))
        .sum();
    assert_eq!(via, integrate_product(&plain(a), &b));
}

#[test]
fn product_is_symmetric_across_orders() {
    let cases: Vec<(u32, usize)> = vec![(0, 5), (0, 6), (1, 2), (1, 3), (2, 0), (2, 1)];
    for (g, n) in cases {
        let d = 3 * g as usize + n - 3;
        for r in 0..=d {
            let low: Vec<StableGraph> =
                (0..=r).flat_map(|e| enumerate_stable_graphs(g, n, e).unwrap().to_vec()).collect();
            for x in low.iter().filter(|x| x.num_edges() == r) {
                for y in enumerate_stable_graphs(g, n, d - r).unwrap().iter() {
                    let (x, y) = (plain(x.clone()), plain(y.clone()));
                    assert_eq!(product_ordered(&x, &y), product_ordered(&y, &x), "{} {}", x.graph, y.graph);
                }
            }
        }
    }
}
