//! Recovering S_n characters from invariant dimensions under Young
//! subgroups.

use std::collections::BTreeMap;

use wss::repthy::{irrep_dim, kostka, multiplicities, partitions, render};

fn main() {
    let n = 4;
    let ps = partitions(n);
    for mu in &ps {
        let row: Vec<String> = ps.iter().map(|l| kostka(mu, l).to_string()).collect();
        println!("{mu:?} (dim {}): {}", irrep_dim(mu), row.join(" "));
    }
    // invariants of the regular representation under S_λ are n!/|S_λ|
    let fact = |k: usize| (1..=k as u64).product::<u64>();
    let dims: BTreeMap<_, _> = ps.iter().map(|l| (l.clone(), fact(n) / l.iter().map(|&k| fact(k)).product::<u64>())).collect();
    let mult = multiplicities(&dims).unwrap();
    println!("regular rep = {}", render(&mult, 0));
}
