//! Bases of the tautological ring of M̄_{1,3}, degree by degree, and the
//! interchange table for one degree.

use wss::taut::{dim, ring_basis, ring_table};

fn main() {
    let (g, n) = (1, 3);
    let d = dim(g, n).unwrap();
    for r in 0..=d {
        let b = ring_basis(g, n, r).expect("pairing supported");
        println!("RH^{r}: dim {} from {} complementary probes", b.dim(), b.complement.len());
    }
    let t = ring_table(g, n, 1, 3).unwrap();
    println!("{}", serde_json::to_string_pretty(&t).unwrap());
}
