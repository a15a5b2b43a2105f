//! Boundary strata of M̄_{1,2} by codimension, with automorphism counts.

use wss::graph::{automorphisms, canonical_form, enumerate_stable_graphs};

fn main() {
    let (g, n) = (1, 2);
    for e in 0..=3 * g as usize - 3 + n {
        let graphs = enumerate_stable_graphs(g, n, e).expect("stable");
        println!("codimension {e}: {} strata", graphs.len());
        for gr in graphs.iter() {
            let auts = automorphisms(gr, None).len();
            // canonical forms are already stored; relabeling is a no-op
            assert_eq!(canonical_form(gr, None, None).graph.encode(), gr.encode());
            println!("  {}  |Aut| = {auts}", gr.encode());
        }
    }
}
