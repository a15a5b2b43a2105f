//! Psi and kappa integrals on single vertices.

use wss::intersect::{integrate_vertex, psi_correlator};
use wss::linalg::q_to_string;

fn main() {
    let cases: [(u32, &[u32]); 6] = [(0, &[0, 0, 0]), (0, &[2, 0, 0, 0, 0]), (1, &[1]), (2, &[4]), (2, &[3, 1]), (3, &[7])];
    for (g, a) in cases {
        let args: Vec<String> = a.iter().map(|d| format!("τ{d}")).collect();
        println!("<{}>_{g} = {}", args.join(" "), q_to_string(&psi_correlator(g, a)));
    }
    // kappa_1 on M̄_{1,1} and kappa_3 on M̄_2
    println!("∫ κ1 over M̄_(1,1) = {}", q_to_string(&integrate_vertex(1, &[0], &[1])));
    println!("∫ κ3 over M̄_2 = {}", q_to_string(&integrate_vertex(2, &[], &[3])));
}
