//! gr_q H^r and gr_{2d-q} H_c^{2d-r} computed independently, then compared.

use wss::graph::Variant;
use wss::weights::{duality_check, e2_table, Artifacts, Direction, TableRequest};

fn main() {
    let art = Artifacts::new();
    for (g, n) in [(1, 1), (1, 2), (2, 1), (0, 6)] {
        let d = 3 * g as usize + n - 3;
        let req = |dir| TableRequest::new(g, n, Variant::Open, dir, (0..=2 * d).collect()).all_sectors();
        let push = e2_table(&art, &req(Direction::Push)).unwrap();
        let pull = e2_table(&art, &req(Direction::Pull)).unwrap();
        let rep = duality_check(&push, &pull, g, n);
        println!("M_{{{g},{n}}}: {} values compared, dual: {}", rep.compared, rep.ok);
    }
}
