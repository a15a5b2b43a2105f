//! Weight-graded cohomology of M_{0,5} with its S_5 decomposition.

use wss::cli::render_table;
use wss::graph::Variant;
use wss::weights::{e2_table, Artifacts, Direction, TableRequest};

fn main() {
    let art = Artifacts::new();
    for dir in [Direction::Push, Direction::Pull] {
        let req = TableRequest::new(0, 5, Variant::Open, dir, (0..=4).collect()).all_sectors();
        let t = e2_table(&art, &req).expect("supported");
        print!("{}", render_table(&t));
        for c in t.columns.iter().filter(|c| c.lambda == [1, 1, 1, 1, 1]) {
            println!("  q={} p={} E1={} rank={} E2={}", c.q, c.p, c.e1, c.rank_out, c.e2);
        }
    }
}
