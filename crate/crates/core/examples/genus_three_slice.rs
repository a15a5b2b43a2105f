//! Weight 2 of M_{3,3}, all sectors.

use std::time::Instant;

use wss::cli::render_table;
use wss::graph::Variant;
use wss::weights::{e2_table, Artifacts, Direction, TableRequest};

fn main() {
    let t0 = Instant::now();
    let req = TableRequest::new(3, 3, Variant::Open, Direction::Push, vec![0, 2]).all_sectors();
    let t = e2_table(&Artifacts::new(), &req).expect("supported");
    print!("{}", render_table(&t));
    println!("{:.2?}", t0.elapsed());
}
