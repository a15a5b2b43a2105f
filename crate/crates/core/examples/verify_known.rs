//! Checking computed tables against the bundled reference values.

use wss::known::{verify, KnownFile};
use wss::weights::{e2_table, Artifacts, TableRequest};

fn main() {
    let known = KnownFile::bundled();
    let art = Artifacts::new();
    for k in known.tables.iter().filter(|k| 3 * k.space[0] + k.space[1] <= 8) {
        let [g, n] = k.space;
        let req = TableRequest::new(g, n as usize, k.variant, k.direction, k.weights.clone()).all_sectors();
        let t = e2_table(&art, &req).unwrap();
        let rep = verify(&t, &known);
        println!("M_{{{g},{n}}} {} {}: {} compared, {}", k.variant, k.direction, rep.compared, if rep.ok() { "ok" } else { "MISMATCH" });
        for m in &rep.mismatches {
            println!("  {m}");
        }
    }
}
