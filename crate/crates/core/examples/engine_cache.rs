//! Parallel engine with a disk cache: a cold run, a warm rerun, and a
//! second variant reusing per-graph artifacts.

use std::sync::Arc;

use wss::engine::{DiskCache, Engine, EngineConfig};
use wss::graph::Variant;
use wss::weights::{Direction, TableRequest};

fn main() {
    let dir = std::env::temp_dir().join(format!("wss-example-{}", std::process::id()));
    let engine = || Engine::new(EngineConfig::new(4).with_cache(Arc::new(DiskCache::open(&dir).unwrap())));
    // exhaustive: a gated open run may skip columns the ct run needs
    let open = TableRequest { exhaustive: true, ..TableRequest::new(1, 3, Variant::Open, Direction::Push, (0..=6).collect()).all_sectors() };

    let cold = engine().compute(&open).unwrap().summary;
    println!("cold: {} tasks, {} ranks", cold.tasks, cold.artifacts.ranks);
    let warm = engine().compute(&open).unwrap().summary;
    println!("warm: {} of {} tasks loaded, {} ranks", warm.loaded, warm.tasks, warm.artifacts.ranks);

    let ct = TableRequest { variant: Variant::Ct, ..open };
    let s = engine().compute(&ct).unwrap().summary;
    println!("ct after open: artifact reuse {:.0}%", 100.0 * s.artifacts.reuse());
    std::fs::remove_dir_all(&dir).ok();
}
