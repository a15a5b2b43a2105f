//! Scheduling and persistence around the weight tables: every
//! `(weight, sector)` pair is a task, nontrivial sectors wait for the
//! trivial one, and task outputs plus per-graph artifacts live in a
//! content-addressed disk cache.

mod cache;
mod sched;

use std::collections::BTreeMap;
use std::sync::Arc;

pub use cache::{DiskCache, DiskStats};
pub use sched::{resident_bytes, run, Cost, Dag, EngineError, Report, RunConfig, Task, TaskError};

use crate::repthy::Partition;
use crate::taut::{dim, TautError};
use crate::weights::{assemble, partition_key, request_sectors, request_weights, sector_result, Artifacts, CacheStats, SectorResult, Store, TableRequest, WeightTable};

/// Default memory budget: `WSS_MEMORY_BUDGET` in bytes (suffixes K, M, G
/// accepted), otherwise unbounded.
pub fn default_memory_budget() -> u64 {
    std::env::var("WSS_MEMORY_BUDGET").ok().and_then(|s| parse_bytes(&s)).unwrap_or(u64::MAX)
}

pub fn parse_bytes(s: &str) -> Option<u64> {
    let s = s.trim();
    let (num, mult) = match s.chars().last()? {
        'K' | 'k' => (&s[..s.len() - 1], 1u64 << 10),
        'M' | 'm' => (&s[..s.len() - 1], 1 << 20),
        'G' | 'g' => (&s[..s.len() - 1], 1 << 30),
        _ => (s, 1),
    };
    num.trim().parse::<u64>().ok()?.checked_mul(mult)
}

pub struct EngineConfig {
    pub workers: usize,
    pub memory_budget: u64,
    pub cache: Option<Arc<DiskCache>>,
}

impl EngineConfig {
    pub fn new(workers: usize) -> Self {
        EngineConfig { workers: workers.max(1), memory_budget: default_memory_budget(), cache: None }
    }

    pub fn with_cache(mut self, cache: Arc<DiskCache>) -> Self {
        self.cache = Some(cache);
        self
    }
}

/// An engine bound to one artifact store, reusable across requests so that
/// later variants reuse earlier per-graph work.
pub struct Engine {
    cfg: EngineConfig,
    art: Artifacts,
}

/// Counters for one `compute` call.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunSummary {
    pub tasks: usize,
    /// Task outputs served from the disk cache.
    pub loaded: usize,
    pub retries: usize,
    pub artifacts: CacheStats,
}

pub struct Computation {
    pub table: WeightTable,
    pub summary: RunSummary,
}

#[derive(Debug, thiserror::Error)]
pub enum ComputeError {
    #[error(transparent)]
    Taut(#[from] TautError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

fn sector_key(req: &TableRequest, q: usize, lambda: &[usize], gated: bool) -> String {
    format!("sector|{}|{}|{}|{}|{}|{}|{}", req.g, req.n, req.variant, req.direction, q, partition_key(lambda), if gated { "gated" } else { "all" })
}

fn cost_of(d: usize, q: usize) -> Cost {
    match (d, q / 2) {
        (0..=3, _) => Cost::Small,
        (4..=5, _) | (_, 0..=1) => Cost::Medium,
        _ => Cost::Large,
    }
}

impl Engine {
    pub fn new(cfg: EngineConfig) -> Self {
        let art = match &cfg.cache {
            Some(c) => Artifacts::with_store(c.clone() as Arc<dyn Store>),
            None => Artifacts::new(),
        };
        Engine { cfg, art }
    }

    pub fn artifacts(&self) -> &Artifacts {
        &self.art
    }

    /// The task graph of a request, in the order the serial computation
    /// would visit it.
    pub fn plan(&self, req: &TableRequest) -> Result<(Dag, Vec<(usize, Partition, String)>), ComputeError> {
        let d = dim(req.g, req.n)?;
        let mut tasks = vec![];
        let mut units = vec![];
        for q in request_weights(req)? {
            let mut trivial = None;
            for (i, lambda) in request_sectors(req).into_iter().enumerate() {
                let gated = i > 0 && !req.exhaustive;
                let key = sector_key(req, q, &lambda, gated);
                let deps = if gated { vec![trivial.clone().expect("trivial sector first")] } else { vec![] };
                if i == 0 {
                    trivial = Some(key.clone());
                }
                tasks.push(Task::new(key.clone(), deps, cost_of(d, q)));
                units.push((q, lambda, key));
            }
        }
        Ok((Dag::new(tasks)?, units))
    }

    pub fn compute(&self, req: &TableRequest) -> Result<Computation, ComputeError> {
        let (dag, units) = self.plan(req)?;
        let lambdas: BTreeMap<&str, (usize, &Partition)> = units.iter().map(|(q, l, k)| (k.as_str(), (*q, l))).collect();
        let before = self.art.stats();
        let loaded = std::sync::atomic::AtomicUsize::new(0);
        let budget = self.cfg.memory_budget;
        let report = run(&dag, RunConfig::new(self.cfg.workers, budget), |task, deps: &[Arc<SectorResult>]| {
            if let Some(c) = &self.cfg.cache {
                if let Some(res) = c.load(&task.key).and_then(|s| serde_json::from_str::<SectorResult>(&s).ok()) {
                    loaded.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    return Ok(res);
                }
            }
            if resident_bytes().is_some_and(|r| r > budget) {
                return Err(TaskError::OutOfMemory);
            }
            let (q, lambda) = lambdas[task.key.as_str()];
            let support = deps.first().map(|t| t.support());
            let res = sector_result(&self.art, req, q, lambda, support.as_ref()).map_err(|e| TaskError::Failed(e.to_string()))?;
            if let Some(c) = &self.cfg.cache {
                c.save(&task.key, &serde_json::to_string(&res).expect("serializable"));
            }
            Ok(res)
        })?;
        let results: Vec<SectorResult> = units.iter().map(|(_, _, k)| (*report.outputs[k]).clone()).collect();
        let table = assemble(req, results)?;
        let after = self.art.stats();
        let artifacts = CacheStats { hits: after.hits - before.hits, misses: after.misses - before.misses, ranks: after.ranks - before.ranks };
        let summary = RunSummary { tasks: dag.tasks().len(), loaded: loaded.into_inner(), retries: report.retries, artifacts };
        Ok(Computation { table, summary })
    }
}
