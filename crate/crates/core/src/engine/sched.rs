use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::sync::{Arc, Condvar, Mutex};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Estimated memory class of a task.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cost {
    Small,
    Medium,
    Large,
}

impl Cost {
    /// Bytes reserved against the budget while a task of this class runs.
    pub fn reservation(self) -> u64 {
        match self {
            Cost::Small => 64 << 20,
            Cost::Medium => 512 << 20,
            Cost::Large => 4 << 30,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    /// Canonical operation plus arguments; the output depends on it alone.
    pub key: String,
    pub deps: Vec<String>,
    pub cost: Cost,
}

impl Task {
    pub fn new(key: impl Into<String>, deps: Vec<String>, cost: Cost) -> Self {
        Task { key: key.into(), deps, cost }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TaskError {
    #[error("memory budget exceeded")]
    OutOfMemory,
    #[error("{0}")]
    Failed(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("duplicate task key {0}")]
    Duplicate(String),
    #[error("task {task} depends on unknown {dep}")]
    MissingDep { task: String, dep: String },
    #[error("dependency cycle through {0:?}")]
    Cycle(Vec<String>),
    #[error("task {key} failed: {msg}")]
    TaskFailed { key: String, msg: String },
    #[error("task {0} exceeded the memory budget even when run alone")]
    Exhausted(String),
}

/// A validated task graph.
#[derive(Clone, Debug)]
pub struct Dag {
    tasks: Vec<Task>,
    index: HashMap<String, usize>,
    dependents: Vec<Vec<usize>>,
}

impl Dag {
    pub fn new(tasks: Vec<Task>) -> Result<Dag, EngineError> {
        let mut index = HashMap::new();
        for (i, t) in tasks.iter().enumerate() {
            if index.insert(t.key.clone(), i).is_some() {
                return Err(EngineError::Duplicate(t.key.clone()));
            }
        }
        let mut dependents = vec![vec![]; tasks.len()];
        for (i, t) in tasks.iter().enumerate() {
            for d in &t.deps {
                let &j = index.get(d).ok_or_else(|| EngineError::MissingDep { task: t.key.clone(), dep: d.clone() })?;
                dependents[j].push(i);
            }
        }
        let dag = Dag { tasks, index, dependents };
        dag.check_acyclic()?;
        Ok(dag)
    }

    fn check_acyclic(&self) -> Result<(), EngineError> {
        let mut indeg: Vec<usize> = self.tasks.iter().map(|t| t.deps.len()).collect();
        let mut queue: VecDeque<usize> = (0..self.tasks.len()).filter(|&i| indeg[i] == 0).collect();
        let mut seen = 0;
        while let Some(i) = queue.pop_front() {
            seen += 1;
            for &j in &self.dependents[i] {
                indeg[j] -= 1;
                if indeg[j] == 0 {
                    queue.push_back(j);
                }
            }
        }
        if seen == self.tasks.len() {
            return Ok(());
        }
        let stuck = (0..self.tasks.len()).filter(|&i| indeg[i] > 0).map(|i| self.tasks[i].key.clone()).collect();
        Err(EngineError::Cycle(stuck))
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn get(&self, key: &str) -> Option<&Task> {
        self.index.get(key).map(|&i| &self.tasks[i])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub workers: usize,
    pub memory_budget: u64,
}

impl RunConfig {
    pub fn new(workers: usize, memory_budget: u64) -> Self {
        RunConfig { workers: workers.max(1), memory_budget }
    }
}

/// What happened during a run. Outputs are keyed, so the report does not
/// depend on scheduling order except for `order` and `max_concurrent`.
#[derive(Debug)]
pub struct Report<T> {
    pub outputs: BTreeMap<String, Arc<T>>,
    /// Completion order.
    pub order: Vec<String>,
    pub retries: usize,
    /// Allowed concurrent large tasks at the end of the run.
    pub large_limit: usize,
    pub max_concurrent: usize,
}

struct State<T> {
    ready: BTreeSet<usize>,
    /// Tasks that failed once and must run with nothing else in flight.
    exclusive: BTreeSet<usize>,
    waiting: Vec<usize>,
    outputs: Vec<Option<Arc<T>>>,
    attempts: Vec<usize>,
    running: usize,
    running_large: usize,
    running_exclusive: bool,
    reserved: u64,
    large_limit: usize,
    retries: usize,
    max_concurrent: usize,
    order: Vec<String>,
    done: usize,
    error: Option<EngineError>,
}

impl<T> State<T> {
    fn admissible(&self, dag: &Dag, cfg: &RunConfig, i: usize) -> bool {
        if self.running_exclusive {
            return false;
        }
        if self.exclusive.contains(&i) {
            return self.running == 0;
        }
        let cost = dag.tasks[i].cost;
        if self.running >= cfg.workers {
            return false;
        }
        if cost == Cost::Large && self.running_large >= self.large_limit {
            return false;
        }
        self.running == 0 || self.reserved + cost.reservation() <= cfg.memory_budget
    }

    fn pick(&self, dag: &Dag, cfg: &RunConfig) -> Option<usize> {
        self.ready.iter().copied().find(|&i| self.admissible(dag, cfg, i))
    }
}

/// Runs every task once its dependencies are done. `body` receives the
/// task and its dependencies' outputs in `deps` order. A task reporting
/// `OutOfMemory` halves the allowed concurrent large tasks and is retried
/// alone; a second failure when alone is fatal.
pub fn run<T, F>(dag: &Dag, cfg: RunConfig, body: F) -> Result<Report<T>, EngineError>
where
    T: Send + Sync,
    F: Fn(&Task, &[Arc<T>]) -> Result<T, TaskError> + Sync,
{
    let n = dag.tasks.len();
    let waiting: Vec<usize> = dag.tasks.iter().map(|t| t.deps.len()).collect();
    let state = Mutex::new(State {
        ready: (0..n).filter(|&i| waiting[i] == 0).collect(),
        exclusive: BTreeSet::new(),
        waiting,
        outputs: (0..n).map(|_| None).collect(),
        attempts: vec![0; n],
        running: 0,
        running_large: 0,
        running_exclusive: false,
        reserved: 0,
        large_limit: cfg.workers,
        retries: 0,
        max_concurrent: 0,
        order: vec![],
        done: 0,
        error: None,
    });
    let cv = Condvar::new();
    std::thread::scope(|scope| {
        for _ in 0..cfg.workers.min(n.max(1)) {
            scope.spawn(|| worker(dag, &cfg, &state, &cv, &body));
        }
    });
    let st = state.into_inner().unwrap();
    if let Some(e) = st.error {
        return Err(e);
    }
    let outputs = st.outputs.into_iter().enumerate().map(|(i, o)| (dag.tasks[i].key.clone(), o.expect("all tasks done"))).collect();
    Ok(Report { outputs, order: st.order, retries: st.retries, large_limit: st.large_limit, max_concurrent: st.max_concurrent })
}

fn worker<T, F>(dag: &Dag, cfg: &RunConfig, state: &Mutex<State<T>>, cv: &Condvar, body: &F)
where
    F: Fn(&Task, &[Arc<T>]) -> Result<T, TaskError>,
{
    let n = dag.tasks.len();
    loop {
        let (i, alone, deps) = {
            let mut st = state.lock().unwrap();
            let i = loop {
                if st.error.is_some() || st.done == n {
                    cv.notify_all();
                    return;
                }
                if let Some(i) = st.pick(dag, cfg) {
                    break i;
                }
                st = cv.wait(st).unwrap();
            };
            st.ready.remove(&i);
            let alone = st.exclusive.contains(&i);
            let cost = dag.tasks[i].cost;
            st.running += 1;
            st.running_exclusive = alone;
            st.reserved += cost.reservation();
            if cost == Cost::Large {
                st.running_large += 1;
            }
            st.max_concurrent = st.max_concurrent.max(st.running);
            st.attempts[i] += 1;
            let deps: Vec<Arc<T>> = dag.tasks[i].deps.iter().map(|d| st.outputs[dag.index[d]].clone().expect("dependency done")).collect();
            (i, alone, deps)
        };
        let task = &dag.tasks[i];
        let result = body(task, &deps);
        let mut st = state.lock().unwrap();
        st.running -= 1;
        st.running_exclusive = false;
        st.reserved -= task.cost.reservation();
        if task.cost == Cost::Large {
            st.running_large -= 1;
        }
        match result {
            Ok(out) => {
                st.outputs[i] = Some(Arc::new(out));
                st.order.push(task.key.clone());
                st.done += 1;
                for &j in &dag.dependents[i] {
                    st.waiting[j] -= 1;
                    if st.waiting[j] == 0 {
                        st.ready.insert(j);
                    }
                }
            }
            Err(TaskError::OutOfMemory) if !alone => {
                st.retries += 1;
                st.large_limit = (st.large_limit / 2).max(1);
                st.exclusive.insert(i);
                st.ready.insert(i);
            }
            Err(TaskError::OutOfMemory) => st.error = Some(EngineError::Exhausted(task.key.clone())),
            Err(TaskError::Failed(msg)) => st.error = Some(EngineError::TaskFailed { key: task.key.clone(), msg }),
        }
        cv.notify_all();
    }
}

/// Resident set size of this process, where the platform reports it.
pub fn resident_bytes() -> Option<u64> {
    let text = std::fs::read_to_string("/proc/self/statm").ok()?;
    let pages: u64 = text.split_whitespace().nth(1)?.parse().ok()?;
    Some(pages * 4096)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::time::Duration;

    fn t(key: &str, deps: &[&str]) -> Task {
        Task::new(key, deps.iter().map(|d| d.to_string()).collect(), Cost::Small)
    }

    #[test]
    fn chain_runs_in_dependency_order() {
        let dag = Dag::new(vec![t("c", &["b"]), t("b", &["a"]), t("a", &[])]).unwrap();
        let rep = run(&dag, RunConfig::new(4, u64::MAX), |task, deps: &[Arc<String>]| Ok(format!("{}{}", deps.iter().map(|d| d.as_str()).collect::<String>(), task.key))).unwrap();
        assert_eq!(rep.order, vec!["a", "b", "c"]);
        assert_eq!(rep.outputs["c"].as_str(), "abc");
    }

    #[test]
    fn diamond_runs_middle_concurrently_and_join_once() {
        let dag = Dag::new(vec![t("top", &[]), t("left", &["top"]), t("right", &["top"]), t("join", &["left", "right"])]).unwrap();
        let joins = AtomicUsize::new(0);
        let rep = run(&dag, RunConfig::new(4, u64::MAX), |task, _| {
            if task.key == "join" {
                joins.fetch_add(1, Ordering::SeqCst);
            } else {
                std::thread::sleep(Duration::from_millis(50));
            }
            Ok(())
        })
        .unwrap();
        assert_eq!(joins.load(Ordering::SeqCst), 1);
        assert_eq!(rep.max_concurrent, 2);
        assert_eq!(rep.order.last().unwrap(), "join");
    }

    #[test]
    fn memory_failure_is_retried_alone() {
        let dag = Dag::new((0..6).map(|i| Task::new(format!("t{i}"), vec![], Cost::Large)).collect()).unwrap();
        let failed = AtomicUsize::new(0);
        let rep = run(&dag, RunConfig::new(4, u64::MAX), |task, _| {
            if task.key == "t3" && failed.fetch_add(1, Ordering::SeqCst) == 0 {
                return Err(TaskError::OutOfMemory);
            }
            Ok(task.key.clone())
        })
        .unwrap();
        assert_eq!(rep.retries, 1);
        assert_eq!(rep.large_limit, 2);
        assert_eq!(rep.outputs.len(), 6);
    }

    #[test]
    fn repeated_memory_failure_is_fatal() {
        let dag = Dag::new(vec![t("a", &[])]).unwrap();
        let err = run::<(), _>(&dag, RunConfig::new(2, u64::MAX), |_, _| Err(TaskError::OutOfMemory)).unwrap_err();
        assert_eq!(err, EngineError::Exhausted("a".into()));
    }

    #[test]
    fn cycles_and_unknown_deps_are_rejected() {
        assert!(matches!(Dag::new(vec![t("a", &["b"]), t("b", &["a"])]), Err(EngineError::Cycle(_))));
        assert!(matches!(Dag::new(vec![t("a", &["z"])]), Err(EngineError::MissingDep { .. })));
        assert!(matches!(Dag::new(vec![t("a", &[]), t("a", &[])]), Err(EngineError::Duplicate(_))));
    }

    #[test]
    fn budget_limits_concurrency() {
        let dag = Dag::new((0..4).map(|i| Task::new(format!("t{i}"), vec![], Cost::Medium)).collect()).unwrap();
        let rep = run(&dag, RunConfig::new(4, Cost::Medium.reservation()), |_, _| {
            std::thread::sleep(Duration::from_millis(10));
            Ok(())
        })
        .unwrap();
        assert_eq!(rep.max_concurrent, 1);
    }

    #[test]
    fn task_failure_is_reported() {
        let dag = Dag::new(vec![t("a", &[])]).unwrap();
        let err = run::<(), _>(&dag, RunConfig::new(1, u64::MAX), |_, _| Err(TaskError::Failed("boom".into()))).unwrap_err();
        assert_eq!(err, EngineError::TaskFailed { key: "a".into(), msg: "boom".into() });
    }
}
