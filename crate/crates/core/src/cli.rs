//! Command-line front end: `compute`, `verify` and `ring`.
//!
//! Exit codes: 0 success, 2 verification mismatch, 3 unsupported
//! configuration, 4 internal inconsistency.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::engine::{parse_bytes, ComputeError, DiskCache, Engine, EngineConfig, EngineError};
use crate::graph::Variant;
use crate::known::{verify, KnownFile, KnownTable};
use crate::repthy::{partitions, Partition};
use crate::taut::{generators, ring_table, symmetric_ring_table, TautError};
use crate::weights::{Direction, TableRequest, WeightTable};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 2;
pub const EXIT_UNSUPPORTED: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "wss", about = "Weight-graded cohomology of moduli of pointed curves")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Second-page dimensions of a weight spectral sequence.
    Compute(ComputeArgs),
    /// Compare a result document with known tables.
    Verify {
        results: PathBuf,
        /// Known tables or another result document; the bundled tables by default.
        known: Option<PathBuf>,
    },
    /// Tautological ring table of one degree.
    Ring(RingArgs),
}

#[derive(Args, Debug)]
struct ComputeArgs {
    #[arg(short = 'g')]
    g: u32,
    #[arg(short = 'n', default_value_t = 0)]
    n: usize,
    #[arg(long, value_delimiter = ',', default_value = "open")]
    variant: Vec<Variant>,
    #[arg(long, value_delimiter = ',', default_value = "push")]
    direction: Vec<Direction>,
    /// Inclusive range `A..B`, or a single weight.
    #[arg(long)]
    weights: Option<String>,
    /// `all`, or partitions such as `3` or `2,1`; repeatable.
    #[arg(long, default_value = "all")]
    lambda: Vec<String>,
    /// Compute nontrivial sectors in every column.
    #[arg(long)]
    exhaustive: bool,
    #[arg(long)]
    workers: Option<usize>,
    /// Bytes, with optional K, M or G suffix.
    #[arg(long)]
    memory_budget: Option<String>,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RingArgs {
    #[arg(short = 'g')]
    g: u32,
    #[arg(short = 'n', default_value_t = 0)]
    n: usize,
    #[arg(short = 'r')]
    r: usize,
    /// Young subgroup block sizes, such as `2,1`.
    #[arg(long, value_delimiter = ',')]
    symmetry: Option<Vec<usize>>,
    /// Twist the symmetry by the sign character.
    #[arg(long)]
    twist: bool,
    /// Number of non-basis generators to reduce as probes.
    #[arg(long, default_value_t = 0)]
    probes: usize,
    /// List the spanning generators before reduction.
    #[arg(long)]
    generators: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure with its exit code.
struct Fail(i32, String);

fn taut_code(e: &TautError) -> i32 {
    match e {
        TautError::UnsupportedRingModel { .. } | TautError::DegreeOutOfRange { .. } => EXIT_UNSUPPORTED,
        TautError::Invalid(m) if m.contains("unstable") => EXIT_UNSUPPORTED,
        _ => EXIT_INTERNAL,
    }
}

impl From<TautError> for Fail {
    fn from(e: TautError) -> Self {
        Fail(taut_code(&e), e.to_string())
    }
}

impl From<ComputeError> for Fail {
    fn from(e: ComputeError) -> Self {
        match e {
            ComputeError::Taut(t) => t.into(),
            ComputeError::Engine(EngineError::TaskFailed { key, msg }) if msg.contains("unsupported") => Fail(EXIT_UNSUPPORTED, format!("{key}: {msg}")),
            ComputeError::Engine(e) => Fail(EXIT_INTERNAL, e.to_string()),
        }
    }
}

fn io_fail(e: impl std::fmt::Display) -> Fail {
    Fail(EXIT_INTERNAL, e.to_string())
}

pub fn parse_weights(s: &str) -> Option<Vec<usize>> {
    match s.split_once("..") {
        Some((a, b)) => {
            let (a, b): (usize, usize) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
            (a <= b).then(|| (a..=b).collect())
        }
        None => Some(vec![s.trim().parse().ok()?]),
    }
}

fn parse_lambdas(specs: &[String], n: usize) -> Option<Vec<Partition>> {
    if specs.iter().any(|s| s == "all") {
        return Some(if n == 0 { vec![vec![]] } else { partitions(n) });
    }
    specs
        .iter()
        .map(|s| {
            let mut p: Vec<usize> = s.split(',').map(|x| x.trim().parse().ok()).collect::<Option<_>>()?;
            p.sort_unstable_by(|a, b| b.cmp(a));
            (p.iter().sum::<usize>() == n && p.iter().all(|&x| x > 0)).then_some(p)
        })
        .collect()
}

/// One line per nonzero graded piece, with the decomposition when known.
pub fn render_table(t: &WeightTable) -> String {
    let [g, n] = t.space;
    let mut out = format!("M_{{{g},{n}}} {} {} weights {:?}\n", t.variant, t.direction, t.weights);
    let mut any = false;
    for e in &t.entries {
        let full = e.sectors.iter().find(|(k, _)| k.as_str() == format!("[{}]", vec!["1"; n as usize].join(","))).map(|(_, &v)| v);
        let total = full.unwrap_or_else(|| e.sectors.values().copied().max().unwrap_or(0));
        if total == 0 {
            continue;
        }
        any = true;
        let value = match (&e.polynomial, n) {
            (Some(p), 2..) => p.clone(),
            _ if e.q == 0 => total.to_string(),
            _ if total == 1 => format!("L^{}", e.q / 2),
            _ => format!("{total}*L^{}", e.q / 2),
        };
        out.push_str(&format!("gr_{} {}^{} = {value}\n", e.q, t.cohomology, e.r));
    }
    if !any {
        out.push_str("all computed pieces vanish\n");
    }
    out
}

fn write_out(path: &Option<PathBuf>, text: &str) -> Result<(), Fail> {
    if let Some(p) = path {
        std::fs::write(p, text).map_err(io_fail)?;
    }
    Ok(())
}

fn compute(a: ComputeArgs, out: &mut dyn Write) -> Result<i32, Fail> {
    if 2 * a.g as usize + a.n <= 2 {
        return Err(Fail(EXIT_UNSUPPORTED, format!("M_{{{},{}}} is not stable", a.g, a.n)));
    }
    let d = 3 * a.g as usize + a.n - 3;
    let weights = match &a.weights {
        Some(w) => parse_weights(w).ok_or_else(|| Fail(EXIT_UNSUPPORTED, format!("bad weight range {w}")))?,
        None => (0..=2 * d).collect(),
    };
    let lambdas = parse_lambdas(&a.lambda, a.n).ok_or_else(|| Fail(EXIT_UNSUPPORTED, format!("bad partitions {:?} of {}", a.lambda, a.n)))?;
    let mut cfg = EngineConfig::new(a.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |x| x.get())));
    if let Some(b) = &a.memory_budget {
        cfg.memory_budget = parse_bytes(b).ok_or_else(|| Fail(EXIT_UNSUPPORTED, format!("bad memory budget {b}")))?;
    }
    let cache = match &a.cache_dir {
        Some(dir) => Some(DiskCache::open(dir)),
        None => DiskCache::from_env(),
    };
    if let Some(c) = cache {
        cfg = cfg.with_cache(Arc::new(c.map_err(io_fail)?));
    }
    let engine = Engine::new(cfg);
    let mut tables = vec![];
    for &variant in &a.variant {
        for &direction in &a.direction {
            let mut req = TableRequest::new(a.g, a.n, variant, direction, weights.clone());
            req.lambdas = lambdas.clone();
            req.exhaustive = a.exhaustive;
            let c = engine.compute(&req)?;
            write!(out, "{}", render_table(&c.table)).map_err(io_fail)?;
            tables.push(c.table);
        }
    }
    let doc = if tables.len() == 1 { tables[0].to_json() } else { serde_json::to_string_pretty(&tables).expect("serializable") };
    write_out(&a.out, &doc)?;
    Ok(EXIT_OK)
}

/// Result documents: a single table or a list of them.
fn parse_results(text: &str) -> Result<Vec<WeightTable>, Fail> {
    WeightTable::from_json(text)
        .map(|t| vec![t])
        .or_else(|_| serde_json::from_str::<Vec<WeightTable>>(text))
        .map_err(|e| Fail(EXIT_INTERNAL, format!("malformed result document: {e}")))
}

fn verify_cmd(results: PathBuf, known: Option<PathBuf>, out: &mut dyn Write) -> Result<i32, Fail> {
    let tables = parse_results(&std::fs::read_to_string(&results).map_err(io_fail)?)?;
    let known = match known {
        None => KnownFile::bundled(),
        Some(p) => {
            let text = std::fs::read_to_string(&p).map_err(io_fail)?;
            KnownFile::parse(&text)
                .or_else(|_| parse_results(&text).map(|ts| KnownFile { tables: ts.iter().map(KnownTable::from_result).collect() }))
                .map_err(|_| Fail(EXIT_INTERNAL, format!("malformed known document {}", p.display())))?
        }
    };
    let mut ok = true;
    for t in &tables {
        let rep = verify(t, &known);
        for m in &rep.mismatches {
            writeln!(out, "MISMATCH {m}").map_err(io_fail)?;
        }
        writeln!(out, "M_{{{},{}}} {} {}: {} entries compared, {} mismatches", t.space[0], t.space[1], t.variant, t.direction, rep.compared, rep.mismatches.len()).map_err(io_fail)?;
        ok &= rep.ok();
    }
    Ok(if ok { EXIT_OK } else { EXIT_MISMATCH })
}

fn ring(a: RingArgs, out: &mut dyn Write) -> Result<i32, Fail> {
    let mut t = match &a.symmetry {
        Some(blocks) => symmetric_ring_table(a.g, a.n, a.r, blocks, a.twist)?,
        None => ring_table(a.g, a.n, a.r, a.probes)?,
    };
    if a.generators {
        let gens = generators(a.g, a.n, a.r)?;
        writeln!(out, "generators: {}", gens.len()).map_err(io_fail)?;
        t.generators = Some(gens.iter().map(|s| s.encode()).collect());
    }
    writeln!(out, "RH^{}(M_{{{},{}}}) symmetry {}: dimension {}", a.r, a.g, a.n, t.symmetry, t.dimension).map_err(io_fail)?;
    for b in &t.basis {
        writeln!(out, "  {b}").map_err(io_fail)?;
    }
    write_out(&a.out, &serde_json::to_string_pretty(&t).expect("serializable"))?;
    Ok(EXIT_OK)
}

/// Runs the command line `args` (program name first), writing the human
/// readable output to `out`; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(out, "{e}");
            return if e.use_stderr() { EXIT_UNSUPPORTED } else { EXIT_OK };
        }
    };
    let res = match cli.cmd {
        Cmd::Compute(a) => compute(a, out),
        Cmd::Verify { results, known } => verify_cmd(results, known, out),
        Cmd::Ring(a) => ring(a, out),
    };
    match res {
        Ok(code) => code,
        Err(Fail(code, msg)) => {
            let _ = writeln!(out, "error: {msg}");
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String) {
        let mut buf = vec![];
        let code = run(std::iter::once("wss").chain(args.iter().copied()), &mut buf);
        (code, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn weights_parse() {
        assert_eq!(parse_weights("0..4"), Some(vec![0, 1, 2, 3, 4]));
        assert_eq!(parse_weights("2"), Some(vec![2]));
        assert_eq!(parse_weights("4..2"), None);
    }

    #[test]
    fn one_pointed_genus_one_at_weight_zero() {
        let (code, out) = call(&["compute", "-g", "1", "-n", "1", "--variant", "open", "--direction", "push", "--weights", "0..0", "--workers", "1"]);
        assert_eq!(code, 0, "{out}");
        assert!(out.contains("gr_0 H^0 = 1"), "{out}");
    }

    #[test]
    fn genus_three_three_points_at_weight_two() {
        let (code, out) = call(&["compute", "-g", "3", "-n", "3", "--direction", "push", "--weights", "2..2"]);
        assert_eq!(code, 0, "{out}");
        assert!(out.contains("gr_2 H^2 = (2*s[3] + s[2,1])*L^1"), "{out}");
    }

    #[test]
    fn verify_round_trip_and_perturbation() {
        let dir = tempfile::tempdir().unwrap();
        let res = dir.path().join("m05.json");
        let (code, _) = call(&["compute", "-g", "0", "-n", "5", "--direction", "pull", "--weights", "0..8", "--out", res.to_str().unwrap()]);
        assert_eq!(code, 0);
        let r = res.to_str().unwrap();
        assert_eq!(call(&["verify", r, r]).0, 0);
        let (code, out) = call(&["verify", r]);
        assert_eq!(code, 0, "{out}");
        let mut t = WeightTable::from_json(&std::fs::read_to_string(&res).unwrap()).unwrap();
        let e = t.entries.iter_mut().find(|e| e.q == 0 && e.r == 2).unwrap();
        *e.sectors.get_mut("[1,1,1,1,1]").unwrap() += 1;
        let bad = dir.path().join("bad.json");
        std::fs::write(&bad, t.to_json()).unwrap();
        let (code, out) = call(&["verify", bad.to_str().unwrap()]);
        assert_eq!(code, EXIT_MISMATCH);
        assert!(out.contains("MISMATCH M_{0,5} open pull: gr_0 Hc^2 [1,1,1,1,1] got 7 expected 6"), "{out}");
    }

    #[test]
    fn ring_documents() {
        let (code, out) = call(&["ring", "-g", "0", "-n", "5", "-r", "1"]);
        assert_eq!(code, 0);
        assert!(out.contains("dimension 5"), "{out}");
        let (_, out) = call(&["ring", "-g", "1", "-n", "1", "-r", "0"]);
        assert!(out.contains("dimension 1"), "{out}");
        let (_, out) = call(&["ring", "-g", "5", "-r", "1", "--generators"]);
        assert!(out.contains("generators: 4"), "{out}");
    }

    #[test]
    fn unsupported_configurations() {
        assert_eq!(call(&["compute", "-g", "0", "-n", "2"]).0, EXIT_UNSUPPORTED);
        assert_eq!(call(&["compute", "-g", "0", "-n", "4", "--lambda", "3"]).0, EXIT_UNSUPPORTED);
        assert_eq!(call(&["compute", "-g", "0", "-n", "4", "--weights", "x"]).0, EXIT_UNSUPPORTED);
    }
}
