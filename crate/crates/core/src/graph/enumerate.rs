use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use super::{canonical_form, degenerations, GraphError, StableGraph};

type Key = (u32, usize, usize);

fn cache() -> &'static Mutex<HashMap<Key, Arc<Vec<StableGraph>>>> {
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<Vec<StableGraph>>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// One canonical representative per isomorphism class of stable graphs of
/// type `(g, n)` with exactly `e` edges, sorted.
///
/// Every graph with `e` edges degenerates from one with `e - 1` edges, so
/// the levels are built by degenerating every vertex of the previous level.
pub fn enumerate_stable_graphs(g: u32, n: usize, e: usize) -> Result<Arc<Vec<StableGraph>>, GraphError> {
    if 2 * g as i64 - 2 + n as i64 <= 0 {
        return Err(GraphError::UnstableType { g, n });
    }
    if let Some(v) = cache().lock().unwrap().get(&(g, n, e)) {
        return Ok(v.clone());
    }
    let out: Vec<StableGraph> = if e == 0 {
        vec![StableGraph::smooth(g, n)?]
    } else if e > 3 * g as usize + n - 3 {
        vec![]
    } else {
        let prev = enumerate_stable_graphs(g, n, e - 1)?;
        let mut set = BTreeSet::new();
        for gr in prev.iter() {
            for v in 0..gr.num_vertices() {
                for d in degenerations(gr, v) {
                    set.insert(canonical_form(&d.graph, None, None).graph);
                }
            }
        }
        set.into_iter().collect()
    };
    let out = Arc::new(out);
    cache().lock().unwrap().insert((g, n, e), out.clone());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_counts() {
        assert_eq!(enumerate_stable_graphs(1, 1, 1).unwrap().len(), 1);
        assert_eq!(enumerate_stable_graphs(0, 4, 1).unwrap().len(), 3);
        let counts: Vec<usize> =
            (0..=3).map(|e| enumerate_stable_graphs(2, 0, e).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 2, 2, 2]);
        assert!(enumerate_stable_graphs(0, 2, 0).is_err());
    }

    #[test]
    fn genus_zero_strata_counts() {
        // number of boundary points of M_{0,n}bar is (2n-5)!!
        assert_eq!(enumerate_stable_graphs(0, 5, 2).unwrap().len(), 15);
        assert_eq!(enumerate_stable_graphs(0, 6, 3).unwrap().len(), 105);
    }
}
