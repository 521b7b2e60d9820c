use std::collections::HashSet;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::{IppInstance, ObsId, Prior};
use crate::metric::{metric_closure, WeightedGraph};

/// Attempts per scenario before giving up on a distinct observation row.
pub const ICM_RESAMPLE_LIMIT: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IcmConfig {
    pub p: f64,
    pub m: usize,
    pub seed: u64,
}

/// Independent cascade from `seed`: every arc `(i, j)` out of an active node
/// fires once, with probability `p`. `arc_draw(i, k)` is the uniform draw
/// for the `k`-th neighbor of `i`, so runs sharing draws are monotone in `p`.
pub fn icm_spread(adj: &[Vec<usize>], seed: usize, p: f64, arc_draw: impl Fn(usize, usize) -> f64) -> Vec<bool> {
    let mut active = vec![false; adj.len()];
    active[seed] = true;
    let mut frontier = vec![seed];
    while let Some(i) = frontier.pop() {
        for (k, &j) in adj[i].iter().enumerate() {
            if !active[j] && arc_draw(i, k) < p {
                active[j] = true;
                frontier.push(j);
            }
        }
    }
    active
}

/// Hypothesis identification over `m` cascades on `g`. Every node is a
/// location observing 1 if active; the root `r` is an extra point at
/// distance 0 from the node of highest degree (lowest index on ties).
pub fn gen_icm(g: &WeightedGraph, cfg: &IcmConfig) -> Result<IppInstance> {
    if !(0.0..=1.0).contains(&cfg.p) {
        return Err(Error::Invalid(format!("activation probability {} outside [0, 1]", cfg.p)));
    }
    if cfg.m == 0 {
        return Err(Error::Invalid("need at least one scenario".into()));
    }
    let n = g.node_count();
    if n == 0 {
        return Err(Error::Invalid("empty graph".into()));
    }
    if g.node_index("r").is_ok() {
        return Err(Error::Invalid("node id `r` is reserved for the root".into()));
    }
    let deg = g.degrees();
    let hub = (0..n).max_by_key(|&v| (deg[v], std::cmp::Reverse(v))).unwrap();
    let mut full = WeightedGraph::new();
    full.add_node("r");
    for id in g.node_ids() {
        full.add_node(id.as_str());
    }
    for &(u, v, w) in g.edges() {
        full.add_edge(u + 1, v + 1, w)?;
    }
    full.add_edge(0, hub + 1, 0.0)?;
    let metric = Arc::new(metric_closure(&full)?);

    let mut adj = vec![Vec::new(); n];
    for &(u, v, _) in g.edges() {
        adj[u].push(v);
        adj[v].push(u);
    }
    let offsets: Vec<usize> = adj
        .iter()
        .scan(0, |acc, a| {
            let o = *acc;
            *acc += a.len();
            Some(o)
        })
        .collect();
    let arcs = offsets.last().unwrap() + adj.last().unwrap().len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut seen: HashSet<Vec<ObsId>> = HashSet::new();
    let mut rows = Vec::with_capacity(cfg.m);
    for i in 0..cfg.m {
        let mut found = None;
        for _ in 0..ICM_RESAMPLE_LIMIT {
            let seed = rng.gen_range(0..n);
            let draws: Vec<f64> = (0..arcs).map(|_| rng.gen()).collect();
            let active = icm_spread(&adj, seed, cfg.p, |v, k| draws[offsets[v] + k]);
            let row: Vec<ObsId> = active.iter().map(|&a| a as ObsId).collect();
            if seen.insert(row.clone()) {
                found = Some(row);
                break;
            }
        }
        rows.push(found.ok_or_else(|| {
            Error::InvalidInstance(format!(
                "scenario {i}: no new cascade after {ICM_RESAMPLE_LIMIT} attempts (p = {})",
                cfg.p
            ))
        })?);
    }
    let inst = IppInstance::hypothesis_id(
        metric,
        (1..=n).collect(),
        vec!["0".into(), "1".into()],
        rows,
        vec![Prior::uniform(cfg.m); cfg.m],
    )?;
    Ok(inst.with_source_graph(Arc::new(full)))
}

/// `(average scenarios per location, average locations per scenario)`
/// counting observations equal to `1`.
pub fn sensing_stats(inst: &IppInstance) -> Result<(f64, f64)> {
    if inst.alphabet() != ["0", "1"] {
        return Err(Error::Invalid(format!("sensing statistics need a 0/1 alphabet, found {:?}", inst.alphabet())));
    }
    let total: usize =
        inst.scenarios().iter().map(|s| inst.locations().iter().filter(|&&v| s.obs[v] == 1).count()).sum();
    Ok((total as f64 / inst.n() as f64, total as f64 / inst.m() as f64))
}
