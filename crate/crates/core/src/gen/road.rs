use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metric::WeightedGraph;

#[derive(Clone, Debug, PartialEq)]
pub struct NodeRecord {
    pub id: String,
    pub longitude: f64,
    pub latitude: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeRecord {
    pub id: String,
    pub u: String,
    pub v: String,
    pub length: f64,
}

/// Undirected road graph. Parallel edges keep the shortest length; self
/// loops are dropped.
pub fn ingest_road(nodes: &[NodeRecord], edges: &[EdgeRecord]) -> Result<WeightedGraph> {
    let mut g = WeightedGraph::new();
    for n in nodes {
        g.add_node(n.id.as_str());
    }
    let mut best: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for e in edges {
        let lookup = |id: &str| {
            g.node_index(id).map_err(|_| Error::Invalid(format!("edge {} refers to unknown node {id}", e.id)))
        };
        let (a, b) = (lookup(&e.u)?, lookup(&e.v)?);
        if a == b {
            continue;
        }
        let slot = best.entry((a.min(b), a.max(b))).or_insert(f64::INFINITY);
        *slot = slot.min(e.length);
    }
    for ((a, b), len) in best {
        g.add_edge(a, b, len)?;
    }
    Ok(g)
}

fn fields<'a>(text: &'a str, want: usize, what: &str) -> Result<Vec<(usize, Vec<&'a str>)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.is_empty() {
            continue;
        }
        if f.len() != want {
            return Err(Error::parse(i + 1, format!("{what} line needs {want} fields, found {}", f.len())));
        }
        out.push((i + 1, f));
    }
    Ok(out)
}

fn num(line: usize, s: &str) -> Result<f64> {
    s.parse().map_err(|_| Error::parse(line, format!("bad number {s:?}")))
}

/// Reads `id longitude latitude` node lines and `id u v length` edge lines.
pub fn read_road_files(nodes: &Path, edges: &Path) -> Result<(Vec<NodeRecord>, Vec<EdgeRecord>)> {
    let nt = std::fs::read_to_string(nodes)?;
    let et = std::fs::read_to_string(edges)?;
    let ns = fields(&nt, 3, "node")?
        .into_iter()
        .map(|(l, f)| Ok(NodeRecord { id: f[0].into(), longitude: num(l, f[1])?, latitude: num(l, f[2])? }))
        .collect::<Result<Vec<_>>>()?;
    let es = fields(&et, 4, "edge")?
        .into_iter()
        .map(|(l, f)| Ok(EdgeRecord { id: f[0].into(), u: f[1].into(), v: f[2].into(), length: num(l, f[3])? }))
        .collect::<Result<Vec<_>>>()?;
    Ok((ns, es))
}

pub fn write_road_files(nodes: &[NodeRecord], edges: &[EdgeRecord], node_path: &Path, edge_path: &Path) -> Result<()> {
    let mut nt = String::new();
    for n in nodes {
        let _ = writeln!(nt, "{} {:.6} {:.6}", n.id, n.longitude, n.latitude);
    }
    let mut et = String::new();
    for e in edges {
        let _ = writeln!(et, "{} {} {} {:.6}", e.id, e.u, e.v, e.length);
    }
    std::fs::write(node_path, nt)?;
    std::fs::write(edge_path, et)?;
    Ok(())
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ContractReport {
    pub nodes: usize,
    pub edges: usize,
    /// Nodes removed with dead-end chains.
    pub pruned: usize,
    /// Degree-2 nodes absorbed into longer edges.
    pub absorbed: usize,
    pub parallel_merged: usize,
}

/// Keeps only branch nodes (degree 3 or more). Dead-end chains are pruned
/// back to their branch node, chains of degree-2 nodes become one edge of
/// the summed length and parallel results keep the shortest; repeated until
/// stable. A cycle hanging off a hub ends up as a parallel pair, then a dead
/// end, and disappears.
pub fn contract_degree2(g: &WeightedGraph) -> (WeightedGraph, ContractReport) {
    let n = g.node_count();
    let mut report = ContractReport::default();
    let mut alive = vec![true; n];
    // Adjacency as map neighbor -> shortest length.
    let mut adj: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
    for &(u, v, w) in g.edges() {
        let w = match adj[u].get(&v) {
            Some(&old) => {
                report.parallel_merged += 1;
                old.min(w)
            }
            None => w,
        };
        adj[u].insert(v, w);
        adj[v].insert(u, w);
    }
    loop {
        let mut changed = false;
        // Prune leaves.
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| alive[v] && adj[v].len() <= 1).collect();
        while let Some(v) = queue.pop_front() {
            if !alive[v] || adj[v].len() > 1 {
                continue;
            }
            alive[v] = false;
            report.pruned += 1;
            changed = true;
            let nbrs: Vec<usize> = adj[v].keys().copied().collect();
            adj[v].clear();
            for u in nbrs {
                adj[u].remove(&v);
                if adj[u].len() <= 1 {
                    queue.push_back(u);
                }
            }
        }
        // Splice out degree-2 nodes one at a time.
        for v in 0..n {
            if !alive[v] || adj[v].len() != 2 {
                continue;
            }
            let mut it = adj[v].iter();
            let (&a, &wa) = it.next().unwrap();
            let (&b, &wb) = it.next().unwrap();
            alive[v] = false;
            report.absorbed += 1;
            changed = true;
            adj[v].clear();
            adj[a].remove(&v);
            adj[b].remove(&v);
            let w = wa + wb;
            match adj[a].get(&b) {
                Some(&old) => {
                    report.parallel_merged += 1;
                    let m = old.min(w);
                    adj[a].insert(b, m);
                    adj[b].insert(a, m);
                }
                None => {
                    adj[a].insert(b, w);
                    adj[b].insert(a, w);
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut out = WeightedGraph::new();
    let mut map = vec![usize::MAX; n];
    for v in (0..n).filter(|&v| alive[v]) {
        map[v] = out.add_node(g.node_ids()[v].as_str());
    }
    for u in (0..n).filter(|&v| alive[v]) {
        for (&v, &w) in &adj[u] {
            if u < v {
                out.add_edge(map[u], map[v], w).expect("valid contracted edge");
            }
        }
    }
    report.nodes = out.node_count();
    report.edges = out.edge_count();
    (out, report)
}

/// Grid side and seed of the default synthetic network (about 1.3k branch
/// nodes and 2k edges after contraction).
pub const SYNTHETIC_ROAD_SIDE: usize = 40;
pub const SYNTHETIC_ROAD_SEED: u64 = 2024;

/// Road-like stand-in for a real network: a jittered honeycomb (bond
/// percolation threshold near 0.65) with a few missing links and extra
/// chords, every link drawn as a chain of intermediate points, plus dead-end
/// spurs. Contracting it leaves roughly `rows * cols` branch nodes.
pub fn synthetic_road_network(rows: usize, cols: usize, seed: u64) -> (Vec<NodeRecord>, Vec<EdgeRecord>) {
    const SPACING_KM: f64 = 12.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let id = |r: usize, c: usize| r * cols + c;
    let pos: Vec<(f64, f64)> = (0..rows * cols)
        .map(|i| {
            let (r, c) = (i / cols, i % cols);
            ((c as f64 + rng.gen_range(-0.3..0.3)) * SPACING_KM, (r as f64 + rng.gen_range(-0.3..0.3)) * SPACING_KM)
        })
        .collect();
    let mut links: Vec<(usize, usize)> = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                links.push((id(r, c), id(r, c + 1)));
            }
            // Brick-wall layout: vertical links on alternating cells.
            if r + 1 < rows && (r + c) % 2 == 0 {
                links.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    links.retain(|_| rng.gen_bool(0.955));
    for r in 0..rows.saturating_sub(1) {
        for c in 0..cols {
            if (r + c) % 2 == 1 && rng.gen_bool(0.02) {
                links.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    let keep = largest_component(rows * cols, &links);
    let mut nodes: Vec<NodeRecord> = Vec::new();
    let mut edges: Vec<EdgeRecord> = Vec::new();
    let to_lonlat = |(x, y): (f64, f64)| (-124.0 + x / 90.0, 33.0 + y / 111.0);
    let mut next_id = 0usize;
    let mut fresh = |p: (f64, f64), nodes: &mut Vec<NodeRecord>| {
        let (lon, lat) = to_lonlat(p);
        nodes.push(NodeRecord { id: next_id.to_string(), longitude: lon, latitude: lat });
        next_id += 1;
        next_id - 1
    };
    let mut name = vec![usize::MAX; rows * cols];
    for v in 0..rows * cols {
        if keep[v] {
            name[v] = fresh(pos[v], &mut nodes);
        }
    }
    let push_edge = |a: usize, b: usize, len: f64, edges: &mut Vec<EdgeRecord>| {
        let k = edges.len();
        edges.push(EdgeRecord { id: k.to_string(), u: a.to_string(), v: b.to_string(), length: len });
    };
    for &(a, b) in links.iter().filter(|(a, _)| keep[*a]) {
        let (pa, pb) = (pos[a], pos[b]);
        let straight = ((pa.0 - pb.0).powi(2) + (pa.1 - pb.1).powi(2)).sqrt();
        let winding = rng.gen_range(1.0..1.4);
        let pieces = rng.gen_range(1..=5);
        let mut prev = name[a];
        for k in 1..pieces {
            let t = k as f64 / pieces as f64;
            let p = (pa.0 + t * (pb.0 - pa.0), pa.1 + t * (pb.1 - pa.1));
            let mid = fresh(p, &mut nodes);
            push_edge(prev, mid, straight * winding / pieces as f64, &mut edges);
            prev = mid;
        }
        push_edge(prev, name[b], straight * winding / pieces as f64, &mut edges);
    }
    for v in (0..rows * cols).filter(|&v| keep[v]) {
        if rng.gen_bool(0.1) {
            let mut prev = name[v];
            for _ in 0..rng.gen_range(1..=3) {
                let p = (pos[v].0 + rng.gen_range(-3.0..3.0), pos[v].1 + rng.gen_range(-3.0..3.0));
                let spur = fresh(p, &mut nodes);
                push_edge(prev, spur, rng.gen_range(0.5..3.0), &mut edges);
                prev = spur;
            }
        }
    }
    (nodes, edges)
}

fn largest_component(n: usize, links: &[(usize, usize)]) -> Vec<bool> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in links {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut comp = vec![usize::MAX; n];
    let mut sizes: HashMap<usize, usize> = HashMap::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let mut stack = vec![s];
        comp[s] = s;
        let mut size = 0;
        while let Some(v) = stack.pop() {
            size += 1;
            for &u in &adj[v] {
                if comp[u] == usize::MAX {
                    comp[u] = s;
                    stack.push(u);
                }
            }
        }
        sizes.insert(s, size);
    }
    let best = sizes.iter().max_by_key(|(&k, &v)| (v, std::cmp::Reverse(k))).map(|(&k, _)| k).unwrap();
    comp.iter().map(|&c| c == best).collect()
}
