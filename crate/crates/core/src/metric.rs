//! Finite metric spaces, weighted graphs and tours over them.
//!
//! Points are addressed by dense indices (`usize`); every [`MetricSpace`] also
//! carries human-readable labels so instances can be written to disk and read
//! back. Distances are `f64` and compared with an absolute tolerance of
//! [`EPS`].

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Absolute tolerance for distance comparisons.
pub const EPS: f64 = 1e-9;

/// Above this many points the triangle inequality is sampled, not enumerated.
pub const EXHAUSTIVE_TRIANGLE_LIMIT: usize = 200;
const SAMPLED_TRIPLES: usize = 100_000;

/// Undirected graph with nonnegative edge lengths.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeightedGraph {
    node_ids: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<(usize, usize, f64)>,
}

impl WeightedGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a node, returning its index. Re-adding an existing id is a no-op.
    pub fn add_node(&mut self, id: impl Into<String>) -> usize {
        let id = id.into();
        if let Some(&i) = self.index.get(&id) {
            return i;
        }
        let i = self.node_ids.len();
        self.index.insert(id.clone(), i);
        self.node_ids.push(id);
        i
    }

    pub fn add_edge(&mut self, u: usize, v: usize, len: f64) -> Result<()> {
        let n = self.node_ids.len();
        if u >= n || v >= n {
            return Err(Error::UnknownPoint(format!("node index {}", u.max(v))));
        }
        let bad = |reason| Error::InvalidEdge { u: self.node_ids[u].clone(), v: self.node_ids[v].clone(), reason };
        if u == v {
            return Err(bad("self-loop"));
        }
        if !len.is_finite() || len < 0.0 {
            return Err(bad("length must be finite and nonnegative"));
        }
        self.edges.push((u.min(v), u.max(v), len));
        Ok(())
    }

    pub fn add_edge_by_id(&mut self, u: &str, v: &str, len: f64) -> Result<()> {
        let a = self.node_index(u)?;
        let b = self.node_index(v)?;
        self.add_edge(a, b, len)
    }

    pub fn node_index(&self, id: &str) -> Result<usize> {
        self.index.get(id).copied().ok_or_else(|| Error::UnknownPoint(id.to_string()))
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Adjacency lists `(neighbor, length)` for every node.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.node_ids.len()];
        for &(u, v, w) in &self.edges {
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.node_ids.len()];
        for &(u, v, _) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// Single-source shortest path lengths (Dijkstra).
    pub fn shortest_paths_from(&self, src: usize) -> Vec<f64> {
        dijkstra(&self.adjacency(), src)
    }
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

fn dijkstra(adj: &[Vec<(usize, f64)>], src: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(HeapItem(0.0, src));
    while let Some(HeapItem(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(HeapItem(nd, v));
            }
        }
    }
    dist
}

/// A finite metric over labelled points with a distinguished root.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricSpace {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    dist: Vec<f64>,
    root: usize,
}

impl MetricSpace {
    /// Builds a metric from a dense row-major distance matrix.
    ///
    /// Symmetry and zero diagonal are checked here; the triangle inequality is
    /// checked separately by [`MetricSpace::check_triangle_inequality`].
    pub fn from_matrix(labels: Vec<String>, dist: Vec<f64>, root: usize) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::NotAMetric("empty point set".into()));
        }
        if dist.len() != n * n {
            return Err(Error::NotAMetric(format!("distance matrix has {} entries, expected {}", dist.len(), n * n)));
        }
        if root >= n {
            return Err(Error::UnknownPoint(format!("root index {root}")));
        }
        let mut index = HashMap::with_capacity(n);
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::NotAMetric(format!("duplicate label `{l}`")));
            }
        }
        for i in 0..n {
            if dist[i * n + i].abs() > EPS {
                return Err(Error::NotAMetric(format!("d({0},{0}) != 0", labels[i])));
            }
            for j in 0..n {
                let d = dist[i * n + j];
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::NotAMetric(format!(
                        "d({},{}) = {d} is not a finite nonnegative number",
                        labels[i], labels[j]
                    )));
                }
                if (d - dist[j * n + i]).abs() > EPS {
                    return Err(Error::NotAMetric(format!("asymmetric pair ({}, {})", labels[i], labels[j])));
                }
            }
        }
        Ok(MetricSpace { labels, index, dist, root })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn with_root(mut self, root: usize) -> Result<Self> {
        if root >= self.len() {
            return Err(Error::UnknownPoint(format!("root index {root}")));
        }
        self.root = root;
        Ok(self)
    }

    #[inline]
    pub fn d(&self, u: usize, v: usize) -> f64 {
        self.dist[u * self.labels.len() + v]
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.index.get(label).copied().ok_or_else(|| Error::UnknownPoint(label.to_string()))
    }

    pub fn check_point(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::UnknownPoint(format!("point index {i}")))
        }
    }

    pub fn max_distance(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// Checks `d(u,w) <= d(u,v) + d(v,w)`: exhaustively up to
    /// [`EXHAUSTIVE_TRIANGLE_LIMIT`] points, on 10^5 random triples otherwise.
    pub fn check_triangle_inequality(&self) -> Result<()> {
        let n = self.len();
        let violated =
            |u: usize, v: usize, w: usize| self.d(u, w) > self.d(u, v) + self.d(v, w) + EPS * (1.0 + self.d(u, w));
        let report = |u: usize, v: usize, w: usize| {
            Err(Error::NotAMetric(format!(
                "triangle inequality via {}: d({},{}) > d({},{}) + d({},{})",
                self.labels[v],
                self.labels[u],
                self.labels[w],
                self.labels[u],
                self.labels[v],
                self.labels[v],
                self.labels[w]
            )))
        };
        if n <= EXHAUSTIVE_TRIANGLE_LIMIT {
            for u in 0..n {
                for v in 0..n {
                    for w in 0..n {
                        if violated(u, v, w) {
                            return report(u, v, w);
                        }
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x07ea_51e5);
            for _ in 0..SAMPLED_TRIPLES {
                let (u, v, w) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
                if violated(u, v, w) {
                    return report(u, v, w);
                }
            }
        }
        Ok(())
    }

    /// Restricts the metric to `points` (in the given order). The root of the
    /// result is the position of `root` inside `points`.
    pub fn submetric(&self, points: &[usize], root: usize) -> Result<MetricSpace> {
        let k = points.len();
        let root_pos = points
            .iter()
            .position(|&p| p == root)
            .ok_or_else(|| Error::UnknownPoint(format!("root {root} not in submetric")))?;
        let mut dist = vec![0.0; k * k];
        for (a, &p) in points.iter().enumerate() {
            self.check_point(p)?;
            for (b, &q) in points.iter().enumerate() {
                dist[a * k + b] = self.d(p, q);
            }
        }
        let labels = points.iter().map(|&p| self.labels[p].clone()).collect();
        MetricSpace::from_matrix(labels, dist, root_pos)
    }
}

/// All-pairs shortest paths of a connected graph; root is node 0.
pub fn metric_closure(g: &WeightedGraph) -> Result<MetricSpace> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::NotAMetric("empty graph".into()));
    }
    let adj = g.adjacency();
    let rows: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(|s| dijkstra(&adj, s)).collect()
    };
    let mut dist = Vec::with_capacity(n * n);
    for (s, row) in rows.iter().enumerate() {
        if let Some(t) = row.iter().position(|d| d.is_infinite()) {
            return Err(Error::Disconnected { from: g.node_ids()[s].clone(), to: g.node_ids()[t].clone() });
        }
        dist.extend_from_slice(row);
    }
    // Dijkstra from both ends can differ in the last ulp; symmetrize.
    for i in 0..n {
        for j in (i + 1)..n {
            let d = dist[i * n + j].min(dist[j * n + i]);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    MetricSpace::from_matrix(g.node_ids().to_vec(), dist, 0)
}

/// A visiting order starting at the root. A closed tour implicitly returns to
/// its first element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tour {
    pub order: Vec<usize>,
    pub closed: bool,
}

impl Tour {
    pub fn closed(order: Vec<usize>) -> Self {
        Tour { order, closed: true }
    }

    pub fn open(order: Vec<usize>) -> Self {
        Tour { order, closed: false }
    }

    /// Locations after the starting point.
    pub fn stops(&self) -> &[usize] {
        self.order.get(1..).unwrap_or(&[])
    }
}

pub fn tour_length(t: &Tour, m: &MetricSpace) -> Result<f64> {
    if t.order.is_empty() {
        return Err(Error::Invalid("empty tour".into()));
    }
    for &p in &t.order {
        m.check_point(p)?;
    }
    let mut len: f64 = t.order.windows(2).map(|w| m.d(w[0], w[1])).sum();
    if t.closed {
        len += m.d(*t.order.last().unwrap(), t.order[0]);
    }
    Ok(len)
}

/// Length of the tour with the closing leg dropped.
pub fn open_path_cost(t: &Tour, m: &MetricSpace) -> Result<f64> {
    tour_length(&Tour::open(t.order.clone()), m)
}

/// Drops repeated visits, keeping first occurrences. The result is a closed
/// tour; by the triangle inequality it is never longer than the raw walk.
pub fn shortcut(visit_sequence: &[usize], m: &MetricSpace) -> Result<Tour> {
    if visit_sequence.is_empty() {
        return Err(Error::Invalid("empty visit sequence".into()));
    }
    let mut seen = vec![false; m.len()];
    let mut order = Vec::with_capacity(visit_sequence.len());
    for &p in visit_sequence {
        m.check_point(p)?;
        if !seen[p] {
            seen[p] = true;
            order.push(p);
        }
    }
    Ok(Tour::closed(order))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("p{i}")).collect()
    }

    /// r=0, a=1, b=2 with d(r,a)=1, d(a,b)=1, d(b,r)=2.
    fn rab() -> MetricSpace {
        MetricSpace::from_matrix(
            vec!["r".into(), "a".into(), "b".into()],
            vec![0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0],
            0,
        )
        .unwrap()
    }

    #[test]
    fn closure_of_path_graph() {
        let mut g = WeightedGraph::new();
        let a = g.add_node("a");
        let b = g.add_node("b");
        let c = g.add_node("c");
        g.add_edge(a, b, 1.0).unwrap();
        g.add_edge(b, c, 2.0).unwrap();
        let m = metric_closure(&g).unwrap();
        assert_eq!(m.d(a, c), 3.0);
        m.check_triangle_inequality().unwrap();
    }

    #[test]
    fn closure_shortcuts_long_edge() {
        let mut g = WeightedGraph::new();
        for id in ["x", "y", "z"] {
            g.add_node(id);
        }
        g.add_edge_by_id("x", "y", 1.0).unwrap();
        g.add_edge_by_id("y", "z", 1.0).unwrap();
        g.add_edge_by_id("x", "z", 5.0).unwrap();
        let m = metric_closure(&g).unwrap();
        assert_eq!(m.d(0, 2), 2.0);
    }

    #[test]
    fn closure_reports_unreachable_pair() {
        let mut g = WeightedGraph::new();
        g.add_node("a");
        g.add_node("b");
        g.add_node("c");
        g.add_edge(0, 1, 1.0).unwrap();
        match metric_closure(&g) {
            Err(Error::Disconnected { from, to }) => {
                assert_eq!((from.as_str(), to.as_str()), ("a", "c"));
            }
            other => panic!("expected disconnection, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_edges() {
        let mut g = WeightedGraph::new();
        g.add_node("a");
        g.add_node("b");
        assert!(g.add_edge(0, 0, 1.0).is_err());
        assert!(g.add_edge(0, 1, -1.0).is_err());
        assert!(g.add_edge(0, 5, 1.0).is_err());
    }

    #[test]
    fn tour_lengths() {
        let m = rab();
        assert_eq!(tour_length(&Tour::closed(vec![0, 1]), &m).unwrap(), 2.0);
        assert_eq!(tour_length(&Tour::open(vec![0, 1, 2]), &m).unwrap(), 2.0);
        assert_eq!(tour_length(&Tour::closed(vec![0, 1, 2]), &m).unwrap(), 4.0);
        assert!(tour_length(&Tour::closed(vec![0, 7]), &m).is_err());
        assert!(tour_length(&Tour::closed(vec![]), &m).is_err());
    }

    #[test]
    fn open_costs() {
        let m = rab();
        assert_eq!(open_path_cost(&Tour::closed(vec![0, 1]), &m).unwrap(), 1.0);
        assert_eq!(open_path_cost(&Tour::closed(vec![0]), &m).unwrap(), 0.0);
        assert_eq!(open_path_cost(&Tour::closed(vec![0, 1, 2]), &m).unwrap(), 2.0);
    }

    #[test]
    fn shortcut_drops_repeats() {
        let m = rab();
        assert_eq!(shortcut(&[0, 1, 0, 2], &m).unwrap().order, vec![0, 1, 2]);
        assert_eq!(shortcut(&[0, 1, 1, 1], &m).unwrap().order, vec![0, 1]);
    }

    #[test]
    fn shortcut_of_star_dfs_beats_doubled_tree() {
        // Star with center c=1 and leaves 2,3,4; root 0 attached to c.
        let n = 5;
        let mut g = WeightedGraph::new();
        for l in labels(n) {
            g.add_node(l);
        }
        g.add_edge(0, 1, 1.0).unwrap();
        g.add_edge(1, 2, 2.0).unwrap();
        g.add_edge(1, 3, 3.0).unwrap();
        g.add_edge(1, 4, 1.5).unwrap();
        let m = metric_closure(&g).unwrap();
        let dfs = [0, 1, 2, 1, 3, 1, 4, 1, 0];
        let doubled: f64 = dfs.windows(2).map(|w| m.d(w[0], w[1])).sum();
        assert_eq!(doubled, 2.0 * (1.0 + 2.0 + 3.0 + 1.5));
        let t = shortcut(&dfs, &m).unwrap();
        assert_eq!(t.order, vec![0, 1, 2, 3, 4]);
        assert!(tour_length(&t, &m).unwrap() <= doubled + EPS);
    }

    #[test]
    fn rejects_asymmetric_and_checks_triangle() {
        let bad = MetricSpace::from_matrix(labels(2), vec![0.0, 1.0, 2.0, 0.0], 0);
        assert!(bad.is_err());
        let no_tri = MetricSpace::from_matrix(labels(3), vec![0.0, 1.0, 5.0, 1.0, 0.0, 1.0, 5.0, 1.0, 0.0], 0).unwrap();
        assert!(no_tri.check_triangle_inequality().is_err());
    }

    #[test]
    fn submetric_keeps_distances() {
        let m = rab();
        let s = m.submetric(&[2, 0], 0).unwrap();
        assert_eq!(s.root(), 1);
        assert_eq!(s.d(0, 1), 2.0);
        assert_eq!(s.label(0), "b");
    }
}
