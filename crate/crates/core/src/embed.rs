//! Random dominating tree embeddings (hierarchical decomposition with a random
//! permutation and one random scale per tree).

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metric::{MetricSpace, EPS};

/// Rooted tree whose leaves are the points of a source metric. Edges are
/// identified by their lower endpoint.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddedTree {
    parent: Vec<Option<usize>>,
    /// Length of the edge to the parent; 0 at the root.
    edge_len: Vec<f64>,
    children: Vec<Vec<usize>>,
    leaf_of: Vec<usize>,
    point_of: Vec<Option<usize>>,
    root: usize,
    node_depth: Vec<usize>,
    root_dist: Vec<f64>,
}

impl EmbeddedTree {
    /// Builds a tree from parent pointers. `leaf_of[p]` is the node standing
    /// for source point `p`.
    pub fn from_parents(parent: Vec<Option<usize>>, edge_len: Vec<f64>, leaf_of: Vec<usize>) -> Result<Self> {
        let n = parent.len();
        if edge_len.len() != n {
            return Err(Error::Invalid("parent and edge length vectors differ in size".into()));
        }
        let roots: Vec<usize> = (0..n).filter(|&v| parent[v].is_none()).collect();
        if roots.len() != 1 {
            return Err(Error::Invalid(format!("tree needs exactly one root, found {}", roots.len())));
        }
        let mut children = vec![Vec::new(); n];
        for v in 0..n {
            if let Some(p) = parent[v] {
                if p >= n {
                    return Err(Error::Invalid(format!("node {v} has unknown parent {p}")));
                }
                if !(edge_len[v] >= 0.0 && edge_len[v].is_finite()) {
                    return Err(Error::Invalid(format!("edge above node {v} has bad length")));
                }
                children[p].push(v);
            }
        }
        let mut point_of = vec![None; n];
        for (p, &leaf) in leaf_of.iter().enumerate() {
            if leaf >= n || point_of[leaf].replace(p).is_some() {
                return Err(Error::Invalid(format!("point {p} has an invalid or shared leaf")));
            }
        }
        let mut t = EmbeddedTree {
            parent,
            edge_len,
            children,
            leaf_of,
            point_of,
            root: roots[0],
            node_depth: vec![0; n],
            root_dist: vec![0.0; n],
        };
        let seen = t.recompute_depths();
        if seen != n {
            return Err(Error::Invalid("parent pointers contain a cycle".into()));
        }
        Ok(t)
    }

    fn recompute_depths(&mut self) -> usize {
        let mut queue = VecDeque::from([self.root]);
        self.node_depth[self.root] = 0;
        self.root_dist[self.root] = 0.0;
        let mut seen = 0;
        while let Some(v) = queue.pop_front() {
            seen += 1;
            for i in 0..self.children[v].len() {
                let c = self.children[v][i];
                self.node_depth[c] = self.node_depth[v] + 1;
                self.root_dist[c] = self.root_dist[v] + self.edge_len[c];
                queue.push_back(c);
            }
        }
        seen
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn edge_len(&self, v: usize) -> f64 {
        self.edge_len[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// Leaf node standing for a source point.
    pub fn leaf(&self, point: usize) -> usize {
        self.leaf_of[point]
    }

    pub fn point_at(&self, node: usize) -> Option<usize> {
        self.point_of[node]
    }

    pub fn num_points(&self) -> usize {
        self.leaf_of.len()
    }

    pub fn node_depth(&self, v: usize) -> usize {
        self.node_depth[v]
    }

    pub fn root_distance(&self, v: usize) -> f64 {
        self.root_dist[v]
    }

    /// Maximum number of edges on a root-to-node path.
    pub fn depth(&self) -> usize {
        self.node_depth.iter().copied().max().unwrap_or(0)
    }

    pub fn lca(&self, mut a: usize, mut b: usize) -> usize {
        while self.node_depth[a] > self.node_depth[b] {
            a = self.parent[a].unwrap();
        }
        while self.node_depth[b] > self.node_depth[a] {
            b = self.parent[b].unwrap();
        }
        while a != b {
            a = self.parent[a].unwrap();
            b = self.parent[b].unwrap();
        }
        a
    }

    pub fn node_distance(&self, a: usize, b: usize) -> f64 {
        let c = self.lca(a, b);
        self.root_dist[a] + self.root_dist[b] - 2.0 * self.root_dist[c]
    }

    /// Nodes in preorder (children in stored order).
    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.node_count());
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            out.push(v);
            stack.extend(self.children[v].iter().rev());
        }
        out
    }

    /// Whether `anc` lies on the root path of `v` (inclusive).
    pub fn is_ancestor(&self, anc: usize, mut v: usize) -> bool {
        while self.node_depth[v] > self.node_depth[anc] {
            v = self.parent[v].unwrap();
        }
        v == anc
    }

    /// Indented text dump for debugging.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            let pad = "  ".repeat(self.node_depth[v]);
            match self.point_of[v] {
                Some(p) => writeln!(out, "{pad}{v} [point {p}] +{}", self.edge_len[v]).unwrap(),
                None => writeln!(out, "{pad}{v} +{}", self.edge_len[v]).unwrap(),
            }
            stack.extend(self.children[v].iter().rev());
        }
        out
    }
}

/// Tree distance between two source points.
pub fn tree_distance(t: &EmbeddedTree, u: usize, v: usize) -> Result<f64> {
    if u >= t.num_points() || v >= t.num_points() {
        return Err(Error::UnknownPoint(format!("{}", u.max(v))));
    }
    Ok(t.node_distance(t.leaf(u), t.leaf(v)))
}

/// Reorients the tree so the leaf of point `r` becomes the root.
pub fn reroot_at_leaf(t: &EmbeddedTree, r: usize) -> Result<EmbeddedTree> {
    if r >= t.num_points() {
        return Err(Error::UnknownPoint(r.to_string()));
    }
    let n = t.node_count();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for v in 0..n {
        if let Some(p) = t.parent[v] {
            adj[v].push((p, t.edge_len[v]));
            adj[p].push((v, t.edge_len[v]));
        }
    }
    let new_root = t.leaf(r);
    let mut parent = vec![None; n];
    let mut edge_len = vec![0.0; n];
    let mut seen = vec![false; n];
    seen[new_root] = true;
    let mut queue = VecDeque::from([new_root]);
    while let Some(v) = queue.pop_front() {
        for &(w, len) in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                parent[w] = Some(v);
                edge_len[w] = len;
                queue.push_back(w);
            }
        }
    }
    EmbeddedTree::from_parents(parent, edge_len, t.leaf_of.clone())
}

/// Samples a dominating tree for `m`. Points at distance zero from each
/// other become sibling leaves sharing one parent edge length.
pub fn embed(m: &MetricSpace, seed: u64) -> Result<EmbeddedTree> {
    let n = m.len();
    if n < 2 {
        return Err(Error::DegenerateMetric("need at least two points".into()));
    }
    // Collapse zero-distance classes onto their smallest member.
    let mut rep = vec![usize::MAX; n];
    let mut reps = Vec::new();
    for u in 0..n {
        if rep[u] != usize::MAX {
            continue;
        }
        rep[u] = u;
        reps.push(u);
        for (v, slot) in rep.iter_mut().enumerate().skip(u + 1) {
            if *slot == usize::MAX && m.d(u, v) <= EPS {
                *slot = u;
            }
        }
    }
    if reps.len() < 2 {
        return Err(Error::DegenerateMetric("all points coincide".into()));
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n];
    for u in 0..n {
        members[rep[u]].push(u);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let beta = 2f64.powf(rng.gen::<f64>());
    let mut order = reps.clone();
    order.shuffle(&mut rng);

    let dmax = reps.iter().flat_map(|&u| reps.iter().map(move |&v| (u, v))).map(|(u, v)| m.d(u, v)).fold(0.0, f64::max);
    let top = dmax.log2().ceil() as i32;

    let mut parent: Vec<Option<usize>> = Vec::new();
    let mut edge_len: Vec<f64> = Vec::new();
    let mut leaf_of = vec![usize::MAX; n];
    let mut new_node = |p: Option<usize>, len: f64, parent: &mut Vec<Option<usize>>| {
        parent.push(p);
        edge_len.push(len);
        parent.len() - 1
    };

    // (cluster, level, parent node, pending length of the edge above it)
    let mut stack: Vec<(Vec<usize>, i32, Option<usize>, f64)> = vec![(reps.clone(), top, None, 0.0)];
    while let Some((cluster, level, up, up_len)) = stack.pop() {
        if cluster.len() == 1 {
            for &p in &members[cluster[0]] {
                leaf_of[p] = new_node(up, up_len, &mut parent);
            }
            continue;
        }
        let radius = beta * 2f64.powi(level - 3);
        let mut children: Vec<Vec<usize>> = Vec::new();
        let mut center_slot: Vec<(usize, usize)> = Vec::new();
        for &x in &cluster {
            let c = *order.iter().find(|&&w| m.d(w, x) <= radius).expect("x is its own center");
            match center_slot.iter().find(|(cc, _)| *cc == c) {
                Some(&(_, slot)) => children[slot].push(x),
                None => {
                    center_slot.push((c, children.len()));
                    children.push(vec![x]);
                }
            }
        }
        let child_len = 2f64.powi(level);
        if children.len() == 1 {
            // Contract the single-child step into the edge above.
            let carried = if up.is_some() { up_len + child_len } else { 0.0 };
            stack.push((cluster, level - 1, up, carried));
            continue;
        }
        let node = new_node(up, up_len, &mut parent);
        for c in children.into_iter().rev() {
            stack.push((c, level - 1, Some(node), child_len));
        }
    }
    let tree = EmbeddedTree::from_parents(parent, edge_len, leaf_of)?;
    debug_assert!(dominates(&tree, m));
    Ok(tree)
}

fn dominates(t: &EmbeddedTree, m: &MetricSpace) -> bool {
    (0..m.len()).all(|u| (u + 1..m.len()).all(|v| t.node_distance(t.leaf(u), t.leaf(v)) + EPS >= m.d(u, v)))
}
