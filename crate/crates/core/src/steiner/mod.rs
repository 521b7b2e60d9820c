//! Ratio group Steiner on trees: LP relaxation, GKR rounding, deterministic
//! rounding with a pessimistic coverage estimator, and the metric solver that
//! goes through random tree embeddings.

mod rounding;
mod solve;

pub use rounding::{coverage_of, det_round, estimator_d, estimator_p, gkr_round, selected_nodes, RoundStep, Rounded};
pub use solve::{solve_ratio_gst, GstConfig, GstSolution};

use std::collections::BTreeMap;

use crate::embed::EmbeddedTree;
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpBackend, LpStatus, Relation};

/// Values below this are snapped to 0 (and within it of 1, to 1).
pub const SNAP: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Group {
    /// Tree nodes, all leaves after preprocessing.
    pub nodes: Vec<usize>,
    pub weight: f64,
}

#[derive(Clone, Debug)]
pub struct GroupSteinerInstance {
    pub tree: EmbeddedTree,
    pub groups: Vec<Group>,
    /// Source point of each tree node (duplicated leaves share their point).
    pub node_point: Vec<Option<usize>>,
    /// Factor applied to the raw weights so the smallest is 1.
    pub weight_scale: f64,
}

impl GroupSteinerInstance {
    /// Tree depth `H` used by the estimator.
    pub fn depth(&self) -> usize {
        self.tree.depth()
    }

    /// Non-root nodes; each stands for the edge to its parent.
    pub fn edges(&self) -> impl Iterator<Item = usize> + '_ {
        let root = self.tree.root();
        (0..self.tree.node_count()).filter(move |&v| v != root)
    }
}

/// Normalizes raw groups of source points on a rooted tree: the root point
/// is dropped from groups, empty groups are dropped, groups with identical
/// node sets are merged (weights add), descendants of another member are
/// removed, weights are rescaled to a minimum of 1, and leaves shared by
/// several groups get one zero-length child per group.
pub fn preprocess(groups: &[(Vec<usize>, f64)], tree: &EmbeddedTree) -> Result<GroupSteinerInstance> {
    let root = tree.root();
    let mut merged: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for (i, (points, w)) in groups.iter().enumerate() {
        if !(*w > 0.0 && w.is_finite()) {
            return Err(Error::Invalid(format!("group {i} has weight {w}")));
        }
        let mut nodes = Vec::with_capacity(points.len());
        for &p in points {
            if p >= tree.num_points() {
                return Err(Error::UnknownPoint(p.to_string()));
            }
            let v = tree.leaf(p);
            if v != root {
                nodes.push(v);
            }
        }
        nodes.sort_unstable();
        nodes.dedup();
        let kept: Vec<usize> =
            nodes.iter().copied().filter(|&v| !nodes.iter().any(|&a| a != v && tree.is_ancestor(a, v))).collect();
        if kept.is_empty() {
            log::debug!("dropping empty group {i}");
            continue;
        }
        *merged.entry(kept).or_default() += w;
    }
    let min_w = merged.values().copied().fold(f64::INFINITY, f64::min);
    let scale = if min_w.is_finite() { 1.0 / min_w } else { 1.0 };

    let n = tree.node_count();
    let mut parent: Vec<Option<usize>> = (0..n).map(|v| tree.parent(v)).collect();
    let mut edge_len: Vec<f64> = (0..n).map(|v| tree.edge_len(v)).collect();
    let mut node_point: Vec<Option<usize>> = (0..n).map(|v| tree.point_at(v)).collect();
    let mut uses = vec![0usize; n];
    for nodes in merged.keys() {
        for &v in nodes {
            uses[v] += 1;
        }
    }
    let mut out_groups = Vec::with_capacity(merged.len());
    for (nodes, w) in merged {
        let nodes = nodes
            .into_iter()
            .map(|v| {
                if uses[v] < 2 {
                    return v;
                }
                parent.push(Some(v));
                edge_len.push(0.0);
                node_point.push(node_point[v]);
                parent.len() - 1
            })
            .collect();
        out_groups.push(Group { nodes, weight: w * scale });
    }
    let leaf_of = (0..tree.num_points()).map(|p| tree.leaf(p)).collect();
    let tree = EmbeddedTree::from_parents(parent, edge_len, leaf_of)?;
    Ok(GroupSteinerInstance { tree, groups: out_groups, node_point, weight_scale: scale })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FractionalSolution {
    /// `x[v]` for the edge above node `v`; the root entry is 1 by convention.
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `flow[i][v]` = flow of group `i` on the edge above `v`.
    pub flow: Vec<Vec<f64>>,
    pub objective: f64,
}

/// Variable indices of [`build_lp`].
#[derive(Clone, Debug)]
pub struct LpLayout {
    pub x: Vec<Option<usize>>,
    pub y: Vec<usize>,
    pub f: Vec<Vec<Option<usize>>>,
}

/// The relaxation with edge variables `x`, coverage variables `y` and one
/// flow per group: monotone `x_e ≤ x_π(e)`, flow balance away from group
/// leaves, `Σ_{v∈S_i} f_π(v) = y_i`, capacities `f ≤ x`, `Σ w_i y_i ≥ 1`.
pub fn build_lp(gsi: &GroupSteinerInstance) -> Result<(LinearProgram, LpLayout)> {
    let t = &gsi.tree;
    let n = t.node_count();
    let root = t.root();
    let mut lp = LinearProgram::new();
    let x: Vec<Option<usize>> = (0..n).map(|v| (v != root).then(|| lp.add_var(format!("x{v}")))).collect();
    let y: Vec<usize> = (0..gsi.groups.len()).map(|i| lp.add_var(format!("y{i}"))).collect();
    let f: Vec<Vec<Option<usize>>> = (0..gsi.groups.len())
        .map(|i| (0..n).map(|v| (v != root).then(|| lp.add_var(format!("f{i}_{v}")))).collect())
        .collect();
    for v in gsi.edges() {
        let p = t.parent(v).unwrap();
        if p != root {
            lp.add_constraint(vec![(x[v].unwrap(), 1.0), (x[p].unwrap(), -1.0)], Relation::Le, 0.0)?;
        }
    }
    for (i, g) in gsi.groups.iter().enumerate() {
        for v in gsi.edges() {
            if g.nodes.contains(&v) {
                continue;
            }
            let mut terms = vec![(f[i][v].unwrap(), 1.0)];
            terms.extend(t.children(v).iter().map(|&c| (f[i][c].unwrap(), -1.0)));
            lp.add_constraint(terms, Relation::Eq, 0.0)?;
        }
        let mut terms: Vec<(usize, f64)> = g.nodes.iter().map(|&v| (f[i][v].unwrap(), 1.0)).collect();
        terms.push((y[i], -1.0));
        lp.add_constraint(terms, Relation::Eq, 0.0)?;
        for v in gsi.edges() {
            lp.add_constraint(vec![(f[i][v].unwrap(), 1.0), (x[v].unwrap(), -1.0)], Relation::Le, 0.0)?;
        }
    }
    lp.add_constraint(gsi.groups.iter().enumerate().map(|(i, g)| (y[i], g.weight)).collect(), Relation::Ge, 1.0)?;
    lp.set_objective(gsi.edges().map(|v| (x[v].unwrap(), t.edge_len(v))).collect())?;
    Ok((lp, LpLayout { x, y, f }))
}

/// Equivalent smaller program: on a tree each group flow is determined by
/// the amounts `z_{i,v}` delivered to its leaves, so capacities become
/// `Σ_{v∈S_i below e} z_{i,v} ≤ x_e`.
pub fn build_compact_lp(gsi: &GroupSteinerInstance) -> Result<(LinearProgram, Vec<Option<usize>>, Vec<Vec<usize>>)> {
    let t = &gsi.tree;
    let n = t.node_count();
    let root = t.root();
    let mut lp = LinearProgram::new();
    let x: Vec<Option<usize>> = (0..n).map(|v| (v != root).then(|| lp.add_var(format!("x{v}")))).collect();
    let z: Vec<Vec<usize>> = gsi
        .groups
        .iter()
        .enumerate()
        .map(|(i, g)| g.nodes.iter().map(|&v| lp.add_var(format!("z{i}_{v}"))).collect())
        .collect();
    for v in gsi.edges() {
        let p = t.parent(v).unwrap();
        if p != root {
            lp.add_constraint(vec![(x[v].unwrap(), 1.0), (x[p].unwrap(), -1.0)], Relation::Le, 0.0)?;
        }
    }
    for (i, g) in gsi.groups.iter().enumerate() {
        // Edges on the root paths of this group's leaves.
        let mut below: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (j, &leaf) in g.nodes.iter().enumerate() {
            let mut v = leaf;
            while v != root {
                below.entry(v).or_default().push(z[i][j]);
                v = t.parent(v).unwrap();
            }
        }
        for (e, zs) in below {
            let mut terms: Vec<(usize, f64)> = zs.into_iter().map(|zv| (zv, 1.0)).collect();
            terms.push((x[e].unwrap(), -1.0));
            lp.add_constraint(terms, Relation::Le, 0.0)?;
        }
    }
    let mut norm = Vec::new();
    for (i, g) in gsi.groups.iter().enumerate() {
        norm.extend(z[i].iter().map(|&zv| (zv, g.weight)));
    }
    lp.add_constraint(norm, Relation::Ge, 1.0)?;
    lp.set_objective(gsi.edges().map(|v| (x[v].unwrap(), t.edge_len(v))).collect())?;
    Ok((lp, x, z))
}

/// Solves the relaxation and normalizes the optimum: `Σ w y = 1`, each
/// edge carries exactly the largest flow or child value below it, and group
/// leaf edges are saturated by their own group's flow.
pub fn solve_lp(gsi: &GroupSteinerInstance, backend: &dyn LpBackend) -> Result<FractionalSolution> {
    if gsi.groups.is_empty() {
        return Err(Error::Lp("no groups: coverage constraint is infeasible".into()));
    }
    let (lp, _, z) = build_compact_lp(gsi)?;
    let sol = backend.solve(&lp)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(Error::Lp("relaxation infeasible".into())),
        LpStatus::Unbounded => return Err(Error::Lp("relaxation unbounded".into())),
    }
    let t = &gsi.tree;
    let n = t.node_count();
    let root = t.root();
    let mut zval: Vec<Vec<f64>> = z.iter().map(|zs| zs.iter().map(|&v| sol.values[v].max(0.0)).collect()).collect();
    let total: f64 = gsi.groups.iter().zip(&zval).map(|(g, zs)| g.weight * zs.iter().sum::<f64>()).sum();
    if total < 1.0 - 1e-7 {
        return Err(Error::Lp(format!("solver returned coverage {total} < 1")));
    }
    for zs in &mut zval {
        for v in zs.iter_mut() {
            *v /= total;
        }
    }
    let mut flow = vec![vec![0.0; n]; gsi.groups.len()];
    let order = t.preorder();
    for (i, g) in gsi.groups.iter().enumerate() {
        for (j, &leaf) in g.nodes.iter().enumerate() {
            flow[i][leaf] += zval[i][j];
        }
        for &v in order.iter().rev() {
            if let Some(p) = t.parent(v) {
                if p != root {
                    let fv = flow[i][v];
                    flow[i][p] += fv;
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for &v in order.iter().rev() {
        if v == root {
            continue;
        }
        let mut val = flow.iter().map(|f| f[v]).fold(0.0, f64::max);
        for &c in t.children(v) {
            val = val.max(x[c]);
        }
        x[v] = snap(val.min(1.0));
    }
    x[root] = 1.0;
    let y: Vec<f64> = zval.iter().map(|zs| zs.iter().sum()).collect();
    let objective = gsi.edges().map(|v| t.edge_len(v) * x[v]).sum();
    Ok(FractionalSolution { x, y, flow, objective })
}

pub(crate) fn snap(v: f64) -> f64 {
    if v.abs() <= SNAP {
        0.0
    } else if (v - 1.0).abs() <= SNAP {
        1.0
    } else {
        v
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::lp::{solve, DenseSimplex};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// root 0 with leaves a (node 1, length 1) and b (node 2, length 3);
    /// point 0 = root, point 1 = a, point 2 = b.
    pub fn two_leaf() -> EmbeddedTree {
        EmbeddedTree::from_parents(vec![None, Some(0), Some(0)], vec![0.0, 1.0, 3.0], vec![0, 1, 2]).unwrap()
    }

    /// Random rooted tree with `leaves` point leaves hanging under random
    /// internal nodes; point 0 is the root.
    pub fn random_tree(rng: &mut ChaCha8Rng, internal: usize, leaves: usize) -> EmbeddedTree {
        let mut parent = vec![None];
        let mut len = vec![0.0];
        for v in 1..=internal {
            parent.push(Some(rng.gen_range(0..v)));
            len.push(rng.gen_range(1..=8) as f64);
        }
        let mut leaf_of = vec![0];
        for _ in 0..leaves {
            parent.push(Some(rng.gen_range(0..=internal)));
            len.push(rng.gen_range(1..=8) as f64);
            leaf_of.push(parent.len() - 1);
        }
        EmbeddedTree::from_parents(parent, len, leaf_of).unwrap()
    }

    pub fn random_groups(rng: &mut ChaCha8Rng, points: usize, k: usize) -> Vec<(Vec<usize>, f64)> {
        (0..k)
            .map(|_| {
                let size = rng.gen_range(1..=3.min(points - 1));
                let pts = (0..size).map(|_| rng.gen_range(1..points)).collect();
                (pts, rng.gen_range(1..=4) as f64 * 0.5)
            })
            .collect()
    }

    #[test]
    fn disjoint_groups_unchanged() {
        let gsi = preprocess(&[(vec![1], 1.0), (vec![2], 2.0)], &two_leaf()).unwrap();
        assert_eq!(gsi.tree.node_count(), 3);
        assert_eq!(gsi.groups, vec![Group { nodes: vec![1], weight: 1.0 }, Group { nodes: vec![2], weight: 2.0 }]);
    }

    #[test]
    fn shared_leaf_duplicated() {
        let t = two_leaf();
        let gsi = preprocess(&[(vec![1], 1.0), (vec![1, 2], 1.0)], &t).unwrap();
        assert_eq!(gsi.tree.node_count(), 5);
        let (a, b) = (gsi.groups[0].nodes[0], gsi.groups[1].nodes[0]);
        assert_ne!(a, b);
        assert_eq!(gsi.tree.parent(a), Some(1));
        assert_eq!(gsi.tree.parent(b), Some(1));
        assert_eq!(gsi.tree.node_distance(a, 0), 1.0);
        assert_eq!(gsi.node_point[a], Some(1));
        // Every pair of groups is disjoint.
        assert!(gsi.groups[0].nodes.iter().all(|v| !gsi.groups[1].nodes.contains(v)));
    }

    #[test]
    fn weights_rescaled_and_identical_groups_merged() {
        let gsi = preprocess(&[(vec![1], 0.5), (vec![2], 0.5)], &two_leaf()).unwrap();
        assert_eq!(gsi.weight_scale, 2.0);
        assert!(gsi.groups.iter().all(|g| g.weight == 1.0));
        let gsi = preprocess(&[(vec![1], 0.5), (vec![1], 0.25), (vec![0], 3.0)], &two_leaf()).unwrap();
        assert_eq!(gsi.groups.len(), 1);
        assert_eq!(gsi.groups[0].weight, 1.0);
    }

    #[test]
    fn descendants_dropped() {
        // chain root 0 - 1 - 2 with points at 1 and 2.
        let t = EmbeddedTree::from_parents(vec![None, Some(0), Some(1)], vec![0.0, 1.0, 1.0], vec![0, 1, 2]).unwrap();
        let gsi = preprocess(&[(vec![1, 2], 1.0)], &t).unwrap();
        assert_eq!(gsi.groups[0].nodes, vec![1]);
    }

    #[test]
    fn single_edge_lp() {
        let t = EmbeddedTree::from_parents(vec![None, Some(0)], vec![0.0, 1.0], vec![0, 1]).unwrap();
        let gsi = preprocess(&[(vec![1], 1.0)], &t).unwrap();
        let (lp, layout) = build_lp(&gsi).unwrap();
        let s = solve(&lp).unwrap();
        assert!((s.objective - 1.0).abs() < 1e-9);
        assert!((s.values[layout.x[1].unwrap()] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn two_leaf_lp_picks_cheap_unit() {
        let gsi = preprocess(&[(vec![1], 1.0), (vec![2], 1.0)], &two_leaf()).unwrap();
        let (lp, layout) = build_lp(&gsi).unwrap();
        let s = solve(&lp).unwrap();
        assert!((s.objective - 1.0).abs() < 1e-9);
        assert!((s.values[layout.y[0]] - 1.0).abs() < 1e-9);
        let frac = solve_lp(&gsi, &DenseSimplex).unwrap();
        assert!((frac.objective - 1.0).abs() < 1e-9);
        assert_eq!(frac.x, vec![1.0, 1.0, 0.0]);
    }

    #[test]
    fn no_groups_infeasible() {
        let gsi = preprocess(&[], &two_leaf()).unwrap();
        let (lp, _) = build_lp(&gsi).unwrap();
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Infeasible);
        assert!(solve_lp(&gsi, &DenseSimplex).is_err());
    }

    #[test]
    fn compact_and_full_programs_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..40 {
            let t = random_tree(&mut rng, 4, 6);
            let groups = random_groups(&mut rng, 7, 3);
            let gsi = preprocess(&groups, &t).unwrap();
            if gsi.groups.is_empty() {
                continue;
            }
            let full = solve(&build_lp(&gsi).unwrap().0).unwrap();
            let frac = solve_lp(&gsi, &DenseSimplex).unwrap();
            assert!((full.objective - frac.objective).abs() < 1e-7, "{} vs {}", full.objective, frac.objective);
            // Normalized solution satisfies the full program.
            let (lp, layout) = build_lp(&gsi).unwrap();
            let mut vals = vec![0.0; lp.num_vars()];
            for v in gsi.edges() {
                vals[layout.x[v].unwrap()] = frac.x[v];
                for i in 0..gsi.groups.len() {
                    vals[layout.f[i][v].unwrap()] = frac.flow[i][v];
                }
            }
            for i in 0..gsi.groups.len() {
                vals[layout.y[i]] = frac.y[i];
            }
            assert!(lp.max_violation(&vals) < 1e-7);
            for (i, g) in gsi.groups.iter().enumerate() {
                for &v in &g.nodes {
                    assert!((frac.x[v] - frac.flow[i][v]).abs() < 1e-9, "leaf edge not saturated");
                }
            }
        }
    }
}
