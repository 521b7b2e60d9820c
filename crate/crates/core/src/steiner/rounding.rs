use rand::Rng;

use super::{snap, GroupSteinerInstance};
use crate::error::{Error, Result};

/// One GKR sample: each edge kept independently with probability
/// `x_e / x_π(e)` (1 under the root), then the root component is returned
/// as a per-node membership mask.
pub fn gkr_round<R: Rng + ?Sized>(gsi: &GroupSteinerInstance, x: &[f64], rng: &mut R) -> Vec<bool> {
    let t = &gsi.tree;
    let n = t.node_count();
    let root = t.root();
    let mut kept = vec![false; n];
    for v in 0..n {
        if v == root {
            continue;
        }
        let p = t.parent(v).unwrap();
        let up = if p == root { 1.0 } else { x[p] };
        let prob = if up > 0.0 { (x[v] / up).min(1.0) } else { 0.0 };
        kept[v] = rng.gen::<f64>() < prob;
    }
    let mut in_tree = vec![false; n];
    for v in t.preorder() {
        in_tree[v] = v == root || (kept[v] && in_tree[t.parent(v).unwrap()]);
    }
    in_tree
}

/// Expected length `Σ d_e x_e`.
pub fn estimator_d(gsi: &GroupSteinerInstance, x: &[f64]) -> f64 {
    gsi.edges().map(|v| gsi.tree.edge_len(v) * x[v]).sum()
}

/// Pessimistic coverage estimate
/// `Σ_i w_i Σ_{v∈S_i} [x_π(v) − (1/(2H+2)) Σ_{u∈S_i} x_π(v) x_π(u) / x_a(u,v)]`
/// where `a(u,v)` is the edge above the lowest common ancestor of `u` and `v`.
pub fn estimator_p(gsi: &GroupSteinerInstance, x: &[f64]) -> Result<f64> {
    let t = &gsi.tree;
    let root = t.root();
    let coef = 1.0 / (2.0 * gsi.depth() as f64 + 2.0);
    let mut total = 0.0;
    for g in &gsi.groups {
        let mut inner = 0.0;
        for &v in &g.nodes {
            let xv = x[v];
            let mut pair = 0.0;
            if xv > 0.0 {
                for &u in &g.nodes {
                    let xu = x[u];
                    if xu == 0.0 {
                        continue;
                    }
                    let c = t.lca(u, v);
                    let xa = if c == root { 1.0 } else { x[c] };
                    if xa <= 0.0 {
                        return Err(Error::Rounding(format!(
                            "edge above {c} is zero while leaves {u} and {v} below it are not"
                        )));
                    }
                    pair += xv * xu / xa;
                }
            }
            inner += xv - coef * pair;
        }
        total += g.weight * inner;
    }
    Ok(total)
}

fn ratio(d: f64, p: f64) -> f64 {
    if p > 0.0 {
        d / p
    } else {
        f64::INFINITY
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundStep {
    /// Node below the processed edge.
    pub edge: usize,
    pub x_e: f64,
    pub d: f64,
    pub p: f64,
    pub d_zero: f64,
    pub p_zero: f64,
    pub d_one: f64,
    pub p_one: f64,
    pub chose_one: bool,
}

impl RoundStep {
    pub fn ratio_before(&self) -> f64 {
        ratio(self.d, self.p)
    }

    pub fn ratio_after(&self) -> f64 {
        if self.chose_one {
            ratio(self.d_one, self.p_one)
        } else {
            ratio(self.d_zero, self.p_zero)
        }
    }
}

#[derive(Clone, Debug)]
pub struct Rounded {
    /// Integral edge values.
    pub x: Vec<f64>,
    pub steps: Vec<RoundStep>,
    pub initial_d: f64,
    pub initial_p: f64,
}

impl Rounded {
    pub fn cost(&self, gsi: &GroupSteinerInstance) -> f64 {
        estimator_d(gsi, &self.x)
    }
}

/// Deterministic rounding: edges in order of depth (ties by node id); each
/// fractional edge either drops its subtree or divides it by `x_e`,
/// whichever gives the smaller `D/P` (ties drop).
pub fn det_round(gsi: &GroupSteinerInstance, x0: &[f64]) -> Result<Rounded> {
    let t = &gsi.tree;
    let mut x: Vec<f64> = x0.iter().map(|&v| snap(v)).collect();
    x[t.root()] = 1.0;
    let mut order: Vec<usize> = gsi.edges().collect();
    order.sort_by_key(|&v| (t.node_depth(v), v));
    let initial_d = estimator_d(gsi, &x);
    let initial_p = estimator_p(gsi, &x)?;
    let mut steps = Vec::new();
    let (mut d, mut p) = (initial_d, initial_p);
    for e in order {
        let xe = x[e];
        if xe <= 0.0 || xe >= 1.0 {
            continue;
        }
        if p <= 0.0 && d > 0.0 {
            return Err(Error::Rounding(format!("estimator dropped to {p} with cost {d}")));
        }
        let subtree = subtree_nodes(gsi, e);
        let mut x_zero = x.clone();
        let mut x_one = x.clone();
        for &g in &subtree {
            x_zero[g] = 0.0;
            x_one[g] = x[g] / xe;
        }
        x_one[e] = 1.0;
        let (d0, p0) = (estimator_d(gsi, &x_zero), estimator_p(gsi, &x_zero)?);
        let (d1, p1) = (estimator_d(gsi, &x_one), estimator_p(gsi, &x_one)?);
        let chose_one = ratio(d1, p1) < ratio(d0, p0);
        steps.push(RoundStep { edge: e, x_e: xe, d, p, d_zero: d0, p_zero: p0, d_one: d1, p_one: p1, chose_one });
        if chose_one {
            x = x_one;
            (d, p) = (d1, p1);
        } else {
            x = x_zero;
            (d, p) = (d0, p0);
        }
    }
    if let Some(v) = x.iter().position(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::Rounding(format!("edge above {v} left fractional at {}", x[v])));
    }
    Ok(Rounded { x, steps, initial_d, initial_p })
}

fn subtree_nodes(gsi: &GroupSteinerInstance, top: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut stack = vec![top];
    while let Some(v) = stack.pop() {
        out.push(v);
        stack.extend_from_slice(gsi.tree.children(v));
    }
    out
}

/// Nodes with `x = 1`, plus the root.
pub fn selected_nodes(gsi: &GroupSteinerInstance, x: &[f64]) -> Vec<bool> {
    let root = gsi.tree.root();
    (0..gsi.tree.node_count()).map(|v| v == root || x[v] >= 1.0).collect()
}

/// Total weight of groups with at least one selected node.
pub fn coverage_of(gsi: &GroupSteinerInstance, selected: &[bool]) -> f64 {
    gsi.groups.iter().filter(|g| g.nodes.iter().any(|&v| selected[v])).map(|g| g.weight).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::EmbeddedTree;
    use crate::lp::DenseSimplex;
    use crate::steiner::tests::{random_groups, random_tree, two_leaf};
    use crate::steiner::{preprocess, solve_lp};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single_edge() -> GroupSteinerInstance {
        let t = EmbeddedTree::from_parents(vec![None, Some(0)], vec![0.0, 1.0], vec![0, 1]).unwrap();
        preprocess(&[(vec![1], 1.0)], &t).unwrap()
    }

    #[test]
    fn gkr_root_edge_always_kept_at_one() {
        let gsi = single_edge();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((0..100).all(|_| gkr_round(&gsi, &[1.0, 1.0], &mut rng)[1]));
    }

    #[test]
    fn gkr_chain_marginals() {
        let t = EmbeddedTree::from_parents(vec![None, Some(0), Some(1)], vec![0.0, 1.0, 1.0], vec![0, 2]).unwrap();
        let gsi = preprocess(&[(vec![1], 1.0)], &t).unwrap();
        let x = [1.0, 0.5, 0.25];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let trials = 100_000;
        let (mut top, mut leaf) = (0, 0);
        for _ in 0..trials {
            let s = gkr_round(&gsi, &x, &mut rng);
            top += s[1] as usize;
            leaf += s[2] as usize;
        }
        assert!((top as f64 / trials as f64 - 0.5).abs() < 0.02);
        assert!((leaf as f64 / trials as f64 - 0.25).abs() < 0.02);
    }

    #[test]
    fn estimator_examples() {
        let gsi = single_edge();
        let h = gsi.depth() as f64;
        assert_eq!(estimator_d(&gsi, &[1.0, 1.0]), 1.0);
        let p = estimator_p(&gsi, &[1.0, 1.0]).unwrap();
        assert!((p - (1.0 - 1.0 / (2.0 * h + 2.0))).abs() < 1e-12);
        assert_eq!(estimator_d(&gsi, &[1.0, 0.0]), 0.0);
        assert_eq!(estimator_p(&gsi, &[1.0, 0.0]).unwrap(), 0.0);
        // Optimum of the two-leaf program covers at least half a unit.
        let two = preprocess(&[(vec![1], 1.0), (vec![2], 1.0)], &two_leaf()).unwrap();
        let frac = solve_lp(&two, &DenseSimplex).unwrap();
        let wy: f64 = frac.y.iter().zip(&two.groups).map(|(y, g)| y * g.weight).sum();
        assert!(estimator_p(&two, &frac.x).unwrap() >= 0.5 * wy - 1e-12);
    }

    #[test]
    fn det_round_integral_input_unchanged() {
        let gsi = single_edge();
        let r = det_round(&gsi, &[1.0, 1.0]).unwrap();
        assert!(r.steps.is_empty());
        assert_eq!(r.x, vec![1.0, 1.0]);
    }

    #[test]
    fn det_round_half_edge_goes_up() {
        let gsi = single_edge();
        let r = det_round(&gsi, &[1.0, 0.5]).unwrap();
        assert_eq!(r.steps.len(), 1);
        assert!(r.steps[0].chose_one);
        assert_eq!(r.steps[0].p_zero, 0.0);
        assert_eq!(r.x, vec![1.0, 1.0]);
    }

    #[test]
    fn det_round_invariants_on_random_trees() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..30 {
            let t = random_tree(&mut rng, 5, 10);
            let gsi = preprocess(&random_groups(&mut rng, 11, 4), &t).unwrap();
            if gsi.groups.is_empty() {
                continue;
            }
            let frac = solve_lp(&gsi, &DenseSimplex).unwrap();
            let r = det_round(&gsi, &frac.x).unwrap();
            for s in &r.steps {
                assert!((s.d - (s.x_e * s.d_one + (1.0 - s.x_e) * s.d_zero)).abs() < 1e-9);
                assert!((s.p - (s.x_e * s.p_one + (1.0 - s.x_e) * s.p_zero)).abs() < 1e-9);
                assert!(s.ratio_after() <= s.ratio_before() * (1.0 + 1e-9));
            }
            let sel = selected_nodes(&gsi, &r.x);
            let cov = coverage_of(&gsi, &sel);
            assert!(cov > 0.0);
            let h = gsi.depth() as f64;
            let p_final = estimator_p(&gsi, &r.x).unwrap();
            assert!(p_final <= (h + 1.0) / 2.0 * cov + 1e-9);
            let wy: f64 = frac.y.iter().zip(&gsi.groups).map(|(y, g)| y * g.weight).sum();
            let lp_ratio = frac.objective / wy;
            assert!(r.cost(&gsi) / cov <= (h + 1.0) * lp_ratio + 1e-9);
        }
    }
}
