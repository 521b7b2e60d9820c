//! Ratio submodular orienteering for the planner's tour score.
//!
//! For a visited set `S` and large parts `𝒵`, the numerator
//! `g(T) = Σ_Z [ Σ_{ω∈L_T(Z)} p_ω + Σ_{ω∈Z} p_ω (f(ψ_Z(S) ∪ ψ_ω(T)) − f(ψ_Z(S))) / Q_Z ]`
//! is monotone submodular; a tour's score is `g(T) / d(T)`.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::instance::{large_parts, CoverageFilter, IppInstance, ObsId, PartialRealization};
use crate::lp::{DenseSimplex, LpBackend};
use crate::metric::{tour_length, Tour};
use crate::steiner::{solve_ratio_gst, GstConfig};

/// Gains at or below this count as no progress.
pub const GAIN_EPS: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct PartCtx {
    /// Scenario indices of the part.
    pub members: Vec<usize>,
    /// Common realization `ψ_Z(S)`.
    pub psi: PartialRealization,
    pub f_z: u64,
    /// `Q − f(ψ_Z(S))`, always at least 1.
    pub q_z: u64,
    /// Majority symbol `B_v(Z)` per candidate, aligned with `candidates`.
    major: Vec<ObsId>,
}

#[derive(Clone, Debug)]
pub struct ScoreContext<'a> {
    pub inst: &'a IppInstance,
    pub visited: Vec<usize>,
    pub parts: Vec<PartCtx>,
    /// Unvisited locations `X \ S`.
    candidates: Vec<usize>,
}

impl<'a> ScoreContext<'a> {
    /// Context for build-time set `S`: large parts of `H(S)` with at least
    /// `delta * m` scenarios and, if `eta` is given, coverage at most `Q(1−η)`.
    pub fn new(inst: &'a IppInstance, visited: &[usize], delta: f64, eta: Option<f64>) -> Self {
        let partition = inst.partition_by_realization(visited, &inst.all_scenarios());
        let parts = match eta {
            None => large_parts(&partition, delta, inst.m(), None),
            Some(eta) => {
                let values =
                    partition.parts.iter().map(|y| inst.coverage_value(&inst.realization(y[0], visited))).collect();
                let filter = CoverageFilter { eta, target: inst.target(), values };
                large_parts(&partition, delta, inst.m(), Some(&filter))
            }
        };
        Self::from_parts(inst, visited, parts)
    }

    /// Context with explicitly chosen parts, which must be parts of
    /// `H(visited)`. Fully covered parts are skipped.
    pub fn from_parts(inst: &'a IppInstance, visited: &[usize], parts: Vec<Vec<usize>>) -> Self {
        let candidates: Vec<usize> = inst.locations().iter().copied().filter(|v| !visited.contains(v)).collect();
        let parts = parts
            .into_iter()
            .filter_map(|members| {
                let psi = inst.realization(members[0], visited);
                let f_z = inst.coverage_value(&psi);
                let q_z = inst.target().saturating_sub(f_z);
                if q_z == 0 {
                    return None;
                }
                let major = candidates
                    .iter()
                    .map(|&v| {
                        let (b, _) = inst.split_by_location(&members, v);
                        inst.obs(b[0], v)
                    })
                    .collect();
                Some(PartCtx { members, psi, f_z, q_z, major })
            })
            .collect();
        ScoreContext { inst, visited: visited.to_vec(), parts, candidates }
    }

    pub fn candidates(&self) -> &[usize] {
        &self.candidates
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    fn cand_pos(&self, v: usize) -> Option<usize> {
        self.candidates.iter().position(|&c| c == v)
    }

    /// Whether scenario `ω` (a member of part `z`) lies in `L_v(Z)`.
    fn in_minority(&self, z: usize, pos: usize, omega: usize) -> bool {
        self.inst.obs(omega, self.candidates[pos]) != self.parts[z].major[pos]
    }
}

/// Reference evaluation of `g(T)` straight from the definition, using the
/// instance's coverage oracle.
pub fn score_numerator(t: &[usize], ctx: &ScoreContext) -> f64 {
    let inst = ctx.inst;
    let positions: Vec<usize> = t.iter().filter_map(|&v| ctx.cand_pos(v)).collect();
    let mut g = 0.0;
    for (zi, part) in ctx.parts.iter().enumerate() {
        for &omega in &part.members {
            let p = inst.prob(omega);
            if positions.iter().any(|&pos| ctx.in_minority(zi, pos, omega)) {
                g += p;
            }
            let mut joint = part.psi.clone();
            for &pos in &positions {
                let v = ctx.candidates[pos];
                let _ = joint.insert(v, inst.obs(omega, v));
            }
            let gain = inst.coverage_value(&joint).saturating_sub(part.f_z);
            g += p * gain as f64 / part.q_z as f64;
        }
    }
    g
}

/// `g(T) / d(T)` for a closed tour from the root.
pub fn score(t: &Tour, ctx: &ScoreContext) -> Result<f64> {
    let d = tour_length(t, ctx.inst.metric())?;
    if d <= 0.0 {
        return Err(Error::ZeroLengthTour);
    }
    Ok(score_numerator(t.stops(), ctx) / d)
}

/// Incremental evaluation of `g` as locations are added. Hypothesis
/// identification uses class refinement; other coverage functions fall
/// back to [`score_numerator`].
pub struct GainTracker<'c, 'a> {
    ctx: &'c ScoreContext<'a>,
    chosen: Vec<usize>,
    value: f64,
    /// Per part: minority-covered flag and refinement classes (member slots).
    state: Vec<(Vec<bool>, Vec<Vec<usize>>)>,
}

impl<'c, 'a> GainTracker<'c, 'a> {
    pub fn new(ctx: &'c ScoreContext<'a>) -> Self {
        let state =
            ctx.parts.iter().map(|p| (vec![false; p.members.len()], vec![(0..p.members.len()).collect()])).collect();
        GainTracker { ctx, chosen: Vec::new(), value: 0.0, state }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn chosen(&self) -> &[usize] {
        &self.chosen
    }

    pub fn gain(&self, v: usize) -> f64 {
        if self.chosen.contains(&v) {
            return 0.0;
        }
        let Some(pos) = self.ctx.cand_pos(v) else { return 0.0 };
        if !self.ctx.inst.is_hypothesis_id() {
            let mut t = self.chosen.clone();
            t.push(v);
            return score_numerator(&t, self.ctx) - self.value;
        }
        let inst = self.ctx.inst;
        let mut g = 0.0;
        for (zi, part) in self.ctx.parts.iter().enumerate() {
            let (covered, classes) = &self.state[zi];
            for (slot, &omega) in part.members.iter().enumerate() {
                if !covered[slot] && self.ctx.in_minority(zi, pos, omega) {
                    g += inst.prob(omega);
                }
            }
            let denom = part.q_z as f64;
            for class in classes {
                if class.len() < 2 {
                    continue;
                }
                let counts = symbol_counts(class.iter().map(|&s| inst.obs(part.members[s], v)));
                for &s in class {
                    let o = inst.obs(part.members[s], v);
                    let same = counts.iter().find(|(c, _)| *c == o).unwrap().1;
                    let newly = class.len() - same;
                    if newly > 0 {
                        g += inst.prob(part.members[s]) * newly as f64 / denom;
                    }
                }
            }
        }
        g
    }

    pub fn add(&mut self, v: usize) {
        if self.chosen.contains(&v) {
            return;
        }
        let g = self.gain(v);
        self.chosen.push(v);
        self.value += g;
        let Some(pos) = self.ctx.cand_pos(v) else { return };
        if !self.ctx.inst.is_hypothesis_id() {
            return;
        }
        let inst = self.ctx.inst;
        for (zi, part) in self.ctx.parts.iter().enumerate() {
            let (covered, classes) = &mut self.state[zi];
            for (slot, &omega) in part.members.iter().enumerate() {
                if self.ctx.in_minority(zi, pos, omega) {
                    covered[slot] = true;
                }
            }
            let mut next = Vec::with_capacity(classes.len());
            for class in classes.drain(..) {
                let mut split: BTreeMap<ObsId, Vec<usize>> = BTreeMap::new();
                for s in class {
                    split.entry(inst.obs(part.members[s], v)).or_default().push(s);
                }
                next.extend(split.into_values());
            }
            *classes = next;
        }
    }
}

fn symbol_counts(it: impl Iterator<Item = ObsId>) -> Vec<(ObsId, usize)> {
    let mut counts: Vec<(ObsId, usize)> = Vec::new();
    for o in it {
        match counts.iter_mut().find(|(c, _)| *c == o) {
            Some((_, n)) => *n += 1,
            None => counts.push((o, 1)),
        }
    }
    counts
}

/// Groups whose covered weight equals `g(T)` for every `T` (hypothesis
/// identification only): an information group per scenario and a pair
/// group per ordered pair of scenarios in each part. Empty groups dropped.
pub fn to_group_steiner(ctx: &ScoreContext) -> Result<Vec<(Vec<usize>, f64)>> {
    let inst = ctx.inst;
    if !inst.is_hypothesis_id() {
        return Err(Error::Invalid("group Steiner reduction needs hypothesis identification".into()));
    }
    let mut groups = Vec::new();
    for (zi, part) in ctx.parts.iter().enumerate() {
        for &omega in &part.members {
            let nodes: Vec<usize> = (0..ctx.candidates.len())
                .filter(|&pos| ctx.in_minority(zi, pos, omega))
                .map(|pos| ctx.candidates[pos])
                .collect();
            if !nodes.is_empty() {
                groups.push((nodes, inst.prob(omega)));
            }
        }
        if part.members.len() < 2 {
            continue;
        }
        let denom = (part.members.len() - 1) as f64;
        for &omega in &part.members {
            for &theta in &part.members {
                let nodes: Vec<usize> =
                    ctx.candidates.iter().copied().filter(|&v| inst.obs(omega, v) != inst.obs(theta, v)).collect();
                if !nodes.is_empty() {
                    groups.push((nodes, inst.prob(omega) / denom));
                }
            }
        }
    }
    Ok(groups)
}

/// Covered weight of `t` under `groups`.
pub fn covered_weight(groups: &[(Vec<usize>, f64)], t: &[usize]) -> f64 {
    groups.iter().filter(|(nodes, _)| nodes.iter().any(|v| t.contains(v))).map(|(_, w)| w).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RsoMode {
    GroupSteiner,
    BruteForce,
    Greedy,
    /// Brute force when few candidates remain, the group Steiner pipeline
    /// when its program is small enough, greedy otherwise.
    Auto,
}

#[derive(Clone)]
pub struct RsoSolverChoice {
    pub mode: RsoMode,
    pub brute_threshold: usize,
    pub gst_trials: usize,
    /// Auto mode uses group Steiner only while the groups' total size
    /// (after merging identical groups) stays at or below this.
    pub gst_max_group_nodes: usize,
    pub backend: Arc<dyn LpBackend>,
}

impl Default for RsoSolverChoice {
    fn default() -> Self {
        RsoSolverChoice {
            mode: RsoMode::Auto,
            brute_threshold: 10,
            gst_trials: 8,
            gst_max_group_nodes: 120,
            backend: Arc::new(DenseSimplex),
        }
    }
}

impl RsoSolverChoice {
    pub fn with_mode(mode: RsoMode) -> Self {
        RsoSolverChoice { mode, ..Default::default() }
    }
}

impl std::fmt::Debug for RsoSolverChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RsoSolverChoice")
            .field("mode", &self.mode)
            .field("brute_threshold", &self.brute_threshold)
            .field("gst_trials", &self.gst_trials)
            .finish()
    }
}

/// A tour from the root with the best score found, or [`Error::NoProgress`]
/// if no tour has positive score.
pub fn solve_rso(ctx: &ScoreContext, choice: &RsoSolverChoice, seed: u64) -> Result<Tour> {
    if ctx.is_empty() || ctx.candidates.is_empty() {
        return Err(Error::NoProgress);
    }
    let mode = match choice.mode {
        RsoMode::Auto => {
            if ctx.candidates.len() <= choice.brute_threshold {
                RsoMode::BruteForce
            } else if ctx.inst.is_hypothesis_id()
                && ctx.parts.iter().map(|p| p.members.len().pow(2)).sum::<usize>() <= 4 * choice.gst_max_group_nodes
                && merged_group_size(ctx)? <= choice.gst_max_group_nodes
            {
                RsoMode::GroupSteiner
            } else {
                RsoMode::Greedy
            }
        }
        m => m,
    };
    match mode {
        RsoMode::BruteForce => brute_force(ctx, choice.brute_threshold.max(ctx.candidates.len().min(20))),
        RsoMode::Greedy => greedy(ctx),
        RsoMode::GroupSteiner => group_steiner(ctx, choice, seed),
        RsoMode::Auto => unreachable!(),
    }
}

fn merged_group_size(ctx: &ScoreContext) -> Result<usize> {
    let mut sets: Vec<Vec<usize>> = to_group_steiner(ctx)?.into_iter().map(|(n, _)| n).collect();
    sets.sort();
    sets.dedup();
    Ok(sets.iter().map(Vec::len).sum())
}

/// Ordering key: zero-length tours with positive gain beat everything.
fn better(g: f64, d: f64, best: Option<(f64, f64)>) -> bool {
    let key = |g: f64, d: f64| if d <= 0.0 { (f64::INFINITY, g) } else { (g / d, g) };
    match best {
        None => true,
        Some((bg, bd)) => {
            let (a, b) = (key(g, d), key(bg, bd));
            a.0 > b.0 + GAIN_EPS * a.0.abs().max(1.0) || (a.0 >= b.0 - GAIN_EPS && a.1 > b.1 + GAIN_EPS)
        }
    }
}

fn brute_force(ctx: &ScoreContext, limit: usize) -> Result<Tour> {
    let cands = &ctx.candidates;
    let n = cands.len();
    if n > limit {
        return Err(Error::TooLarge(format!("{n} candidate locations for exhaustive search")));
    }
    let metric = ctx.inst.metric();
    let r = ctx.inst.root();
    let full = 1usize << n;
    // dp[mask][last]: shortest path from the root through `mask` ending at `last`.
    let mut dp = vec![f64::INFINITY; full * n];
    let mut from = vec![usize::MAX; full * n];
    for i in 0..n {
        dp[(1 << i) * n + i] = metric.d(r, cands[i]);
    }
    for mask in 1..full {
        for last in 0..n {
            let cur = dp[mask * n + last];
            if mask & (1 << last) == 0 || !cur.is_finite() {
                continue;
            }
            for nxt in 0..n {
                if mask & (1 << nxt) != 0 {
                    continue;
                }
                let m2 = mask | (1 << nxt);
                let cand = cur + metric.d(cands[last], cands[nxt]);
                if cand < dp[m2 * n + nxt] {
                    dp[m2 * n + nxt] = cand;
                    from[m2 * n + nxt] = last;
                }
            }
        }
    }
    let mut best: Option<(usize, usize, f64, f64)> = None;
    for mask in 1..full {
        let t: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| cands[i]).collect();
        let g = score_numerator(&t, ctx);
        if g <= GAIN_EPS {
            continue;
        }
        let (last, d) = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| (i, dp[mask * n + i] + metric.d(cands[i], r)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if better(g, d, best.map(|b| (b.2, b.3))) {
            best = Some((mask, last, g, d));
        }
    }
    let Some((mut mask, mut last, _, _)) = best else {
        return Err(Error::NoProgress);
    };
    let mut rev = Vec::new();
    while last != usize::MAX {
        rev.push(cands[last]);
        let prev = from[mask * n + last];
        mask &= !(1 << last);
        last = prev;
    }
    let mut order = vec![r];
    order.extend(rev.into_iter().rev());
    Ok(Tour::closed(order))
}

/// Cheapest-insertion greedy on marginal gain per marginal length; returns
/// the best-scoring prefix.
fn greedy(ctx: &ScoreContext) -> Result<Tour> {
    let metric = ctx.inst.metric();
    let r = ctx.inst.root();
    let mut tracker = GainTracker::new(ctx);
    let mut order = vec![r];
    let mut length = 0.0;
    let mut best: Option<(Vec<usize>, f64, f64)> = None;
    let mut remaining: Vec<usize> = ctx.candidates.clone();
    while !remaining.is_empty() {
        let mut pick: Option<(usize, usize, f64, f64)> = None; // (idx, insert pos, gain, delta)
        for (idx, &v) in remaining.iter().enumerate() {
            let gain = tracker.gain(v);
            if gain <= GAIN_EPS {
                continue;
            }
            let (pos, delta) = (0..order.len())
                .map(|i| {
                    let a = order[i];
                    let b = order[(i + 1) % order.len()];
                    (i + 1, metric.d(a, v) + metric.d(v, b) - metric.d(a, b))
                })
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap();
            let delta = delta.max(0.0);
            if better(gain, delta, pick.map(|p| (p.2, p.3))) {
                pick = Some((idx, pos, gain, delta));
            }
        }
        let Some((idx, pos, _, delta)) = pick else { break };
        let v = remaining.swap_remove(idx);
        order.insert(pos, v);
        length += delta;
        tracker.add(v);
        if better(tracker.value(), length, best.as_ref().map(|b| (b.1, b.2))) {
            best = Some((order.clone(), tracker.value(), length));
        }
    }
    match best {
        Some((order, _, _)) => Ok(Tour::closed(order)),
        None => Err(Error::NoProgress),
    }
}

fn group_steiner(ctx: &ScoreContext, choice: &RsoSolverChoice, seed: u64) -> Result<Tour> {
    let groups = to_group_steiner(ctx)?;
    if groups.is_empty() {
        return Err(Error::NoProgress);
    }
    let metric = ctx.inst.metric();
    let r = ctx.inst.root();
    let mut points = vec![r];
    points.extend(ctx.candidates.iter().copied());
    let sub = metric.submetric(&points, r)?;
    let local: Vec<(Vec<usize>, f64)> =
        groups.iter().map(|(nodes, w)| (nodes.iter().map(|v| 1 + ctx.cand_pos(*v).unwrap()).collect(), *w)).collect();
    let cfg = GstConfig { trials: choice.gst_trials, seed, backend: choice.backend.clone() };
    let sol = solve_ratio_gst(&sub, &local, &cfg)?;
    if sol.coverage <= GAIN_EPS {
        return Err(Error::NoProgress);
    }
    let root_local = sub.root();
    let order = sol.tour.order.iter().map(|&i| points[i]).collect::<Vec<_>>();
    debug_assert_eq!(sol.tour.order[0], root_local);
    Ok(Tour::closed(order))
}
