//! Round-limited adaptive policies.
//!
//! A round plans a sequence of tours from the root without looking at any
//! observations, then visits them in order until the compatible set is small
//! or coverage is complete. [`k_adap`] chains `k` such rounds on residual
//! instances, [`two_k_adap`] is the partial-cover variant, and
//! [`fully_adaptive`] replans after every location.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::{IppInstance, ObsId, PartialRealization, NO_OBS};
use crate::metric::Tour;
use crate::rso::{solve_rso, RsoSolverChoice, ScoreContext};

/// Seconds since the call, read by the returned closure. Browsers have no
/// monotonic clock in std, so wasm builds report zero.
#[cfg(not(target_arch = "wasm32"))]
fn stopwatch() -> impl Fn() -> f64 {
    let t = std::time::Instant::now();
    move || t.elapsed().as_secs_f64()
}

#[cfg(target_arch = "wasm32")]
fn stopwatch() -> impl Fn() -> f64 {
    || 0.0
}

/// How travel is charged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExecMode {
    /// Every segment returns to the root.
    Tour,
    /// Rounds are chained directly: the root return closing a round's last
    /// segment is skipped, and the next round leaves from where the robot
    /// stands. Segments inside a round still pass through the root.
    Path,
}

impl std::str::FromStr for ExecMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tour" => Ok(ExecMode::Tour),
            "path" => Ok(ExecMode::Path),
            _ => Err(Error::Invalid(format!("unknown mode {s:?} (tour or path)"))),
        }
    }
}

impl std::fmt::Display for ExecMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ExecMode::Tour => "tour",
            ExecMode::Path => "path",
        })
    }
}

#[derive(Clone, Debug)]
pub struct PlannerConfig {
    pub mode: ExecMode,
    pub solver: RsoSolverChoice,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig { mode: ExecMode::Tour, solver: RsoSolverChoice::default() }
    }
}

impl PlannerConfig {
    pub fn with_mode(mode: ExecMode) -> Self {
        PlannerConfig { mode, ..Default::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Policy {
    KAdap(usize),
    TwoKAdap(usize),
    FullyAdaptive,
}

impl std::fmt::Display for Policy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Policy::KAdap(k) => write!(f, "{k}"),
            Policy::TwoKAdap(k) => write!(f, "2x{k}"),
            Policy::FullyAdaptive => f.write_str("inf"),
        }
    }
}

/// Answers location queries with the hidden scenario's observations.
#[derive(Clone, Debug)]
pub struct ObservationOracle {
    scenario_id: usize,
    row: Arc<[ObsId]>,
    log: Vec<usize>,
}

impl ObservationOracle {
    /// Oracle for row `scenario` of `inst`.
    pub fn new(inst: &IppInstance, scenario: usize) -> Result<Self> {
        let s = inst
            .scenarios()
            .get(scenario)
            .ok_or_else(|| Error::Invalid(format!("scenario {scenario} out of range (m = {})", inst.m())))?;
        Ok(ObservationOracle { scenario_id: s.id, row: s.obs.clone(), log: Vec::new() })
    }

    pub fn scenario_id(&self) -> usize {
        self.scenario_id
    }

    pub fn observe(&mut self, v: usize) -> ObsId {
        self.log.push(v);
        self.row[v]
    }

    pub fn queries(&self) -> &[usize] {
        &self.log
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub round: usize,
    pub step: usize,
    pub location: usize,
    /// [`NO_OBS`] for a return to the root.
    pub observation: ObsId,
    pub leg_cost: f64,
    pub cum_cost: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Status {
    Covered,
    Anomaly(String),
}

#[derive(Clone, Debug)]
pub struct PolicyTranscript {
    pub scenario_id: usize,
    pub policy: Policy,
    pub mode: ExecMode,
    pub steps: Vec<Step>,
    /// Number of rounds planned.
    pub recompute_count: usize,
    pub status: Status,
    pub cost: f64,
    /// Wall-clock seconds spent building plans.
    pub plan_seconds: f64,
    /// Segments planned in the first round.
    pub first_plan: Vec<Tour>,
}

impl PolicyTranscript {
    pub fn is_covered(&self) -> bool {
        self.status == Status::Covered
    }

    /// Visited locations in order, returns to the root excluded.
    pub fn visits(&self) -> impl Iterator<Item = &Step> {
        self.steps.iter().filter(|s| s.observation != NO_OBS)
    }

    /// `round,step,location,observation,leg_cost,cum_cost` lines with a header.
    pub fn to_csv(&self, inst: &IppInstance) -> String {
        let metric = inst.metric();
        let mut out = String::from("round,step,location,observation,leg_cost,cum_cost\n");
        for s in &self.steps {
            let obs = if s.observation == NO_OBS { "-" } else { inst.alphabet()[s.observation as usize].as_str() };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                s.round,
                s.step,
                metric.label(s.location),
                obs,
                s.leg_cost,
                s.cum_cost
            );
        }
        out
    }
}

/// Parses [`PolicyTranscript::to_csv`] output back into steps.
pub fn parse_transcript(text: &str, inst: &IppInstance) -> Result<Vec<Step>> {
    let metric = inst.metric();
    let mut steps = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(Error::parse(i + 1, format!("expected 6 fields, found {}", f.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| Error::parse(i + 1, e.to_string()));
        let int = |s: &str| s.parse::<usize>().map_err(|e| Error::parse(i + 1, e.to_string()));
        let observation = if f[3] == "-" {
            NO_OBS
        } else {
            inst.alphabet()
                .iter()
                .position(|a| a == f[3])
                .ok_or_else(|| Error::parse(i + 1, format!("unknown symbol {:?}", f[3])))? as ObsId
        };
        steps.push(Step {
            round: int(f[0])?,
            step: int(f[1])?,
            location: metric.index_of(f[2])?,
            observation,
            leg_cost: num(f[4])?,
            cum_cost: num(f[5])?,
        });
    }
    Ok(steps)
}

/// State of one execution against the oracle.
#[derive(Clone, Debug)]
pub struct ExecutionState {
    /// Visited locations `R`, in visiting order.
    pub visited: Vec<usize>,
    pub psi: PartialRealization,
    /// Compatible scenarios (indices into the instance the round ran on).
    pub compatible: Vec<usize>,
    pub cost: f64,
    /// `f(ψ(R))` on that instance.
    pub coverage: u64,
    pub recompute_count: usize,
    pub steps: Vec<Step>,
    /// Segments of the last planned round.
    pub plan: Vec<Tour>,
    pub plan_seconds: f64,
    position: usize,
}

impl ExecutionState {
    fn start(inst: &IppInstance) -> Self {
        ExecutionState {
            visited: Vec::new(),
            psi: PartialRealization::new(),
            compatible: inst.all_scenarios(),
            cost: 0.0,
            coverage: inst.coverage_value(&PartialRealization::new()),
            recompute_count: 0,
            steps: Vec::new(),
            plan: Vec::new(),
            plan_seconds: 0.0,
            position: inst.root(),
        }
    }

    fn travel(&mut self, inst: &IppInstance, to: usize, observation: ObsId) {
        let leg = inst.metric().d(self.position, to);
        self.cost += leg;
        self.position = to;
        self.steps.push(Step {
            round: self.recompute_count,
            step: self.steps.len(),
            location: to,
            observation,
            leg_cost: leg,
            cum_cost: self.cost,
        });
    }

    fn visit(&mut self, inst: &IppInstance, v: usize, oracle: &mut ObservationOracle) -> ObsId {
        let o = oracle.observe(v);
        self.travel(inst, v, o);
        self.visited.push(v);
        o
    }

    fn return_to_root(&mut self, inst: &IppInstance) {
        if self.position != inst.root() {
            self.travel(inst, inst.root(), NO_OBS);
        }
    }
}

fn is_covered(inst: &IppInstance) -> bool {
    inst.coverage_value(&PartialRealization::new()) >= inst.target()
}

/// Build phase of one round: tours from the root, no observations used.
/// With `eta`, parts whose coverage already exceeds `Q(1−η)` are ignored.
pub fn plan_round(
    inst: &IppInstance,
    delta: f64,
    eta: Option<f64>,
    solver: &RsoSolverChoice,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Tour>> {
    let mut s: Vec<usize> = Vec::new();
    let mut plan = Vec::new();
    loop {
        let ctx = ScoreContext::new(inst, &s, delta, eta);
        if ctx.is_empty() {
            break;
        }
        let tour = solve_rso(&ctx, solver, rng.gen()).map_err(|e| match e {
            Error::NoProgress => Error::Anomaly(format!(
                "no tour has positive score while {} large part(s) remain uncovered after {} location(s)",
                ctx.parts.len(),
                s.len()
            )),
            e => e,
        })?;
        s.extend_from_slice(tour.stops());
        plan.push(tour);
    }
    Ok(plan)
}

/// One round on `inst`: plan, then probe segment by segment while
/// `|H| ≥ δm` and the stop test on `f` fails.
fn round(
    inst: &IppInstance,
    delta: f64,
    eta: Option<f64>,
    cfg: &PlannerConfig,
    oracle: &mut ObservationOracle,
    rng: &mut ChaCha8Rng,
    st: &mut ExecutionState,
) -> Result<RoundResult> {
    let elapsed = stopwatch();
    let plan = plan_round(inst, delta, eta, &cfg.solver, rng)?;
    st.plan_seconds += elapsed();
    let m = inst.m() as f64;
    let q = inst.target();
    let stop_f = |f: u64| match eta {
        None => f >= q,
        Some(eta) => f as f64 > q as f64 * (1.0 - eta) + crate::instance::PROB_EPS,
    };
    let mut visited = Vec::new();
    let mut psi = PartialRealization::new();
    let mut h = inst.all_scenarios();
    let mut f = inst.coverage_value(&psi);
    let go_on = |h: &[usize], f: u64| (h.len() as f64) >= delta * m - crate::instance::PROB_EPS && !stop_f(f);
    for (i, seg) in plan.iter().enumerate() {
        if !go_on(&h, f) {
            break;
        }
        for &v in seg.stops() {
            let o = st.visit(inst, v, oracle);
            visited.push(v);
            psi.insert(v, o)?;
        }
        h = inst.compatible(&psi);
        f = inst.coverage_value(&psi);
        // Segments are closed tours; only the round's last return is skipped
        // in path mode.
        if cfg.mode == ExecMode::Tour || (i + 1 < plan.len() && go_on(&h, f)) {
            st.return_to_root(inst);
        }
    }
    if h.is_empty() {
        return Err(Error::Anomaly("oracle answers are incompatible with every scenario".into()));
    }
    st.plan = plan;
    Ok(RoundResult { visited, psi, h, f, q })
}

struct RoundResult {
    visited: Vec<usize>,
    psi: PartialRealization,
    h: Vec<usize>,
    f: u64,
    q: u64,
}

/// One partial covering round from the root of `inst` against `oracle`.
pub fn pca(
    inst: &IppInstance,
    delta: f64,
    cfg: &PlannerConfig,
    oracle: &mut ObservationOracle,
    rng: &mut ChaCha8Rng,
) -> Result<ExecutionState> {
    gpc_round(inst, delta, None, cfg, oracle, rng)
}

/// [`pca`] with the partial-coverage filter: parts above `Q(1−η)` are
/// dropped and probing stops once `f > Q(1−η)`.
pub fn gpc_pca(
    inst: &IppInstance,
    delta: f64,
    eta: f64,
    cfg: &PlannerConfig,
    oracle: &mut ObservationOracle,
    rng: &mut ChaCha8Rng,
) -> Result<ExecutionState> {
    gpc_round(inst, delta, Some(eta), cfg, oracle, rng)
}

fn gpc_round(
    inst: &IppInstance,
    delta: f64,
    eta: Option<f64>,
    cfg: &PlannerConfig,
    oracle: &mut ObservationOracle,
    rng: &mut ChaCha8Rng,
) -> Result<ExecutionState> {
    if !(delta > 0.0 && delta <= 1.0) || eta.is_some_and(|e| !(e > 0.0 && e <= 1.0)) {
        return Err(Error::Invalid("delta and eta must lie in (0, 1]".into()));
    }
    let mut st = ExecutionState::start(inst);
    st.recompute_count = 1;
    let r = round(inst, delta, eta, cfg, oracle, rng, &mut st)?;
    st.psi = r.psi;
    st.compatible = r.h;
    st.coverage = r.f;
    Ok(st)
}

/// Runs `policy` against row `scenario` of `inst`.
pub fn run_policy(
    inst: &IppInstance,
    policy: Policy,
    cfg: &PlannerConfig,
    scenario: usize,
    seed: u64,
) -> Result<PolicyTranscript> {
    let mut oracle = ObservationOracle::new(inst, scenario)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match policy {
        Policy::KAdap(k) => k_adap(inst, k, cfg, &mut oracle, &mut rng),
        Policy::TwoKAdap(k) => two_k_adap(inst, k, cfg, &mut oracle, &mut rng),
        Policy::FullyAdaptive => fully_adaptive(inst, cfg, &mut oracle, &mut rng),
    }
}

/// Rounds on successive residual instances. `params(remaining_rounds, inst)`
/// gives `(δ, η)` for the next round.
fn drive(
    inst: &IppInstance,
    policy: Policy,
    max_rounds: usize,
    cfg: &PlannerConfig,
    oracle: &mut ObservationOracle,
    rng: &mut ChaCha8Rng,
    params: impl Fn(usize, &IppInstance) -> (f64, Option<f64>),
) -> PolicyTranscript {
    let mut st = ExecutionState::start(inst);
    let mut cur = inst.clone();
    let mut first_plan = Vec::new();
    let status = loop {
        if is_covered(&cur) {
            break Status::Covered;
        }
        if st.recompute_count == max_rounds {
            break Status::Anomaly(format!("not covered after {max_rounds} rounds"));
        }
        let (delta, eta) = params(max_rounds - st.recompute_count, &cur);
        st.recompute_count += 1;
        let r = match round(&cur, delta, eta, cfg, oracle, rng, &mut st) {
            Ok(r) => r,
            Err(e) => break Status::Anomaly(e.to_string()),
        };
        if st.recompute_count == 1 {
            first_plan = st.plan.clone();
        }
        if eta.is_none() && r.h.len() as f64 >= delta * cur.m() as f64 - crate::instance::PROB_EPS && r.f < r.q {
            break Status::Anomaly("round ended with a large uncovered compatible set".into());
        }
        let elapsed = stopwatch();
        let next = cur.residual_instance(&r.visited, &r.psi, &r.h);
        st.plan_seconds += elapsed();
        match next {
            Ok(next) => cur = next,
            Err(e) => break Status::Anomaly(e.to_string()),
        }
    };
    if cfg.mode == ExecMode::Tour {
        st.return_to_root(inst);
    }
    PolicyTranscript {
        scenario_id: oracle.scenario_id(),
        policy,
        mode: cfg.mode,
        steps: st.steps,
        recompute_count: st.recompute_count,
        status,
        cost: st.cost,
        plan_seconds: st.plan_seconds,
        first_plan,
    }
}

/// `k` rounds: round `j` of the remaining `k'` uses `δ = m^{-1/k'}` on the
/// current residual instance, so the last round has `δ = 1/m` and must
/// finish coverage.
pub fn k_adap(
    inst: &IppInstance,
    k: usize,
    cfg: &PlannerConfig,
    oracle: &mut ObservationOracle,
    rng: &mut ChaCha8Rng,
) -> Result<PolicyTranscript> {
    if k == 0 {
        return Err(Error::Invalid("k must be at least 1".into()));
    }
    Ok(drive(inst, Policy::KAdap(k), k, cfg, oracle, rng, |left, cur| {
        ((cur.m() as f64).powf(-1.0 / left as f64), None)
    }))
}

/// Partial-cover rounds with `δ = m^{-1/k}` and `η = Q^{-1/k}` taken from
/// the original instance; at most `2k` rounds.
pub fn two_k_adap(
    inst: &IppInstance,
    k: usize,
    cfg: &PlannerConfig,
    oracle: &mut ObservationOracle,
    rng: &mut ChaCha8Rng,
) -> Result<PolicyTranscript> {
    if k == 0 {
        return Err(Error::Invalid("k must be at least 1".into()));
    }
    let delta = (inst.m() as f64).powf(-1.0 / k as f64);
    let eta = (inst.target().max(1) as f64).powf(-1.0 / k as f64);
    Ok(drive(inst, Policy::TwoKAdap(k), 2 * k, cfg, oracle, rng, move |_, _| (delta, Some(eta))))
}

/// Replans after every location: the single part of all compatible
/// scenarios is scored and only the first stop of the best tour is visited.
pub fn fully_adaptive(
    inst: &IppInstance,
    cfg: &PlannerConfig,
    oracle: &mut ObservationOracle,
    rng: &mut ChaCha8Rng,
) -> Result<PolicyTranscript> {
    let mut st = ExecutionState::start(inst);
    let mut cur = inst.clone();
    let mut first_plan = Vec::new();
    let status = loop {
        if is_covered(&cur) {
            break Status::Covered;
        }
        let elapsed = stopwatch();
        let ctx = ScoreContext::from_parts(&cur, &[], vec![cur.all_scenarios()]);
        let tour = solve_rso(&ctx, &cfg.solver, rng.gen());
        st.plan_seconds += elapsed();
        let tour = match tour {
            Ok(t) => t,
            Err(Error::NoProgress) => {
                break Status::Anomaly("no location makes progress on an uncovered instance".into())
            }
            Err(e) => break Status::Anomaly(e.to_string()),
        };
        let v = tour.stops()[0];
        if st.recompute_count == 0 {
            first_plan = vec![Tour::closed(vec![cur.root(), v])];
        }
        st.recompute_count += 1;
        let o = st.visit(&cur, v, oracle);
        if cfg.mode == ExecMode::Tour {
            st.return_to_root(&cur);
        }
        let mut psi = PartialRealization::new();
        psi.insert(v, o).expect("fresh realization");
        let h = cur.compatible(&psi);
        let elapsed = stopwatch();
        let next = cur.residual_instance(&[v], &psi, &h);
        st.plan_seconds += elapsed();
        match next {
            Ok(next) => cur = next,
            Err(e) => break Status::Anomaly(e.to_string()),
        }
    };
    Ok(PolicyTranscript {
        scenario_id: oracle.scenario_id(),
        policy: Policy::FullyAdaptive,
        mode: cfg.mode,
        steps: st.steps,
        recompute_count: st.recompute_count,
        status,
        cost: st.cost,
        plan_seconds: st.plan_seconds,
        first_plan,
    })
}

/// Optimal adaptive policy as a decision tree.
#[derive(Clone, Debug, PartialEq)]
pub enum DecisionTree {
    Done,
    Visit { location: usize, branches: Vec<(ObsId, DecisionTree)> },
}

impl DecisionTree {
    /// Locations visited when the hidden scenario is `row`.
    pub fn path_for(&self, row: &[ObsId]) -> Vec<usize> {
        let mut out = Vec::new();
        let mut node = self;
        while let DecisionTree::Visit { location, branches } = node {
            out.push(*location);
            node = match branches.iter().find(|(o, _)| *o == row[*location]) {
                Some((_, child)) => child,
                None => break,
            };
        }
        out
    }
}

pub const OPT_MAX_LOCATIONS: usize = 6;
pub const OPT_MAX_SCENARIOS: usize = 4;
pub const OPT_MAX_SYMBOLS: usize = 3;

/// Exact minimum expected cost over all adaptive policies, by memoized
/// search over (position, visited set, compatible set).
pub fn brute_force_opt_adaptive(inst: &IppInstance, mode: ExecMode) -> Result<(f64, DecisionTree)> {
    if inst.n() > OPT_MAX_LOCATIONS || inst.m() > OPT_MAX_SCENARIOS || inst.alphabet().len() > OPT_MAX_SYMBOLS {
        return Err(Error::TooLarge(format!(
            "exact search needs n <= {OPT_MAX_LOCATIONS}, m <= {OPT_MAX_SCENARIOS}, |O| <= {OPT_MAX_SYMBOLS}"
        )));
    }
    let mut search = OptSearch { inst, mode, memo: HashMap::new() };
    let all = (1u32 << inst.m()) - 1;
    let cost = search.best(inst.root(), 0, all);
    let tree = search.tree(inst.root(), 0, all);
    Ok((cost, tree))
}

struct OptSearch<'a> {
    inst: &'a IppInstance,
    mode: ExecMode,
    /// (position, visited mask over location slots, compatible mask) →
    /// (probability-weighted cost, best location slot).
    memo: HashMap<(usize, u32, u32), (f64, Option<usize>)>,
}

impl OptSearch<'_> {
    fn mass(&self, h: u32) -> f64 {
        (0..self.inst.m()).filter(|i| h & (1 << i) != 0).map(|i| self.inst.prob(i)).sum()
    }

    fn covered(&self, visited: u32, h: u32) -> bool {
        let first = h.trailing_zeros() as usize;
        let locs: Vec<usize> = self.slots(visited).collect();
        self.inst.is_covered(&self.inst.realization(first, &locs))
    }

    fn slots(&self, mask: u32) -> impl Iterator<Item = usize> + '_ {
        self.inst.locations().iter().enumerate().filter(move |(i, _)| mask & (1 << i) != 0).map(|(_, &v)| v)
    }

    fn split(&self, h: u32, v: usize) -> Vec<(ObsId, u32)> {
        let mut out: Vec<(ObsId, u32)> = Vec::new();
        for i in (0..self.inst.m()).filter(|i| h & (1 << i) != 0) {
            let o = self.inst.obs(i, v);
            match out.iter_mut().find(|(c, _)| *c == o) {
                Some((_, m)) => *m |= 1 << i,
                None => out.push((o, 1 << i)),
            }
        }
        out.sort();
        out
    }

    fn best(&mut self, pos: usize, visited: u32, h: u32) -> f64 {
        if let Some(&(c, _)) = self.memo.get(&(pos, visited, h)) {
            return c;
        }
        let d = self.inst.metric();
        let mass = self.mass(h);
        let result = if self.covered(visited, h) {
            let back = if self.mode == ExecMode::Tour { d.d(pos, self.inst.root()) } else { 0.0 };
            (mass * back, None)
        } else {
            let mut best = (f64::INFINITY, None);
            for (slot, &v) in self.inst.locations().iter().enumerate() {
                if visited & (1 << slot) != 0 {
                    continue;
                }
                let parts = self.split(h, v);
                let mut c = mass * d.d(pos, v);
                for (_, sub) in parts {
                    c += self.best(v, visited | (1 << slot), sub);
                }
                if c < best.0 - 1e-12 {
                    best = (c, Some(slot));
                }
            }
            best
        };
        self.memo.insert((pos, visited, h), result);
        result.0
    }

    fn tree(&mut self, pos: usize, visited: u32, h: u32) -> DecisionTree {
        self.best(pos, visited, h);
        match self.memo[&(pos, visited, h)].1 {
            None => DecisionTree::Done,
            Some(slot) => {
                let v = self.inst.locations()[slot];
                let branches = self
                    .split(h, v)
                    .into_iter()
                    .map(|(o, sub)| (o, self.tree(v, visited | (1 << slot), sub)))
                    .collect();
                DecisionTree::Visit { location: v, branches }
            }
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::instance::tests::{ex2, three};
    use crate::instance::Prior;
    use crate::metric::MetricSpace;
    use crate::rso::tests::random_instance;

    fn all_policies() -> Vec<Policy> {
        vec![
            Policy::KAdap(1),
            Policy::KAdap(2),
            Policy::KAdap(3),
            Policy::TwoKAdap(1),
            Policy::TwoKAdap(2),
            Policy::FullyAdaptive,
        ]
    }

    #[test]
    fn single_scenario_costs_nothing() {
        let metric = MetricSpace::from_matrix(vec!["r".into(), "a".into()], vec![0.0, 1.0, 1.0, 0.0], 0).unwrap();
        let inst = IppInstance::hypothesis_id(
            Arc::new(metric),
            vec![1],
            vec!["0".into()],
            vec![vec![0]],
            vec![Prior::uniform(1)],
        )
        .unwrap();
        for p in all_policies() {
            let t = run_policy(&inst, p, &PlannerConfig::default(), 0, 1).unwrap();
            assert!(t.is_covered());
            assert_eq!(t.cost, 0.0);
            assert_eq!(t.recompute_count, 0);
        }
        assert_eq!(brute_force_opt_adaptive(&inst, ExecMode::Tour).unwrap().0, 0.0);
    }

    #[test]
    fn ex2_pca_half() {
        let inst = ex2();
        let cfg = PlannerConfig::default();
        for s in 0..2 {
            let mut oracle = ObservationOracle::new(&inst, s).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let st = pca(&inst, 0.5, &cfg, &mut oracle, &mut rng).unwrap();
            assert_eq!(st.plan.len(), 1);
            assert_eq!(st.plan[0].order, vec![0, 1]);
            assert_eq!(st.visited, vec![1]);
            assert_eq!(st.cost, 2.0);
            assert_eq!(st.compatible.len(), 1);
        }
    }

    #[test]
    fn ex2_policies_tour_and_path() {
        let inst = ex2();
        for p in [Policy::KAdap(1), Policy::FullyAdaptive] {
            for s in 0..2 {
                let t = run_policy(&inst, p, &PlannerConfig::with_mode(ExecMode::Tour), s, 0).unwrap();
                assert_eq!(t.cost, 2.0, "{p} scenario {s}");
                let t = run_policy(&inst, p, &PlannerConfig::with_mode(ExecMode::Path), s, 0).unwrap();
                assert_eq!(t.cost, 1.0, "{p} scenario {s}");
            }
        }
        assert_eq!(brute_force_opt_adaptive(&inst, ExecMode::Tour).unwrap().0, 2.0);
        assert_eq!(brute_force_opt_adaptive(&inst, ExecMode::Path).unwrap().0, 1.0);
    }

    #[test]
    fn gpc_eta_one_stops_on_first_gain() {
        let inst = three();
        let mut oracle = ObservationOracle::new(&inst, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let st = gpc_pca(&inst, 1.0 / 3.0, 1.0, &PlannerConfig::default(), &mut oracle, &mut rng).unwrap();
        assert!(st.coverage > 0);
        assert_eq!(st.plan.len(), 1);
    }

    #[test]
    fn transcript_round_trip() {
        let inst = three();
        let t = run_policy(&inst, Policy::KAdap(2), &PlannerConfig::default(), 1, 4).unwrap();
        let text = t.to_csv(&inst);
        assert!(text.starts_with("round,step,location,observation,leg_cost,cum_cost\n"));
        assert_eq!(parse_transcript(&text, &inst).unwrap(), t.steps);
        assert_eq!(t.steps.last().unwrap().cum_cost, t.cost);
    }

    #[test]
    fn decision_tree_paths_identify() {
        let inst = three();
        let (_, tree) = brute_force_opt_adaptive(&inst, ExecMode::Tour).unwrap();
        for s in inst.scenarios() {
            let path = tree.path_for(&s.obs);
            let psi = inst.realization(s.id, &path);
            assert!(inst.is_covered(&psi));
        }
    }

    #[test]
    fn random_instances_cover_within_budget() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let inst = random_instance(&mut rng, 6, 5, 2);
            for p in all_policies() {
                for s in 0..inst.m() {
                    let t = run_policy(&inst, p, &PlannerConfig::default(), s, 9).unwrap();
                    assert!(t.is_covered(), "{p} {:?}", t.status);
                    match p {
                        Policy::KAdap(k) => assert!(t.recompute_count <= k),
                        Policy::TwoKAdap(k) => assert!(t.recompute_count <= 2 * k),
                        Policy::FullyAdaptive => {}
                    }
                    let path = run_policy(&inst, p, &PlannerConfig::with_mode(ExecMode::Path), s, 9).unwrap();
                    assert!(path.cost <= t.cost + 1e-9);
                }
            }
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let inst = random_instance(&mut rng, 8, 6, 3);
        let a = run_policy(&inst, Policy::KAdap(2), &PlannerConfig::default(), 3, 77).unwrap();
        let b = run_policy(&inst, Policy::KAdap(2), &PlannerConfig::default(), 3, 77).unwrap();
        assert_eq!(a.steps, b.steps);
    }
}
