//! The informative path planning instance: hidden scenarios with priors, the
//! per-scenario observation table, and the submodular coverage function.
//!
//! Scenarios are referred to by their position in [`IppInstance::scenarios`]
//! ("scenario index"). [`Scenario::id`] keeps the row of the original instance
//! so residual instances still report the original identity.

mod format;

pub use format::{read_instance, write_instance};

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::metric::{MetricSpace, WeightedGraph};

/// Index into an instance's observation alphabet. Alphabet order is the
/// symbol order used for tie-breaking.
pub type ObsId = u16;

/// Placeholder stored for points that are not sensing locations (the root).
pub const NO_OBS: ObsId = ObsId::MAX;

/// Tolerance for probability sums and threshold comparisons.
pub const PROB_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Prior {
    /// Exact rational `num / den`, used for uniform priors.
    Ratio {
        num: u64,
        den: u64,
    },
    Real(f64),
}

impl Prior {
    pub fn uniform(m: usize) -> Prior {
        Prior::Ratio { num: 1, den: m as u64 }
    }

    pub fn value(&self) -> f64 {
        match *self {
            Prior::Ratio { num, den } => num as f64 / den as f64,
            Prior::Real(p) => p,
        }
    }
}

impl fmt::Display for Prior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prior::Ratio { num, den } => write!(f, "{num}/{den}"),
            Prior::Real(p) => write!(f, "{p}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    /// Row of the original (unconditioned) instance.
    pub id: usize,
    pub prior: Prior,
    /// Observation at every point of the metric, [`NO_OBS`] off the location set.
    pub obs: Arc<[ObsId]>,
}

/// Set of `(location, observation)` pairs with at most one observation per
/// location.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PartialRealization {
    pairs: BTreeMap<usize, ObsId>,
}

impl PartialRealization {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, location: usize, obs: ObsId) -> Result<()> {
        match self.pairs.insert(location, obs) {
            Some(prev) if prev != obs => {
                self.pairs.insert(location, prev);
                Err(Error::ConflictingObservation(location.to_string()))
            }
            _ => Ok(()),
        }
    }

    /// Union of two realizations; fails if they disagree on a location.
    pub fn union(&self, other: &PartialRealization) -> Result<PartialRealization> {
        let mut out = self.clone();
        for (&v, &o) in &other.pairs {
            out.insert(v, o)?;
        }
        Ok(out)
    }

    pub fn get(&self, location: usize) -> Option<ObsId> {
        self.pairs.get(&location).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, ObsId)> + '_ {
        self.pairs.iter().map(|(&v, &o)| (v, o))
    }

    pub fn locations(&self) -> impl Iterator<Item = usize> + '_ {
        self.pairs.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

impl FromIterator<(usize, ObsId)> for PartialRealization {
    /// Later pairs overwrite earlier ones for the same location.
    fn from_iter<I: IntoIterator<Item = (usize, ObsId)>>(iter: I) -> Self {
        PartialRealization { pairs: iter.into_iter().collect() }
    }
}

/// Black-box monotone submodular coverage function over partial realizations.
pub trait CoverageOracle: Send + Sync {
    fn value(&self, psi: &PartialRealization) -> u64;
}

impl<F> CoverageOracle for F
where
    F: Fn(&PartialRealization) -> u64 + Send + Sync,
{
    fn value(&self, psi: &PartialRealization) -> u64 {
        self(psi)
    }
}

/// `f_psi(phi) = f(psi ∪ phi) - f(psi)`.
struct ResidualOracle {
    inner: Arc<dyn CoverageOracle>,
    base: PartialRealization,
    base_value: u64,
}

impl CoverageOracle for ResidualOracle {
    fn value(&self, phi: &PartialRealization) -> u64 {
        let mut joint = self.base.clone();
        for (v, o) in phi.iter() {
            joint.pairs.entry(v).or_insert(o);
        }
        self.inner.value(&joint).saturating_sub(self.base_value)
    }
}

#[derive(Clone)]
pub enum CoverageKind {
    /// Number of scenarios ruled out by the observations; target `m - 1`.
    HypothesisId,
    Generic(Arc<dyn CoverageOracle>),
}

impl fmt::Debug for CoverageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoverageKind::HypothesisId => f.write_str("HypothesisId"),
            CoverageKind::Generic(_) => f.write_str("Generic(..)"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Coverage {
    pub kind: CoverageKind,
    pub target: u64,
}

/// Partition of a scenario set by agreement on a location set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScenarioPartition {
    /// Disjoint sorted parts, ordered by smallest member.
    pub parts: Vec<Vec<usize>>,
    pub keyed_by: Vec<usize>,
}

/// Optional coverage filter for [`large_parts`]: keep a part only if its
/// coverage value is at most `target * (1 - eta)`.
#[derive(Clone, Debug)]
pub struct CoverageFilter {
    pub eta: f64,
    pub target: u64,
    /// Coverage value of each part's common realization, aligned with `parts`.
    pub values: Vec<u64>,
}

#[derive(Clone, Debug)]
pub struct IppInstance {
    metric: Arc<MetricSpace>,
    locations: Vec<usize>,
    scenarios: Vec<Scenario>,
    alphabet: Arc<Vec<String>>,
    coverage: Coverage,
    source_graph: Option<Arc<WeightedGraph>>,
}

impl IppInstance {
    /// Builds and validates an instance. `rows[i][j]` is the observation of
    /// scenario `i` at `locations[j]`.
    pub fn new(
        metric: Arc<MetricSpace>,
        locations: Vec<usize>,
        alphabet: Vec<String>,
        rows: Vec<Vec<ObsId>>,
        priors: Vec<Prior>,
        coverage: Coverage,
    ) -> Result<Self> {
        if rows.len() != priors.len() {
            return Err(Error::InvalidInstance(format!("{} observation rows but {} priors", rows.len(), priors.len())));
        }
        let npts = metric.len();
        let scenarios = rows
            .into_iter()
            .zip(priors)
            .enumerate()
            .map(|(id, (row, prior))| {
                if row.len() != locations.len() {
                    return Err(Error::InvalidInstance(format!(
                        "scenario {id} has {} observations for {} locations",
                        row.len(),
                        locations.len()
                    )));
                }
                let mut obs = vec![NO_OBS; npts];
                for (&loc, o) in locations.iter().zip(row) {
                    if loc >= npts {
                        return Err(Error::UnknownPoint(format!("location index {loc}")));
                    }
                    obs[loc] = o;
                }
                Ok(Scenario { id, prior, obs: obs.into() })
            })
            .collect::<Result<Vec<_>>>()?;
        let inst =
            IppInstance { metric, locations, scenarios, alphabet: Arc::new(alphabet), coverage, source_graph: None };
        inst.validate()?;
        Ok(inst)
    }

    /// Hypothesis-identification instance with `Q = m - 1`.
    pub fn hypothesis_id(
        metric: Arc<MetricSpace>,
        locations: Vec<usize>,
        alphabet: Vec<String>,
        rows: Vec<Vec<ObsId>>,
        priors: Vec<Prior>,
    ) -> Result<Self> {
        let target = rows.len().saturating_sub(1) as u64;
        Self::new(metric, locations, alphabet, rows, priors, Coverage { kind: CoverageKind::HypothesisId, target })
    }

    pub fn with_source_graph(mut self, g: Arc<WeightedGraph>) -> Self {
        self.source_graph = Some(g);
        self
    }

    pub fn source_graph(&self) -> Option<&Arc<WeightedGraph>> {
        self.source_graph.as_ref()
    }

    fn validate(&self) -> Result<()> {
        let bad = |s: String| Err(Error::InvalidInstance(s));
        if self.scenarios.is_empty() {
            return bad("no scenarios".into());
        }
        let root = self.metric.root();
        let mut seen = vec![false; self.metric.len()];
        for &v in &self.locations {
            self.metric.check_point(v)?;
            if v == root {
                return bad(format!("root `{}` cannot be a sensing location", self.metric.label(v)));
            }
            if std::mem::replace(&mut seen[v], true) {
                return bad(format!("location `{}` listed twice", self.metric.label(v)));
            }
        }
        if self.alphabet.len() >= NO_OBS as usize {
            return bad("observation alphabet too large".into());
        }
        let mut total = 0.0;
        for s in &self.scenarios {
            let p = s.prior.value();
            if !(p > 0.0 && p <= 1.0 + PROB_EPS) {
                return bad(format!("scenario {} has prior {p} outside (0,1]", s.id));
            }
            total += p;
            for &v in &self.locations {
                if s.obs[v] as usize >= self.alphabet.len() {
                    return bad(format!("scenario {} has an unknown symbol at `{}`", s.id, self.metric.label(v)));
                }
            }
        }
        if (total - 1.0).abs() > PROB_EPS {
            return bad(format!("priors sum to {total}, not 1"));
        }
        if let CoverageKind::HypothesisId = self.coverage.kind {
            if self.coverage.target != self.scenarios.len() as u64 - 1 {
                return bad(format!(
                    "hypothesis identification needs Q = m - 1 = {}, got {}",
                    self.scenarios.len() - 1,
                    self.coverage.target
                ));
            }
        }
        if self.coverage_value(&PartialRealization::new()) != 0 {
            return bad("coverage of the empty realization must be 0".into());
        }
        for i in 0..self.scenarios.len() {
            let full = self.realization(i, &self.locations);
            let f = self.coverage_value(&full);
            if f != self.coverage.target {
                return bad(format!(
                    "visiting every location under scenario {} reaches coverage {f}, not Q = {} \
                     (indistinguishable scenarios?)",
                    self.scenarios[i].id, self.coverage.target
                ));
            }
        }
        Ok(())
    }

    pub fn metric(&self) -> &Arc<MetricSpace> {
        &self.metric
    }

    pub fn root(&self) -> usize {
        self.metric.root()
    }

    pub fn locations(&self) -> &[usize] {
        &self.locations
    }

    pub fn scenarios(&self) -> &[Scenario] {
        &self.scenarios
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn coverage(&self) -> &Coverage {
        &self.coverage
    }

    pub fn target(&self) -> u64 {
        self.coverage.target
    }

    pub fn is_hypothesis_id(&self) -> bool {
        matches!(self.coverage.kind, CoverageKind::HypothesisId)
    }

    /// Number of scenarios.
    pub fn m(&self) -> usize {
        self.scenarios.len()
    }

    /// Number of sensing locations.
    pub fn n(&self) -> usize {
        self.locations.len()
    }

    #[inline]
    pub fn prob(&self, scenario: usize) -> f64 {
        self.scenarios[scenario].prior.value()
    }

    #[inline]
    pub fn obs(&self, scenario: usize, location: usize) -> ObsId {
        self.scenarios[scenario].obs[location]
    }

    pub fn all_scenarios(&self) -> Vec<usize> {
        (0..self.scenarios.len()).collect()
    }

    /// `psi_omega(points)`.
    pub fn realization(&self, scenario: usize, points: &[usize]) -> PartialRealization {
        points.iter().map(|&v| (v, self.obs(scenario, v))).collect()
    }

    /// Coverage of a set of pairs (several observations per location allowed):
    /// the number of scenarios inconsistent with at least one pair.
    pub fn hyp_id_value_of_pairs(&self, pairs: &[(usize, ObsId)]) -> u64 {
        self.scenarios.iter().filter(|s| pairs.iter().any(|&(v, o)| s.obs[v] != o)).count() as u64
    }

    /// Hypothesis-identification coverage `|∪ E_{v,o}|`.
    pub fn hyp_id_coverage(&self, psi: &PartialRealization) -> u64 {
        self.scenarios.iter().filter(|s| psi.iter().any(|(v, o)| s.obs[v] != o)).count() as u64
    }

    pub fn coverage_value(&self, psi: &PartialRealization) -> u64 {
        match &self.coverage.kind {
            CoverageKind::HypothesisId => self.hyp_id_coverage(psi),
            CoverageKind::Generic(oracle) => oracle.value(psi),
        }
    }

    pub fn is_covered(&self, psi: &PartialRealization) -> bool {
        self.coverage_value(psi) >= self.coverage.target
    }

    /// Scenarios whose full realization extends `psi`.
    pub fn compatible(&self, psi: &PartialRealization) -> Vec<usize> {
        (0..self.scenarios.len()).filter(|&i| psi.iter().all(|(v, o)| self.obs(i, v) == o)).collect()
    }

    /// Groups `scenarios` by their observations on `locations`.
    pub fn partition_by_realization(&self, locations: &[usize], scenarios: &[usize]) -> ScenarioPartition {
        let mut index: HashMap<Vec<ObsId>, usize> = HashMap::new();
        let mut parts: Vec<Vec<usize>> = Vec::new();
        for &s in scenarios {
            let key: Vec<ObsId> = locations.iter().map(|&v| self.obs(s, v)).collect();
            let slot = *index.entry(key).or_insert_with(|| {
                parts.push(Vec::new());
                parts.len() - 1
            });
            parts[slot].push(s);
        }
        for p in &mut parts {
            p.sort_unstable();
        }
        parts.sort_by_key(|p| p[0]);
        ScenarioPartition { parts, keyed_by: locations.to_vec() }
    }

    /// Splits `z` by the observation at `v` into the largest part `B_v(z)` and
    /// the rest `L_v(z)`. Ties go to the part whose symbol sorts first.
    pub fn split_by_location(&self, z: &[usize], v: usize) -> (Vec<usize>, Vec<usize>) {
        let mut counts: BTreeMap<ObsId, usize> = BTreeMap::new();
        for &s in z {
            *counts.entry(self.obs(s, v)).or_default() += 1;
        }
        let Some(major) = majority_symbol(&counts) else {
            return (Vec::new(), Vec::new());
        };
        z.iter().partition(|&&s| self.obs(s, v) == major)
    }

    /// Conditions on the compatible set `h`, removes the visited locations and
    /// replaces `f` by `f_psi(phi) = f(psi ∪ phi) - f(psi)`.
    pub fn residual_instance(&self, visited: &[usize], psi: &PartialRealization, h: &[usize]) -> Result<IppInstance> {
        if h.is_empty() {
            return Err(Error::EmptyConditioning);
        }
        let mass: f64 = h.iter().map(|&i| self.prob(i)).sum();
        let common_den = match self.scenarios[h[0]].prior {
            Prior::Ratio { den, .. } => Some(den),
            Prior::Real(_) => None,
        };
        let exact = common_den.is_some()
            && h.iter()
                .all(|&i| matches!(self.scenarios[i].prior, Prior::Ratio { den, .. } if Some(den) == common_den));
        let num_total: u64 = if exact {
            h.iter()
                .map(|&i| match self.scenarios[i].prior {
                    Prior::Ratio { num, .. } => num,
                    Prior::Real(_) => unreachable!(),
                })
                .sum()
        } else {
            0
        };
        let scenarios = h
            .iter()
            .map(|&i| {
                let s = &self.scenarios[i];
                let prior = match s.prior {
                    Prior::Ratio { num, .. } if exact => Prior::Ratio { num, den: num_total },
                    p => Prior::Real(p.value() / mass),
                };
                Scenario { id: s.id, prior, obs: s.obs.clone() }
            })
            .collect::<Vec<_>>();
        let locations = self.locations.iter().copied().filter(|v| !visited.contains(v)).collect();
        let coverage = match &self.coverage.kind {
            CoverageKind::HypothesisId => Coverage { kind: CoverageKind::HypothesisId, target: h.len() as u64 - 1 },
            CoverageKind::Generic(oracle) => {
                let base_value = oracle.value(psi);
                Coverage {
                    kind: CoverageKind::Generic(Arc::new(ResidualOracle {
                        inner: oracle.clone(),
                        base: psi.clone(),
                        base_value,
                    })),
                    target: self.coverage.target.saturating_sub(base_value),
                }
            }
        };
        Ok(IppInstance {
            metric: self.metric.clone(),
            locations,
            scenarios,
            alphabet: self.alphabet.clone(),
            coverage,
            source_graph: self.source_graph.clone(),
        })
    }

    /// Same instance planned from a different start point.
    pub fn with_root(&self, root: usize) -> Result<IppInstance> {
        let mut out = self.clone();
        out.locations.retain(|&v| v != root);
        out.metric = Arc::new((*self.metric).clone().with_root(root)?);
        Ok(out)
    }

    /// Observation-row index of scenario `id` in this instance.
    pub fn scenario_by_id(&self, id: usize) -> Option<usize> {
        self.scenarios.iter().position(|s| s.id == id)
    }
}

fn majority_symbol(counts: &BTreeMap<ObsId, usize>) -> Option<ObsId> {
    // BTreeMap iterates in symbol order, so the first maximum wins ties.
    let mut best: Option<(ObsId, usize)> = None;
    for (&o, &c) in counts {
        if best.is_none_or(|(_, bc)| c > bc) {
            best = Some((o, c));
        }
    }
    best.map(|(o, _)| o)
}

/// Parts with at least `delta * m` members, optionally also requiring
/// coverage at most `Q (1 - eta)`.
pub fn large_parts(p: &ScenarioPartition, delta: f64, m: usize, filter: Option<&CoverageFilter>) -> Vec<Vec<usize>> {
    let threshold = delta * m as f64 - PROB_EPS;
    p.parts
        .iter()
        .enumerate()
        .filter(|(_, y)| y.len() as f64 >= threshold)
        .filter(|(i, _)| match filter {
            None => true,
            Some(f) => (f.values[*i] as f64) <= f.target as f64 * (1.0 - f.eta) + PROB_EPS,
        })
        .map(|(_, y)| y.clone())
        .collect()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// X = {a, b}, root r; d(r,a)=1, d(r,b)=2, d(a,b)=1; two equiprobable
    /// scenarios differing only at a.
    pub fn ex2() -> IppInstance {
        let metric = MetricSpace::from_matrix(
            vec!["r".into(), "a".into(), "b".into()],
            vec![0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0],
            0,
        )
        .unwrap();
        IppInstance::hypothesis_id(
            Arc::new(metric),
            vec![1, 2],
            vec!["0".into(), "1".into()],
            vec![vec![0, 0], vec![1, 0]],
            vec![Prior::uniform(2); 2],
        )
        .unwrap()
    }

    /// Three scenarios on a 2-location line; location 1 separates {0,1} | {2}.
    pub fn three() -> IppInstance {
        let metric = MetricSpace::from_matrix(
            vec!["r".into(), "u".into(), "w".into()],
            vec![0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0],
            0,
        )
        .unwrap();
        IppInstance::hypothesis_id(
            Arc::new(metric),
            vec![1, 2],
            vec!["0".into(), "1".into()],
            vec![vec![0, 0], vec![0, 1], vec![1, 0]],
            vec![Prior::uniform(3); 3],
        )
        .unwrap()
    }

    #[test]
    fn compatible_sets() {
        let inst = ex2();
        assert_eq!(inst.compatible(&PartialRealization::new()), vec![0, 1]);
        assert_eq!(inst.compatible(&inst.realization(1, &[1, 2])), vec![1]);
        let psi: PartialRealization = [(1, 0)].into_iter().collect();
        assert_eq!(inst.compatible(&psi), vec![0]);
    }

    #[test]
    fn partitions() {
        let inst = three();
        let all = inst.all_scenarios();
        assert_eq!(inst.partition_by_realization(&[], &all).parts, vec![vec![0, 1, 2]]);
        assert_eq!(inst.partition_by_realization(&[1, 2], &all).parts, vec![vec![0], vec![1], vec![2]]);
        assert_eq!(inst.partition_by_realization(&[1], &all).parts, vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn large_part_thresholds() {
        let p = ScenarioPartition { parts: vec![vec![0, 1, 2, 3]], keyed_by: vec![] };
        assert_eq!(large_parts(&p, 1.0, 4, None).len(), 1);
        let p = ScenarioPartition { parts: vec![vec![0, 1, 2], vec![3]], keyed_by: vec![] };
        assert_eq!(large_parts(&p, 0.5, 4, None), vec![vec![0, 1, 2]]);
        let f = CoverageFilter { eta: 0.5, target: 3, values: vec![3, 0] };
        assert!(large_parts(&p, 0.25, 4, Some(&f)) == vec![vec![3]]);
    }

    #[test]
    fn split_ties_go_to_first_symbol() {
        let inst = ex2();
        assert_eq!(inst.split_by_location(&[0, 1], 2), (vec![0, 1], vec![]));
        assert_eq!(inst.split_by_location(&[0, 1], 1), (vec![0], vec![1]));
        let t = three();
        assert_eq!(t.split_by_location(&[0, 1, 2], 1), (vec![0, 1], vec![2]));
    }

    #[test]
    fn hyp_id_values() {
        let inst = ex2();
        assert_eq!(inst.hyp_id_coverage(&PartialRealization::new()), 0);
        assert_eq!(inst.hyp_id_coverage(&inst.realization(0, &[1, 2])), 1);
        let psi: PartialRealization = [(1, 0)].into_iter().collect();
        assert_eq!(inst.hyp_id_coverage(&psi), 1);
    }

    #[test]
    fn residual_hypothesis_id() {
        let inst = three();
        let r0 = inst.residual_instance(&[], &PartialRealization::new(), &inst.all_scenarios()).unwrap();
        assert_eq!(r0.target(), 2);
        assert_eq!(r0.locations(), inst.locations());

        let psi: PartialRealization = [(1, 0)].into_iter().collect();
        let h = inst.compatible(&psi);
        assert_eq!(h, vec![0, 1]);
        let r = inst.residual_instance(&[1], &psi, &h).unwrap();
        assert_eq!(r.locations(), &[2]);
        assert_eq!(r.target(), 1);
        assert_eq!(r.scenarios()[0].prior, Prior::Ratio { num: 1, den: 2 });
        let total: f64 = (0..r.m()).map(|i| r.prob(i)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(r.scenarios()[1].id, 1);

        let single = inst.residual_instance(&[1, 2], &inst.realization(2, &[1, 2]), &[2]).unwrap();
        assert_eq!(single.target(), 0);
        assert!(matches!(inst.residual_instance(&[], &PartialRealization::new(), &[]), Err(Error::EmptyConditioning)));
    }

    #[test]
    fn residual_generic_subtracts_base() {
        let inst = three();
        // Generic oracle equal to hypothesis identification on the full instance.
        let base = Arc::new(inst.clone());
        let oracle: Arc<dyn CoverageOracle> = Arc::new(move |psi: &PartialRealization| base.hyp_id_coverage(psi));
        let generic = IppInstance::new(
            inst.metric().clone(),
            inst.locations().to_vec(),
            inst.alphabet().to_vec(),
            vec![vec![0, 0], vec![0, 1], vec![1, 0]],
            vec![Prior::uniform(3); 3],
            Coverage { kind: CoverageKind::Generic(oracle), target: 2 },
        )
        .unwrap();
        let psi: PartialRealization = [(1, 0)].into_iter().collect();
        let h = generic.compatible(&psi);
        let r = generic.residual_instance(&[1], &psi, &h).unwrap();
        assert_eq!(r.target(), 1);
        let phi = r.realization(0, &[2]);
        assert_eq!(r.coverage_value(&phi), 1);
        assert_eq!(r.coverage_value(&PartialRealization::new()), 0);
    }

    #[test]
    fn rejects_invalid_instances() {
        let inst = ex2();
        let dup = IppInstance::hypothesis_id(
            inst.metric().clone(),
            vec![1, 2],
            vec!["0".into(), "1".into()],
            vec![vec![0, 0], vec![0, 0]],
            vec![Prior::uniform(2); 2],
        );
        assert!(dup.is_err());
        let bad_prior = IppInstance::hypothesis_id(
            inst.metric().clone(),
            vec![1, 2],
            vec!["0".into(), "1".into()],
            vec![vec![0, 0], vec![1, 0]],
            vec![Prior::Real(0.3), Prior::Real(0.3)],
        );
        assert!(bad_prior.is_err());
        let root_loc = IppInstance::hypothesis_id(
            inst.metric().clone(),
            vec![0, 2],
            vec!["0".into(), "1".into()],
            vec![vec![0, 0], vec![1, 0]],
            vec![Prior::uniform(2); 2],
        );
        assert!(root_loc.is_err());
    }

    #[test]
    fn conflicting_pairs_rejected() {
        let mut psi = PartialRealization::new();
        psi.insert(3, 1).unwrap();
        psi.insert(3, 1).unwrap();
        assert!(psi.insert(3, 0).is_err());
        assert_eq!(psi.get(3), Some(1));
    }
}
