//! Scenario sweeps, cost accounting and report files.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::instance::IppInstance;
use crate::planner::{run_policy, ExecMode, PlannerConfig, Policy, PolicyTranscript, Status};

pub use crate::planner::ObservationOracle;

/// Runs `policy` with the hidden scenario fixed to row `scenario`.
pub fn simulate(
    inst: &IppInstance,
    policy: Policy,
    cfg: &PlannerConfig,
    scenario: usize,
    seed: u64,
) -> Result<(f64, PolicyTranscript)> {
    let t = run_policy(inst, policy, cfg, scenario, seed)?;
    Ok((t.cost, t))
}

/// Average relative cost in percent: mean of `(k − adaptive) / adaptive`.
/// Scenarios with zero adaptive cost are skipped.
pub fn arc(costs_k: &[f64], costs_adap: &[f64]) -> Result<f64> {
    if costs_k.len() != costs_adap.len() {
        return Err(Error::Invalid(format!(
            "cost vectors differ in length ({} vs {})",
            costs_k.len(),
            costs_adap.len()
        )));
    }
    let mut sum = 0.0;
    let mut count = 0;
    for (i, (&k, &a)) in costs_k.iter().zip(costs_adap).enumerate() {
        if a <= 0.0 {
            log::warn!("scenario {i} has zero adaptive cost; left out of ARC");
            continue;
        }
        sum += (k - a) / a;
        count += 1;
    }
    Ok(if count == 0 { 0.0 } else { 100.0 * sum / count as f64 })
}

/// Policy label used in report files: the round count, or `inf`.
pub fn k_label(p: Policy) -> String {
    p.to_string()
}

pub fn parse_k_label(s: &str) -> Result<Policy> {
    if s == "inf" {
        return Ok(Policy::FullyAdaptive);
    }
    if let Some(k) = s.strip_prefix("2x") {
        return k.parse().map(Policy::TwoKAdap).map_err(|_| Error::Invalid(format!("bad k label {s:?}")));
    }
    match s.parse() {
        Ok(0) | Err(_) => Err(Error::Invalid(format!("bad k label {s:?}"))),
        Ok(k) => Ok(Policy::KAdap(k)),
    }
}

/// Parses `1..10,inf`-style lists.
pub fn parse_k_list(s: &str) -> Result<Vec<Policy>> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        match item.split_once("..") {
            Some((a, b)) => {
                let (a, b): (usize, usize) = (
                    a.parse().map_err(|_| Error::Invalid(format!("bad range {item:?}")))?,
                    b.parse().map_err(|_| Error::Invalid(format!("bad range {item:?}")))?,
                );
                if a == 0 || a > b {
                    return Err(Error::Invalid(format!("bad range {item:?}")));
                }
                out.extend((a..=b).map(Policy::KAdap));
            }
            None => out.push(parse_k_label(item)?),
        }
    }
    if out.is_empty() {
        return Err(Error::Invalid("empty k list".into()));
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub instance_name: String,
    pub policies: Vec<Policy>,
    pub seeds: usize,
    pub master_seed: u64,
    pub planner: PlannerConfig,
}

impl ExperimentConfig {
    pub fn new(instance_name: impl Into<String>, policies: Vec<Policy>, mode: ExecMode) -> Self {
        ExperimentConfig {
            instance_name: instance_name.into(),
            policies,
            seeds: 1,
            master_seed: 0,
            planner: PlannerConfig::with_mode(mode),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Failure {
    pub policy: Policy,
    pub scenario: usize,
    pub seed: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub policy: Policy,
    /// Missing if any scenario has no successful run.
    pub avg_cost: Option<f64>,
    /// Mean over successful seeds, per scenario.
    pub per_scenario: Vec<Option<f64>>,
    pub arc_percent: Option<f64>,
    pub avg_plan_seconds: f64,
    /// Average cost of each seed (missing if any of its runs failed).
    pub per_seed: Vec<Option<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub instance: String,
    pub rows: Vec<ResultRow>,
    pub failures: Vec<Failure>,
}

impl ResultTable {
    pub fn row(&self, p: Policy) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.policy == p)
    }
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of one (policy, scenario, repetition) cell.
pub fn cell_seed(master: u64, policy_index: usize, scenario: usize, rep: usize) -> u64 {
    mix(mix(mix(master ^ policy_index as u64) ^ scenario as u64) ^ rep as u64)
}

/// Worker threads for experiment cells: `IPP_THREADS` if set, else all cores.
pub fn thread_count() -> usize {
    std::env::var("IPP_THREADS")
        .ok()
        .and_then(|s| s.parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

struct Cell {
    cost: Option<f64>,
    seconds: f64,
    failure: Option<String>,
}

/// Every policy against every scenario, `seeds` times each.
pub fn run_experiment(inst: &IppInstance, cfg: &ExperimentConfig) -> Result<ResultTable> {
    if cfg.policies.is_empty() {
        return Err(Error::Invalid("empty k list".into()));
    }
    if cfg.seeds == 0 {
        return Err(Error::Invalid("need at least one seed".into()));
    }
    let m = inst.m();
    let cells: Vec<(usize, usize, usize)> = (0..cfg.policies.len())
        .flat_map(|p| (0..m).flat_map(move |s| (0..cfg.seeds).map(move |r| (p, s, r))))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count())
        .build()
        .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    let results: Vec<Cell> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(p, s, r)| {
                let seed = cell_seed(cfg.master_seed, p, s, r);
                match simulate(inst, cfg.policies[p], &cfg.planner, s, seed) {
                    Ok((cost, t)) => match t.status {
                        Status::Covered => Cell { cost: Some(cost), seconds: t.plan_seconds, failure: None },
                        Status::Anomaly(msg) => Cell { cost: None, seconds: t.plan_seconds, failure: Some(msg) },
                    },
                    Err(e) => Cell { cost: None, seconds: 0.0, failure: Some(e.to_string()) },
                }
            })
            .collect()
    });
    let mut failures = Vec::new();
    let mut rows = Vec::new();
    for (pi, &policy) in cfg.policies.iter().enumerate() {
        let block = &results[pi * m * cfg.seeds..(pi + 1) * m * cfg.seeds];
        let mut per_scenario = Vec::with_capacity(m);
        for s in 0..m {
            let runs = &block[s * cfg.seeds..(s + 1) * cfg.seeds];
            let ok: Vec<f64> = runs.iter().filter_map(|c| c.cost).collect();
            per_scenario.push((!ok.is_empty()).then(|| ok.iter().sum::<f64>() / ok.len() as f64));
            for (r, c) in runs.iter().enumerate() {
                if let Some(msg) = &c.failure {
                    failures.push(Failure { policy, scenario: s, seed: r, message: msg.clone() });
                }
            }
        }
        let per_seed = (0..cfg.seeds)
            .map(|r| {
                let costs: Option<Vec<f64>> = (0..m).map(|s| block[s * cfg.seeds + r].cost).collect();
                costs.map(|c| c.iter().sum::<f64>() / m as f64)
            })
            .collect();
        let avg_cost =
            per_scenario.iter().copied().collect::<Option<Vec<f64>>>().map(|v| v.iter().sum::<f64>() / m as f64);
        let avg_plan_seconds = block.iter().map(|c| c.seconds).sum::<f64>() / block.len() as f64;
        rows.push(ResultRow { policy, avg_cost, per_scenario, arc_percent: None, avg_plan_seconds, per_seed });
    }
    let adaptive: Option<Vec<f64>> =
        rows.iter().find(|r| r.policy == Policy::FullyAdaptive).and_then(|r| r.per_scenario.iter().copied().collect());
    if let Some(adap) = adaptive {
        for row in &mut rows {
            row.arc_percent = if row.policy == Policy::FullyAdaptive {
                Some(0.0)
            } else {
                match row.per_scenario.iter().copied().collect::<Option<Vec<f64>>>() {
                    Some(costs) => Some(arc(&costs, &adap)?),
                    None => None,
                }
            };
        }
    }
    Ok(ResultTable { instance: cfg.instance_name.clone(), rows, failures })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn parse_opt(s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|_| Error::Invalid(format!("bad number {s:?} in report")))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Invalid(format!("csv: {e}"))
}

/// Writes `costs.csv`, `arc.csv`, `times.csv`, three SVG charts and, when
/// runs failed, `failures.log`.
pub fn emit_reports(rt: &ResultTable, dir: &Path) -> Result<()> {
    if rt.rows.is_empty() {
        return Err(Error::Invalid("empty result table".into()));
    }
    std::fs::create_dir_all(dir)?;
    let mut costs = csv::Writer::from_path(dir.join("costs.csv")).map_err(csv_err)?;
    let mut arcs = csv::Writer::from_path(dir.join("arc.csv")).map_err(csv_err)?;
    let mut times = csv::Writer::from_path(dir.join("times.csv")).map_err(csv_err)?;
    costs.write_record(["instance", "k_label", "avg_cost", "per_scenario_costs"]).map_err(csv_err)?;
    arcs.write_record(["instance", "k_label", "arc_percent"]).map_err(csv_err)?;
    times.write_record(["instance", "k_label", "avg_plan_seconds"]).map_err(csv_err)?;
    for row in &rt.rows {
        let label = k_label(row.policy);
        let per: Vec<String> = row.per_scenario.iter().map(|&c| opt(c)).collect();
        costs.write_record([rt.instance.as_str(), &label, &opt(row.avg_cost), &per.join(";")]).map_err(csv_err)?;
        arcs.write_record([rt.instance.as_str(), &label, &opt(row.arc_percent)]).map_err(csv_err)?;
        times.write_record([rt.instance.as_str(), &label, &row.avg_plan_seconds.to_string()]).map_err(csv_err)?;
    }
    costs.flush()?;
    arcs.flush()?;
    times.flush()?;
    let labels: Vec<String> = rt.rows.iter().map(|r| k_label(r.policy)).collect();
    let charts = [
        ("cost_vs_k.svg", "Average cost", rt.rows.iter().map(|r| r.avg_cost).collect::<Vec<_>>()),
        ("arc_vs_k.svg", "ARC (%)", rt.rows.iter().map(|r| r.arc_percent).collect()),
        ("time_vs_k.svg", "Planning time (s)", rt.rows.iter().map(|r| Some(r.avg_plan_seconds)).collect()),
    ];
    for (file, title, values) in charts {
        std::fs::write(dir.join(file), line_chart(&format!("{} - {}", rt.instance, title), &labels, &values))?;
    }
    let log_path = dir.join("failures.log");
    if rt.failures.is_empty() {
        if log_path.exists() {
            std::fs::remove_file(&log_path)?;
        }
    } else {
        let mut text = String::new();
        for f in &rt.failures {
            let _ = writeln!(text, "k={} scenario={} seed={}: {}", k_label(f.policy), f.scenario, f.seed, f.message);
        }
        std::fs::write(log_path, text)?;
    }
    Ok(())
}

/// Reads the three CSV files written by [`emit_reports`]. Per-seed averages
/// and failure details are not stored there and come back empty.
pub fn read_reports(dir: &Path) -> Result<ResultTable> {
    let read = |name: &str| -> Result<Vec<csv::StringRecord>> {
        let mut r = csv::Reader::from_path(dir.join(name)).map_err(csv_err)?;
        r.records().collect::<std::result::Result<Vec<_>, _>>().map_err(csv_err)
    };
    let costs = read("costs.csv")?;
    let arcs = read("arc.csv")?;
    let times = read("times.csv")?;
    if costs.len() != arcs.len() || costs.len() != times.len() {
        return Err(Error::Invalid("report files disagree on row count".into()));
    }
    let mut instance = String::new();
    let mut rows = Vec::new();
    for ((c, a), t) in costs.iter().zip(&arcs).zip(&times) {
        if c.len() != 4 || a.len() != 3 || t.len() != 3 || c[1] != a[1] || c[1] != t[1] {
            return Err(Error::Invalid(format!("mismatched report rows for k = {:?}", &c[1])));
        }
        instance = c[0].to_string();
        let per_scenario =
            if c[3].is_empty() { Vec::new() } else { c[3].split(';').map(parse_opt).collect::<Result<Vec<_>>>()? };
        rows.push(ResultRow {
            policy: parse_k_label(&c[1])?,
            avg_cost: parse_opt(&c[2])?,
            per_scenario,
            arc_percent: parse_opt(&a[2])?,
            avg_plan_seconds: parse_opt(&t[2])?.unwrap_or(0.0),
            per_seed: Vec::new(),
        });
    }
    Ok(ResultTable { instance, rows, failures: Vec::new() })
}

/// Plain-text table of a result table.
pub fn format_table(rt: &ResultTable) -> String {
    let mut out = format!("{:<8} {:>12} {:>10} {:>12}\n", "k", "avg cost", "ARC %", "plan (s)");
    for r in &rt.rows {
        let f = |v: Option<f64>, p: usize| v.map_or("-".to_string(), |x| format!("{x:.p$}"));
        let _ = writeln!(
            out,
            "{:<8} {:>12} {:>10} {:>12.4}",
            k_label(r.policy),
            f(r.avg_cost, 2),
            f(r.arc_percent, 2),
            r.avg_plan_seconds
        );
    }
    out
}

/// Minimal SVG line chart over categorical x labels; gaps for missing values.
pub fn line_chart(title: &str, labels: &[String], values: &[Option<f64>]) -> String {
    let (w, h, pad) = (640.0, 360.0, 50.0);
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    let lo = present.iter().copied().fold(f64::INFINITY, f64::min).min(0.0);
    let mut hi = present.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !hi.is_finite() || hi <= lo {
        hi = lo + 1.0;
    }
    let n = labels.len().max(2) as f64;
    let x = |i: usize| pad + i as f64 * (w - 2.0 * pad) / (n - 1.0);
    let y = |v: f64| h - pad - (v - lo) / (hi - lo) * (h - 2.0 * pad);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    );
    let _ = writeln!(s, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>",
        w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        "<line x1=\"{pad}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/><line x1=\"{pad}\" y1=\"{pad}\" x2=\"{pad}\" y2=\"{0}\" stroke=\"black\"/>",
        h - pad,
        w - pad
    );
    for (v, anchor) in [(lo, h - pad), (hi, pad)] {
        let _ =
            writeln!(s, "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>", pad - 6.0, anchor + 4.0, fmt_tick(v));
    }
    for (i, l) in labels.iter().enumerate() {
        let _ =
            writeln!(s, "<text x=\"{:.1}\" y=\"{}\" text-anchor=\"middle\">{}</text>", x(i), h - pad + 18.0, escape(l));
    }
    let mut run: Vec<String> = Vec::new();
    let flush = |run: &mut Vec<String>, s: &mut String| {
        if run.len() > 1 {
            let _ = writeln!(
                s,
                "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"{}\"/>",
                run.join(" ")
            );
        }
        run.clear();
    };
    for (i, v) in values.iter().enumerate() {
        match v {
            Some(v) => {
                run.push(format!("{:.1},{:.1}", x(i), y(*v)));
                let _ = writeln!(s, "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"#1f77b4\"/>", x(i), y(*v));
            }
            None => flush(&mut run, &mut s),
        }
    }
    flush(&mut run, &mut s);
    s.push_str("</svg>\n");
    s
}

fn fmt_tick(v: f64) -> String {
    if v.abs() >= 100.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::tests::ex2;

    #[test]
    fn arc_examples() {
        assert_eq!(arc(&[2.0, 2.0], &[1.0, 2.0]).unwrap(), 50.0);
        assert_eq!(arc(&[3.0, 1.5], &[3.0, 1.5]).unwrap(), 0.0);
        assert!(arc(&[1.0], &[1.0, 2.0]).is_err());
        assert_eq!(arc(&[5.0, 2.0], &[0.0, 1.0]).unwrap(), 100.0);
    }

    #[test]
    fn labels() {
        assert_eq!(
            parse_k_list("1..3,inf").unwrap(),
            vec![Policy::KAdap(1), Policy::KAdap(2), Policy::KAdap(3), Policy::FullyAdaptive]
        );
        assert_eq!(parse_k_list("2x2").unwrap(), vec![Policy::TwoKAdap(2)]);
        assert!(parse_k_list("0").is_err());
        assert!(parse_k_list("").is_err());
        assert!(parse_k_list("3..1").is_err());
        for p in [Policy::KAdap(7), Policy::TwoKAdap(3), Policy::FullyAdaptive] {
            assert_eq!(parse_k_label(&k_label(p)).unwrap(), p);
        }
    }

    #[test]
    fn ex2_experiment() {
        let inst = ex2();
        let mut cfg = ExperimentConfig::new("ex2", vec![Policy::KAdap(1), Policy::FullyAdaptive], ExecMode::Tour);
        cfg.seeds = 2;
        let rt = run_experiment(&inst, &cfg).unwrap();
        for r in &rt.rows {
            assert_eq!(r.avg_cost, Some(2.0));
            assert_eq!(r.arc_percent, Some(0.0));
            assert_eq!(r.per_scenario, vec![Some(2.0), Some(2.0)]);
        }
        assert!(rt.failures.is_empty());
        cfg.planner.mode = ExecMode::Path;
        let rt = run_experiment(&inst, &cfg).unwrap();
        assert_eq!(rt.rows[0].avg_cost, Some(1.0));
    }

    #[test]
    fn seeds_are_distinct_per_cell() {
        let mut seen = std::collections::HashSet::new();
        for p in 0..4 {
            for s in 0..10 {
                for r in 0..3 {
                    assert!(seen.insert(cell_seed(7, p, s, r)));
                }
            }
        }
    }

    #[test]
    fn reports_round_trip() {
        let inst = ex2();
        let cfg = ExperimentConfig::new(
            "ex2",
            vec![Policy::KAdap(1), Policy::KAdap(2), Policy::FullyAdaptive],
            ExecMode::Path,
        );
        let mut rt = run_experiment(&inst, &cfg).unwrap();
        rt.rows[1].per_scenario[0] = None;
        rt.rows[1].avg_cost = None;
        rt.rows[1].arc_percent = None;
        rt.rows[0].avg_plan_seconds = 0.1 + 0.2;
        let dir = tempfile::tempdir().unwrap();
        emit_reports(&rt, dir.path()).unwrap();
        let back = read_reports(dir.path()).unwrap();
        assert_eq!(back.instance, "ex2");
        for (a, b) in rt.rows.iter().zip(&back.rows) {
            assert_eq!(a.policy, b.policy);
            assert_eq!(a.avg_cost, b.avg_cost);
            assert_eq!(a.per_scenario, b.per_scenario);
            assert_eq!(a.arc_percent, b.arc_percent);
            assert_eq!(a.avg_plan_seconds, b.avg_plan_seconds);
        }
        for f in ["cost_vs_k.svg", "arc_vs_k.svg", "time_vs_k.svg"] {
            assert!(std::fs::read_to_string(dir.path().join(f)).unwrap().starts_with("<svg"));
        }
        assert!(!dir.path().join("failures.log").exists());
        let costs = std::fs::read_to_string(dir.path().join("costs.csv")).unwrap();
        assert!(costs.starts_with("instance,k_label,avg_cost,per_scenario_costs\n"));
        assert!(costs.contains("ex2,inf,1,1;1\n"));
    }

    #[test]
    fn empty_table_rejected() {
        let rt = ResultTable { instance: "x".into(), rows: vec![], failures: vec![] };
        assert!(emit_reports(&rt, Path::new("/nonexistent")).is_err());
    }

    #[test]
    fn csv_is_deterministic() {
        let inst = ex2();
        let cfg = ExperimentConfig::new("ex2", vec![Policy::KAdap(1), Policy::FullyAdaptive], ExecMode::Tour);
        let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        emit_reports(&run_experiment(&inst, &cfg).unwrap(), d1.path()).unwrap();
        emit_reports(&run_experiment(&inst, &cfg).unwrap(), d2.path()).unwrap();
        for f in ["costs.csv", "arc.csv"] {
            assert_eq!(std::fs::read(d1.path().join(f)).unwrap(), std::fs::read(d2.path().join(f)).unwrap());
        }
    }
}
