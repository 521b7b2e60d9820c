use std::path::Path;
use std::process::{Command, Output};

fn ipp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ipp")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn uav(dir: &Path, n: &str) -> String {
    let path = dir.join(format!("uav{n}.txt"));
    let p = path.to_str().unwrap().to_string();
    let o = ipp(&["generate", "uav", "--n", n, "-o", &p]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    p
}

#[test]
fn simulate_prints_a_covering_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let inst = uav(dir.path(), "4");
    for k in ["1", "2", "2x2", "inf"] {
        let o = ipp(&["simulate", "--instance", &inst, "--k", k, "--scenario", "6", "--mode", "tour"]);
        assert_eq!(o.status.code(), Some(0), "k={k}");
        let out = stdout(&o);
        assert!(out.starts_with("round,step,location,observation,leg_cost,cum_cost\n"));
        let cost: f64 = out.lines().last().unwrap().split_whitespace().nth(2).unwrap().parse().unwrap();
        let last_cum: f64 = out.lines().rev().nth(1).unwrap().rsplit(',').next().unwrap().parse().unwrap();
        assert_eq!(cost, last_cum);
        // tour mode ends back at the root
        assert!(out.lines().rev().nth(1).unwrap().contains(",r,-,"), "k={k}");
    }
}

#[test]
fn plan_lists_round_one_tours_from_the_root() {
    let dir = tempfile::tempdir().unwrap();
    let inst = uav(dir.path(), "4");
    let o = ipp(&["plan", "--instance", &inst, "--k", "2"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.lines().count() >= 1);
    for line in out.lines() {
        assert!(line.starts_with("tour "));
        assert!(line.contains(": r ") && line.contains(" r (length "), "{line}");
    }
}

#[test]
fn bench_then_report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let inst = uav(dir.path(), "3");
    let out = dir.path().join("out");
    let o = ipp(&["bench", "--instance", &inst, "--k", "1,2,inf", "--seeds", "2", "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["costs.csv", "arc.csv", "times.csv", "cost_vs_k.svg", "arc_vs_k.svg", "time_vs_k.svg"] {
        assert!(out.join(f).exists(), "{f}");
    }
    assert!(!out.join("failures.log").exists());
    let r = ipp(&["report", out.to_str().unwrap()]);
    assert!(r.status.success());
    let (bench_table, report_table) = (stdout(&o), stdout(&r));
    assert_eq!(bench_table, report_table);
    assert!(report_table.contains("inf"));
}

#[test]
fn road_files_feed_icm_generation() {
    let dir = tempfile::tempdir().unwrap();
    let nodes = dir.path().join("nodes.csv");
    let edges = dir.path().join("edges.csv");
    let inst = dir.path().join("icm.txt");
    let o = ipp(&[
        "generate",
        "road",
        "--side",
        "8",
        "--nodes-out",
        nodes.to_str().unwrap(),
        "--edges-out",
        edges.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let o = ipp(&[
        "generate",
        "icm",
        "--nodes",
        nodes.to_str().unwrap(),
        "--edges",
        edges.to_str().unwrap(),
        "--p",
        "0.7",
        "--m",
        "6",
        "--seed",
        "3",
        "-o",
        inst.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = ipp(&["simulate", "--instance", inst.to_str().unwrap(), "--k", "3", "--scenario", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let inst = uav(dir.path(), "3");
    let missing = dir.path().join("nope.txt");
    let cases: Vec<Vec<&str>> = vec![
        vec!["simulate", "--instance", missing.to_str().unwrap(), "--scenario", "0"],
        vec!["simulate", "--instance", &inst, "--k", "zero", "--scenario", "0"],
        vec!["simulate", "--instance", &inst, "--scenario", "99"],
        vec!["generate", "uav", "--n", "5", "--default-occlusions", "-o", "/dev/null"],
        vec!["plan"],
    ];
    for args in cases {
        assert_eq!(ipp(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn shipped_mask_changes_the_instance() {
    let dir = tempfile::tempdir().unwrap();
    let plain = uav(dir.path(), "8");
    let masked = dir.path().join("masked.txt");
    let o = ipp(&["generate", "uav", "--n", "8", "--default-occlusions", "-o", masked.to_str().unwrap()]);
    assert!(o.status.success());
    let a = std::fs::read_to_string(plain).unwrap();
    let b = std::fs::read_to_string(masked).unwrap();
    assert_ne!(a, b);
    assert!(b.contains("none"));
}
