use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ipp_core::gen::{
    contract_degree2, default_occlusion_mask, gen_icm, gen_uav, ingest_road, parse_occlusions, read_road_files,
    sensing_stats, synthetic_road_network, write_road_files, IcmConfig, UavConfig, SYNTHETIC_ROAD_SEED,
    SYNTHETIC_ROAD_SIDE,
};
use ipp_core::harness::{
    emit_reports, format_table, parse_k_label, parse_k_list, read_reports, run_experiment, simulate, ExperimentConfig,
};
use ipp_core::instance::{read_instance, write_instance, IppInstance};
use ipp_core::metric::tour_length;
use ipp_core::planner::{ExecMode, PlannerConfig, Status};
use ipp_core::rso::{RsoMode, RsoSolverChoice};

/// Informative path planning with a bounded number of re-planning rounds.
#[derive(Parser)]
#[command(name = "ipp", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a generated instance (or synthetic road files).
    #[command(subcommand)]
    Generate(Gen),
    /// Print the tours planned for the first round.
    Plan {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run a policy against one hidden scenario and print its transcript.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// Hidden scenario (0-based row).
        #[arg(long)]
        scenario: usize,
    },
    /// Sweep policies over every scenario and write report files.
    Bench {
        #[arg(long)]
        instance: PathBuf,
        /// Round counts, e.g. `1..10,inf`.
        #[arg(long, default_value = "1..3,inf")]
        k: String,
        #[arg(long, default_value_t = 1)]
        seeds: usize,
        #[arg(long, default_value_t = 0)]
        master_seed: u64,
        #[arg(long, value_enum, default_value_t = Mode::Path)]
        mode: Mode,
        #[arg(long, value_enum, default_value_t = Solver::Auto)]
        solver: Solver,
        /// Name written in the report rows (defaults to the file stem).
        #[arg(long)]
        name: Option<String>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Print the table stored in a bench output directory.
    Report { dir: PathBuf },
}

#[derive(Subcommand)]
enum Gen {
    /// UAV victim search on an N x N grid.
    Uav {
        #[arg(long)]
        n: usize,
        /// Occlusion file with one `row col` pair per line.
        #[arg(long, conflicts_with = "default_occlusions")]
        occlusions: Option<PathBuf>,
        /// Use the shipped mask for N in {8, 9, 10}.
        #[arg(long)]
        default_occlusions: bool,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Independent-cascade scenarios on a contracted road network. Without
    /// --nodes/--edges the synthetic stand-in network is used.
    Icm {
        #[arg(long, requires = "edges")]
        nodes: Option<PathBuf>,
        #[arg(long, requires = "nodes")]
        edges: Option<PathBuf>,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 50)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Synthetic road network in the node/edge file layout.
    Road {
        #[arg(long, default_value_t = SYNTHETIC_ROAD_SIDE)]
        side: usize,
        #[arg(long, default_value_t = SYNTHETIC_ROAD_SEED)]
        seed: u64,
        #[arg(long)]
        nodes_out: PathBuf,
        #[arg(long)]
        edges_out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Round count, `inf` for fully adaptive, `2xK` for the partial-cover driver.
    #[arg(long, default_value = "2")]
    k: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Mode::Path)]
    mode: Mode,
    #[arg(long, value_enum, default_value_t = Solver::Auto)]
    solver: Solver,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Tour,
    Path,
}

#[derive(Clone, Copy, ValueEnum)]
enum Solver {
    Auto,
    Greedy,
    BruteForce,
    GroupSteiner,
}

fn planner_config(mode: Mode, solver: Solver) -> PlannerConfig {
    let mode = match mode {
        Mode::Tour => ExecMode::Tour,
        Mode::Path => ExecMode::Path,
    };
    let solver = RsoSolverChoice::with_mode(match solver {
        Solver::Auto => RsoMode::Auto,
        Solver::Greedy => RsoMode::Greedy,
        Solver::BruteForce => RsoMode::BruteForce,
        Solver::GroupSteiner => RsoMode::GroupSteiner,
    });
    PlannerConfig { mode, solver }
}

/// Failure that should exit with status 1 rather than 2.
#[derive(Debug)]
struct Anomaly(String);

impl std::fmt::Display for Anomaly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Anomaly {}

fn load(path: &Path) -> anyhow::Result<IppInstance> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    read_instance(&text).with_context(|| format!("parsing {}", path.display()))
}

fn save(inst: &IppInstance, path: &Path) -> anyhow::Result<()> {
    std::fs::write(path, write_instance(inst)?).with_context(|| format!("writing {}", path.display()))
}

fn generate(g: Gen) -> anyhow::Result<()> {
    match g {
        Gen::Uav { n, occlusions, default_occlusions, out } => {
            let mut cfg = UavConfig::new(n);
            if let Some(path) = occlusions {
                cfg = cfg.with_occlusions(parse_occlusions(&std::fs::read_to_string(&path)?)?);
            } else if default_occlusions {
                match default_occlusion_mask(n) {
                    Some(cells) => cfg = cfg.with_occlusions(cells),
                    None => bail!("no shipped occlusion mask for N = {n}"),
                }
            }
            let inst = gen_uav(&cfg)?;
            save(&inst, &out)?;
            println!("wrote {} ({} scenarios, {} locations)", out.display(), inst.m(), inst.n());
        }
        Gen::Icm { nodes, edges, p, m, seed, out } => {
            let (ns, es) = match (nodes, edges) {
                (Some(n), Some(e)) => read_road_files(&n, &e)?,
                _ => synthetic_road_network(SYNTHETIC_ROAD_SIDE, SYNTHETIC_ROAD_SIDE, SYNTHETIC_ROAD_SEED),
            };
            let raw = ingest_road(&ns, &es)?;
            let (g, rep) = contract_degree2(&raw);
            log::info!("contracted {} nodes / {} edges to {rep:?}", raw.node_count(), raw.edge_count());
            let inst = gen_icm(&g, &IcmConfig { p, m, seed })?;
            save(&inst, &out)?;
            let (per_node, per_scenario) = sensing_stats(&inst)?;
            println!(
                "wrote {} ({} nodes, {} edges; {per_node:.2} scenarios per node, {per_scenario:.2} nodes per scenario)",
                out.display(),
                rep.nodes,
                rep.edges
            );
        }
        Gen::Road { side, seed, nodes_out, edges_out } => {
            let (ns, es) = synthetic_road_network(side, side, seed);
            write_road_files(&ns, &es, &nodes_out, &edges_out)?;
            println!("wrote {} nodes and {} edges", ns.len(), es.len());
        }
    }
    Ok(())
}

fn plan(run: RunArgs) -> anyhow::Result<()> {
    let inst = load(&run.instance)?;
    let cfg = planner_config(run.mode, run.solver);
    let policy = parse_k_label(&run.k)?;
    // round one sees no observations, so any scenario gives the same plan
    let (_, t) = simulate(&inst, policy, &cfg, 0, run.seed)?;
    let metric = inst.metric();
    for (i, tour) in t.first_plan.iter().enumerate() {
        let mut labels: Vec<&str> = tour.order.iter().map(|&v| metric.label(v)).collect();
        labels.push(metric.label(tour.order[0]));
        println!("tour {}: {} (length {})", i + 1, labels.join(" "), tour_length(tour, metric)?);
    }
    if t.first_plan.is_empty() {
        match t.status {
            Status::Covered => println!("nothing to visit: the target is already met"),
            Status::Anomaly(msg) => return Err(Anomaly(msg).into()),
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Generate(g) => generate(g),
        Cmd::Plan { run } => plan(run),
        Cmd::Simulate { run, scenario } => (|| {
            let inst = load(&run.instance)?;
            let cfg = planner_config(run.mode, run.solver);
            let policy = parse_k_label(&run.k)?;
            let (cost, t) = simulate(&inst, policy, &cfg, scenario, run.seed)?;
            print!("{}", t.to_csv(&inst));
            println!("# cost {cost} rounds {}", t.recompute_count);
            match t.status {
                Status::Covered => Ok(()),
                Status::Anomaly(msg) => Err(Anomaly(msg).into()),
            }
        })(),
        Cmd::Bench { instance, k, seeds, master_seed, mode, solver, name, out } => (|| {
            let inst = load(&instance)?;
            let name = name.unwrap_or_else(|| {
                instance.file_stem().map_or("instance".into(), |s| s.to_string_lossy().into_owned())
            });
            let mut cfg = ExperimentConfig::new(name, parse_k_list(&k)?, ExecMode::Path);
            cfg.planner = planner_config(mode, solver);
            cfg.seeds = seeds;
            cfg.master_seed = master_seed;
            let rt = run_experiment(&inst, &cfg)?;
            emit_reports(&rt, &out)?;
            print!("{}", format_table(&rt));
            if rt.failures.is_empty() {
                Ok(())
            } else {
                Err(Anomaly(format!("{} run(s) failed; see {}", rt.failures.len(), out.join("failures.log").display()))
                    .into())
            }
        })(),
        Cmd::Report { dir } => read_reports(&dir).map(|rt| print!("{}", format_table(&rt))).map_err(Into::into),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Anomaly>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
