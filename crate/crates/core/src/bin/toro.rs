use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use toro_core::bench::{self, BenchConfig, BenchKind};
use toro_core::depgraph::{build_dependency_graph, DEFAULT_CYCLE_CAP};
use toro_core::fvs::{ilp_constraint_model, ilp_enumerate_model, FvsMethod};
use toro_core::ilp::{lp_format::export_with_comments, Budget, Engine};
use toro_core::instance::{
    default_workspace, generate_no_overlap, generate_with_overlap, replay, validate, ActionPlan, Instance,
    OverlapConfig,
};
use toro_core::mindist::{build_mindist_model, DEFAULT_BUDGET};
use toro_core::pipeline::{self, SolveReport, TspMode};
use toro_core::tsp::{build_g_no, build_g_uno};

#[derive(Parser)]
#[command(name = "toro", version, about = "Tabletop object rearrangement planner")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a random instance as JSON.
    Generate {
        #[arg(long, value_enum, default_value = "no-overlap")]
        mode: GenMode,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2.0)]
        avg_degree: f64,
        #[arg(long, default_value_t = 4)]
        max_degree: usize,
        #[arg(long, default_value_t = 0.2)]
        radius: f64,
        /// External buffers (overlap mode); defaults to n.
        #[arg(long)]
        buffers: Option<usize>,
        #[arg(long)]
        unlabeled: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Solve an instance and print the report as JSON.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        method: Method,
        /// FVS solver for fvs-single: brute-force, ilp-constraint, ilp-enumerate, msch, mch, mdh.
        #[arg(long)]
        fvs_method: Option<FvsMethod>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Engine time budget in seconds.
        #[arg(long, default_value_t = DEFAULT_BUDGET.as_secs_f64())]
        time_limit: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a benchmark sweep and write CSV.
    Bench {
        #[arg(long, default_value = "fvs")]
        kind: BenchKind,
        /// Comma-separated sizes, or a range like 5..20.
        #[arg(long)]
        n: String,
        #[arg(long, default_value_t = 2.0)]
        avg_degree: f64,
        #[arg(long, default_value_t = 4)]
        max_degree: usize,
        #[arg(long, default_value_t = 100)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated method names.
        #[arg(long)]
        methods: String,
        #[arg(long, default_value_t = DEFAULT_BUDGET.as_secs_f64())]
        time_limit: f64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write a 0/1 model in LP text format.
    ExportLp {
        instance: PathBuf,
        #[arg(long, value_enum)]
        model: LpModel,
        /// Buffered object ids for the mindist model; defaults to an optimal FVS.
        #[arg(long, value_delimiter = ',')]
        buffered: Option<Vec<u32>>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write the dependency digraph.
    Graph {
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "edges")]
        format: GraphFormat,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write the tour reduction graph as a TSPLIB full matrix.
    ExportTsp {
        instance: PathBuf,
        #[arg(long, default_value_t = 1000.0)]
        scale: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check an instance, and optionally a plan replayed against it.
    Validate {
        instance: PathBuf,
        #[arg(long)]
        plan: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GenMode {
    NoOverlap,
    Overlap,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Auto,
    TspExact,
    TspHeur,
    FvsSingle,
    FvsComplete,
    Greedy,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum LpModel {
    FvsConstraint,
    FvsEnumerate,
    Mindist,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormat {
    Edges,
    Adjacency,
    Dot,
}

enum Failure {
    Validation(String),
    Budget,
    Other(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Other(e.to_string())
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
        Err(Failure::Budget) => {
            eprintln!("engine budget exhausted; output is the best plan found");
            ExitCode::from(3)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), Failure> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Other(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(path: &Path) -> Result<Instance, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Other(format!("{}: {e}", path.display())))?;
    let inst = Instance::from_json(&text).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
    let violations = validate(&inst);
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(Failure::Validation(format!("invalid instance: {}", list.join(", "))));
    }
    Ok(inst)
}

fn engine(seconds: f64) -> Result<Engine, Failure> {
    if !(seconds > 0.0 && seconds.is_finite()) {
        return Err(Failure::Validation(format!("time limit must be positive, got {seconds}")));
    }
    Ok(Engine::from_env(Budget::time(Duration::from_secs_f64(seconds))))
}

fn parse_sizes(spec: &str) -> Result<Vec<usize>, Failure> {
    let bad = || Failure::Validation(format!("bad size list {spec:?}"));
    if let Some((a, b)) = spec.split_once("..") {
        let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        return if a <= b { Ok((a..=b).collect()) } else { Err(bad()) };
    }
    spec.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect()
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Generate { mode, n, seed, avg_degree, max_degree, radius, buffers, unlabeled, output } => {
            let mut inst = match mode {
                GenMode::NoOverlap => generate_no_overlap(n, seed, default_workspace(n), radius)?,
                GenMode::Overlap => {
                    let mut cfg = OverlapConfig::new(n, avg_degree, max_degree, seed);
                    cfg.radius = radius;
                    cfg.buffers = buffers;
                    generate_with_overlap(&cfg)?
                }
            };
            inst.labeled = !unlabeled;
            emit(output.as_deref(), &format!("{}\n", inst.to_json()))
        }
        Cmd::Solve { instance, method, fvs_method, seed, time_limit, output } => {
            let inst = load(&instance)?;
            let e = engine(time_limit)?;
            let report: SolveReport = match method {
                Method::Auto => pipeline::solve(&inst, &e),
                Method::TspExact => pipeline::toro_no_tsp(&inst, TspMode::Exact),
                Method::TspHeur => pipeline::toro_no_tsp(&inst, TspMode::Heuristic),
                Method::FvsSingle => pipeline::toro_fvs_single(&inst, fvs_method, &e),
                Method::FvsComplete => pipeline::toro_fvs_complete(&inst, &e),
                Method::Greedy => pipeline::greedy(&inst),
                Method::Random => pipeline::random(&inst, seed),
            }?;
            emit(output.as_deref(), &format!("{}\n", report.to_json()))?;
            eprintln!(
                "{}: {} actions, distance {:.6}, cost {:.6}{}",
                report.solver_mode,
                report.grasp_count,
                report.distance_term,
                report.total_cost,
                report.fvs_used.as_ref().map_or(String::new(), |f| format!(", buffered {:?}", f.vertices))
            );
            if report.budget_exhausted {
                return Err(Failure::Budget);
            }
            Ok(())
        }
        Cmd::Bench { kind, n, avg_degree, max_degree, instances, seed, methods, time_limit, jobs, output } => {
            let cfg = BenchConfig {
                kind,
                ns: parse_sizes(&n)?,
                avg_degree,
                max_degree,
                instances,
                seed,
                methods: methods.split(',').map(|m| m.trim().to_string()).collect(),
                engine: engine(time_limit)?,
                jobs,
            };
            cfg.validate().map_err(|e| Failure::Validation(e.to_string()))?;
            let rows = bench::run(&cfg)?;
            emit(output.as_deref(), &bench::to_csv(&rows))?;
            let budgeted = rows.iter().filter(|r| r.partial > 0).count();
            if budgeted > 0 {
                eprintln!("{budgeted} rows include budget-limited runs");
                return Err(Failure::Budget);
            }
            Ok(())
        }
        Cmd::ExportLp { instance, model, buffered, output } => {
            let inst = load(&instance)?;
            let g = build_dependency_graph(&inst);
            let e = Engine::default();
            let (m, notes) = match model {
                LpModel::FvsConstraint => (ilp_constraint_model(&g), vec!["fvs ilp-constraint model".to_string()]),
                LpModel::FvsEnumerate => {
                    let m = ilp_enumerate_model(&g, DEFAULT_CYCLE_CAP)
                        .ok_or_else(|| Failure::Other(format!("more than {DEFAULT_CYCLE_CAP} cycles")))?;
                    (m, vec!["fvs ilp-enumerate model".to_string()])
                }
                LpModel::Mindist => {
                    let set: Vec<usize> = match buffered {
                        Some(ids) => ids
                            .iter()
                            .map(|&id| {
                                inst.index_of(id)
                                    .ok_or_else(|| Failure::Validation(format!("unknown object id {id}")))
                            })
                            .collect::<Result<_, _>>()?,
                        None => toro_core::fvs::solve_fvs_default(&g, &e)?.vertices,
                    };
                    let tm = build_mindist_model(&inst, &set)?;
                    let ids: Vec<u32> = tm.buffered.iter().map(|&i| inst.id_of(i)).collect();
                    let notes = vec![
                        format!("mindist model, n={} p={} horizon={}", tm.n, tm.p, tm.horizon),
                        format!("buffered object ids {ids:?}"),
                        format!("variables {}", tm.model.num_vars),
                    ];
                    (tm.model, notes)
                }
            };
            let mut notes = notes;
            if matches!(model, LpModel::FvsConstraint | LpModel::FvsEnumerate) && g.is_acyclic() {
                notes.push("trivial: dependency graph is acyclic".into());
            }
            let refs: Vec<&str> = notes.iter().map(String::as_str).collect();
            emit(output.as_deref(), &export_with_comments(&m, &refs))
        }
        Cmd::Graph { instance, format, output } => {
            let g = build_dependency_graph(&load(&instance)?);
            let text = match format {
                GraphFormat::Edges => g.to_edge_list(),
                GraphFormat::Adjacency => g.to_adjacency(),
                GraphFormat::Dot => g.to_dot(),
            };
            emit(output.as_deref(), &text)
        }
        Cmd::ExportTsp { instance, scale, output } => {
            let inst = load(&instance)?;
            let g = if inst.labeled { build_g_no(&inst)? } else { build_g_uno(&inst)? };
            emit(output.as_deref(), &g.to_tsplib("toro", scale))
        }
        Cmd::Validate { instance, plan } => {
            let inst = load(&instance)?;
            if let Some(p) = plan {
                let text = fs::read_to_string(&p).map_err(|e| Failure::Other(format!("{}: {e}", p.display())))?;
                // accept either a bare plan or a solve report
                let plan: ActionPlan = serde_json::from_str::<SolveReport>(&text)
                    .map(|r| r.plan)
                    .or_else(|_| serde_json::from_str(&text))
                    .map_err(|e| Failure::Validation(format!("{}: {e}", p.display())))?;
                toro_core::instance::plan_cost(&inst, &plan).map_err(|e| Failure::Validation(e.to_string()))?;
                replay(&inst, &plan).map_err(|e| Failure::Validation(e.to_string()))?;
                println!("plan ok: {} actions, distance {:.6}", plan.len(), plan.distance());
            } else {
                println!("instance ok: {} objects, {} buffers", inst.len(), inst.buffers.len());
            }
            Ok(())
        }
    }
}
