//! Benchmark sweeps producing one CSV row per (n, method).

use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::depgraph::{random_digraph, DEFAULT_CYCLE_CAP};
use crate::fvs::{enumerate_optimal_fvs, solve_fvs, FvsMethod};
use crate::ilp::Engine;
use crate::instance::{default_workspace, generate_no_overlap, generate_with_overlap, Instance, OverlapConfig};
use crate::pipeline::{self, PipelineError, SolveReport, TspMode};

pub const CSV_HEADER: &str =
    "kind,n,avg_degree,max_degree,method,instances,mean_time_s,mean_distance,mean_grasps,mean_fvs_size,mean_ratio,mean_count,partial";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchKind {
    /// Bare dependency digraphs; methods are FVS solvers.
    Fvs,
    /// Labeled instances without overlap.
    Labeled,
    /// Unlabeled instances without overlap.
    Unlabeled,
    /// Labeled instances with overlap; methods are the FVS pipelines.
    Overlap,
}

impl FromStr for BenchKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fvs" => Ok(BenchKind::Fvs),
            "labeled" => Ok(BenchKind::Labeled),
            "unlabeled" => Ok(BenchKind::Unlabeled),
            "overlap" => Ok(BenchKind::Overlap),
            _ => Err(format!("unknown bench kind {s:?} (fvs, labeled, unlabeled, overlap)")),
        }
    }
}

impl BenchKind {
    fn name(self) -> &'static str {
        match self {
            BenchKind::Fvs => "fvs",
            BenchKind::Labeled => "labeled",
            BenchKind::Unlabeled => "unlabeled",
            BenchKind::Overlap => "overlap",
        }
    }
}

pub const PLAN_METHODS: [&str; 6] = ["tsp-exact", "tsp-heur", "fvs-single", "fvs-complete", "greedy", "random"];

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub kind: BenchKind,
    pub ns: Vec<usize>,
    pub avg_degree: f64,
    pub max_degree: usize,
    pub instances: usize,
    pub seed: u64,
    /// FVS method names for [`BenchKind::Fvs`], plan method names otherwise.
    pub methods: Vec<String>,
    pub engine: Engine,
    /// Sweep points evaluated concurrently.
    pub jobs: usize,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid bench config: {0}")]
    Config(String),
    #[error("n={n} instance {index}: {source}")]
    Instance { n: usize, index: usize, source: Box<dyn std::error::Error + Send + Sync> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub kind: String,
    pub n: usize,
    pub avg_degree: f64,
    pub max_degree: usize,
    pub method: String,
    pub instances: usize,
    pub mean_time_s: f64,
    pub mean_distance: f64,
    pub mean_grasps: f64,
    pub mean_fvs_size: f64,
    pub mean_ratio: f64,
    pub mean_count: f64,
    /// Runs flagged suboptimal by a budget (or heuristic by design).
    pub partial: usize,
}

impl BenchRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.6},{:.6},{:.4},{:.4},{:.6},{:.4},{}",
            self.kind,
            self.n,
            self.avg_degree,
            self.max_degree,
            self.method,
            self.instances,
            self.mean_time_s,
            self.mean_distance,
            self.mean_grasps,
            self.mean_fvs_size,
            self.mean_ratio,
            self.mean_count,
            self.partial
        )
    }
}

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut s = format!("{CSV_HEADER}\n");
    for r in rows {
        let _ = writeln!(s, "{}", r.csv());
    }
    s
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.instances == 0 || self.ns.is_empty() || self.methods.is_empty() {
            return Err(BenchError::Config("instances, sizes and methods must be non-empty".into()));
        }
        for m in &self.methods {
            let ok = match self.kind {
                BenchKind::Fvs => m.parse::<FvsMethod>().is_ok(),
                _ => PLAN_METHODS.contains(&m.as_str()),
            };
            if !ok {
                return Err(BenchError::Config(format!("method {m:?} does not apply to kind {}", self.kind.name())));
            }
        }
        Ok(())
    }

    fn instance(&self, n: usize, index: usize) -> Result<Instance, BenchError> {
        let seed = self.seed.wrapping_add((n as u64) << 32).wrapping_add(index as u64);
        let wrap = |e: crate::instance::GenerateError| BenchError::Instance { n, index, source: Box::new(e) };
        match self.kind {
            BenchKind::Labeled | BenchKind::Unlabeled => {
                let mut inst = generate_no_overlap(n, seed, default_workspace(n), 0.1).map_err(wrap)?;
                inst.labeled = self.kind == BenchKind::Labeled;
                Ok(inst)
            }
            _ => generate_with_overlap(&OverlapConfig::new(n, self.avg_degree, self.max_degree, seed)).map_err(wrap),
        }
    }
}

#[derive(Default)]
struct Acc {
    time: f64,
    distance: f64,
    grasps: f64,
    fvs: f64,
    ratio: f64,
    count: f64,
    partial: usize,
}

fn run_plan_method(m: &str, inst: &Instance, seed: u64, engine: &Engine) -> Result<SolveReport, PipelineError> {
    match m {
        "tsp-exact" => pipeline::toro_no_tsp(inst, TspMode::Exact),
        "tsp-heur" => pipeline::toro_no_tsp(inst, TspMode::Heuristic),
        "fvs-single" => pipeline::toro_fvs_single(inst, None, engine),
        "fvs-complete" => pipeline::toro_fvs_complete(inst, engine),
        "greedy" => pipeline::greedy(inst),
        "random" => pipeline::random(inst, seed),
        _ => unreachable!("validated"),
    }
}

/// Per-run measurements before averaging.
struct Sample {
    time: f64,
    distance: f64,
    grasps: usize,
    fvs: usize,
    count: usize,
    partial: bool,
}

impl BenchConfig {
    /// Ratios are taken against the first exact method listed, or the first
    /// method when none is exact.
    fn reference(&self) -> usize {
        self.methods
            .iter()
            .position(|m| match self.kind {
                BenchKind::Fvs => m.parse::<FvsMethod>().is_ok_and(FvsMethod::is_exact),
                _ => matches!(m.as_str(), "tsp-exact" | "fvs-complete"),
            })
            .unwrap_or(0)
    }

    fn samples(&self, n: usize, index: usize) -> Result<Vec<Sample>, BenchError> {
        let err = |e: Box<dyn std::error::Error + Send + Sync>| BenchError::Instance { n, index, source: e };
        let mut out = Vec::with_capacity(self.methods.len());
        if self.kind == BenchKind::Fvs {
            let seed = self.seed.wrapping_add((n as u64) << 32).wrapping_add(index as u64);
            let g = random_digraph(n, self.avg_degree, self.max_degree, seed);
            for name in &self.methods {
                let method: FvsMethod = name.parse().expect("validated");
                let t = Instant::now();
                let f = solve_fvs(&g, method, &self.engine, DEFAULT_CYCLE_CAP).map_err(|e| err(Box::new(e)))?;
                let time = t.elapsed().as_secs_f64();
                let count = if method == FvsMethod::IlpEnumerate {
                    enumerate_optimal_fvs(&g, &self.engine, DEFAULT_CYCLE_CAP).map_err(|e| err(Box::new(e)))?.sets.len()
                } else {
                    0
                };
                out.push(Sample {
                    time,
                    distance: 0.0,
                    grasps: 0,
                    fvs: f.len(),
                    count,
                    partial: method.is_exact() && !f.certified_optimal,
                });
            }
        } else {
            let inst = self.instance(n, index)?;
            for name in &self.methods {
                let r = run_plan_method(name, &inst, self.seed.wrapping_add(index as u64), &self.engine)
                    .map_err(|e| err(Box::new(e)))?;
                out.push(Sample {
                    time: r.wall_time_s,
                    distance: r.distance_term,
                    grasps: r.grasp_count,
                    fvs: r.fvs_used.as_ref().map_or(0, |f| f.len()),
                    count: r.fvs_candidates.unwrap_or(0),
                    partial: r.budget_exhausted,
                });
            }
        }
        Ok(out)
    }

    fn point(&self, n: usize) -> Result<Vec<BenchRow>, BenchError> {
        let reference = self.reference();
        let mut acc: Vec<Acc> = self.methods.iter().map(|_| Acc::default()).collect();
        for index in 0..self.instances {
            let samples = self.samples(n, index)?;
            let base = &samples[reference];
            let base = if self.kind == BenchKind::Fvs { base.fvs as f64 } else { base.distance };
            for (a, s) in acc.iter_mut().zip(&samples) {
                let value = if self.kind == BenchKind::Fvs { s.fvs as f64 } else { s.distance };
                a.time += s.time;
                a.distance += s.distance;
                a.grasps += s.grasps as f64;
                a.fvs += s.fvs as f64;
                a.ratio += if base == 0.0 { 1.0 } else { value / base };
                a.count += s.count as f64;
                a.partial += usize::from(s.partial);
            }
        }
        let k = self.instances as f64;
        Ok(acc
            .into_iter()
            .zip(&self.methods)
            .map(|(a, name)| BenchRow {
                kind: self.kind.name().into(),
                n,
                avg_degree: self.avg_degree,
                max_degree: self.max_degree,
                method: name.clone(),
                instances: self.instances,
                mean_time_s: a.time / k,
                mean_distance: a.distance / k,
                mean_grasps: a.grasps / k,
                mean_fvs_size: a.fvs / k,
                mean_ratio: a.ratio / k,
                mean_count: a.count / k,
                partial: a.partial,
            })
            .collect())
    }
}

/// Runs every sweep point, `cfg.jobs` at a time; rows come back in sweep
/// order.
pub fn run(cfg: &BenchConfig) -> Result<Vec<BenchRow>, BenchError> {
    cfg.validate()?;
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<Vec<BenchRow>, BenchError>>>> =
        Mutex::new((0..cfg.ns.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..cfg.jobs.clamp(1, cfg.ns.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&n) = cfg.ns.get(i) else { break };
                let r = cfg.point(n);
                results.lock().expect("no worker panics while holding the lock")[i] = Some(r);
            });
        }
    });
    let mut rows = Vec::new();
    for r in results.into_inner().expect("workers joined") {
        rows.extend(r.expect("every point ran")?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(kind: BenchKind, methods: &[&str]) -> BenchConfig {
        BenchConfig {
            kind,
            ns: vec![4, 5],
            avg_degree: 1.5,
            max_degree: 3,
            instances: 3,
            seed: 9,
            methods: methods.iter().map(|s| s.to_string()).collect(),
            engine: Engine::default(),
            jobs: 2,
        }
    }

    #[test]
    fn labeled_rows() {
        let rows = run(&cfg(BenchKind::Labeled, &["tsp-exact", "random"])).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].mean_ratio, 1.0);
        assert!(rows[1].mean_ratio >= 1.0);
        assert_eq!(rows[0].partial, 0);
        assert_eq!(rows[0].n, 4);
        assert_eq!(rows[3].n, 5);
        let csv = to_csv(&rows);
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.lines().all(|l| l.split(',').count() == 13));
    }

    #[test]
    fn fvs_rows() {
        let rows = run(&cfg(BenchKind::Fvs, &["ilp-constraint", "ilp-enumerate", "msch"])).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[1].mean_ratio, 1.0);
        assert!(rows[1].mean_count >= 1.0 || rows[1].mean_fvs_size == 0.0);
    }

    #[test]
    fn rejects_mismatched_methods() {
        assert!(run(&cfg(BenchKind::Fvs, &["greedy"])).is_err());
        assert!(run(&cfg(BenchKind::Labeled, &["msch"])).is_err());
    }
}
