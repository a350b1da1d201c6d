//! End-to-end solvers returning a [`SolveReport`].

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::depgraph::{build_dependency_graph, DEFAULT_CYCLE_CAP};
use crate::fvs::{enumerate_optimal_fvs, solve_fvs, solve_fvs_default, FeedbackVertexSet, FvsError, FvsMethod};
use crate::ilp::Engine;
use crate::instance::{plan_cost, ActionPlan, Instance};
use crate::mindist::{build_mindist_model, greedy_plan, random_plan, solve_mindist, GreedyError, MinDistError};
pub use crate::tsp::TspMode;
use crate::tsp::{build_g_no, build_g_uno, retrieve_actions, solve_tour, TspError, HELD_KARP_LIMIT, UNLABELED_EXACT_LIMIT};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("instance has start/goal overlaps; use the FVS pipeline")]
    Overlap,
    #[error("unlabeled instances with overlaps are not supported")]
    UnlabeledOverlap,
    #[error("{need} buffers needed, instance has {have}")]
    NotEnoughBuffers { need: usize, have: usize },
    #[error(transparent)]
    Tsp(#[from] TspError),
    #[error(transparent)]
    Fvs(#[from] FvsError),
    #[error(transparent)]
    MinDist(#[from] MinDistError),
    #[error(transparent)]
    Greedy(#[from] GreedyError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub plan: ActionPlan,
    pub grasp_count: usize,
    pub total_cost: f64,
    pub distance_term: f64,
    /// Buffered objects by index, when an FVS pipeline ran.
    pub fvs_used: Option<FeedbackVertexSet>,
    /// Number of optimal FVSs compared by the complete pipeline.
    pub fvs_candidates: Option<usize>,
    pub solver_mode: String,
    /// False when a heuristic ran or a budget cut the search short.
    pub optimal: bool,
    /// An engine budget ran out and an incumbent was returned.
    pub budget_exhausted: bool,
    pub wall_time_s: f64,
}

impl SolveReport {
    fn new(inst: &Instance, plan: ActionPlan, mode: impl Into<String>, optimal: bool, started: Instant) -> Self {
        let total_cost = plan_cost(inst, &plan).expect("plans built from moves are consistent");
        SolveReport {
            grasp_count: plan.len(),
            distance_term: plan.distance(),
            total_cost,
            plan,
            fvs_used: None,
            fvs_candidates: None,
            solver_mode: mode.into(),
            optimal,
            budget_exhausted: false,
            wall_time_s: started.elapsed().as_secs_f64(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// Overlap-free instances: one direct move per object, ordered by a tour of
/// the labeled or unlabeled reduction graph.
pub fn toro_no_tsp(inst: &Instance, mode: TspMode) -> Result<SolveReport, PipelineError> {
    let started = Instant::now();
    if inst.has_overlap() {
        return Err(PipelineError::Overlap);
    }
    let g = if inst.labeled { build_g_no(inst)? } else { build_g_uno(inst)? };
    let tour = solve_tour(&g, mode)?;
    let plan = retrieve_actions(&g, &tour, inst)?;
    let name = match mode {
        TspMode::Exact => "tsp-exact",
        TspMode::Heuristic => "tsp-heur",
    };
    Ok(SolveReport::new(inst, plan, name, mode == TspMode::Exact, started))
}

/// Exact when the instance is small enough, otherwise heuristic.
pub fn auto_tsp_mode(inst: &Instance) -> TspMode {
    let limit = if inst.labeled { HELD_KARP_LIMIT - 1 } else { UNLABELED_EXACT_LIMIT };
    if inst.len() <= limit {
        TspMode::Exact
    } else {
        TspMode::Heuristic
    }
}

fn check_fvs_preconditions(inst: &Instance) -> Result<(), PipelineError> {
    if !inst.labeled && inst.has_overlap() {
        return Err(PipelineError::UnlabeledOverlap);
    }
    Ok(())
}

fn run_mindist(
    inst: &Instance,
    fvs: &FeedbackVertexSet,
    engine: &Engine,
) -> Result<(ActionPlan, bool), PipelineError> {
    if fvs.len() > inst.buffers.len() {
        return Err(PipelineError::NotEnoughBuffers { need: fvs.len(), have: inst.buffers.len() });
    }
    let m = build_mindist_model(inst, &fvs.vertices)?;
    let sol = solve_mindist(inst, &m, engine)?;
    Ok((sol.plan, sol.optimal))
}

/// Buffers one FVS (found by `method`, or the default exact method with
/// heuristic fallback) and finds the shortest schedule for it.
pub fn toro_fvs_single(
    inst: &Instance,
    method: Option<FvsMethod>,
    engine: &Engine,
) -> Result<SolveReport, PipelineError> {
    let started = Instant::now();
    check_fvs_preconditions(inst)?;
    let g = build_dependency_graph(inst);
    let fvs = match method {
        Some(m) => solve_fvs(&g, m, engine, DEFAULT_CYCLE_CAP)?,
        None => solve_fvs_default(&g, engine)?,
    };
    let exact = method.is_none_or(FvsMethod::is_exact);
    let (plan, optimal) = run_mindist(inst, &fvs, engine)?;
    let mut r = SolveReport::new(inst, plan, "fvs-single", optimal && fvs.certified_optimal, started);
    r.budget_exhausted = !optimal || (exact && !fvs.certified_optimal);
    r.fvs_used = Some(fvs);
    Ok(r)
}

/// Shortest schedule over every minimum FVS; ties keep the first set in
/// lexicographic order.
pub fn toro_fvs_complete(inst: &Instance, engine: &Engine) -> Result<SolveReport, PipelineError> {
    let started = Instant::now();
    check_fvs_preconditions(inst)?;
    let g = build_dependency_graph(inst);
    let all = enumerate_optimal_fvs(&g, engine, DEFAULT_CYCLE_CAP)?;
    let candidates = all.sets.len();
    let mut optimal = all.complete;
    let mut best: Option<(ActionPlan, FeedbackVertexSet)> = None;
    for fvs in all.sets {
        let (plan, opt) = run_mindist(inst, &fvs, engine)?;
        optimal &= opt;
        if best.as_ref().is_none_or(|(b, _)| plan.distance() < b.distance() - 1e-9) {
            best = Some((plan, fvs));
        }
    }
    let (plan, fvs) = best.expect("every digraph has a minimum FVS");
    let mut r = SolveReport::new(inst, plan, "fvs-complete", optimal, started);
    r.budget_exhausted = !optimal;
    r.fvs_used = Some(fvs);
    r.fvs_candidates = Some(candidates);
    Ok(r)
}

pub fn greedy(inst: &Instance) -> Result<SolveReport, PipelineError> {
    let started = Instant::now();
    check_fvs_preconditions(inst)?;
    Ok(SolveReport::new(inst, greedy_plan(inst)?, "greedy", false, started))
}

pub fn random(inst: &Instance, seed: u64) -> Result<SolveReport, PipelineError> {
    let started = Instant::now();
    Ok(SolveReport::new(inst, random_plan(inst, seed)?, "random", false, started))
}

/// Dispatches on overlap: the tour pipeline when there is none, the
/// single-FVS pipeline otherwise.
pub fn solve(inst: &Instance, engine: &Engine) -> Result<SolveReport, PipelineError> {
    if inst.has_overlap() {
        toro_fvs_single(inst, None, engine)
    } else {
        toro_no_tsp(inst, auto_tsp_mode(inst))
    }
}
