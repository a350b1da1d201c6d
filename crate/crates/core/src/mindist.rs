//! Minimum-travel schedules with a fixed buffered set, as a time-expanded
//! 0/1 program, plus the greedy and random baselines.
//!
//! With `p` buffered objects every plan has exactly `T = n + p` actions.
//! Step `t` (1-based) performs one action; occupancy variables describe the
//! configuration after step `t`, and transition variables between steps `t`
//! and `t + 1` carry the empty-handed travel from the release point of one
//! action to the pick point of the next.

use std::collections::BTreeMap;
use std::time::Duration;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::depgraph::{build_dependency_graph, movable_order};
use crate::ilp::{Budget, Engine, EngineError, IlpModel, Relation, Sense, SolveStatus};
use crate::instance::{ActionPlan, Instance, Location, Move};

pub const DEFAULT_BUDGET: Duration = Duration::from_secs(10);

pub fn default_engine() -> Engine {
    Engine::from_env(Budget::time(DEFAULT_BUDGET))
}

#[derive(Debug, Error)]
pub enum MinDistError {
    #[error("{need} buffers needed, instance has {have}")]
    NotEnoughBuffers { need: usize, have: usize },
    #[error("buffered set does not break every dependency cycle")]
    NotFeedbackSet,
    #[error("object index {0} out of range")]
    UnknownObject(usize),
    #[error("engine reported the model infeasible")]
    Infeasible,
    #[error("engine stopped without a feasible schedule")]
    NoIncumbent,
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("instance has start/goal overlaps; random plans need an overlap-free instance")]
    Overlapping,
}

/// Manipulator positions in the time expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Start(usize),
    Goal(usize),
    /// Buffered object `j` (position in the buffered list) in buffer `k`.
    Buf(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionVar {
    pub var: usize,
    pub pick: Node,
    pub place: Node,
    pub mv: Move,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub var: usize,
    pub from: Node,
    pub to: Node,
}

#[derive(Debug, Clone)]
pub struct TimeExpandedModel {
    pub n: usize,
    pub p: usize,
    pub horizon: usize,
    /// Object indices of the buffered set, ascending.
    pub buffered: Vec<usize>,
    /// Occupancy variables for `t = 0..=T`.
    pub s: Vec<Vec<usize>>,
    pub g: Vec<Vec<usize>>,
    /// `b[t][j][k]`.
    pub b: Vec<Vec<Vec<usize>>>,
    /// `actions[t - 1]` lists the candidates for step `t`.
    pub actions: Vec<Vec<ActionVar>>,
    pub first: Vec<usize>,
    pub last: Vec<usize>,
    /// `transitions[t - 1]` connects steps `t` and `t + 1`.
    pub transitions: Vec<Vec<Transition>>,
    pub model: IlpModel,
}

/// Variable count for `n` objects with `p` buffered, in closed form.
pub fn variable_count(n: usize, p: usize) -> usize {
    let t = n + p;
    let q = n - p;
    let nodes = (2 * n + p * p) * (t + 1);
    let actions = (q + 2 * p * p) * t;
    let transitions = t.saturating_sub(1) * (n * (n - 1) + 2 * p * p * (n - 1) + p * p * (p * p - p + 1));
    nodes + actions + 2 * n + transitions
}

impl TimeExpandedModel {
    /// Assignment realizing `moves`, or `None` if they do not fit the model.
    pub fn encode(&self, moves: &[Move]) -> Option<Vec<bool>> {
        if moves.len() != self.horizon {
            return None;
        }
        let mut x = vec![false; self.model.num_vars];
        let mut s_occ = vec![true; self.n];
        let mut g_occ = vec![false; self.n];
        let mut b_occ = vec![vec![false; self.p]; self.p];
        let set_nodes = |x: &mut Vec<bool>, t: usize, s_occ: &[bool], g_occ: &[bool], b_occ: &[Vec<bool>]| {
            for i in 0..self.n {
                x[self.s[t][i]] = s_occ[i];
                x[self.g[t][i]] = g_occ[i];
            }
            for j in 0..self.p {
                for k in 0..self.p {
                    x[self.b[t][j][k]] = b_occ[j][k];
                }
            }
        };
        set_nodes(&mut x, 0, &s_occ, &g_occ, &b_occ);
        let mut prev: Option<Node> = None;
        for (t, mv) in moves.iter().enumerate() {
            let a = self.actions[t].iter().find(|a| a.mv == *mv)?;
            x[a.var] = true;
            match prev {
                None => match a.pick {
                    Node::Start(i) => x[self.first[i]] = true,
                    _ => return None,
                },
                Some(from) => {
                    let tr = self.transitions[t - 1].iter().find(|e| e.from == from && e.to == a.pick)?;
                    x[tr.var] = true;
                }
            }
            match a.pick {
                Node::Start(i) => s_occ[i] = false,
                Node::Buf(j, k) => b_occ[j][k] = false,
                Node::Goal(_) => return None,
            }
            match a.place {
                Node::Goal(i) => g_occ[i] = true,
                Node::Buf(j, k) => b_occ[j][k] = true,
                Node::Start(_) => return None,
            }
            set_nodes(&mut x, t + 1, &s_occ, &g_occ, &b_occ);
            prev = Some(a.place);
        }
        if let Some(Node::Goal(i)) = prev {
            x[self.last[i]] = true;
        }
        Some(x)
    }

    /// Moves selected by an assignment, in step order.
    pub fn decode(&self, x: &[bool]) -> Vec<Move> {
        self.actions
            .iter()
            .filter_map(|step| step.iter().find(|a| x[a.var]).map(|a| a.mv))
            .collect()
    }
}

/// Builds the time-expanded model for moving every object with `buffered`
/// (object indices) routed through the first `p` buffers of `inst`.
pub fn build_mindist_model(inst: &Instance, buffered: &[usize]) -> Result<TimeExpandedModel, MinDistError> {
    let n = inst.len();
    let mut buffered = buffered.to_vec();
    buffered.sort_unstable();
    buffered.dedup();
    if let Some(&bad) = buffered.iter().find(|&&i| i >= n) {
        return Err(MinDistError::UnknownObject(bad));
    }
    let p = buffered.len();
    if p > inst.buffers.len() {
        return Err(MinDistError::NotEnoughBuffers { need: p, have: inst.buffers.len() });
    }
    if movable_order(&build_dependency_graph(inst).without(&buffered)).is_none() {
        return Err(MinDistError::NotFeedbackSet);
    }
    let horizon = n + p;
    let slot = |j: usize| buffered[j];
    let unbuffered: Vec<usize> = (0..n).filter(|i| buffered.binary_search(i).is_err()).collect();

    let mut m = IlpModel::new(Sense::Minimize);
    let pose = |v: Node| match v {
        Node::Start(i) => inst.objects[i].start,
        Node::Goal(i) => inst.objects[i].goal,
        Node::Buf(_, k) => inst.buffers[k],
    };

    let mut s = Vec::with_capacity(horizon + 1);
    let mut g = Vec::with_capacity(horizon + 1);
    let mut b = Vec::with_capacity(horizon + 1);
    for t in 0..=horizon {
        s.push((0..n).map(|i| m.add_var(format!("s_{i}_{t}"), 0.0)).collect::<Vec<_>>());
        g.push((0..n).map(|i| m.add_var(format!("g_{i}_{t}"), 0.0)).collect::<Vec<_>>());
        b.push(
            (0..p)
                .map(|j| (0..p).map(|k| m.add_var(format!("b_{}_{k}_{t}", slot(j)), 0.0)).collect())
                .collect::<Vec<Vec<_>>>(),
        );
    }

    let mut actions = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        let mut step = Vec::new();
        for &i in &unbuffered {
            let (pick, place) = (Node::Start(i), Node::Goal(i));
            let var = m.add_var(format!("direct_{i}_{t}"), pose(pick).dist(pose(place)));
            step.push(ActionVar { var, pick, place, mv: Move::new(i, Location::Start(i), Location::Goal(i)) });
        }
        for j in 0..p {
            let i = slot(j);
            for k in 0..p {
                let (pick, place) = (Node::Start(i), Node::Buf(j, k));
                let var = m.add_var(format!("put_{i}_{k}_{t}"), pose(pick).dist(pose(place)));
                step.push(ActionVar { var, pick, place, mv: Move::new(i, Location::Start(i), Location::Buffer(k)) });
            }
        }
        for j in 0..p {
            let i = slot(j);
            for k in 0..p {
                let (pick, place) = (Node::Buf(j, k), Node::Goal(i));
                let var = m.add_var(format!("take_{i}_{k}_{t}"), pose(pick).dist(pose(place)));
                step.push(ActionVar { var, pick, place, mv: Move::new(i, Location::Buffer(k), Location::Goal(i)) });
            }
        }
        actions.push(step);
    }
    let first: Vec<usize> =
        (0..n).map(|i| m.add_var(format!("first_{i}"), inst.rest_start.dist(inst.objects[i].start))).collect();
    let last: Vec<usize> =
        (0..n).map(|i| m.add_var(format!("last_{i}"), inst.objects[i].goal.dist(inst.rest_goal))).collect();

    let object_of = |v: Node| match v {
        Node::Start(i) | Node::Goal(i) => i,
        Node::Buf(j, _) => slot(j),
    };
    let mut place_nodes: Vec<Node> = (0..n).map(Node::Goal).collect();
    let mut pick_nodes: Vec<Node> = (0..n).map(Node::Start).collect();
    for j in 0..p {
        for k in 0..p {
            place_nodes.push(Node::Buf(j, k));
            pick_nodes.push(Node::Buf(j, k));
        }
    }
    let mut transitions = Vec::with_capacity(horizon.saturating_sub(1));
    for t in 1..horizon {
        let mut gap = Vec::new();
        for &from in &place_nodes {
            for &to in &pick_nodes {
                let allowed = match (from, to) {
                    // buffer k still holds j, so only j itself can be taken from it
                    (Node::Buf(j, k), Node::Buf(a, bk)) => !(a != j && bk == k),
                    _ => object_of(from) != object_of(to),
                };
                if allowed {
                    let name = format!("e_{t}_{}_{}", node_name(from, &buffered), node_name(to, &buffered));
                    let var = m.add_var(name, pose(from).dist(pose(to)));
                    gap.push(Transition { var, from, to });
                }
            }
        }
        transitions.push(gap);
    }

    let eq = |m: &mut IlpModel, terms: Vec<(usize, f64)>, rhs: f64| m.add_constraint(terms, Relation::Eq, rhs);
    // boundary conditions
    for i in 0..n {
        eq(&mut m, vec![(s[0][i], 1.0)], 1.0);
        eq(&mut m, vec![(g[0][i], 1.0)], 0.0);
        eq(&mut m, vec![(s[horizon][i], 1.0)], 0.0);
        eq(&mut m, vec![(g[horizon][i], 1.0)], 1.0);
    }
    for j in 0..p {
        for k in 0..p {
            eq(&mut m, vec![(b[0][j][k], 1.0)], 0.0);
            eq(&mut m, vec![(b[horizon][j][k], 1.0)], 0.0);
        }
    }
    if horizon > 0 {
        // one action per step
        for step in &actions {
            eq(&mut m, step.iter().map(|a| (a.var, 1.0)).collect(), 1.0);
        }
        // leaving s_M and arriving at g_M
        for i in 0..n {
            let mut terms = vec![(first[i], 1.0)];
            terms.extend(actions[0].iter().filter(|a| a.pick == Node::Start(i)).map(|a| (a.var, -1.0)));
            eq(&mut m, terms, 0.0);
            let mut terms = vec![(last[i], 1.0)];
            terms.extend(actions[horizon - 1].iter().filter(|a| a.place == Node::Goal(i)).map(|a| (a.var, -1.0)));
            eq(&mut m, terms, 0.0);
        }
        eq(&mut m, first.iter().map(|&v| (v, 1.0)).collect(), 1.0);
        eq(&mut m, last.iter().map(|&v| (v, 1.0)).collect(), 1.0);
    }
    for t in 1..horizon {
        let gap = &transitions[t - 1];
        // flow: a release at t continues to exactly one pick at t + 1
        for &x in &place_nodes {
            let mut terms: Vec<(usize, f64)> =
                actions[t - 1].iter().filter(|a| a.place == x).map(|a| (a.var, 1.0)).collect();
            terms.extend(gap.iter().filter(|e| e.from == x).map(|e| (e.var, -1.0)));
            eq(&mut m, terms, 0.0);
        }
        for &y in &pick_nodes {
            let into: Vec<(usize, f64)> = gap.iter().filter(|e| e.to == y).map(|e| (e.var, 1.0)).collect();
            let mut terms = into.clone();
            terms.extend(actions[t].iter().filter(|a| a.pick == y).map(|a| (a.var, -1.0)));
            eq(&mut m, terms, 0.0);
            // vacancy: never travel to an empty pick point
            let occ = match y {
                Node::Start(i) => s[t][i],
                Node::Buf(j, k) => b[t][j][k],
                Node::Goal(_) => unreachable!(),
            };
            let mut terms = into;
            terms.push((occ, -1.0));
            m.add_constraint(terms, Relation::Le, 0.0);
        }
    }
    // occupancy updates
    for t in 1..=horizon {
        let step = &actions[t - 1];
        for i in 0..n {
            let mut terms = vec![(s[t][i], 1.0), (s[t - 1][i], -1.0)];
            terms.extend(step.iter().filter(|a| a.pick == Node::Start(i)).map(|a| (a.var, 1.0)));
            eq(&mut m, terms, 0.0);
            let mut terms = vec![(g[t][i], 1.0), (g[t - 1][i], -1.0)];
            terms.extend(step.iter().filter(|a| a.place == Node::Goal(i)).map(|a| (a.var, -1.0)));
            eq(&mut m, terms, 0.0);
        }
        for j in 0..p {
            for k in 0..p {
                let here = Node::Buf(j, k);
                let mut terms = vec![(b[t][j][k], 1.0), (b[t - 1][j][k], -1.0)];
                terms.extend(step.iter().filter(|a| a.place == here).map(|a| (a.var, -1.0)));
                terms.extend(step.iter().filter(|a| a.pick == here).map(|a| (a.var, 1.0)));
                eq(&mut m, terms, 0.0);
            }
        }
    }
    // buffer capacity and start/goal conflicts
    for t in 0..=horizon {
        for k in 0..p {
            m.add_constraint((0..p).map(|j| (b[t][j][k], 1.0)).collect(), Relation::Le, 1.0);
        }
        for i in 0..n {
            for l in 0..n {
                if i != l && inst.start_hits_goal(i, l) {
                    m.add_constraint(vec![(s[t][i], 1.0), (g[t][l], 1.0)], Relation::Le, 1.0);
                }
            }
        }
    }
    if n == 0 {
        m.objective_constant = inst.rest_start.dist(inst.rest_goal);
    }

    Ok(TimeExpandedModel { n, p, horizon, buffered, s, g, b, actions, first, last, transitions, model: m })
}

fn node_name(v: Node, buffered: &[usize]) -> String {
    match v {
        Node::Start(i) => format!("s{i}"),
        Node::Goal(i) => format!("g{i}"),
        Node::Buf(j, k) => format!("b{}x{k}", buffered[j]),
    }
}

/// Puts every buffered object away first, then moves the rest in dependency
/// order, then brings the buffered objects home.
pub fn staged_schedule(inst: &Instance, buffered: &[usize]) -> Option<Vec<Move>> {
    let order = movable_order(&build_dependency_graph(inst).without(buffered))?;
    let mut moves: Vec<Move> =
        buffered.iter().enumerate().map(|(k, &i)| Move::new(i, Location::Start(i), Location::Buffer(k))).collect();
    moves.extend(
        order
            .into_iter()
            .filter(|i| !buffered.contains(i))
            .map(|i| Move::new(i, Location::Start(i), Location::Goal(i))),
    );
    moves.extend(buffered.iter().enumerate().map(|(k, &i)| Move::new(i, Location::Buffer(k), Location::Goal(i))));
    Some(moves)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BufferUse {
    pub buffer: usize,
    /// Steps (1-based) of the put-down and the final placement.
    pub to_buffer: usize,
    pub to_goal: usize,
}

/// Buffer usage keyed by object id.
pub type BufferAssignment = BTreeMap<u32, BufferUse>;

pub fn buffer_assignment(inst: &Instance, moves: &[Move]) -> BufferAssignment {
    let mut out = BufferAssignment::new();
    for (t, mv) in moves.iter().enumerate() {
        if let Location::Buffer(k) = mv.to {
            out.insert(inst.id_of(mv.object), BufferUse { buffer: k, to_buffer: t + 1, to_goal: 0 });
        }
        if let Location::Buffer(_) = mv.from {
            if let Some(u) = out.get_mut(&inst.id_of(mv.object)) {
                u.to_goal = t + 1;
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct MinDistSolution {
    pub plan: ActionPlan,
    pub buffers: BufferAssignment,
    pub objective: f64,
    /// False when the engine budget ran out and the incumbent is returned.
    pub optimal: bool,
    pub nodes_explored: u64,
}

pub fn solve_mindist(
    inst: &Instance,
    m: &TimeExpandedModel,
    engine: &Engine,
) -> Result<MinDistSolution, MinDistError> {
    let warm = staged_schedule(inst, &m.buffered).and_then(|mv| m.encode(&mv));
    let sol = engine.solve_with_start(&m.model, warm.as_deref())?;
    let x = match (sol.status, sol.assignment) {
        (SolveStatus::Infeasible, _) => return Err(MinDistError::Infeasible),
        (_, None) => return Err(MinDistError::NoIncumbent),
        (_, Some(x)) => x,
    };
    let moves = m.decode(&x);
    Ok(MinDistSolution {
        buffers: buffer_assignment(inst, &moves),
        plan: ActionPlan::from_moves(inst, moves),
        objective: m.model.evaluate(&x),
        optimal: sol.status == SolveStatus::Optimal,
        nodes_explored: sol.nodes_explored,
    })
}

#[derive(Debug, Error, PartialEq)]
pub enum GreedyError {
    #[error("no free buffer while clearing the goal of object {0}")]
    BufferExhausted(u32),
}

/// Takes the lowest-index unfinished object, parks every object still on a
/// start that overlaps its goal in the lowest free buffer, then places it.
pub fn greedy_plan(inst: &Instance) -> Result<ActionPlan, GreedyError> {
    let n = inst.len();
    let mut at: Vec<Location> = (0..n).map(Location::Start).collect();
    let mut free = vec![true; inst.buffers.len()];
    let mut moves = Vec::new();
    for o in 0..n {
        for blocker in 0..n {
            if blocker != o && at[blocker] == Location::Start(blocker) && inst.start_hits_goal(blocker, o) {
                let k = free.iter().position(|&f| f).ok_or(GreedyError::BufferExhausted(inst.id_of(o)))?;
                free[k] = false;
                moves.push(Move::new(blocker, at[blocker], Location::Buffer(k)));
                at[blocker] = Location::Buffer(k);
            }
        }
        if let Location::Buffer(k) = at[o] {
            free[k] = true;
        }
        moves.push(Move::new(o, at[o], Location::Goal(o)));
        at[o] = Location::Goal(o);
    }
    Ok(ActionPlan::from_moves(inst, moves))
}

/// A uniformly random order of direct moves; in the unlabeled case starts
/// are also matched to goals at random.
pub fn random_plan(inst: &Instance, seed: u64) -> Result<ActionPlan, MinDistError> {
    if inst.has_overlap() {
        return Err(MinDistError::Overlapping);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..inst.len()).collect();
    order.shuffle(&mut rng);
    let mut goals = order.clone();
    if !inst.labeled {
        goals.shuffle(&mut rng);
    }
    let moves = order.iter().zip(&goals).map(|(&i, &g)| Move::new(i, Location::Start(i), Location::Goal(g)));
    Ok(ActionPlan::from_moves(inst, moves.collect::<Vec<_>>()))
}
