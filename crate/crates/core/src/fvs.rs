//! Minimum feedback vertex sets of dependency digraphs.
//!
//! Every method first splits the graph into strongly connected components and
//! solves each nontrivial one on its own; the union of per-component sets is a
//! feedback vertex set of the whole graph, and a minimum one when each part is.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::depgraph::{enumerate_simple_cycles, movable_order, scc, DependencyDigraph, DEFAULT_CYCLE_CAP};
use crate::ilp::{Engine, EngineError, IlpModel, Relation, Sense, SolveStatus};

/// Largest graph [`fvs_brute_force`] accepts.
pub const BRUTE_FORCE_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FvsMethod {
    BruteForce,
    IlpConstraint,
    IlpEnumerate,
    Msch,
    Mch,
    Mdh,
}

impl FvsMethod {
    pub const ALL: [FvsMethod; 6] = [
        FvsMethod::BruteForce,
        FvsMethod::IlpConstraint,
        FvsMethod::IlpEnumerate,
        FvsMethod::Msch,
        FvsMethod::Mch,
        FvsMethod::Mdh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FvsMethod::BruteForce => "brute-force",
            FvsMethod::IlpConstraint => "ilp-constraint",
            FvsMethod::IlpEnumerate => "ilp-enumerate",
            FvsMethod::Msch => "msch",
            FvsMethod::Mch => "mch",
            FvsMethod::Mdh => "mdh",
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, FvsMethod::BruteForce | FvsMethod::IlpConstraint | FvsMethod::IlpEnumerate)
    }
}

impl fmt::Display for FvsMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FvsMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FvsMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown FVS method `{s}`"))
    }
}

#[derive(Debug, Error)]
pub enum FvsError {
    #[error("brute force is limited to {BRUTE_FORCE_LIMIT} vertices, graph has {0}")]
    SizeLimit(usize),
    #[error("more than {0} simple cycles; use ilp-constraint instead")]
    CycleCapExceeded(usize),
    #[error("vertices {0:?} do not break every cycle")]
    NotFeedbackSet(Vec<usize>),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Vertices whose removal leaves the source graph acyclic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackVertexSet {
    /// Ascending vertex indices.
    pub vertices: Vec<usize>,
    /// Proven minimum cardinality.
    pub certified_optimal: bool,
}

impl FeedbackVertexSet {
    /// Checks that `vertices` breaks every cycle of `g`.
    pub fn new(g: &DependencyDigraph, mut vertices: Vec<usize>, certified_optimal: bool) -> Result<Self, FvsError> {
        vertices.sort_unstable();
        vertices.dedup();
        if !g.without(&vertices).is_acyclic() {
            return Err(FvsError::NotFeedbackSet(vertices));
        }
        Ok(FeedbackVertexSet { vertices, certified_optimal })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }
}

/// Runs `method` on each nontrivial component and unions the results.
pub fn solve_fvs(
    g: &DependencyDigraph,
    method: FvsMethod,
    engine: &Engine,
    cycle_cap: usize,
) -> Result<FeedbackVertexSet, FvsError> {
    match method {
        FvsMethod::BruteForce => fvs_brute_force(g),
        FvsMethod::IlpConstraint => fvs_ilp_constraint(g, engine),
        FvsMethod::IlpEnumerate => fvs_ilp_enumerate(g, engine, cycle_cap),
        FvsMethod::Msch => fvs_msch(g, cycle_cap),
        FvsMethod::Mch => fvs_mch(g),
        FvsMethod::Mdh => fvs_mdh(g),
    }
}

/// Exact by default, falling back to MSCH and then MCH when cycle
/// enumeration would exceed the cap.
pub fn solve_fvs_default(g: &DependencyDigraph, engine: &Engine) -> Result<FeedbackVertexSet, FvsError> {
    match fvs_ilp_constraint(g, engine) {
        Ok(f) => Ok(f),
        Err(FvsError::Engine(_)) => match fvs_msch(g, DEFAULT_CYCLE_CAP) {
            Err(FvsError::CycleCapExceeded(_)) => fvs_mch(g),
            r => r,
        },
        Err(e) => Err(e),
    }
}

/// Applies `f` to every nontrivial strongly connected component (relabeled
/// to `0..k`) and maps the parts back.
fn per_component<F>(g: &DependencyDigraph, mut f: F) -> Result<FeedbackVertexSet, FvsError>
where
    F: FnMut(&DependencyDigraph) -> Result<(Vec<usize>, bool), FvsError>,
{
    let mut all = Vec::new();
    let mut certified = true;
    for comp in scc(g).nontrivial() {
        let (sub, map) = g.induced(comp);
        let (part, cert) = f(&sub)?;
        certified &= cert;
        all.extend(part.into_iter().map(|v| map[v]));
    }
    FeedbackVertexSet::new(g, all, certified)
}

/// Minimum FVS by subset enumeration in increasing size; the
/// lexicographically smallest among minima.
pub fn fvs_brute_force(g: &DependencyDigraph) -> Result<FeedbackVertexSet, FvsError> {
    if g.n() > BRUTE_FORCE_LIMIT {
        return Err(FvsError::SizeLimit(g.n()));
    }
    per_component(g, |sub| Ok((brute_force_component(sub), true)))
}

fn brute_force_component(g: &DependencyDigraph) -> Vec<usize> {
    let n = g.n();
    for size in 0..=n {
        // Combinations in lexicographic order.
        let mut c: Vec<usize> = (0..size).collect();
        loop {
            if g.without(&c).is_acyclic() {
                return c;
            }
            let Some(i) = (0..size).rev().find(|&i| c[i] < n - size + i) else { break };
            c[i] += 1;
            for j in i + 1..size {
                c[j] = c[j - 1] + 1;
            }
        }
    }
    unreachable!("the full vertex set is a feedback vertex set")
}

/// Node `2i` is the head side of vertex `i`, `2i + 1` its tail side.
fn split_arcs(g: &DependencyDigraph) -> Vec<(usize, usize)> {
    let mut arcs: Vec<(usize, usize)> = (0..g.n()).map(|i| (2 * i, 2 * i + 1)).collect();
    arcs.extend(g.arcs().into_iter().map(|(i, j)| (2 * i + 1, 2 * j)));
    arcs
}

/// Index of `y_{a,b}`, `a < b`, among `m` ordered nodes.
fn pair_index(m: usize, a: usize, b: usize) -> usize {
    debug_assert!(a < b && b < m);
    a * (2 * m - a - 1) / 2 + (b - a - 1)
}

/// Linear-ordering model of the minimum feedback arc set of the vertex-split
/// graph. `y_{a,b} = 1` means node `b` precedes node `a`. Both transitivity
/// families are lazy.
pub fn ilp_constraint_model(g: &DependencyDigraph) -> IlpModel {
    let m = 2 * g.n();
    let mut model = IlpModel::new(Sense::Minimize);
    for a in 0..m {
        for b in a + 1..m {
            model.add_var(format!("y_{a}_{b}"), 0.0);
        }
    }
    for (u, w) in split_arcs(g) {
        if u < w {
            model.objective[pair_index(m, u, w)] += 1.0;
        } else {
            model.objective[pair_index(m, w, u)] -= 1.0;
            model.objective_constant += 1.0;
        }
    }
    for a in 0..m {
        for b in a + 1..m {
            for c in b + 1..m {
                let (ab, bc, ac) = (pair_index(m, a, b), pair_index(m, b, c), pair_index(m, a, c));
                model.add_lazy_constraint(vec![(ab, 1.0), (bc, 1.0), (ac, -1.0)], Relation::Le, 1.0);
                model.add_lazy_constraint(vec![(ab, -1.0), (bc, -1.0), (ac, 1.0)], Relation::Le, 0.0);
            }
        }
    }
    model
}

fn precedes(m: usize, y: &[bool], first: usize, second: usize) -> bool {
    if first < second {
        !y[pair_index(m, first, second)]
    } else {
        y[pair_index(m, second, first)]
    }
}

/// Vertices owning a backward arc: a backward split arc names its vertex, a
/// backward original arc `(i, j)` names `j`.
fn decode_ordering(g: &DependencyDigraph, y: &[bool]) -> Vec<usize> {
    let m = 2 * g.n();
    let mut out: Vec<usize> = split_arcs(g)
        .into_iter()
        .filter(|&(u, w)| !precedes(m, y, u, w))
        .map(|(_, w)| w / 2)
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Ordering variables for a known feedback vertex set: tails of removed
/// vertices first, then head/tail pairs in topological order, then heads of
/// removed vertices.
fn encode_ordering(g: &DependencyDigraph, fvs: &[usize]) -> Vec<bool> {
    let n = g.n();
    let m = 2 * n;
    let order = movable_order(&g.without(fvs)).expect("residual of a feedback set is acyclic");
    let mut seq: Vec<usize> = fvs.iter().map(|&v| 2 * v + 1).collect();
    // movable_order lists sinks first; arcs point from later to earlier.
    for &v in order.iter().rev().filter(|v| !fvs.contains(v)) {
        seq.push(2 * v);
        seq.push(2 * v + 1);
    }
    seq.extend(fvs.iter().map(|&v| 2 * v));
    let mut pos = vec![0; m];
    for (k, &node) in seq.iter().enumerate() {
        pos[node] = k;
    }
    let mut y = vec![false; m * (m - 1) / 2];
    for a in 0..m {
        for b in a + 1..m {
            y[pair_index(m, a, b)] = pos[b] < pos[a];
        }
    }
    y
}

/// Exact FVS through the linear-ordering model of the vertex-split graph.
/// Falls back to the MDH set, uncertified, if the engine runs out of budget
/// without an incumbent.
pub fn fvs_ilp_constraint(g: &DependencyDigraph, engine: &Engine) -> Result<FeedbackVertexSet, FvsError> {
    per_component(g, |sub| {
        let model = ilp_constraint_model(sub);
        let heuristic = mdh_component(sub);
        let start = encode_ordering(sub, &heuristic);
        let sol = engine.solve_with_start(&model, Some(&start))?;
        match (sol.status, sol.assignment) {
            (SolveStatus::Infeasible, _) => unreachable!("every ordering is feasible"),
            (status, Some(y)) => Ok((decode_ordering(sub, &y), status == SolveStatus::Optimal)),
            (_, None) => Ok((heuristic, false)),
        }
    })
}

/// `max Σ v_i` subject to `Σ_{i ∈ C} v_i ≤ |C| − 1` for every simple cycle
/// `C`; the FVS is `{i : v_i = 0}`. `None` when the cycles exceed `cap`.
pub fn ilp_enumerate_model(g: &DependencyDigraph, cap: usize) -> Option<IlpModel> {
    let cycles = enumerate_simple_cycles(g, cap);
    if cycles.truncated {
        return None;
    }
    let mut model = IlpModel::new(Sense::Maximize);
    for i in 0..g.n() {
        model.add_var(format!("v_{i}"), 1.0);
    }
    for c in cycles.cycles {
        let k = c.len() as f64;
        model.add_constraint(c.into_iter().map(|v| (v, 1.0)).collect(), Relation::Le, k - 1.0);
    }
    Some(model)
}

/// Exact FVS through the cycle-packing model.
pub fn fvs_ilp_enumerate(g: &DependencyDigraph, engine: &Engine, cycle_cap: usize) -> Result<FeedbackVertexSet, FvsError> {
    per_component(g, |sub| {
        let model = ilp_enumerate_model(sub, cycle_cap).ok_or(FvsError::CycleCapExceeded(cycle_cap))?;
        let heuristic = mdh_component(sub);
        let start: Vec<bool> = (0..sub.n()).map(|v| !heuristic.contains(&v)).collect();
        let sol = engine.solve_with_start(&model, Some(&start))?;
        match (sol.status, sol.assignment) {
            (SolveStatus::Infeasible, _) => unreachable!("removing every vertex is feasible"),
            (status, Some(v)) => {
                Ok(((0..sub.n()).filter(|&i| !v[i]).collect(), status == SolveStatus::Optimal))
            }
            (_, None) => Ok((heuristic, false)),
        }
    })
}

/// Deletes the vertex on the most live simple cycles until none is left.
pub fn fvs_msch(g: &DependencyDigraph, cycle_cap: usize) -> Result<FeedbackVertexSet, FvsError> {
    per_component(g, |sub| {
        let cycles = enumerate_simple_cycles(sub, cycle_cap);
        if cycles.truncated {
            return Err(FvsError::CycleCapExceeded(cycle_cap));
        }
        let mut live = cycles.cycles;
        let mut out = Vec::new();
        while !live.is_empty() {
            let mut count = vec![0usize; sub.n()];
            for c in &live {
                for &v in c {
                    count[v] += 1;
                }
            }
            let v = argmax_lowest(&count);
            out.push(v);
            live.retain(|c| !c.contains(&v));
        }
        Ok((out, false))
    })
}

fn argmax_lowest(values: &[usize]) -> usize {
    let mut best = 0;
    for (v, &c) in values.iter().enumerate() {
        if c > values[best] {
            best = v;
        }
    }
    best
}

/// Number of out-arcs of `v` found on cycles: repeatedly take a shortest
/// cycle through `v` that starts with an unmarked out-arc and mark that arc.
fn mch_count(g: &DependencyDigraph, v: usize, removed: &[bool]) -> usize {
    let n = g.n();
    let mut marked = vec![false; n];
    let mut count = 0;
    loop {
        let mut first = vec![usize::MAX; n];
        let mut queue = std::collections::VecDeque::new();
        for &w in g.successors(v) {
            if !removed[w] && !marked[w] && first[w] == usize::MAX {
                first[w] = w;
                queue.push_back(w);
            }
        }
        let mut closing = None;
        'bfs: while let Some(u) = queue.pop_front() {
            for &w in g.successors(u) {
                if removed[w] {
                    continue;
                }
                if w == v {
                    closing = Some(first[u]);
                    break 'bfs;
                }
                if first[w] == usize::MAX {
                    first[w] = first[u];
                    queue.push_back(w);
                }
            }
        }
        match closing {
            Some(w) => {
                marked[w] = true;
                count += 1;
            }
            None => return count,
        }
    }
}

/// Deletes the vertex with the highest cycle count (see [`mch_count`]).
pub fn fvs_mch(g: &DependencyDigraph) -> Result<FeedbackVertexSet, FvsError> {
    per_component(g, |sub| {
        let n = sub.n();
        let mut removed = vec![false; n];
        let mut out = Vec::new();
        loop {
            let counts: Vec<usize> = (0..n).map(|v| if removed[v] { 0 } else { mch_count(sub, v, &removed) }).collect();
            if counts.iter().all(|&c| c == 0) {
                return Ok((out, false));
            }
            let v = argmax_lowest(&counts);
            removed[v] = true;
            out.push(v);
        }
    })
}

fn mdh_component(g: &DependencyDigraph) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    loop {
        let residual = g.without(&out);
        let dec = scc(&residual);
        let on_cycle: Vec<usize> = dec.nontrivial().flatten().copied().collect();
        if on_cycle.is_empty() {
            out.sort_unstable();
            return out;
        }
        let degree: Vec<usize> = (0..g.n())
            .map(|v| if on_cycle.contains(&v) { residual.in_degree(v) + residual.out_degree(v) } else { 0 })
            .collect();
        out.push(argmax_lowest(&degree));
    }
}

/// Deletes the highest-degree vertex among those still on a cycle.
pub fn fvs_mdh(g: &DependencyDigraph) -> Result<FeedbackVertexSet, FvsError> {
    per_component(g, |sub| Ok((mdh_component(sub), false)))
}

/// All minimum feedback vertex sets, ascending lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct FvsEnumeration {
    pub sets: Vec<FeedbackVertexSet>,
    /// False when an engine budget ran out; `sets` is then partial.
    pub complete: bool,
}

/// Every minimum FVS: per component, all optima of the cycle-packing model
/// distinct on the `v` variables, combined across components.
pub fn enumerate_optimal_fvs(g: &DependencyDigraph, engine: &Engine, cycle_cap: usize) -> Result<FvsEnumeration, FvsError> {
    let mut combos: Vec<Vec<usize>> = vec![Vec::new()];
    let mut complete = true;
    for comp in scc(g).nontrivial() {
        let (sub, map) = g.induced(comp);
        let model = ilp_enumerate_model(&sub, cycle_cap).ok_or(FvsError::CycleCapExceeded(cycle_cap))?;
        let projection: Vec<usize> = (0..sub.n()).collect();
        let all = engine.solve_all_optima(&model, &projection)?;
        complete &= all.complete;
        let parts: Vec<Vec<usize>> = all
            .solutions
            .iter()
            .map(|s| {
                let v = s.assignment.as_ref().expect("optima carry assignments");
                (0..sub.n()).filter(|&i| !v[i]).map(|i| map[i]).collect()
            })
            .collect();
        combos = combos
            .iter()
            .flat_map(|base| parts.iter().map(move |p| base.iter().chain(p).copied().collect()))
            .collect();
    }
    let mut sets = combos
        .into_iter()
        .map(|c| FeedbackVertexSet::new(g, c, complete))
        .collect::<Result<Vec<_>, _>>()?;
    sets.sort_by(|a, b| a.vertices.cmp(&b.vertices));
    Ok(FvsEnumeration { sets, complete })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::depgraph::random_digraph;

    fn two_cycle() -> DependencyDigraph {
        DependencyDigraph::new(2, [(0, 1), (1, 0)])
    }

    fn complete(n: usize) -> DependencyDigraph {
        DependencyDigraph::new(n, (0..n).flat_map(|a| (0..n).map(move |b| (a, b))))
    }

    fn all_methods(g: &DependencyDigraph) -> Vec<FeedbackVertexSet> {
        let e = Engine::default();
        FvsMethod::ALL.iter().map(|&m| solve_fvs(g, m, &e, DEFAULT_CYCLE_CAP).unwrap()).collect()
    }

    #[test]
    fn two_cycle_needs_one() {
        for f in all_methods(&two_cycle()) {
            assert_eq!(f.len(), 1);
        }
        assert_eq!(fvs_brute_force(&two_cycle()).unwrap().vertices, vec![0]);
    }

    #[test]
    fn acyclic_needs_none() {
        let dag = DependencyDigraph::new(4, [(0, 1), (1, 2), (0, 3)]);
        for f in all_methods(&dag) {
            assert!(f.is_empty());
        }
    }

    #[test]
    fn complete_four() {
        assert_eq!(fvs_brute_force(&complete(4)).unwrap().vertices, vec![0, 1, 2]);
        assert_eq!(fvs_ilp_constraint(&complete(4), &Engine::default()).unwrap().len(), 3);
    }

    #[test]
    fn shared_vertex() {
        // 2-cycles {0,1} and {1,2} share vertex 1.
        let g = DependencyDigraph::new(3, [(0, 1), (1, 0), (1, 2), (2, 1)]);
        assert_eq!(fvs_msch(&g, 100).unwrap().vertices, vec![1]);
        let disjoint = DependencyDigraph::new(4, [(0, 1), (1, 0), (2, 3), (3, 2)]);
        assert_eq!(fvs_ilp_enumerate(&disjoint, &Engine::default(), 100).unwrap().len(), 2);
    }

    #[test]
    fn mdh_skips_cycle_free_hub() {
        // Hub 0 points at 1..5, the only cycle is 4 <-> 5.
        let g = DependencyDigraph::new(6, [(0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (4, 5), (5, 4)]);
        assert_eq!(fvs_mdh(&g).unwrap().vertices, vec![4]);
    }

    #[test]
    fn ordering_round_trip() {
        let g = random_digraph(6, 3.0, 4, 1);
        let f = fvs_mdh(&g).unwrap().vertices;
        let y = encode_ordering(&g, &f);
        assert!(ilp_constraint_model(&g).is_feasible(&y));
        assert_eq!(decode_ordering(&g, &y), f);
    }

    #[test]
    fn enumeration_of_two_cycle() {
        let e = enumerate_optimal_fvs(&two_cycle(), &Engine::default(), 100).unwrap();
        let sets: Vec<Vec<usize>> = e.sets.into_iter().map(|f| f.vertices).collect();
        assert_eq!(sets, vec![vec![0], vec![1]]);
        let dag = DependencyDigraph::new(3, [(0, 1)]);
        let e = enumerate_optimal_fvs(&dag, &Engine::default(), 100).unwrap();
        assert_eq!(e.sets.len(), 1);
        assert!(e.sets[0].is_empty());
    }

    #[test]
    fn rejects_non_feedback_sets() {
        assert!(FeedbackVertexSet::new(&two_cycle(), vec![], false).is_err());
    }

    #[test]
    fn method_names_parse() {
        for m in FvsMethod::ALL {
            assert_eq!(m.name().parse::<FvsMethod>().unwrap(), m);
        }
        assert!("nope".parse::<FvsMethod>().is_err());
    }

    #[test]
    fn brute_force_size_limit() {
        assert!(matches!(fvs_brute_force(&DependencyDigraph::new(21, [])), Err(FvsError::SizeLimit(21))));
    }
}
