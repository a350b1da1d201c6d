//! Traveling-salesman reductions for instances without start/goal overlap.
//!
//! [`build_g_no`] (labeled) and [`build_g_uno`] (unlabeled) produce the
//! symmetric tour graphs; tours are solved on contracted forms: an asymmetric
//! matrix over `n + 1` nodes in the labeled case, and start/goal alternation
//! directly in the unlabeled case.

mod exact;
mod heuristic;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{ActionPlan, Instance, Location, Move};

pub use exact::{held_karp, unlabeled_exact, HELD_KARP_LIMIT, UNLABELED_EXACT_LIMIT};
pub use heuristic::{labeled_heuristic, unlabeled_heuristic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TspMode {
    Exact,
    Heuristic,
}

#[derive(Debug, Error, PartialEq)]
pub enum TspError {
    #[error("start of object {start} overlaps goal of object {goal}; not an overlap-free instance")]
    Overlap { start: u32, goal: u32 },
    #[error("instance is {}labeled; use the {} reduction", if *.0 { "" } else { "un" }, if *.0 { "labeled" } else { "unlabeled" })]
    WrongKind(bool),
    #[error("exact solving is limited to {limit} objects, got {n}")]
    ExactSizeExceeded { n: usize, limit: usize },
    #[error("malformed tour: {0}")]
    MalformedTour(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TourVertex {
    RestStart,
    RestGoal,
    /// `u_0`, joining the two rest positions.
    Hub,
    /// `u_i`, splitting edge `s_i g_i` (labeled graph only).
    Split(usize),
    Start(usize),
    Goal(usize),
}

/// A reduction graph with a dense symmetric weight matrix; missing edges
/// carry `big_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct TourGraph {
    pub labeled: bool,
    pub n: usize,
    pub vertices: Vec<TourVertex>,
    pub weights: Vec<f64>,
    pub big_m: f64,
}

impl TourGraph {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn w(&self, a: usize, b: usize) -> f64 {
        self.weights[a * self.len() + b]
    }

    pub fn is_forbidden(&self, a: usize, b: usize) -> bool {
        self.w(a, b) >= self.big_m
    }

    pub fn index(&self, v: TourVertex) -> usize {
        match (v, self.labeled) {
            (TourVertex::RestStart, _) => 0,
            (TourVertex::RestGoal, _) => 1,
            (TourVertex::Hub, _) => 2,
            (TourVertex::Start(i), true) => 3 + 3 * i,
            (TourVertex::Split(i), true) => 4 + 3 * i,
            (TourVertex::Goal(i), true) => 5 + 3 * i,
            (TourVertex::Start(i), false) => 3 + 2 * i,
            (TourVertex::Goal(i), false) => 4 + 2 * i,
            (TourVertex::Split(_), false) => panic!("the unlabeled graph has no split vertices"),
        }
    }

    /// Closed length of a cyclic vertex sequence.
    pub fn cycle_length(&self, cycle: &[usize]) -> f64 {
        (0..cycle.len()).map(|k| self.w(cycle[k], cycle[(k + 1) % cycle.len()])).sum()
    }

    /// Finite edges as `(a, b, weight)` with `a < b`.
    pub fn finite_edges(&self) -> Vec<(usize, usize, f64)> {
        let k = self.len();
        (0..k)
            .flat_map(|a| (a + 1..k).map(move |b| (a, b)))
            .filter(|&(a, b)| !self.is_forbidden(a, b))
            .map(|(a, b)| (a, b, self.w(a, b)))
            .collect()
    }

    /// TSPLIB full-matrix instance with weights scaled by `scale` and rounded.
    pub fn to_tsplib(&self, name: &str, scale: f64) -> String {
        let k = self.len();
        let mut s = format!(
            "NAME: {name}\nTYPE: TSP\nCOMMENT: weights scaled by {scale}\nDIMENSION: {k}\nEDGE_WEIGHT_TYPE: EXPLICIT\nEDGE_WEIGHT_FORMAT: FULL_MATRIX\nEDGE_WEIGHT_SECTION\n"
        );
        for a in 0..k {
            let row: Vec<String> = (0..k).map(|b| format!("{}", (self.w(a, b) * scale).round() as i64)).collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s.push_str("EOF\n");
        s
    }
}

fn check_no_overlap(inst: &Instance) -> Result<(), TspError> {
    let n = inst.len();
    for i in 0..n {
        for j in 0..n {
            if inst.start_hits_goal(i, j) {
                return Err(TspError::Overlap { start: inst.id_of(i), goal: inst.id_of(j) });
            }
        }
    }
    Ok(())
}

/// `1 + Σ` of all finite weights.
fn finish(labeled: bool, n: usize, vertices: Vec<TourVertex>, finite: Vec<(usize, usize, f64)>) -> TourGraph {
    let k = vertices.len();
    let big_m = 1.0 + finite.iter().map(|e| e.2).sum::<f64>();
    let mut weights = vec![big_m; k * k];
    for a in 0..k {
        weights[a * k + a] = 0.0;
    }
    for (a, b, w) in finite {
        weights[a * k + b] = w;
        weights[b * k + a] = w;
    }
    TourGraph { labeled, n, vertices, weights, big_m }
}

/// Labeled reduction: rest positions joined through `u_0`, each `s_i g_i`
/// split by `u_i` with zero weights, complete bipartite `s_i g_j` (`i != j`)
/// edges at Euclidean distance.
pub fn build_g_no(inst: &Instance) -> Result<TourGraph, TspError> {
    if !inst.labeled {
        return Err(TspError::WrongKind(false));
    }
    check_no_overlap(inst)?;
    let n = inst.len();
    let mut vertices = vec![TourVertex::RestStart, TourVertex::RestGoal, TourVertex::Hub];
    for i in 0..n {
        vertices.extend([TourVertex::Start(i), TourVertex::Split(i), TourVertex::Goal(i)]);
    }
    let (s, u, g) = (|i: usize| 3 + 3 * i, |i: usize| 4 + 3 * i, |i: usize| 5 + 3 * i);
    let o = &inst.objects;
    let mut e = vec![(0, 2, 0.0), (1, 2, 0.0)];
    if n == 0 {
        e.push((0, 1, inst.rest_start.dist(inst.rest_goal)));
    }
    for i in 0..n {
        e.push((0, s(i), inst.rest_start.dist(o[i].start)));
        e.push((1, g(i), inst.rest_goal.dist(o[i].goal)));
        e.push((s(i), u(i), 0.0));
        e.push((u(i), g(i), 0.0));
        for j in 0..n {
            if i != j {
                e.push((s(i), g(j), o[i].start.dist(o[j].goal)));
            }
        }
    }
    Ok(finish(true, n, vertices, e))
}

/// Unlabeled reduction: rest positions through `u_0`, complete bipartite
/// `s_i g_j` edges including `j = i`.
pub fn build_g_uno(inst: &Instance) -> Result<TourGraph, TspError> {
    if inst.labeled {
        return Err(TspError::WrongKind(true));
    }
    check_no_overlap(inst)?;
    let n = inst.len();
    let mut vertices = vec![TourVertex::RestStart, TourVertex::RestGoal, TourVertex::Hub];
    for i in 0..n {
        vertices.extend([TourVertex::Start(i), TourVertex::Goal(i)]);
    }
    let (s, g) = (|i: usize| 3 + 2 * i, |i: usize| 4 + 2 * i);
    let o = &inst.objects;
    let mut e = vec![(0, 2, 0.0), (1, 2, 0.0)];
    if n == 0 {
        e.push((0, 1, inst.rest_start.dist(inst.rest_goal)));
    }
    for i in 0..n {
        e.push((0, s(i), inst.rest_start.dist(o[i].start)));
        e.push((1, g(i), inst.rest_goal.dist(o[i].goal)));
        for j in 0..n {
            e.push((s(i), g(j), o[i].start.dist(o[j].goal)));
        }
    }
    Ok(finish(false, n, vertices, e))
}

/// Asymmetric `(n + 1)`-node matrix whose directed Hamiltonian cycles through
/// node 0 cost exactly the travel distance of the corresponding plan:
/// `d(0, j) = |s_M s_j| + |s_j g_j|`, `d(i, j) = |g_i s_j| + |s_j g_j|`,
/// `d(i, 0) = |g_i g_M|`. Subtracting `Σ |s_i g_i|` gives the tour length
/// in the labeled reduction graph.
pub fn contract_labeled(inst: &Instance) -> Vec<Vec<f64>> {
    let n = inst.len();
    let o = &inst.objects;
    let mut d = vec![vec![0.0; n + 1]; n + 1];
    for j in 1..=n {
        let loaded = o[j - 1].start.dist(o[j - 1].goal);
        d[0][j] = inst.rest_start.dist(o[j - 1].start) + loaded;
        d[j][0] = o[j - 1].goal.dist(inst.rest_goal);
        for i in 1..=n {
            if i != j {
                d[i][j] = o[i - 1].goal.dist(o[j - 1].start) + loaded;
            }
        }
    }
    d
}

/// The `(n + 1)`-node matrix read off a labeled reduction graph; its cycle
/// costs equal reduction-graph tour lengths.
fn labeled_matrix(g: &TourGraph) -> Vec<Vec<f64>> {
    let n = g.n;
    let s = |i: usize| g.index(TourVertex::Start(i));
    let gl = |i: usize| g.index(TourVertex::Goal(i));
    let mut d = vec![vec![0.0; n + 1]; n + 1];
    for j in 1..=n {
        d[0][j] = g.w(0, s(j - 1));
        d[j][0] = g.w(gl(j - 1), 1);
        for i in 1..=n {
            if i != j {
                d[i][j] = g.w(gl(i - 1), s(j - 1));
            }
        }
    }
    d
}

/// Closed tour over a reduction graph, listed from `s_M` in the direction
/// away from `u_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tour {
    pub vertices: Vec<usize>,
    pub length: f64,
}

/// Sequence of (start, goal) slot pairs; in the labeled case `start == goal`.
pub type Matching = Vec<(usize, usize)>;

fn tour_of(g: &TourGraph, pairs: &[(usize, usize)]) -> Tour {
    let mut v = vec![0];
    for &(a, b) in pairs {
        v.push(g.index(TourVertex::Start(a)));
        if g.labeled {
            v.push(g.index(TourVertex::Split(a)));
        }
        v.push(g.index(TourVertex::Goal(b)));
    }
    v.push(1);
    v.push(2);
    let length = g.cycle_length(&v);
    Tour { vertices: v, length }
}

/// Minimum (exact) or locally optimal (heuristic) tour.
pub fn solve_tour(g: &TourGraph, mode: TspMode) -> Result<Tour, TspError> {
    let pairs: Matching = if g.labeled {
        let d = labeled_matrix(g);
        let order = match mode {
            TspMode::Exact => {
                if g.n + 1 > HELD_KARP_LIMIT {
                    return Err(TspError::ExactSizeExceeded { n: g.n, limit: HELD_KARP_LIMIT - 1 });
                }
                held_karp(&d).0
            }
            TspMode::Heuristic => labeled_heuristic(&d).0,
        };
        order.into_iter().map(|i| (i - 1, i - 1)).collect()
    } else {
        match mode {
            TspMode::Exact => {
                if g.n > UNLABELED_EXACT_LIMIT {
                    return Err(TspError::ExactSizeExceeded { n: g.n, limit: UNLABELED_EXACT_LIMIT });
                }
                unlabeled_exact(g).0
            }
            TspMode::Heuristic => unlabeled_heuristic(g).0,
        }
    };
    Ok(tour_of(g, &pairs))
}

/// Turns a finite tour into pick-and-place actions: every `s_i (u_i) g_j`
/// traversal moves the object at `s_i` to `g_j`.
pub fn retrieve_actions(g: &TourGraph, tour: &Tour, inst: &Instance) -> Result<ActionPlan, TspError> {
    let k = g.len();
    let cyc = &tour.vertices;
    if cyc.len() != k || {
        let mut seen = vec![false; k];
        cyc.iter().any(|&v| v >= k || std::mem::replace(&mut seen[v], true))
    } {
        return Err(TspError::MalformedTour("not a permutation of the graph's vertices".into()));
    }
    for w in 0..k {
        if g.is_forbidden(cyc[w], cyc[(w + 1) % k]) {
            return Err(TspError::MalformedTour(format!("uses forbidden edge at position {w}")));
        }
    }
    let at = cyc.iter().position(|&v| v == 0).expect("permutation contains s_M");
    let hub = g.index(TourVertex::Hub);
    let forward = cyc[(at + 1) % k] != hub;
    let seq: Vec<TourVertex> = (0..k)
        .map(|t| if forward { cyc[(at + t) % k] } else { cyc[(at + k - t) % k] })
        .map(|v| g.vertices[v])
        .collect();

    let mut moves = Vec::new();
    let mut t = 1;
    while let Some(&TourVertex::Start(a)) = seq.get(t) {
        t += 1;
        if g.labeled {
            if seq.get(t) != Some(&TourVertex::Split(a)) {
                return Err(TspError::MalformedTour(format!("start {a} not followed by its split vertex")));
            }
            t += 1;
        }
        match seq.get(t) {
            Some(&TourVertex::Goal(b)) if !g.labeled || a == b => {
                moves.push(Move::new(a, Location::Start(a), Location::Goal(b)));
                t += 1;
            }
            _ => return Err(TspError::MalformedTour(format!("start {a} not followed by a goal"))),
        }
    }
    if seq[t..] != [TourVertex::RestGoal, TourVertex::Hub] || moves.len() != g.n {
        return Err(TspError::MalformedTour("tour does not end with g_M u_0".into()));
    }
    Ok(ActionPlan::from_moves(inst, moves))
}
