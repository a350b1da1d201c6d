use toro_core::depgraph::DependencyDigraph;
use toro_core::instance::{ActionPlan, Instance, Location, Move};
use toro_core::ilp::{IlpModel, Sense};

/// Best objective over all `2^n` assignments, or `None` if none is feasible.
pub fn ilp_exhaustive(m: &IlpModel) -> Option<f64> {
    let n = m.num_vars;
    assert!(n <= 20);
    let mut best: Option<f64> = None;
    for bits in 0u32..(1 << n) {
        let x: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
        if !m.is_feasible(&x) {
            continue;
        }
        let v = m.evaluate(&x);
        best = Some(match (best, m.sense) {
            (None, _) => v,
            (Some(b), Sense::Minimize) => b.min(v),
            (Some(b), Sense::Maximize) => b.max(v),
        });
    }
    best
}

/// Distinct projections of the optimal assignments.
pub fn ilp_optimal_patterns(m: &IlpModel, projection: &[usize]) -> Vec<Vec<bool>> {
    let Some(best) = ilp_exhaustive(m) else { return vec![] };
    let n = m.num_vars;
    let mut out: Vec<Vec<bool>> = Vec::new();
    for bits in 0u32..(1 << n) {
        let x: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
        if m.is_feasible(&x) && (m.evaluate(&x) - best).abs() <= 1e-9 * (1.0 + best.abs()) {
            let p: Vec<bool> = projection.iter().map(|&v| x[v]).collect();
            if !out.contains(&p) {
                out.push(p);
            }
        }
    }
    out
}

/// Cycle detection by three-color depth-first search.
pub fn has_cycle(n: usize, arcs: &[(usize, usize)], removed: &[usize]) -> bool {
    fn visit(v: usize, adj: &[Vec<usize>], color: &mut [u8]) -> bool {
        color[v] = 1;
        for &w in &adj[v] {
            if color[w] == 1 || (color[w] == 0 && visit(w, adj, color)) {
                return true;
            }
        }
        color[v] = 2;
        false
    }
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in arcs {
        if !removed.contains(&a) && !removed.contains(&b) {
            adj[a].push(b);
        }
    }
    let mut color = vec![0u8; n];
    (0..n).any(|v| color[v] == 0 && visit(v, &adj, &mut color))
}

pub fn graph_has_cycle(g: &DependencyDigraph, removed: &[usize]) -> bool {
    has_cycle(g.n(), &g.arcs(), removed)
}

/// All minimum feedback vertex sets by enumerating subsets in increasing
/// size.
pub fn all_min_fvs(g: &DependencyDigraph) -> Vec<Vec<usize>> {
    let n = g.n();
    assert!(n <= 20);
    let arcs = g.arcs();
    for size in 0..=n {
        let mut found = Vec::new();
        for bits in 0u32..(1 << n) {
            if bits.count_ones() as usize != size {
                continue;
            }
            let set: Vec<usize> = (0..n).filter(|&v| bits >> v & 1 == 1).collect();
            if !has_cycle(n, &arcs, &set) {
                found.push(set);
            }
        }
        if !found.is_empty() {
            found.sort();
            return found;
        }
    }
    unreachable!("removing every vertex leaves no cycle")
}

pub fn min_fvs_size(g: &DependencyDigraph) -> usize {
    all_min_fvs(g)[0].len()
}

/// Simple cycles by plain path extension from each cycle's smallest vertex.
pub fn brute_cycles(g: &DependencyDigraph) -> Vec<Vec<usize>> {
    fn extend(g: &DependencyDigraph, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let s = path[0];
        let v = *path.last().unwrap();
        for &w in g.successors(v) {
            if w == s {
                out.push(path.clone());
            } else if w > s && !path.contains(&w) {
                path.push(w);
                extend(g, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    for s in 0..g.n() {
        extend(g, &mut vec![s], &mut out);
    }
    out.sort();
    out
}

/// Every permutation of `0..n`, in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                rec(cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Travel distance of moving start `starts[k]` to goal `goals[k]` in order,
/// from `s_M` to `g_M`, computed straight from the poses.
pub fn sequence_distance(inst: &Instance, starts: &[usize], goals: &[usize]) -> f64 {
    let mut at = inst.rest_start;
    let mut d = 0.0;
    for (&a, &b) in starts.iter().zip(goals) {
        let (s, g) = (inst.objects[a].start, inst.objects[b].goal);
        d += at.dist(s) + s.dist(g);
        at = g;
    }
    d + at.dist(inst.rest_goal)
}

/// Shortest labeled overlap-free plan distance over all object orders.
pub fn labeled_brute_force(inst: &Instance) -> f64 {
    permutations(inst.len())
        .iter()
        .map(|p| sequence_distance(inst, p, p))
        .fold(f64::INFINITY, f64::min)
}

/// Shortest unlabeled overlap-free plan distance over all start orders and
/// all goal orders.
pub fn unlabeled_brute_force(inst: &Instance) -> f64 {
    let perms = permutations(inst.len());
    let mut best = f64::INFINITY;
    for a in &perms {
        for b in &perms {
            best = best.min(sequence_distance(inst, a, b));
        }
    }
    best
}

/// Shortest schedule that moves every object once, routing each object in
/// `buffered` through one of the first `buffered.len()` buffers, by
/// exhaustive depth-first search over every interleaving and buffer choice.
/// Returns the distance and the moves as `(object, from, to)` slots.
pub fn schedule_oracle(inst: &Instance, buffered: &[usize]) -> Option<(f64, Vec<Move>)> {
    #[derive(Clone, Copy, PartialEq)]
    enum At {
        Start,
        Buffer(usize),
        Goal,
    }
    struct Search<'a> {
        inst: &'a Instance,
        buffered: &'a [usize],
        at: Vec<At>,
        path: Vec<Move>,
        best: Option<(f64, Vec<Move>)>,
    }
    impl Search<'_> {
        fn goal_clear(&self, i: usize) -> bool {
            (0..self.at.len()).all(|l| l == i || self.at[l] != At::Start || !self.inst.start_hits_goal(l, i))
        }
        fn go(&mut self) {
            let n = self.at.len();
            if self.at.iter().all(|&a| a == At::Goal) {
                let d = ActionPlan::from_moves(self.inst, self.path.clone()).distance();
                if self.best.as_ref().is_none_or(|b| d < b.0 - 1e-12) {
                    self.best = Some((d, self.path.clone()));
                }
                return;
            }
            for i in 0..n {
                let from = match self.at[i] {
                    At::Goal => continue,
                    At::Start => Location::Start(i),
                    At::Buffer(k) => Location::Buffer(k),
                };
                let mut targets = Vec::new();
                if self.at[i] == At::Start && self.buffered.contains(&i) {
                    for k in 0..self.buffered.len() {
                        if !self.at.contains(&At::Buffer(k)) {
                            targets.push((Location::Buffer(k), At::Buffer(k)));
                        }
                    }
                } else if self.goal_clear(i) {
                    targets.push((Location::Goal(i), At::Goal));
                }
                for (to, next) in targets {
                    let prev = self.at[i];
                    self.at[i] = next;
                    self.path.push(Move::new(i, from, to));
                    self.go();
                    self.path.pop();
                    self.at[i] = prev;
                }
            }
        }
    }
    let mut s = Search { inst, buffered, at: vec![At::Start; inst.len()], path: vec![], best: None };
    s.go();
    s.best
}

/// Best schedule over every minimum feedback vertex set.
pub fn min_grasp_oracle(inst: &Instance) -> (usize, f64) {
    let g = toro_core::depgraph::build_dependency_graph(inst);
    let sets = all_min_fvs(&g);
    let best = sets
        .iter()
        .filter_map(|b| schedule_oracle(inst, b).map(|r| r.0))
        .fold(f64::INFINITY, f64::min);
    (inst.len() + sets[0].len(), best)
}
