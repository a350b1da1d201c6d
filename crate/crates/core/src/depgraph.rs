//! Dependency digraph: one vertex per object, arc `(i, j)` when the goal of
//! object `i` overlaps the start of object `j`, i.e. `j` has to vacate its
//! start before `i` can be placed.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::instance::Instance;

/// Default cap on enumerated simple cycles.
pub const DEFAULT_CYCLE_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyDigraph {
    out: Vec<Vec<usize>>,
    inn: Vec<Vec<usize>>,
}

impl DependencyDigraph {
    /// Builds a graph from an arc list. Self loops and duplicate arcs are dropped.
    ///
    /// # Panics
    /// If an arc endpoint is `>= n`.
    pub fn new(n: usize, arcs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut out = vec![Vec::new(); n];
        let mut inn = vec![Vec::new(); n];
        for (a, b) in arcs {
            assert!(a < n && b < n, "arc ({a}, {b}) out of range for {n} vertices");
            if a != b && !out[a].contains(&b) {
                out[a].push(b);
                inn[b].push(a);
            }
        }
        for l in out.iter_mut().chain(inn.iter_mut()) {
            l.sort_unstable();
        }
        DependencyDigraph { out, inn }
    }

    pub fn n(&self) -> usize {
        self.out.len()
    }

    pub fn arc_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    /// Arcs in lexicographic order.
    pub fn arcs(&self) -> Vec<(usize, usize)> {
        self.out.iter().enumerate().flat_map(|(a, l)| l.iter().map(move |&b| (a, b))).collect()
    }

    pub fn has_arc(&self, a: usize, b: usize) -> bool {
        self.out[a].binary_search(&b).is_ok()
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub fn predecessors(&self, v: usize) -> &[usize] {
        &self.inn[v]
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.out[v].len()
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.inn[v].len()
    }

    /// Subgraph induced by `keep` (ascending), relabeled `0..keep.len()`.
    /// Returns the subgraph and the map from new to old labels.
    pub fn induced(&self, keep: &[usize]) -> (DependencyDigraph, Vec<usize>) {
        let mut map = keep.to_vec();
        map.sort_unstable();
        map.dedup();
        let mut local = vec![usize::MAX; self.n()];
        for (k, &v) in map.iter().enumerate() {
            local[v] = k;
        }
        let arcs = map.iter().flat_map(|&a| {
            self.out[a].iter().filter(|&&b| local[b] != usize::MAX).map(|&b| (local[a], local[b])).collect::<Vec<_>>()
        });
        (DependencyDigraph::new(map.len(), arcs.collect::<Vec<_>>()), map)
    }

    /// The graph with `removed` vertices' arcs deleted. Vertex labels are kept;
    /// removed vertices become isolated.
    pub fn without(&self, removed: &[usize]) -> DependencyDigraph {
        let mut gone = vec![false; self.n()];
        for &v in removed {
            gone[v] = true;
        }
        DependencyDigraph::new(
            self.n(),
            self.arcs().into_iter().filter(|&(a, b)| !gone[a] && !gone[b]),
        )
    }

    pub fn is_acyclic(&self) -> bool {
        movable_order(self).is_some()
    }

    /// One arc per line, `"i j"`, preceded by a `# vertices N` header.
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("# vertices {}\n", self.n());
        for (a, b) in self.arcs() {
            let _ = writeln!(s, "{a} {b}");
        }
        s
    }

    /// One line per vertex: `"v: s1 s2 ..."`.
    pub fn to_adjacency(&self) -> String {
        let mut s = String::new();
        for (v, l) in self.out.iter().enumerate() {
            let _ = write!(s, "{v}:");
            for b in l {
                let _ = write!(s, " {b}");
            }
            s.push('\n');
        }
        s
    }

    /// Graphviz `digraph`.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph dependency {\n");
        for v in 0..self.n() {
            let _ = writeln!(s, "  {v};");
        }
        for (a, b) in self.arcs() {
            let _ = writeln!(s, "  {a} -> {b};");
        }
        s.push_str("}\n");
        s
    }

    /// Parses the [`to_edge_list`](Self::to_edge_list) format. Without a
    /// header the vertex count is one more than the largest endpoint.
    pub fn from_edge_list(text: &str) -> Result<DependencyDigraph, String> {
        let mut n = None;
        let mut arcs = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(v) = rest.trim().strip_prefix("vertices") {
                    n = Some(v.trim().parse::<usize>().map_err(|e| format!("line {}: {e}", ln + 1))?);
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace().map(str::parse::<usize>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(a)), Some(Ok(b)), None) => arcs.push((a, b)),
                _ => return Err(format!("line {}: expected \"i j\"", ln + 1)),
            }
        }
        let need = arcs.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0);
        let n = n.unwrap_or(need);
        if need > n {
            return Err(format!("arc endpoint {} exceeds vertex count {n}", need - 1));
        }
        Ok(DependencyDigraph::new(n, arcs))
    }
}

/// Arc `(i, j)` for every ordered pair `i != j` whose goal `g_i` overlaps
/// start `s_j`.
pub fn build_dependency_graph(inst: &Instance) -> DependencyDigraph {
    let n = inst.len();
    let arcs = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && inst.start_hits_goal(j, i));
    DependencyDigraph::new(n, arcs.collect::<Vec<_>>())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SccDecomposition {
    pub component_of: Vec<usize>,
    /// Components in reverse topological order: every arc leaving a component
    /// points to one listed earlier. Vertices inside a component are ascending.
    pub components: Vec<Vec<usize>>,
}

impl SccDecomposition {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Components of two or more vertices; only these can hold a cycle since
    /// the graph has no self loops.
    pub fn nontrivial(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.components.iter().filter(|c| c.len() > 1)
    }
}

/// Tarjan's algorithm, iterative.
pub fn scc(g: &DependencyDigraph) -> SccDecomposition {
    let n = g.n();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut component_of = vec![0; n];
    let mut components: Vec<Vec<usize>> = Vec::new();
    let mut counter = 0;
    // (vertex, next successor position)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if let Some(&w) = g.out[v].get(*pos) {
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack holds the component");
                    on_stack[w] = false;
                    component_of[w] = components.len();
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                components.push(comp);
            }
        }
    }
    SccDecomposition { component_of, components }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CycleEnumeration {
    /// Each cycle starts at its smallest vertex.
    pub cycles: Vec<Vec<usize>>,
    /// More than `cap` cycles exist; only the first `cap` are listed.
    pub truncated: bool,
}

/// Johnson's simple-cycle enumeration, stopping after `cap` cycles.
pub fn enumerate_simple_cycles(g: &DependencyDigraph, cap: usize) -> CycleEnumeration {
    let n = g.n();
    let mut st = Johnson {
        blocked: vec![false; n],
        blist: vec![Vec::new(); n],
        path: Vec::new(),
        allowed: vec![false; n],
        out: CycleEnumeration::default(),
        cap,
    };
    for s in 0..n {
        let rest: Vec<usize> = (s..n).collect();
        let (sub, map) = g.induced(&rest);
        let dec = scc(&sub);
        let comp = &dec.components[dec.component_of[0]];
        if comp.len() < 2 {
            continue;
        }
        for v in 0..n {
            st.allowed[v] = false;
        }
        for &k in comp {
            let v = map[k];
            st.allowed[v] = true;
            st.blocked[v] = false;
            st.blist[v].clear();
        }
        st.circuit(g, s, s);
        if st.out.truncated {
            break;
        }
    }
    st.out
}

struct Johnson {
    blocked: Vec<bool>,
    blist: Vec<Vec<usize>>,
    path: Vec<usize>,
    allowed: Vec<bool>,
    out: CycleEnumeration,
    cap: usize,
}

impl Johnson {
    fn unblock(&mut self, u: usize) {
        let mut work = vec![u];
        while let Some(u) = work.pop() {
            if self.blocked[u] {
                self.blocked[u] = false;
                work.append(&mut self.blist[u]);
            }
        }
    }

    fn circuit(&mut self, g: &DependencyDigraph, v: usize, s: usize) -> bool {
        let mut found = false;
        self.path.push(v);
        self.blocked[v] = true;
        for &w in g.successors(v) {
            if self.out.truncated {
                break;
            }
            if !self.allowed[w] {
                continue;
            }
            if w == s {
                if self.out.cycles.len() == self.cap {
                    self.out.truncated = true;
                    break;
                }
                self.out.cycles.push(self.path.clone());
                found = true;
            } else if !self.blocked[w] && self.circuit(g, w, s) {
                found = true;
            }
        }
        if found {
            self.unblock(v);
        } else {
            for &w in g.successors(v) {
                if self.allowed[w] && !self.blist[w].contains(&v) {
                    self.blist[w].push(v);
                }
            }
        }
        self.path.pop();
        found
    }
}

/// An order in which every object, at its turn, has out-degree zero in the
/// graph of objects not yet moved, so its goal is clear. Picks the lowest
/// such vertex each step. `None` iff the graph has a cycle.
pub fn movable_order(g: &DependencyDigraph) -> Option<Vec<usize>> {
    let n = g.n();
    let mut remaining: Vec<usize> = (0..n).map(|v| g.out_degree(v)).collect();
    let mut ready: std::collections::BTreeSet<usize> = (0..n).filter(|&v| remaining[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for &u in g.predecessors(v) {
            remaining[u] -= 1;
            if remaining[u] == 0 {
                ready.insert(u);
            }
        }
    }
    (order.len() == n).then_some(order)
}

/// Random digraph with `round(avg_degree · n / 2)` distinct arcs (average total
/// degree `avg_degree`) and in- and out-degree at most `max_degree`. Arcs are
/// drawn from a shuffled list of all ordered pairs and skipped when they would
/// break a cap, so the arc count can fall short only when the caps are tight.
pub fn random_digraph(n: usize, avg_degree: f64, max_degree: usize, seed: u64) -> DependencyDigraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let quota = (avg_degree * n as f64 / 2.0).round() as usize;
    let mut pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).filter(|&(a, b)| a != b).collect();
    pairs.shuffle(&mut rng);
    let (mut outs, mut ins) = (vec![0; n], vec![0; n]);
    let mut arcs = Vec::with_capacity(quota);
    for (a, b) in pairs {
        if arcs.len() == quota {
            break;
        }
        if outs[a] < max_degree && ins[b] < max_degree {
            outs[a] += 1;
            ins[b] += 1;
            arcs.push((a, b));
        }
    }
    DependencyDigraph::new(n, arcs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{CostParams, ObjectSpec, Pose, Workspace};

    fn complete(n: usize) -> DependencyDigraph {
        DependencyDigraph::new(n, (0..n).flat_map(|a| (0..n).map(move |b| (a, b))))
    }

    fn reach(g: &DependencyDigraph, a: usize) -> Vec<bool> {
        let mut seen = vec![false; g.n()];
        let mut work = vec![a];
        seen[a] = true;
        while let Some(v) = work.pop() {
            for &w in g.successors(v) {
                if !seen[w] {
                    seen[w] = true;
                    work.push(w);
                }
            }
        }
        seen
    }

    #[test]
    fn two_cycle_from_geometry() {
        let inst = crate::instance::fixtures::two_cycle();
        let g = build_dependency_graph(&inst);
        assert_eq!(g.arcs(), vec![(0, 1), (1, 0)]);
        assert_eq!(movable_order(&g), None);
        assert_eq!(scc(&g).components, vec![vec![0, 1]]);
    }

    #[test]
    fn cyclic_shift_gives_five_cycle() {
        // goal i sits on the start of object i+1 (mod 5), nudged so it does
        // not touch any other start.
        let objects = (0..5)
            .map(|i| {
                let next = (i + 1) % 5;
                ObjectSpec {
                    id: i as u32,
                    radius: 1.0,
                    start: Pose::new(10.0 * i as f64, 0.0),
                    goal: Pose::new(10.0 * next as f64 + 0.5, 0.5),
                }
            })
            .collect::<Vec<_>>();
        let inst = Instance {
            workspace: Workspace::new(-5.0, -5.0, 50.0, 5.0),
            rest_start: Pose::new(0.0, -5.0),
            rest_goal: Pose::new(0.0, -5.0),
            buffers: vec![],
            labeled: true,
            cost: CostParams::default(),
            objects,
        };
        let g = build_dependency_graph(&inst);
        assert_eq!(g.arcs(), vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);
        let cycles = enumerate_simple_cycles(&g, DEFAULT_CYCLE_CAP);
        assert_eq!(cycles.cycles, vec![vec![0, 1, 2, 3, 4]]);
    }

    #[test]
    fn no_overlap_has_no_arcs() {
        assert_eq!(build_dependency_graph(&crate::instance::fixtures::line(5)).arc_count(), 0);
    }

    #[test]
    fn scc_cases() {
        let dag = DependencyDigraph::new(4, [(0, 1), (1, 2), (0, 3), (3, 2)]);
        assert_eq!(scc(&dag).len(), 4);
        let g = DependencyDigraph::new(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)]);
        let d = scc(&g);
        assert_eq!(d.components, vec![vec![3, 4, 5], vec![0, 1, 2]]);
        for a in 0..6 {
            let ra = reach(&g, a);
            for b in 0..6 {
                let same = ra[b] && reach(&g, b)[a];
                assert_eq!(same, d.component_of[a] == d.component_of[b]);
            }
        }
    }

    #[test]
    fn scc_reverse_topological() {
        for seed in 0..50 {
            let g = random_digraph(12, 2.0, 4, seed);
            let d = scc(&g);
            for (a, b) in g.arcs() {
                assert!(d.component_of[a] >= d.component_of[b]);
            }
        }
    }

    #[test]
    fn cycles_of_small_graphs() {
        assert_eq!(enumerate_simple_cycles(&complete(3), 100).cycles.len(), 5);
        assert_eq!(enumerate_simple_cycles(&complete(4), 100).cycles.len(), 20);
        let dag = DependencyDigraph::new(3, [(0, 1), (1, 2)]);
        assert!(enumerate_simple_cycles(&dag, 100).cycles.is_empty());
        let two = DependencyDigraph::new(2, [(0, 1), (1, 0)]);
        assert_eq!(enumerate_simple_cycles(&two, 100).cycles, vec![vec![0, 1]]);
    }

    #[test]
    fn cycle_cap_truncates() {
        let e = enumerate_simple_cycles(&complete(4), 7);
        assert_eq!(e.cycles.len(), 7);
        assert!(e.truncated);
        let e = enumerate_simple_cycles(&complete(4), 20);
        assert!(!e.truncated);
    }

    #[test]
    fn movable_orders() {
        let empty = DependencyDigraph::new(3, []);
        assert_eq!(movable_order(&empty), Some(vec![0, 1, 2]));
        let chain = DependencyDigraph::new(3, [(0, 1), (1, 2)]);
        assert_eq!(movable_order(&chain), Some(vec![2, 1, 0]));
    }

    #[test]
    fn text_formats() {
        let g = DependencyDigraph::new(4, [(0, 1), (2, 3), (3, 2)]);
        assert_eq!(g.to_edge_list(), "# vertices 4\n0 1\n2 3\n3 2\n");
        assert_eq!(DependencyDigraph::from_edge_list(&g.to_edge_list()).unwrap(), g);
        assert_eq!(g.to_adjacency(), "0: 1\n1:\n2: 3\n3: 2\n");
        assert!(g.to_dot().contains("  2 -> 3;"));
        assert!(DependencyDigraph::from_edge_list("0 x").is_err());
    }

    #[test]
    fn random_digraph_caps() {
        for seed in 0..20 {
            let g = random_digraph(20, 2.0, 4, seed);
            assert_eq!(g.arc_count(), 20);
            assert!((0..20).all(|v| g.in_degree(v) <= 4 && g.out_degree(v) <= 4));
        }
    }
}
