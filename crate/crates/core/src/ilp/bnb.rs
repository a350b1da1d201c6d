//! Depth-first branch and bound.
//!
//! Each node propagates activity bounds over the fixed variables, then bounds
//! the subtree with the LP relaxation. The relaxation is warm-started from the
//! parent's simplex state and only receives the fixings that its current
//! point contradicts, so it stays a valid (possibly weaker) relaxation.

use std::rc::Rc;
use std::time::Instant;

use microlp::{ComparisonOp, OptimizationDirection, Problem, Solution, SolveOutcome, Variable};

use super::{Budget, IlpModel, IlpSolution, Relation, Sense, SolveStatus, TOL};

/// Above this many variables the relaxation is replaced by the
/// propagation-only bound.
const LP_VAR_LIMIT: usize = 5000;
/// Lazy constraints added to the relaxation per separation round.
const CUTS_PER_ROUND: usize = 64;

struct LpState {
    sol: Solution,
    fixed: Vec<Option<bool>>,
}

struct Node {
    fixed: Vec<Option<bool>>,
    /// Variables fixed since the parent propagated.
    dirty: Vec<usize>,
    lp: Option<Rc<LpState>>,
}

enum Lp {
    Ok(LpState),
    Infeasible,
    Failed,
}

struct Search<'a> {
    m: &'a IlpModel,
    /// Objective in minimization form.
    cost: Vec<f64>,
    constant: f64,
    integral: bool,
    active: Vec<bool>,
    var_cons: Vec<Vec<usize>>,
    vars: Vec<Variable>,
    use_lp: bool,
    incumbent: Option<(f64, Vec<bool>)>,
    cutoff: Option<f64>,
    nodes: u64,
    budget: Budget,
    started: Instant,
}

/// Minimizes (or maximizes) `m`. With `cutoff` set (in the model's own
/// objective units) the search returns the first feasible assignment whose
/// objective is at least as good as the cutoff, or `Infeasible` if none is.
pub(super) fn search(m: &IlpModel, budget: Budget, start: Option<&[bool]>, cutoff: Option<f64>) -> IlpSolution {
    let sign = if m.sense == Sense::Minimize { 1.0 } else { -1.0 };
    let mut var_cons = vec![Vec::new(); m.num_vars];
    for (ci, c) in m.constraints.iter().enumerate() {
        for &(v, _) in &c.terms {
            var_cons[v].push(ci);
        }
    }
    let mut s = Search {
        m,
        cost: m.objective.iter().map(|c| sign * c).collect(),
        constant: sign * m.objective_constant,
        integral: m.integral_objective(),
        active: m.constraints.iter().map(|c| !c.lazy).collect(),
        var_cons,
        vars: Vec::new(),
        use_lp: m.num_vars <= LP_VAR_LIMIT,
        incumbent: None,
        cutoff: cutoff.map(|c| sign * c),
        nodes: 0,
        budget,
        started: Instant::now(),
    };
    if let Some(x) = start {
        if cutoff.is_none() && m.is_feasible(x) {
            s.incumbent = Some((s.objective(x), x.to_vec()));
        }
    }
    let exhausted = s.run();
    let status = match (&s.incumbent, exhausted) {
        (_, true) => SolveStatus::BudgetExhausted,
        (Some(_), false) => SolveStatus::Optimal,
        (None, false) => SolveStatus::Infeasible,
    };
    match s.incumbent {
        Some((_, x)) => IlpSolution {
            status,
            objective_value: Some(m.evaluate(&x)),
            assignment: Some(x),
            nodes_explored: s.nodes,
        },
        None => IlpSolution { status, ..IlpSolution::infeasible(s.nodes) },
    }
}

impl Search<'_> {
    fn objective(&self, x: &[bool]) -> f64 {
        self.constant + self.cost.iter().zip(x).filter(|(_, &b)| b).map(|(c, _)| c).sum::<f64>()
    }

    fn out_of_budget(&self) -> bool {
        self.budget.node_limit.is_some_and(|l| self.nodes >= l)
            || self.budget.time_limit.is_some_and(|t| self.started.elapsed() >= t)
    }

    fn done(&self) -> bool {
        self.cutoff.is_some() && self.incumbent.is_some()
    }

    /// True when no assignment below `bound` can beat the incumbent or meet
    /// the cutoff.
    fn prune(&self, bound: f64) -> bool {
        let b = if self.integral { (bound - TOL).ceil() } else { bound };
        let tol = TOL * (1.0 + b.abs());
        if let Some(c) = self.cutoff {
            if b > c + tol {
                return true;
            }
        }
        match &self.incumbent {
            Some((inc, _)) => b >= inc - tol,
            None => false,
        }
    }

    fn offer(&mut self, x: Vec<bool>) {
        let obj = self.objective(&x);
        if let Some(c) = self.cutoff {
            if obj > c + TOL * (1.0 + c.abs()) {
                return;
            }
        }
        let better = match &self.incumbent {
            Some((inc, _)) => obj < inc - 1e-9 * (1.0 + inc.abs()),
            None => true,
        };
        if better {
            self.incumbent = Some((obj, x));
        }
    }

    /// Returns true if the budget ran out with nodes left.
    fn run(&mut self) -> bool {
        let n = self.m.num_vars;
        let mut stack = vec![Node { fixed: vec![None; n], dirty: Vec::new(), lp: None }];
        let mut root = true;
        while let Some(node) = stack.pop() {
            if self.done() {
                return false;
            }
            if self.out_of_budget() {
                return true;
            }
            self.nodes += 1;
            let mut fixed = node.fixed;
            let seeds: Vec<usize> = if root {
                (0..self.m.constraints.len()).filter(|&c| self.active[c]).collect()
            } else {
                let mut v: Vec<usize> =
                    node.dirty.iter().flat_map(|&x| self.var_cons[x].iter().copied()).filter(|&c| self.active[c]).collect();
                v.sort_unstable();
                v.dedup();
                v
            };
            root = false;
            if !self.propagate(&mut fixed, seeds) {
                continue;
            }
            if self.prune(self.trivial_bound(&fixed)) {
                continue;
            }
            if fixed.iter().all(Option::is_some) {
                let x: Vec<bool> = fixed.iter().map(|v| v.unwrap()).collect();
                if self.m.is_feasible(&x) {
                    self.offer(x);
                }
                continue;
            }

            let lp = if self.use_lp { self.relax(node.lp.as_deref(), &fixed) } else { Lp::Failed };
            let (branch_var, preferred, lp) = match lp {
                Lp::Infeasible => continue,
                Lp::Ok(state) => {
                    let bound = self.constant + state.sol.objective();
                    if self.prune(bound) {
                        continue;
                    }
                    let values: Vec<f64> = self.vars.iter().map(|&v| state.sol.var_value_raw(v)).collect();
                    match most_fractional(&fixed, &values) {
                        Some(v) => (v, values[v] >= 0.5, Some(state)),
                        None => {
                            let x: Vec<bool> = (0..n).map(|v| fixed[v].unwrap_or(values[v] >= 0.5)).collect();
                            if self.m.is_feasible(&x) {
                                self.offer(x);
                                continue;
                            }
                            let v = first_free(&fixed);
                            (v, values[v] >= 0.5, Some(state))
                        }
                    }
                }
                Lp::Failed => {
                    let v = first_free(&fixed);
                    (v, self.cost[v] < 0.0, None)
                }
            };

            let lp = lp.map(Rc::new);
            for value in [!preferred, preferred] {
                let mut child = fixed.clone();
                child[branch_var] = Some(value);
                stack.push(Node { fixed: child, dirty: vec![branch_var], lp: lp.clone() });
            }
        }
        false
    }

    fn trivial_bound(&self, fixed: &[Option<bool>]) -> f64 {
        self.constant
            + fixed
                .iter()
                .zip(&self.cost)
                .map(|(f, &c)| match f {
                    Some(true) => c,
                    Some(false) => 0.0,
                    None => c.min(0.0),
                })
                .sum::<f64>()
    }

    /// Activity-bound propagation over active constraints, starting from
    /// `queue`. Returns false on a proven conflict.
    fn propagate(&self, fixed: &mut [Option<bool>], mut queue: Vec<usize>) -> bool {
        let mut queued = vec![false; self.m.constraints.len()];
        for &c in &queue {
            queued[c] = true;
        }
        while let Some(ci) = queue.pop() {
            queued[ci] = false;
            let c = &self.m.constraints[ci];
            let (mut lo, mut hi) = (0.0, 0.0);
            for &(v, a) in &c.terms {
                match fixed[v] {
                    Some(true) => {
                        lo += a;
                        hi += a;
                    }
                    Some(false) => {}
                    None => {
                        lo += a.min(0.0);
                        hi += a.max(0.0);
                    }
                }
            }
            let tol = TOL * (1.0 + c.rhs.abs());
            let upper = matches!(c.relation, Relation::Le | Relation::Eq);
            let lower = matches!(c.relation, Relation::Ge | Relation::Eq);
            if (upper && lo > c.rhs + tol) || (lower && hi < c.rhs - tol) {
                return false;
            }
            let mut forced = None;
            for &(v, a) in &c.terms {
                if fixed[v].is_some() || a == 0.0 {
                    continue;
                }
                // Fixing v against its best case moves lo up (hi down) by |a|.
                if upper && lo + a.abs() > c.rhs + tol {
                    forced = Some((v, a < 0.0));
                    break;
                }
                if lower && hi - a.abs() < c.rhs - tol {
                    forced = Some((v, a > 0.0));
                    break;
                }
            }
            if let Some((v, val)) = forced {
                fixed[v] = Some(val);
                for &other in &self.var_cons[v] {
                    if self.active[other] && !queued[other] {
                        queued[other] = true;
                        queue.push(other);
                    }
                }
                if !queued[ci] {
                    queued[ci] = true;
                    queue.push(ci);
                }
            }
        }
        true
    }

    fn root_lp(&mut self) -> Result<SolveOutcome, microlp::Error> {
        let mut p = Problem::new(OptimizationDirection::Minimize);
        self.vars = self.cost.iter().map(|&c| p.add_var(c, (0.0, 1.0))).collect();
        for (ci, c) in self.m.constraints.iter().enumerate() {
            if self.active[ci] {
                p.add_constraint(self.expr(&c.terms), op(c.relation), c.rhs);
            }
        }
        p.solve()
    }

    fn expr(&self, terms: &[(usize, f64)]) -> Vec<(Variable, f64)> {
        terms.iter().map(|&(v, a)| (self.vars[v], a)).collect()
    }

    /// Relaxation of the node: parent state plus the fixings its point
    /// violates, plus any violated lazy constraints.
    fn relax(&mut self, parent: Option<&LpState>, fixed: &[Option<bool>]) -> Lp {
        let outcome = match parent {
            Some(p) => Ok(SolveOutcome::Solution(p.sol.clone())),
            None => self.root_lp(),
        };
        let mut state = match outcome {
            Ok(SolveOutcome::Solution(sol)) => LpState {
                sol,
                fixed: parent.map_or_else(|| vec![None; fixed.len()], |p| p.fixed.clone()),
            },
            Ok(SolveOutcome::Interrupted(_)) => return Lp::Failed,
            Err(microlp::Error::Infeasible) => return Lp::Infeasible,
            Err(_) => return Lp::Failed,
        };
        loop {
            let pending = (0..fixed.len()).find(|&v| {
                fixed[v].is_some_and(|b| {
                    state.fixed[v] != Some(b) && (state.sol.var_value_raw(self.vars[v]) - if b { 1.0 } else { 0.0 }).abs() > 1e-9
                })
            });
            if let Some(v) = pending {
                let b = fixed[v].unwrap();
                state.fixed[v] = Some(b);
                match state.sol.fix_var(self.vars[v], if b { 1.0 } else { 0.0 }) {
                    Ok(SolveOutcome::Solution(sol)) => state.sol = sol,
                    Ok(SolveOutcome::Interrupted(_)) => return Lp::Failed,
                    Err(microlp::Error::Infeasible) => return Lp::Infeasible,
                    Err(_) => return Lp::Failed,
                }
                continue;
            }
            let cuts = self.violated_lazy(&state.sol);
            if cuts.is_empty() {
                return Lp::Ok(state);
            }
            for ci in cuts {
                self.active[ci] = true;
                let c = &self.m.constraints[ci];
                match state.sol.add_constraint(self.expr(&c.terms), op(c.relation), c.rhs) {
                    Ok(SolveOutcome::Solution(sol)) => state.sol = sol,
                    Ok(SolveOutcome::Interrupted(_)) => return Lp::Failed,
                    Err(microlp::Error::Infeasible) => return Lp::Infeasible,
                    Err(_) => return Lp::Failed,
                }
            }
        }
    }

    /// Lazy constraints the relaxation point violates, worst first. Constraints
    /// already active in some relaxation are rechecked too: the warm-start
    /// state may predate their activation.
    fn violated_lazy(&self, sol: &Solution) -> Vec<usize> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for (ci, c) in self.m.constraints.iter().enumerate() {
            if !c.lazy {
                continue;
            }
            let lhs: f64 = c.terms.iter().map(|&(v, a)| a * sol.var_value_raw(self.vars[v])).sum();
            let excess = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            if excess > TOL * (1.0 + c.rhs.abs()) {
                out.push((excess, ci));
            }
        }
        out.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        out.truncate(CUTS_PER_ROUND);
        out.into_iter().map(|(_, ci)| ci).collect()
    }
}

fn op(r: Relation) -> ComparisonOp {
    match r {
        Relation::Le => ComparisonOp::Le,
        Relation::Ge => ComparisonOp::Ge,
        Relation::Eq => ComparisonOp::Eq,
    }
}

/// Free variable whose relaxation value is farthest from integral, lowest
/// index on ties; `None` if all free values are integral.
fn most_fractional(fixed: &[Option<bool>], values: &[f64]) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for (v, &x) in values.iter().enumerate() {
        if fixed[v].is_some() {
            continue;
        }
        let frac = x.min(1.0 - x);
        if frac > TOL && best.is_none_or(|(f, _)| frac > f + 1e-12) {
            best = Some((frac, v));
        }
    }
    best.map(|(_, v)| v)
}

fn first_free(fixed: &[Option<bool>]) -> usize {
    fixed.iter().position(Option::is_none).expect("a free variable remains")
}
