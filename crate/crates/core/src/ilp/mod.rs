//! Exact 0/1 linear programming.
//!
//! [`IlpModel`] holds a pure binary program. [`Engine`] solves it by
//! depth-first branch and bound over LP relaxations, or hands it to an
//! external solver executable through the LP text format in [`lp_format`].

mod bnb;
pub mod external;
pub mod lp_format;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use external::ExternalSolver;
pub use lp_format::{export_standard_lp, parse_lp};

/// Integrality and feasibility tolerance.
pub const TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl Relation {
    pub fn holds(self, lhs: f64, rhs: f64) -> bool {
        let tol = TOL * (1.0 + rhs.abs());
        match self {
            Relation::Le => lhs <= rhs + tol,
            Relation::Ge => lhs >= rhs - tol,
            Relation::Eq => (lhs - rhs).abs() <= tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub terms: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
    /// Lazy constraints are left out of the root relaxation and added only once
    /// a relaxation violates them. They still bind every returned assignment.
    pub lazy: bool,
}

impl Constraint {
    pub fn lhs(&self, x: &[bool]) -> f64 {
        self.terms.iter().filter(|&&(v, _)| x[v]).map(|&(_, a)| a).sum()
    }

    pub fn satisfied_by(&self, x: &[bool]) -> bool {
        self.relation.holds(self.lhs(x), self.rhs)
    }
}

/// A linear program over binary variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IlpModel {
    pub sense: Sense,
    pub num_vars: usize,
    /// Dense objective coefficients, one per variable.
    pub objective: Vec<f64>,
    pub objective_constant: f64,
    pub constraints: Vec<Constraint>,
    pub var_names: Vec<String>,
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("constraint {constraint} references variable {var} of {num_vars}")]
    BadIndex { constraint: usize, var: usize, num_vars: usize },
    #[error("constraint {constraint} repeats variable {var}")]
    RepeatedVar { constraint: usize, var: usize },
    #[error("non-finite coefficient in {0}")]
    NonFinite(String),
    #[error("objective has {got} coefficients for {num_vars} variables")]
    ObjectiveLength { got: usize, num_vars: usize },
}

impl IlpModel {
    pub fn new(sense: Sense) -> Self {
        IlpModel {
            sense,
            num_vars: 0,
            objective: Vec::new(),
            objective_constant: 0.0,
            constraints: Vec::new(),
            var_names: Vec::new(),
        }
    }

    pub fn add_var(&mut self, name: impl Into<String>, cost: f64) -> usize {
        self.objective.push(cost);
        self.var_names.push(name.into());
        self.num_vars += 1;
        self.num_vars - 1
    }

    pub fn add_constraint(&mut self, terms: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint { terms, relation, rhs, lazy: false });
    }

    pub fn add_lazy_constraint(&mut self, terms: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint { terms, relation, rhs, lazy: true });
    }

    /// `Σ_{p_v=1} (1 − x_v) + Σ_{p_v=0} x_v ≥ 1` over the projected variables:
    /// forbids the 0/1 pattern `x[projection]` and nothing else.
    pub fn add_exclusion_cut(&mut self, projection: &[usize], x: &[bool]) {
        let ones = projection.iter().filter(|&&v| x[v]).count();
        let terms = projection.iter().map(|&v| (v, if x[v] { -1.0 } else { 1.0 })).collect();
        self.add_constraint(terms, Relation::Ge, 1.0 - ones as f64);
    }

    pub fn evaluate(&self, x: &[bool]) -> f64 {
        self.objective_constant
            + self.objective.iter().zip(x).filter(|(_, &b)| b).map(|(c, _)| c).sum::<f64>()
    }

    pub fn is_feasible(&self, x: &[bool]) -> bool {
        x.len() == self.num_vars && self.constraints.iter().all(|c| c.satisfied_by(x))
    }

    pub fn check(&self) -> Result<(), ModelError> {
        if self.objective.len() != self.num_vars {
            return Err(ModelError::ObjectiveLength { got: self.objective.len(), num_vars: self.num_vars });
        }
        if !self.objective_constant.is_finite() || self.objective.iter().any(|c| !c.is_finite()) {
            return Err(ModelError::NonFinite("objective".into()));
        }
        for (ci, c) in self.constraints.iter().enumerate() {
            if !c.rhs.is_finite() || c.terms.iter().any(|(_, a)| !a.is_finite()) {
                return Err(ModelError::NonFinite(format!("constraint {ci}")));
            }
            let mut seen = std::collections::HashSet::new();
            for &(v, _) in &c.terms {
                if v >= self.num_vars {
                    return Err(ModelError::BadIndex { constraint: ci, var: v, num_vars: self.num_vars });
                }
                if !seen.insert(v) {
                    return Err(ModelError::RepeatedVar { constraint: ci, var: v });
                }
            }
        }
        Ok(())
    }

    /// True when every feasible objective value is an integer.
    pub(crate) fn integral_objective(&self) -> bool {
        std::iter::once(&self.objective_constant)
            .chain(&self.objective)
            .all(|c| c.fract() == 0.0 && c.abs() < 1e15)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IlpSolution {
    pub status: SolveStatus,
    /// The optimum, or the incumbent when the budget ran out.
    pub assignment: Option<Vec<bool>>,
    pub objective_value: Option<f64>,
    pub nodes_explored: u64,
}

impl IlpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub(crate) fn infeasible(nodes: u64) -> Self {
        IlpSolution { status: SolveStatus::Infeasible, assignment: None, objective_value: None, nodes_explored: nodes }
    }
}

/// Every optimum found by [`Engine::solve_all_optima`].
#[derive(Debug, Clone, PartialEq)]
pub struct AllOptima {
    pub solutions: Vec<IlpSolution>,
    /// False when a budget ran out before the enumeration was proven complete.
    pub complete: bool,
}

/// Limits on a single solve. `None` means unlimited.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Budget {
    pub node_limit: Option<u64>,
    pub time_limit: Option<Duration>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget::default()
    }

    pub fn nodes(n: u64) -> Self {
        Budget { node_limit: Some(n), time_limit: None }
    }

    pub fn time(d: Duration) -> Self {
        Budget { node_limit: None, time_limit: Some(d) }
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("external solver: {0}")]
    External(String),
}

/// Solves [`IlpModel`]s, in-process unless an external solver is configured.
#[derive(Debug, Clone, Default)]
pub struct Engine {
    pub budget: Budget,
    pub external: Option<ExternalSolver>,
}

impl Engine {
    pub fn new(budget: Budget) -> Self {
        Engine { budget, external: None }
    }

    /// Like [`Engine::new`], routing to the solver named by the
    /// `TORO_ILP_SOLVER` environment variable when it is set.
    pub fn from_env(budget: Budget) -> Self {
        Engine { budget, external: ExternalSolver::from_env() }
    }

    pub fn solve(&self, m: &IlpModel) -> Result<IlpSolution, EngineError> {
        self.solve_with_start(m, None)
    }

    /// `start` seeds the incumbent when it is feasible.
    pub fn solve_with_start(&self, m: &IlpModel, start: Option<&[bool]>) -> Result<IlpSolution, EngineError> {
        m.check()?;
        if let Some(ext) = &self.external {
            return ext.solve(m).map_err(EngineError::External);
        }
        Ok(bnb::search(m, self.budget, start, None))
    }

    /// Enumerates the optima of `m` that differ on `projection`, adding one
    /// exclusion cut per optimum found until none with the optimal value is
    /// left.
    pub fn solve_all_optima(&self, m: &IlpModel, projection: &[usize]) -> Result<AllOptima, EngineError> {
        let first = self.solve(m)?;
        match first.status {
            SolveStatus::Infeasible => return Ok(AllOptima { solutions: vec![], complete: true }),
            SolveStatus::BudgetExhausted => {
                let solutions = if first.assignment.is_some() { vec![first] } else { vec![] };
                return Ok(AllOptima { solutions, complete: false });
            }
            SolveStatus::Optimal => {}
        }
        let best = first.objective_value.expect("optimal solutions carry a value");
        let mut model = m.clone();
        let mut solutions = vec![first];
        loop {
            let last = solutions.last().and_then(|s| s.assignment.as_ref()).expect("optimum has an assignment");
            model.add_exclusion_cut(projection, last);
            let next = if let Some(ext) = &self.external {
                ext.solve(&model).map_err(EngineError::External)?
            } else {
                bnb::search(&model, self.budget, None, Some(best))
            };
            match next.status {
                SolveStatus::Infeasible => return Ok(AllOptima { solutions, complete: true }),
                SolveStatus::BudgetExhausted => return Ok(AllOptima { solutions, complete: false }),
                SolveStatus::Optimal => {
                    let v = next.objective_value.expect("optimal solutions carry a value");
                    let worse = match m.sense {
                        Sense::Minimize => v > best + TOL * (1.0 + best.abs()),
                        Sense::Maximize => v < best - TOL * (1.0 + best.abs()),
                    };
                    if worse {
                        return Ok(AllOptima { solutions, complete: true });
                    }
                    solutions.push(next);
                }
            }
        }
    }
}
