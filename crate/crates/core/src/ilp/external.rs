//! Adapter for external solver executables.
//!
//! The command line may contain `{lp}` (replaced by the path of the exported
//! model) and `{sol}` (path the solver writes its solution to). Without
//! `{sol}` the solution is read from standard output. Solution text is
//! scanned for `name value` pairs; variables not mentioned are zero.

use std::path::PathBuf;
use std::process::Command;
use std::sync::atomic::{AtomicU64, Ordering};

use super::{export_standard_lp, IlpModel, IlpSolution, SolveStatus};

pub const ENV_VAR: &str = "TORO_ILP_SOLVER";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalSolver {
    pub program: String,
    pub args: Vec<String>,
}

static COUNTER: AtomicU64 = AtomicU64::new(0);

impl ExternalSolver {
    /// Splits a command line on whitespace.
    pub fn parse(cmdline: &str) -> Option<Self> {
        let mut it = cmdline.split_whitespace().map(String::from);
        let program = it.next()?;
        Some(ExternalSolver { program, args: it.collect() })
    }

    pub fn from_env() -> Option<Self> {
        std::env::var(ENV_VAR).ok().and_then(|s| Self::parse(&s))
    }

    pub fn solve(&self, m: &IlpModel) -> Result<IlpSolution, String> {
        let stem = format!("toro-{}-{}", std::process::id(), COUNTER.fetch_add(1, Ordering::Relaxed));
        let dir = std::env::temp_dir();
        let lp: PathBuf = dir.join(format!("{stem}.lp"));
        let sol: PathBuf = dir.join(format!("{stem}.sol"));
        std::fs::write(&lp, export_standard_lp(m)).map_err(|e| format!("writing {}: {e}", lp.display()))?;

        let uses_sol = self.args.iter().any(|a| a.contains("{sol}"));
        let args: Vec<String> = self
            .args
            .iter()
            .map(|a| a.replace("{lp}", &lp.to_string_lossy()).replace("{sol}", &sol.to_string_lossy()))
            .collect();
        let output = Command::new(&self.program).args(&args).output();
        let _ = std::fs::remove_file(&lp);
        let output = output.map_err(|e| format!("running {}: {e}", self.program))?;
        let text = if uses_sol {
            let t = std::fs::read_to_string(&sol);
            let _ = std::fs::remove_file(&sol);
            t.map_err(|e| format!("{} wrote no solution ({e}); exit status {}", self.program, output.status))?
        } else {
            String::from_utf8_lossy(&output.stdout).into_owned()
        };
        parse_solution(m, &text)
    }
}

/// Reads `name value` pairs (also `index name value ...` rows) into an
/// assignment and checks it against `m`.
pub fn parse_solution(m: &IlpModel, text: &str) -> Result<IlpSolution, String> {
    if text.to_ascii_lowercase().contains("infeasible") {
        return Ok(IlpSolution::infeasible(0));
    }
    let names = super::lp_format::parse_lp(&export_standard_lp(m))?.var_names;
    let index: std::collections::HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let mut x = vec![false; m.num_vars];
    let mut seen = 0;
    for line in text.lines() {
        let toks: Vec<&str> = line.split_whitespace().collect();
        for w in toks.windows(2) {
            if let (Some(&v), Ok(val)) = (index.get(w[0]), w[1].parse::<f64>()) {
                x[v] = val > 0.5;
                seen += 1;
                break;
            }
        }
    }
    if seen == 0 && m.num_vars > 0 {
        return Err("no variable values in solver output".into());
    }
    if !m.is_feasible(&x) {
        return Err("solver assignment violates the model".into());
    }
    Ok(IlpSolution {
        status: SolveStatus::Optimal,
        objective_value: Some(m.evaluate(&x)),
        assignment: Some(x),
        nodes_explored: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{Relation, Sense};
    use super::*;

    fn model() -> IlpModel {
        let mut m = IlpModel::new(Sense::Minimize);
        let a = m.add_var("a", 1.0);
        let b = m.add_var("b", 2.0);
        m.add_constraint(vec![(a, 1.0), (b, 1.0)], Relation::Ge, 1.0);
        m
    }

    #[test]
    fn parses_pairs_and_rows() {
        let m = model();
        let s = parse_solution(&m, "# Objective value = 1\na 1\nb 0\n").unwrap();
        assert_eq!(s.assignment, Some(vec![true, false]));
        let s = parse_solution(&m, "Optimal - objective value 2\n      1 b     1     2\n").unwrap();
        assert_eq!(s.assignment, Some(vec![false, true]));
        assert!(parse_solution(&m, "a 0\nb 0\n").is_err());
        assert_eq!(parse_solution(&m, "Problem is INFEASIBLE").unwrap().status, SolveStatus::Infeasible);
    }

    #[cfg(unix)]
    #[test]
    fn runs_a_command() {
        // `sh -c` stands in for a solver: it ignores the model and prints a solution.
        let solver = ExternalSolver {
            program: "sh".into(),
            args: vec!["-c".into(), "test -s {lp} && printf 'a 1\\nb 0\\n' > {sol}".into()],
        };
        let s = solver.solve(&model()).unwrap();
        assert_eq!(s.objective_value, Some(1.0));
    }

    #[test]
    fn command_line_split() {
        let s = ExternalSolver::parse("cbc {lp} solve solu {sol}").unwrap();
        assert_eq!(s.program, "cbc");
        assert_eq!(s.args.len(), 4);
        assert!(ExternalSolver::parse("   ").is_none());
    }
}
