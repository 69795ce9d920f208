//! Sparse linear programs solved to an optimal vertex.
//!
//! The backend is a bounded-variable simplex, so every optimal solution it
//! reports is basic: a vertex of the feasible polytope.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use microlp::{ComparisonOp, OptimizationDirection, Problem};

use crate::error::{Error, Result};

/// Values within this distance of 0 or 1 count as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;
/// Allowed constraint violation of a reported optimum.
pub const FEASIBILITY_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub terms: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * values[j]).sum()
    }

    /// Amount by which `values` violate the row (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// A minimization LP with bounded variables and sparse rows.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LpModel {
    objective: Vec<f64>,
    bounds: Vec<(f64, f64)>,
    constraints: Vec<Constraint>,
}

impl LpModel {
    pub fn new() -> LpModel {
        LpModel::default()
    }

    /// Declares a variable with objective coefficient `cost` and bounds
    /// `[lo, hi]`; returns its index.
    pub fn add_var(&mut self, cost: f64, lo: f64, hi: f64) -> usize {
        assert!(cost.is_finite(), "objective coefficient must be finite");
        assert!(lo <= hi, "empty bound interval [{lo}, {hi}]");
        self.objective.push(cost);
        self.bounds.push((lo, hi));
        self.objective.len() - 1
    }

    pub fn add_constraint(
        &mut self,
        terms: Vec<(usize, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> Result<usize> {
        if !rhs.is_finite() {
            return Err(Error::Domain(format!(
                "right-hand side {rhs} is not finite"
            )));
        }
        for &(j, a) in &terms {
            if j >= self.objective.len() {
                return Err(Error::Domain(format!(
                    "constraint references undeclared variable {j}"
                )));
            }
            if !a.is_finite() {
                return Err(Error::Domain(format!(
                    "coefficient {a} of variable {j} is not finite"
                )));
            }
        }
        self.constraints.push(Constraint {
            terms,
            relation,
            rhs,
        });
        Ok(self.constraints.len() - 1)
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Copy with every objective coefficient set to zero.
    pub fn without_objective(&self) -> LpModel {
        LpModel {
            objective: vec![0.0; self.objective.len()],
            ..self.clone()
        }
    }

    /// Fixed-format MPS text, for cross-checking with external solvers.
    pub fn to_mps(&self, name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "NAME          {name}");
        out.push_str("ROWS\n N  COST\n");
        for (i, c) in self.constraints.iter().enumerate() {
            let kind = match c.relation {
                Relation::Le => 'L',
                Relation::Ge => 'G',
                Relation::Eq => 'E',
            };
            let _ = writeln!(out, " {kind}  R{i}");
        }
        let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.num_vars()];
        for (i, c) in self.constraints.iter().enumerate() {
            for &(j, a) in &c.terms {
                columns[j].push((i, a));
            }
        }
        out.push_str("COLUMNS\n");
        for (j, col) in columns.iter().enumerate() {
            let var = format!("X{j}");
            let _ = writeln!(
                out,
                "    {var:<8}  {:<8}  {:>12}",
                "COST",
                fmt_num(self.objective[j])
            );
            for &(i, a) in col {
                let _ = writeln!(
                    out,
                    "    {var:<8}  {:<8}  {:>12}",
                    format!("R{i}"),
                    fmt_num(a)
                );
            }
        }
        out.push_str("RHS\n");
        for (i, c) in self.constraints.iter().enumerate() {
            if c.rhs != 0.0 {
                let _ = writeln!(
                    out,
                    "    {:<8}  {:<8}  {:>12}",
                    "RHS",
                    format!("R{i}"),
                    fmt_num(c.rhs)
                );
            }
        }
        out.push_str("BOUNDS\n");
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            let var = format!("X{j}");
            if lo == hi {
                let _ = writeln!(out, " FX {:<8}  {var:<8}  {:>12}", "BND", fmt_num(lo));
                continue;
            }
            if lo == f64::NEG_INFINITY {
                let _ = writeln!(out, " MI {:<8}  {var:<8}", "BND");
            } else if lo != 0.0 {
                let _ = writeln!(out, " LO {:<8}  {var:<8}  {:>12}", "BND", fmt_num(lo));
            }
            if hi.is_finite() {
                let _ = writeln!(out, " UP {:<8}  {var:<8}  {:>12}", "BND", fmt_num(hi));
            }
        }
        out.push_str("ENDATA\n");
        out
    }

    pub fn write_mps(&self, path: &Path, name: &str) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        file.write_all(self.to_mps(name).as_bytes())?;
        Ok(())
    }
}

fn fmt_num(x: f64) -> String {
    let s = format!("{x}");
    if s.len() <= 12 {
        s
    } else {
        format!("{x:.6e}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Variable values; empty unless the status is optimal.
    pub values: Vec<f64>,
    pub objective: f64,
    /// The values form a basic solution (a vertex).
    pub is_basic: bool,
}

impl LpSolution {
    fn without_values(status: LpStatus) -> LpSolution {
        let objective = match status {
            LpStatus::Unbounded => f64::NEG_INFINITY,
            _ => f64::INFINITY,
        };
        LpSolution {
            status,
            values: Vec::new(),
            objective,
            is_basic: false,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Number of values strictly inside `(tol, 1 − tol)`.
    pub fn fractional_count(&self) -> usize {
        self.values.iter().filter(|&&x| is_fractional(x)).count()
    }
}

pub fn is_fractional(x: f64) -> bool {
    x > INTEGRALITY_TOL && x < 1.0 - INTEGRALITY_TOL
}

/// Solves `model` to an optimal vertex, or classifies it as infeasible or
/// unbounded.
pub fn solve_lp(model: &LpModel) -> Result<LpSolution> {
    // rows without terms are decided by their right-hand side alone
    for c in model.constraints.iter().filter(|c| c.terms.is_empty()) {
        if c.violation(&[]) > FEASIBILITY_TOL {
            return Ok(LpSolution::without_values(LpStatus::Infeasible));
        }
    }
    if model.num_vars() == 0 {
        return Ok(LpSolution {
            status: LpStatus::Optimal,
            values: Vec::new(),
            objective: 0.0,
            is_basic: true,
        });
    }

    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = model
        .objective
        .iter()
        .zip(&model.bounds)
        .map(|(&c, &(lo, hi))| problem.add_var(c, (lo, hi)))
        .collect();
    for c in model.constraints.iter().filter(|c| !c.terms.is_empty()) {
        let op = match c.relation {
            Relation::Le => ComparisonOp::Le,
            Relation::Ge => ComparisonOp::Ge,
            Relation::Eq => ComparisonOp::Eq,
        };
        problem.add_constraint(c.terms.iter().map(|&(j, a)| (vars[j], a)), op, c.rhs);
    }

    let outcome = match problem.solve() {
        Ok(outcome) => outcome,
        Err(microlp::Error::Infeasible) => {
            return Ok(LpSolution::without_values(LpStatus::Infeasible))
        }
        Err(microlp::Error::Unbounded) => {
            return Ok(LpSolution::without_values(LpStatus::Unbounded))
        }
        Err(e) => {
            return Err(Error::Solver(format!(
                "{e} ({} variables, {} rows)",
                model.num_vars(),
                model.num_constraints()
            )))
        }
    };
    let solution = outcome
        .into_solution()
        .map_err(|_| Error::Solver("solve interrupted before a solution was found".into()))?;

    let values: Vec<f64> = vars
        .iter()
        .zip(&model.bounds)
        .map(|(&v, &(lo, hi))| solution.var_value(v).clamp(lo, hi))
        .collect();
    for (i, c) in model.constraints.iter().enumerate() {
        let scale = 1.0
            + c.terms
                .iter()
                .map(|&(j, a)| (a * values[j]).abs())
                .sum::<f64>();
        let violation = c.violation(&values);
        if violation > FEASIBILITY_TOL * scale {
            return Err(Error::Solver(format!(
                "optimum violates row {i} by {violation:e}"
            )));
        }
    }
    let objective = model
        .objective
        .iter()
        .zip(&values)
        .map(|(c, x)| c * x)
        .sum();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        values,
        objective,
        is_basic: true,
    })
}

/// Whether the constraint system of `model` has a feasible point.
pub fn check_feasible(model: &LpModel) -> Result<bool> {
    let solution = solve_lp(&model.without_objective())?;
    Ok(solution.status == LpStatus::Optimal)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_lower_bound() {
        let mut m = LpModel::new();
        let x = m.add_var(1.0, 0.0, 10.0);
        m.add_constraint(vec![(x, 1.0)], Relation::Ge, 3.0).unwrap();
        let s = solve_lp(&m).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 3.0).abs() < 1e-9);
        assert!((s.values[x] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn contradictory_pair() {
        let mut m = LpModel::new();
        let x = m.add_var(0.0, 0.0, 10.0);
        m.add_constraint(vec![(x, 1.0)], Relation::Ge, 2.0).unwrap();
        m.add_constraint(vec![(x, 1.0)], Relation::Le, 1.0).unwrap();
        assert_eq!(solve_lp(&m).unwrap().status, LpStatus::Infeasible);
        assert!(!check_feasible(&m).unwrap());
    }

    #[test]
    fn unbounded_direction() {
        let mut m = LpModel::new();
        let x = m.add_var(-1.0, 0.0, f64::INFINITY);
        m.add_constraint(vec![(x, 1.0)], Relation::Ge, 1.0).unwrap();
        assert_eq!(solve_lp(&m).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn no_constraints_is_feasible() {
        let mut m = LpModel::new();
        m.add_var(1.0, 0.0, 1.0);
        assert!(check_feasible(&m).unwrap());
        assert!(check_feasible(&LpModel::new()).unwrap());
    }

    #[test]
    fn empty_row_decided_by_rhs() {
        let mut m = LpModel::new();
        m.add_var(1.0, 0.0, 1.0);
        m.add_constraint(vec![], Relation::Ge, 1.0).unwrap();
        assert_eq!(solve_lp(&m).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn rejects_undeclared_variable_and_nan() {
        let mut m = LpModel::new();
        let x = m.add_var(1.0, 0.0, 1.0);
        assert!(m
            .add_constraint(vec![(x + 1, 1.0)], Relation::Le, 1.0)
            .is_err());
        assert!(m
            .add_constraint(vec![(x, f64::NAN)], Relation::Le, 1.0)
            .is_err());
    }

    #[test]
    fn mps_dump_lists_every_section() {
        let mut m = LpModel::new();
        let x = m.add_var(2.0, 0.0, 1.0);
        let y = m.add_var(-1.0, 0.0, 4.0);
        m.add_constraint(vec![(x, 1.0), (y, 1.0)], Relation::Eq, 1.0)
            .unwrap();
        let text = m.to_mps("tiny");
        for section in ["NAME", "ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"] {
            assert!(text.contains(section), "{text}");
        }
        assert!(text.contains(" E  R0"));
        assert!(text.contains(" UP BND       X1"));
    }
}
