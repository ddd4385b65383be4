use alloc::vec::Vec;

use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT};

use super::{ConicProgram, ConicSolver, LinExpr, SolveResult, SolveStatus};

/// Interior-point back end built on Clarabel.
#[derive(Debug, Clone)]
pub struct ClarabelSolver {
    pub max_iter: u32,
}

impl Default for ClarabelSolver {
    fn default() -> Self {
        Self { max_iter: 200 }
    }
}

#[derive(Default)]
struct Rows {
    i: Vec<usize>,
    j: Vec<usize>,
    v: Vec<f64>,
    b: Vec<f64>,
}

impl Rows {
    // Clarabel wants `A x + s = b`, `s ∈ K`; membership of `e(x)` means
    // `s = e(x)`, i.e. row `-a` and right-hand side `constant`.
    fn push(&mut self, e: &LinExpr) {
        let row = self.b.len();
        for &(j, a) in &e.terms {
            self.i.push(row);
            self.j.push(j);
            self.v.push(-a);
        }
        self.b.push(e.constant);
    }
}

impl ConicSolver for ClarabelSolver {
    fn solve(&self, program: &ConicProgram, tol: f64) -> SolveResult {
        let n = program.n_vars;
        let failed = |status| SolveResult { status, x: vec![0.0; n], objective_value: f64::NAN, solver_iters: 0 };
        if program.check().is_err() {
            return failed(SolveStatus::NumericalFailure);
        }
        let mut rows = Rows::default();
        let mut cones = Vec::new();
        if !program.eq_constraints.is_empty() {
            program.eq_constraints.iter().for_each(|e| rows.push(e));
            cones.push(SupportedConeT::ZeroConeT(program.eq_constraints.len()));
        }
        let n_nonneg = program.ineq_constraints.len() + program.nonneg_vars.len();
        if n_nonneg > 0 {
            program.ineq_constraints.iter().for_each(|e| rows.push(e));
            program.nonneg_vars.iter().for_each(|&i| rows.push(&LinExpr::var(i)));
            cones.push(SupportedConeT::NonnegativeConeT(n_nonneg));
        }
        let converted: Vec<_> = program.rsoc_blocks.iter().map(|b| b.to_soc()).collect();
        for block in program.soc_blocks.iter().chain(&converted) {
            rows.push(&block.t);
            block.u.iter().for_each(|e| rows.push(e));
            cones.push(SupportedConeT::SecondOrderConeT(block.u.len() + 1));
        }
        let m = rows.b.len();
        let a = CscMatrix::new_from_triplets(m, n, rows.i, rows.j, rows.v);
        let p = CscMatrix::<f64>::zeros((n, n));
        let q: Vec<f64> = program.objective.iter().map(|c| -c).collect();
        let settings = match DefaultSettingsBuilder::default()
            .verbose(false)
            .max_iter(self.max_iter)
            .tol_gap_abs(tol)
            .tol_gap_rel(tol)
            .tol_feas(tol)
            .build()
        {
            Ok(s) => s,
            Err(_) => return failed(SolveStatus::NumericalFailure),
        };
        let mut solver = match DefaultSolver::new(&p, &q, &a, &rows.b, &cones, settings) {
            Ok(s) => s,
            Err(_) => return failed(SolveStatus::NumericalFailure),
        };
        solver.solve();
        let sol = &solver.solution;
        let x = sol.x.clone();
        let relaxed_ok = || x.iter().all(|v| v.is_finite()) && program.max_violation(&x) <= tol.sqrt();
        let status = match sol.status {
            SolverStatus::Solved => SolveStatus::Optimal,
            SolverStatus::AlmostSolved | SolverStatus::InsufficientProgress if relaxed_ok() => SolveStatus::Optimal,
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => SolveStatus::Infeasible,
            SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => SolveStatus::Unbounded,
            SolverStatus::MaxIterations | SolverStatus::MaxTime => SolveStatus::MaxIter,
            _ => SolveStatus::NumericalFailure,
        };
        let objective_value = program.objective_value(&x);
        SolveResult { status, x, objective_value, solver_iters: sol.iterations }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::DEFAULT_TOL;

    #[test]
    fn one_variable_lp() {
        let mut p = ConicProgram::new();
        let x = p.add_nonneg_var();
        p.add_ge(LinExpr::constant(1.0) - LinExpr::var(x));
        p.objective[x] = 1.0;
        let r = ClarabelSolver::default().solve(&p, DEFAULT_TOL);
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.x[x] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn cone_boundary() {
        let mut p = ConicProgram::new();
        let (x, y, t) = (p.add_var(), p.add_var(), p.add_var());
        p.add_eq(LinExpr::var(x) - LinExpr::constant(0.6));
        p.add_eq(LinExpr::var(y) - LinExpr::constant(0.8));
        p.add_soc(LinExpr::var(t), vec![LinExpr::var(x), LinExpr::var(y)]);
        p.add_ge(LinExpr::constant(1.0) - LinExpr::var(t));
        p.objective[t] = 1.0;
        let r = ClarabelSolver::default().solve(&p, DEFAULT_TOL);
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.objective_value - 1.0).abs() < 1e-7);
    }

    #[test]
    fn infeasible_and_unbounded_reported() {
        let mut p = ConicProgram::new();
        let x = p.add_nonneg_var();
        p.add_ge(LinExpr::constant(-1.0) - LinExpr::var(x));
        assert_eq!(ClarabelSolver::default().solve(&p, DEFAULT_TOL).status, SolveStatus::Infeasible);
        let mut p = ConicProgram::new();
        let x = p.add_nonneg_var();
        p.objective[x] = 1.0;
        assert_eq!(ClarabelSolver::default().solve(&p, DEFAULT_TOL).status, SolveStatus::Unbounded);
    }

    #[test]
    fn rotated_cone() {
        // maximize u s.t. u² ≤ 2·s·t, s = 2, t = 1 → u = 2
        let mut p = ConicProgram::new();
        let u = p.add_var();
        p.add_rsoc(LinExpr::constant(2.0), LinExpr::constant(1.0), vec![LinExpr::var(u)]);
        p.objective[u] = 1.0;
        let r = ClarabelSolver::default().solve(&p, DEFAULT_TOL);
        assert!((r.x[u] - 2.0).abs() < 1e-6);
    }
}
