//! Successive convex approximation with alternating optimization.
//!
//! The passive step updates the surface (and the common split) with the
//! precoders and time allocation fixed; the active step does the converse.
//! Each step solves a sequence of convex programs whose optimum lower-bounds
//! the true objective and is tight at the expansion point, so every inner
//! trace is non-decreasing. The surface constraints are handled by a penalty
//! whose weight doubles while the residual stays above tolerance.

mod builder;
pub mod problem;
pub mod surrogates;

use alloc::vec::Vec;

use crate::conic::{ConicProgram, ConicSolver, SolveStatus};
use crate::model::{DesignPoint, StarProtocol};

use builder::{build, extract, StepKind};
pub use problem::{Problem, RateModel, Restrictions, LAMBDA_MIN};

/// Tolerances are relative to `max(|objective|, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoOptions {
    pub eps_passive: f64,
    pub eps_active: f64,
    pub eps_outer: f64,
    pub max_inner: usize,
    pub max_outer: usize,
    /// Initial penalty weight. The linearized penalty also acts as a
    /// proximal term of this weight on the surface, so a large start value
    /// stalls the passive steps; the weight is doubled on demand instead.
    pub penalty: f64,
    pub penalty_max: f64,
    /// Surface residual above which the penalty weight is doubled.
    pub residual_tol: f64,
    pub solver_tol: f64,
    /// Safeguarded extrapolation between outer iterations (kept only when
    /// it raises the true objective).
    pub extrapolate: bool,
}

impl Default for AoOptions {
    fn default() -> Self {
        Self {
            eps_passive: 1e-3,
            eps_active: 1e-3,
            eps_outer: 1e-3,
            max_inner: 30,
            max_outer: 30,
            penalty: 0.01,
            penalty_max: 1e4,
            residual_tol: 1e-3,
            solver_tol: 1e-8,
            extrapolate: true,
        }
    }
}

/// Outcome of one passive stage.
#[derive(Debug, Clone)]
pub struct PassiveOutcome {
    pub point: DesignPoint,
    /// One trace of `J + C·penalty` per penalty weight `C`.
    pub traces: Vec<Vec<f64>>,
    pub penalty: f64,
    pub residual: f64,
    pub solver_failed: bool,
}

#[derive(Debug, Clone)]
pub struct ActiveOutcome {
    pub point: DesignPoint,
    pub trace: Vec<f64>,
    pub solver_failed: bool,
}

#[derive(Debug, Clone)]
pub struct AoResult {
    pub point: DesignPoint,
    pub objective: f64,
    /// Objective after each completed outer iteration, starting with the
    /// initial point.
    pub outer_trace: Vec<f64>,
    pub passive_traces: Vec<Vec<f64>>,
    pub active_traces: Vec<Vec<f64>>,
    pub outer_iterations: usize,
    pub converged: bool,
    pub solver_failed: bool,
    pub final_penalty: f64,
}

/// Largest violation of the surface constraints (binariness included for MS).
pub fn surface_residual(pr: &Problem, point: &DesignPoint) -> f64 {
    let mut res: f64 = 0.0;
    for i in 0..pr.config.elements {
        let (r, t) = (point.psi_r[i], point.psi_t[i]);
        match pr.mode().protocol() {
            StarProtocol::EnergySplitting => res = res.max((r.norm_sqr() + t.norm_sqr() - 1.0).abs()),
            StarProtocol::ModeSwitching => {
                let b = r.norm_sqr();
                res = res.max((b + t.norm_sqr() - 1.0).abs()).max(b.min(1.0 - b).abs());
            }
            StarProtocol::TimeSwitching => res = res.max((r.norm() - 1.0).abs()).max((t.norm() - 1.0).abs()),
        }
    }
    res
}

fn tolerance(old: f64) -> f64 {
    1e-9 * old.abs().max(1.0)
}

/// Looser tolerances tried after a numerical failure near convergence.
const TOL_RETRIES: [f64; 3] = [1.0, 10.0, 100.0];

/// Solves one convex step; `None` on solver failure.
fn step<S: ConicSolver + ?Sized>(
    pr: &Problem,
    point: &DesignPoint,
    kind: StepKind,
    solver: &S,
    tol: f64,
) -> Option<DesignPoint> {
    let sp = build(pr, point, kind);
    for factor in TOL_RETRIES {
        let res = solver.solve(&sp.program, tol * factor);
        match res.status {
            SolveStatus::Optimal if res.x.iter().all(|v| v.is_finite()) => {
                return Some(pr.clean(&extract(pr, point, &sp, &res.x)));
            }
            SolveStatus::Infeasible | SolveStatus::Unbounded => return None,
            _ => {}
        }
    }
    None
}

/// Inner loop shared by both steps: iterate while the true value improves by
/// at least `eps`; a decrease beyond round-off rejects the step.
fn inner_loop<S: ConicSolver + ?Sized>(
    pr: &Problem,
    start: DesignPoint,
    kind: StepKind,
    eps: f64,
    opts: &AoOptions,
    solver: &S,
    value: impl Fn(&DesignPoint) -> f64,
) -> (DesignPoint, Vec<f64>, bool) {
    let mut point = start;
    let mut current = value(&point);
    let mut trace = alloc::vec![current];
    for _ in 0..opts.max_inner {
        let Some(next) = step(pr, &point, kind, solver, opts.solver_tol) else {
            return (point, trace, true);
        };
        let v = value(&next);
        if !v.is_finite() || v < current - tolerance(current) {
            break;
        }
        let gain = v - current;
        point = next;
        let scale = current.abs().max(1.0);
        current = current.max(v);
        trace.push(current);
        if gain < eps * scale {
            break;
        }
    }
    (point, trace, false)
}

/// Passive beamforming: penalized SCA over the surface with the penalty
/// weight doubled until the surface residual is within tolerance.
pub fn solve_passive<S: ConicSolver + ?Sized>(
    pr: &Problem,
    point: &DesignPoint,
    penalty: f64,
    opts: &AoOptions,
    solver: &S,
) -> PassiveOutcome {
    let mut c = penalty;
    let mut point = point.clone();
    let mut traces = Vec::new();
    if !pr.has_surface() {
        return PassiveOutcome { residual: 0.0, point, traces, penalty: c, solver_failed: false };
    }
    loop {
        let kind = StepKind::Passive { penalty: c };
        let (p, trace, failed) =
            inner_loop(pr, point, kind, opts.eps_passive, opts, solver, |q| pr.objective(q) + c * pr.penalty(q));
        point = p;
        traces.push(trace);
        let residual = surface_residual(pr, &point);
        if failed || residual <= opts.residual_tol || c >= opts.penalty_max || c <= 0.0 {
            return PassiveOutcome { point, traces, penalty: c, residual, solver_failed: failed };
        }
        c = (2.0 * c).min(opts.penalty_max);
    }
}

/// Active beamforming: SCA over precoders, common split and time allocation.
pub fn solve_active<S: ConicSolver + ?Sized>(
    pr: &Problem,
    point: &DesignPoint,
    opts: &AoOptions,
    solver: &S,
) -> ActiveOutcome {
    let (point, trace, solver_failed) =
        inner_loop(pr, point.clone(), StepKind::Active, opts.eps_active, opts, solver, |q| pr.objective(q));
    ActiveOutcome { point, trace, solver_failed }
}

/// Alternates passive and active steps from `init` until the objective gain
/// of an outer iteration drops below `eps_outer`.
///
/// After each passive stage the surface is projected onto its exact
/// feasible set, so every returned point satisfies the surface constraints
/// exactly. An outer iteration that would lower the objective is discarded.
pub fn alternate<S: ConicSolver + ?Sized>(
    pr: &Problem,
    init: &DesignPoint,
    opts: &AoOptions,
    solver: &S,
) -> AoResult {
    let mut point = pr.clean(&pr.project_surface(init));
    let mut current = pr.objective(&point);
    let mut out = AoResult {
        point: point.clone(),
        objective: current,
        outer_trace: alloc::vec![current],
        passive_traces: Vec::new(),
        active_traces: Vec::new(),
        outer_iterations: 0,
        converged: false,
        solver_failed: false,
        final_penalty: opts.penalty,
    };
    let mut c = opts.penalty;
    let mut beta = 1.0;
    let mut previous: Option<DesignPoint> = None;
    for _ in 0..opts.max_outer {
        out.outer_iterations += 1;
        let start = point.clone();
        let passive = solve_passive(pr, &point, c, opts, solver);
        c = passive.penalty;
        out.passive_traces.extend(passive.traces);
        let projected = pr.project_surface(&passive.point);
        let active = solve_active(pr, &projected, opts, solver);
        out.active_traces.push(active.trace);
        out.solver_failed |= passive.solver_failed || active.solver_failed;

        let mut next = active.point;
        let mut v = pr.objective(&next);
        if !v.is_finite() || v < current - tolerance(current) {
            out.converged = true;
            break;
        }
        if opts.extrapolate {
            if let Some(prev) = &previous {
                let y = extrapolated(pr, prev, &next, beta);
                let vy = pr.objective(&y);
                if vy > v {
                    next = y;
                    v = vy;
                    beta = (1.5 * beta).min(4.0);
                } else {
                    beta = (0.5 * beta).max(0.25);
                }
            }
        }
        previous = Some(start);
        let gain = v - current;
        point = next;
        let scale = current.abs().max(1.0);
        current = current.max(v);
        out.outer_trace.push(current);
        if gain < opts.eps_outer * scale {
            out.converged = true;
            break;
        }
        if out.solver_failed {
            break;
        }
    }
    out.objective = pr.objective(&point);
    out.point = point;
    out.final_penalty = c;
    out
}

/// `x + β (x - x_prev)` on precoders, surface and time allocation, mapped
/// back onto the feasible set.
fn extrapolated(pr: &Problem, prev: &DesignPoint, x: &DesignPoint, beta: f64) -> DesignPoint {
    let mut y = x.clone();
    let b = crate::linalg::Complex64::new(beta, 0.0);
    y.precoders = &x.precoders + (&x.precoders - &prev.precoders) * b;
    y.psi_r = &x.psi_r + (&x.psi_r - &prev.psi_r) * b;
    y.psi_t = &x.psi_t + (&x.psi_t - &prev.psi_t) * b;
    let lin = |a: f64, p: f64| a + beta * (a - p);
    y.lambda = lin(x.lambda, prev.lambda);
    y.lambda_r = lin(x.lambda_r, prev.lambda_r);
    y.lambda_1 = lin(x.lambda_1, prev.lambda_1);
    y.lambda_2 = lin(x.lambda_2, prev.lambda_2);
    pr.clean(&pr.project_surface(&y))
}

/// Full AO run from the seeded initial point.
pub fn optimize<S: ConicSolver + ?Sized>(pr: &Problem, seed: u64, opts: &AoOptions, solver: &S) -> AoResult {
    alternate(pr, &pr.initial_point(seed), opts, solver)
}

/// The convex program of one passive step at `point`, for export.
pub fn passive_program(pr: &Problem, point: &DesignPoint, penalty: f64) -> ConicProgram {
    build(pr, point, StepKind::Passive { penalty }).program
}

/// The convex program of one active step at `point`, for export.
pub fn active_program(pr: &Problem, point: &DesignPoint) -> ConicProgram {
    build(pr, point, StepKind::Active).program
}

#[cfg(all(test, feature = "clarabel"))]
mod tests {
    use super::*;
    use crate::channel::{Scenario, ScenarioSpec};
    use crate::conic::ClarabelSolver;
    use crate::model::Mode;

    fn problem(mode: Mode, elements: usize, seed: u64) -> Problem {
        let spec = ScenarioSpec { elements, mode, ..ScenarioSpec::default() }.with_snr_db(20.0).unwrap();
        let s = Scenario::draw(seed, &spec).unwrap();
        Problem::new(s.config, s.channels).unwrap()
    }

    fn non_decreasing(t: &[f64]) -> bool {
        t.windows(2).all(|w| w[1] >= w[0] - 1e-6)
    }

    #[test]
    fn step_bound_is_tight_at_expansion_point() {
        let solver = ClarabelSolver::default();
        for mode in [Mode::FE, Mode::HE] {
            let pr = problem(mode, 4, 1);
            let p = pr.initial_point(0);
            let j = pr.objective(&p);
            let res = solver.solve(&active_program(&pr, &p), 1e-8);
            assert_eq!(res.status, SolveStatus::Optimal, "{mode}");
            assert!(res.objective_value >= j - 1e-6, "{mode}: {} < {j}", res.objective_value);
            let f = j + 100.0 * pr.penalty(&p);
            let res = solver.solve(&passive_program(&pr, &p, 100.0), 1e-8);
            assert_eq!(res.status, SolveStatus::Optimal, "{mode}");
            assert!(res.objective_value >= f - 1e-6, "{mode}: {} < {f}", res.objective_value);
        }
    }

    #[test]
    fn ao_traces_are_monotone() {
        let solver = ClarabelSolver::default();
        for mode in [Mode::FE, Mode::HE] {
            let pr = problem(mode, 8, 2);
            let r = optimize(&pr, 2, &AoOptions::default(), &solver);
            assert!(!r.solver_failed, "{mode}");
            assert!(non_decreasing(&r.outer_trace), "{mode}: {:?}", r.outer_trace);
            for t in r.passive_traces.iter().chain(&r.active_traces) {
                assert!(non_decreasing(t), "{mode}: {t:?}");
            }
            assert!(surface_residual(&pr, &r.point) < 1e-9, "{mode}");
            assert!(r.objective >= r.outer_trace[0]);
            std::println!("{mode}: {:?} iters {} C {}", r.outer_trace, r.outer_iterations, r.final_penalty);
        }
    }
}
