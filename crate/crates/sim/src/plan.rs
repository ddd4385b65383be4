//! Monte-Carlo plans: every (sweep value, seed, scheme, algorithm) cell is
//! an independent, deterministic run.

use std::collections::HashSet;
use std::fs::OpenOptions;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use starcrs_core::baselines::{evaluate_scheme, EvalOptions, Scheme};
use starcrs_core::channel::Scenario;
use starcrs_core::conic::ClarabelSolver;
use starcrs_core::record::{Algorithm, RunRecord};

use crate::config::SimConfig;
use crate::error::io_err;
use crate::table::{ResultRow, ResultTable};
use crate::{Result, SimError, WORKERS_ENV};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sweep {
    #[serde(rename = "N", alias = "elements", alias = "n")]
    Elements,
    #[serde(rename = "SNR", alias = "snr")]
    Snr,
}

impl Sweep {
    pub fn label(self) -> &'static str {
        match self {
            Sweep::Elements => "N",
            Sweep::Snr => "SNR",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub config: SimConfig,
    pub sweep: Sweep,
    pub values: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub algorithms: Vec<Algorithm>,
    pub seeds: Vec<u64>,
    pub output: PathBuf,
}

/// One run of a plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub value: f64,
    pub seed: u64,
    pub scheme: Scheme,
    pub algorithm: Algorithm,
}

impl ExperimentPlan {
    /// Cells in canonical order: value, then scheme, algorithm, seed.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &value in &self.values {
            for &scheme in &self.schemes {
                for &algorithm in &self.algorithms {
                    for &seed in &self.seeds {
                        out.push(Cell { value, seed, scheme, algorithm });
                    }
                }
            }
        }
        out
    }

    fn key_of(&self, c: &Cell) -> crate::table::CellKey {
        crate::table::CellKey {
            scheme: c.scheme.name(),
            algorithm: c.algorithm.name().into(),
            value_bits: c.value.to_bits(),
            seed: c.seed,
        }
    }
}

/// Runs one cell; the scenario depends only on the seed and sweep value.
pub fn run_cell(config: &SimConfig, sweep: Sweep, cell: &Cell) -> Result<RunRecord> {
    let spec = config.scenario_spec(Some((sweep, cell.value)))?;
    let scenario = Scenario::draw(cell.seed, &spec)?;
    let opts = EvalOptions { ao: config.ao_options(), fast: config.fast_options() };
    Ok(evaluate_scheme(
        cell.scheme,
        cell.algorithm,
        &scenario.config,
        &scenario.channels,
        cell.seed,
        &opts,
        &[],
        &ClarabelSolver::default(),
    )?)
}

fn row_of(sweep: Sweep, cell: &Cell, outcome: std::result::Result<RunRecord, String>) -> ResultRow {
    let mut row = ResultRow {
        scheme: cell.scheme.name(),
        algorithm: cell.algorithm.name().into(),
        mode: cell.scheme.base_mode().name().into(),
        sweep: sweep.label().into(),
        value: cell.value,
        seed: cell.seed,
        objective: None,
        wall_time: 0.0,
        iterations: 0,
        converged: false,
        solver_failed: false,
        power_slack: 0.0,
        star_violation: 0.0,
        binary_violation: 0.0,
        time_violation: 0.0,
        commonrate_slack: 0.0,
        status: "ok".into(),
    };
    match outcome {
        Ok(rec) => {
            let f = &rec.feasibility;
            row.objective = Some(rec.objective);
            row.wall_time = rec.wall_time.unwrap_or(0.0);
            row.iterations = rec.iterations;
            row.converged = rec.flags.converged;
            row.solver_failed = rec.flags.solver_failed;
            row.power_slack = f.power_slack;
            row.star_violation = f.star_violation;
            row.binary_violation = f.binary_violation;
            row.time_violation = f.time_violation;
            row.commonrate_slack = f.commonrate_slack;
        }
        Err(msg) => row.status = format!("failed: {msg}"),
    }
    row
}

/// Worker count from `STARCRS_WORKERS`, else the available parallelism.
pub fn worker_count() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Serialized appender: one flushed CSV line per finished cell.
struct Appender {
    writer: Mutex<csv::Writer<std::fs::File>>,
    path: PathBuf,
}

impl Appender {
    /// Keeps the readable rows of an existing file (dropping a torn last
    /// line) and reopens it for appending.
    fn open(path: &Path, existing: &ResultTable) -> Result<Self> {
        existing.write_csv(path)?;
        let file = OpenOptions::new().append(true).open(path).map_err(io_err(path))?;
        let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(file);
        if existing.rows.is_empty() {
            writer.write_record(HEADER)?;
            writer.flush().map_err(io_err(path))?;
        }
        Ok(Self { writer: Mutex::new(writer), path: path.to_path_buf() })
    }

    fn push(&self, row: &ResultRow) -> Result<()> {
        let mut w = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        w.serialize(row)?;
        w.flush().map_err(io_err(&self.path))
    }
}

const HEADER: [&str; 17] = [
    "scheme",
    "algorithm",
    "mode",
    "sweep",
    "value",
    "seed",
    "objective",
    "wall_time",
    "iterations",
    "converged",
    "solver_failed",
    "power_slack",
    "star_violation",
    "binary_violation",
    "time_violation",
    "commonrate_slack",
    "status",
];

/// Runs every cell not already present in `plan.output`, appending each
/// result as it finishes, and returns the plan's rows in canonical order.
///
/// A cell that errors or panics is recorded as a failed row; only IO
/// errors on the output file abort the plan.
pub fn run_plan(plan: &ExperimentPlan, workers: usize) -> Result<ResultTable> {
    let existing = ResultTable::read_partial(&plan.output)?;
    let done: HashSet<_> = existing.rows.iter().map(|r| r.key()).collect();
    let todo: Vec<Cell> = plan.cells().into_iter().filter(|c| !done.contains(&plan.key_of(c))).collect();
    let appender = Appender::open(&plan.output, &existing)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| SimError::Config(format!("worker pool: {e}")))?;
    pool.install(|| {
        todo.par_iter().try_for_each(|cell| {
            let outcome = catch_unwind(AssertUnwindSafe(|| run_cell(&plan.config, plan.sweep, cell)))
                .map_err(|p| panic_message(&p))
                .and_then(|r| r.map_err(|e| e.to_string()));
            appender.push(&row_of(plan.sweep, cell, outcome))
        })
    })?;
    drop(appender);
    let all = ResultTable::read_csv(&plan.output)?;
    let mut rows = Vec::new();
    for cell in plan.cells() {
        let key = plan.key_of(&cell);
        if let Some(r) = all.rows.iter().rev().find(|r| r.key() == key) {
            rows.push(r.clone());
        }
    }
    Ok(ResultTable { rows })
}

fn panic_message(p: &Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = p.downcast_ref::<&str>() {
        format!("panic: {s}")
    } else if let Some(s) = p.downcast_ref::<String>() {
        format!("panic: {s}")
    } else {
        "panic".into()
    }
}
