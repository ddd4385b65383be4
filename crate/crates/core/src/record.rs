//! Outcome of one optimization run.

use alloc::string::String;
use alloc::vec::Vec;

use crate::feasibility::FeasibilityReport;
use crate::model::{DesignPoint, Mode};
use crate::rates::RateBundle;

/// Which optimizer produced a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Alternating SCA (passive and active steps).
    Ao,
    /// Closed-form passive step plus reduced SCA.
    Fast,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ao => "ao",
            Algorithm::Fast => "fast",
        }
    }
}

impl core::str::FromStr for Algorithm {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ao" => Ok(Algorithm::Ao),
            "fast" => Ok(Algorithm::Fast),
            _ => Err(crate::Error::InvalidInput(alloc::format!("unknown algorithm `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunFlags {
    pub converged: bool,
    pub solver_failed: bool,
    /// The final surface was changed by the projection onto its exact set.
    pub projected: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    /// Scheme label, e.g. `CRS-FE` or `RSMA-ES`.
    pub scheme: String,
    pub mode: Mode,
    pub seed: u64,
    /// Max-min rate recomputed by the rate engine at `point`.
    pub objective: f64,
    pub outer_trace: Vec<f64>,
    pub passive_traces: Vec<Vec<f64>>,
    pub active_traces: Vec<Vec<f64>>,
    pub iterations: usize,
    pub rates: RateBundle,
    pub feasibility: FeasibilityReport,
    pub point: DesignPoint,
    /// Seconds; `None` when no clock is available.
    pub wall_time: Option<f64>,
    pub penalty: f64,
    pub flags: RunFlags,
}

impl RunRecord {
    /// Every recorded trace is non-decreasing within `tol`.
    pub fn traces_monotone(&self, tol: f64) -> bool {
        let ok = |t: &[f64]| t.windows(2).all(|w| w[1] >= w[0] - tol);
        ok(&self.outer_trace) && self.passive_traces.iter().chain(&self.active_traces).all(|t| ok(t))
    }
}
