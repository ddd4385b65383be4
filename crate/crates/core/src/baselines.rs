//! Comparison schemes as restrictions of the cooperative framework.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::channel::ChannelSet;
use crate::conic::ConicSolver;
use crate::fast::{fast_optimize, FastOptions};
use crate::feasibility::validate;
use crate::model::{DesignPoint, Mode, SystemConfig};
use crate::rates::noma_order;
use crate::record::{Algorithm, RunFlags, RunRecord};
use crate::sca::{alternate, AoOptions, Problem, RateModel, Restrictions};
use crate::{Error, Result};

/// Tolerance used for the feasibility report of a record.
pub const FEASIBILITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Cooperative rate splitting with the surface in one of the six modes.
    Crs(Mode),
    /// Full-duplex cooperation without the surface.
    CrsFd,
    /// Half-duplex cooperation without the surface.
    CrsHd,
    /// Rate splitting with an ES surface, no relaying.
    RsmaEs,
    /// SDMA with an ES surface: no common stream, no relaying.
    SdmaEs,
    /// NOMA with SIC and an ES surface, no relaying.
    NomaEs,
    /// Plain rate splitting: no surface, no relaying.
    Rsma,
}

impl Scheme {
    pub const ALL: [Scheme; 12] = [
        Scheme::Crs(Mode::FE),
        Scheme::Crs(Mode::FM),
        Scheme::Crs(Mode::FT),
        Scheme::Crs(Mode::HE),
        Scheme::Crs(Mode::HM),
        Scheme::Crs(Mode::HT),
        Scheme::CrsFd,
        Scheme::CrsHd,
        Scheme::RsmaEs,
        Scheme::SdmaEs,
        Scheme::NomaEs,
        Scheme::Rsma,
    ];

    pub fn name(self) -> String {
        match self {
            Scheme::Crs(m) => alloc::format!("CRS-{}", m.name()),
            Scheme::CrsFd => "CRS-FD".into(),
            Scheme::CrsHd => "CRS-HD".into(),
            Scheme::RsmaEs => "RSMA-ES".into(),
            Scheme::SdmaEs => "SDMA-ES".into(),
            Scheme::NomaEs => "NOMA-ES".into(),
            Scheme::Rsma => "RSMA".into(),
        }
    }

    /// Mode whose slot structure the scheme uses.
    pub fn base_mode(self) -> Mode {
        match self {
            Scheme::Crs(m) => m,
            Scheme::CrsFd => Mode::FE,
            _ => Mode::HE,
        }
    }

    /// `ψ = 0`: the surface is removed (`N = 0`).
    pub fn removes_surface(self) -> bool {
        matches!(self, Scheme::CrsFd | Scheme::CrsHd | Scheme::Rsma)
    }

    pub fn restrictions(self) -> Restrictions {
        match self {
            Scheme::RsmaEs | Scheme::Rsma | Scheme::NomaEs => Restrictions { lambda_one: true, no_common: false },
            Scheme::SdmaEs => Restrictions { lambda_one: true, no_common: true },
            _ => Restrictions::default(),
        }
    }

    /// The constrained problem of this scheme on one realization.
    pub fn problem(self, config: &SystemConfig, channels: &ChannelSet) -> Result<Problem> {
        let mut cfg = config.with_mode(self.base_mode());
        let mut ch = channels.clone();
        if self.removes_surface() {
            cfg = cfg.without_surface();
            ch = ch.without_surface();
        }
        let pr = Problem::new(cfg, ch)?.with_restrictions(self.restrictions());
        if self == Scheme::NomaEs {
            let init = pr.initial_point(0);
            let order = noma_order(&pr.config, &pr.channels, &init);
            return Ok(pr.with_model(RateModel::Noma { order }));
        }
        Ok(pr)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl core::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let up = s.trim().to_ascii_uppercase();
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.name() == up)
            .ok_or_else(|| Error::InvalidInput(alloc::format!("unknown scheme `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EvalOptions {
    pub ao: AoOptions,
    pub fast: FastOptions,
}

fn record(
    pr: &Problem,
    scheme: Scheme,
    algorithm: Algorithm,
    seed: u64,
    point: DesignPoint,
    wall_time: Option<f64>,
) -> Result<RunRecord> {
    let feasibility = validate(&pr.config, &pr.channels, &point, FEASIBILITY_TOL)?;
    Ok(RunRecord {
        algorithm,
        scheme: scheme.name(),
        mode: pr.mode(),
        seed,
        objective: pr.objective(&point),
        outer_trace: Vec::new(),
        passive_traces: Vec::new(),
        active_traces: Vec::new(),
        iterations: 0,
        rates: pr.rates(&point),
        feasibility,
        point,
        wall_time,
        penalty: 0.0,
        flags: RunFlags::default(),
    })
}

#[cfg(feature = "std")]
fn timed<T>(f: impl FnOnce() -> T) -> (T, Option<f64>) {
    let start = std::time::Instant::now();
    let out = f();
    (out, Some(start.elapsed().as_secs_f64()))
}

#[cfg(not(feature = "std"))]
fn timed<T>(f: impl FnOnce() -> T) -> (T, Option<f64>) {
    (f(), None)
}

/// Runs the AO optimizer on the scheme's problem from the seeded initial
/// point and from every compatible point of `warm` (same shape), keeping the
/// best run. Warm starts from a restricted scheme make the inclusion
/// orderings hold per instance. The wall time covers every start.
pub fn run_ao<S: ConicSolver + ?Sized>(
    scheme: Scheme,
    config: &SystemConfig,
    channels: &ChannelSet,
    seed: u64,
    opts: &AoOptions,
    warm: &[DesignPoint],
    solver: &S,
) -> Result<RunRecord> {
    let pr = scheme.problem(config, channels)?;
    let (best, wall) = timed(|| {
        let mut best = alternate(&pr, &pr.initial_point(seed), opts, solver);
        for w in warm.iter().filter(|w| w.check_dimensions(&pr.config).is_ok()) {
            let run = alternate(&pr, &pr.clean(w), opts, solver);
            if run.objective > best.objective {
                best = run;
            }
        }
        best
    });
    let mut rec = record(&pr, scheme, Algorithm::Ao, seed, best.point, wall)?;
    rec.outer_trace = best.outer_trace;
    rec.passive_traces = best.passive_traces;
    rec.active_traces = best.active_traces;
    rec.iterations = best.outer_iterations;
    rec.penalty = best.final_penalty;
    rec.flags = RunFlags { converged: best.converged, solver_failed: best.solver_failed, projected: pr.has_surface() };
    Ok(rec)
}

/// Runs the low-complexity optimizer on the scheme's problem.
pub fn run_fast<S: ConicSolver + ?Sized>(
    scheme: Scheme,
    config: &SystemConfig,
    channels: &ChannelSet,
    seed: u64,
    opts: &FastOptions,
    solver: &S,
) -> Result<RunRecord> {
    let pr = scheme.problem(config, channels)?;
    let (out, wall) = timed(|| fast_optimize(&pr, opts, solver));
    let out = out?;
    let mut rec = record(&pr, scheme, Algorithm::Fast, seed, out.point, wall)?;
    rec.iterations = out.trace.len();
    rec.active_traces = alloc::vec![out.trace];
    rec.flags = RunFlags { converged: !out.solver_failed, solver_failed: out.solver_failed, projected: false };
    Ok(rec)
}

/// Dispatches to [`run_ao`] or [`run_fast`].
#[allow(clippy::too_many_arguments)]
pub fn evaluate_scheme<S: ConicSolver + ?Sized>(
    scheme: Scheme,
    algorithm: Algorithm,
    config: &SystemConfig,
    channels: &ChannelSet,
    seed: u64,
    opts: &EvalOptions,
    warm: &[DesignPoint],
    solver: &S,
) -> Result<RunRecord> {
    match algorithm {
        Algorithm::Ao => run_ao(scheme, config, channels, seed, &opts.ao, warm, solver),
        Algorithm::Fast => run_fast(scheme, config, channels, seed, &opts.fast, solver),
    }
}

/// SDMA-ES, RSMA-ES and CRS-HE on one realization, each warm-started from
/// the solution of the scheme it contains.
pub fn inclusion_chain<S: ConicSolver + ?Sized>(
    config: &SystemConfig,
    channels: &ChannelSet,
    seed: u64,
    opts: &AoOptions,
    solver: &S,
) -> Result<[RunRecord; 3]> {
    let sdma = run_ao(Scheme::SdmaEs, config, channels, seed, opts, &[], solver)?;
    let rsma = run_ao(Scheme::RsmaEs, config, channels, seed, opts, core::slice::from_ref(&sdma.point), solver)?;
    let crs = run_ao(Scheme::Crs(Mode::HE), config, channels, seed, opts, core::slice::from_ref(&rsma.point), solver)?;
    Ok([sdma, rsma, crs])
}

/// Scheme names in display order.
pub fn scheme_names() -> Vec<String> {
    Scheme::ALL.iter().map(|s| s.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
        assert_eq!("rsma-es".parse::<Scheme>().unwrap(), Scheme::RsmaEs);
        assert!("CRS-XX".parse::<Scheme>().is_err());
    }

    #[test]
    fn overrides_match_names() {
        for s in Scheme::ALL {
            let r = s.restrictions();
            let name = s.name();
            assert_eq!(s.removes_surface(), name.ends_with("FD") || name.ends_with("HD") || name == "RSMA");
            assert_eq!(r.no_common, name.starts_with("SDMA"));
            assert_eq!(r.lambda_one, !name.starts_with("CRS"));
        }
    }
}

#[cfg(all(test, feature = "clarabel"))]
mod solver_tests {
    use super::*;
    use crate::channel::{Scenario, ScenarioSpec};
    use crate::conic::ClarabelSolver;

    fn scenario(elements: usize, seed: u64) -> Scenario {
        let spec = ScenarioSpec { elements, ..ScenarioSpec::default() }.with_snr_db(20.0).unwrap();
        Scenario::draw(seed, &spec).unwrap()
    }

    #[test]
    fn rsma_es_is_he_with_lambda_pinned() {
        let s = scenario(4, 1);
        let opts = AoOptions::default();
        let a = run_ao(Scheme::RsmaEs, &s.config, &s.channels, 1, &opts, &[], &ClarabelSolver::default()).unwrap();
        let pr = Problem::new(s.config.with_mode(Mode::HE), s.channels.clone())
            .unwrap()
            .with_restrictions(Restrictions { lambda_one: true, no_common: false });
        let b = alternate(&pr, &pr.initial_point(1), &opts, &ClarabelSolver::default());
        assert!((a.objective - b.objective).abs() < 1e-9);
        assert_eq!(a.point.lambda, 1.0);
    }

    #[test]
    fn rsma_equals_rsma_es_with_zero_surface_channels() {
        let s = scenario(4, 2);
        let opts = AoOptions::default();
        let solver = ClarabelSolver::default();
        let a = run_ao(Scheme::Rsma, &s.config, &s.channels, 2, &opts, &[], &solver).unwrap();
        let b = run_ao(Scheme::RsmaEs, &s.config, &s.channels.with_zero_surface(), 2, &opts, &[], &solver).unwrap();
        assert!((a.objective - b.objective).abs() < 1e-4, "{} vs {}", a.objective, b.objective);
    }

    #[test]
    fn records_match_rate_engine_and_orderings_hold() {
        let s = scenario(4, 3);
        let solver = ClarabelSolver::default();
        let [sdma, rsma, crs] = inclusion_chain(&s.config, &s.channels, 3, &AoOptions::default(), &solver).unwrap();
        assert!(sdma.objective <= rsma.objective + 1e-4);
        assert!(rsma.objective <= crs.objective + 1e-4);
        for rec in [&sdma, &rsma, &crs] {
            let pr = rec.scheme.parse::<Scheme>().unwrap().problem(&s.config, &s.channels).unwrap();
            assert!((pr.objective(&rec.point) - rec.objective).abs() < 1e-5);
            assert!(rec.feasibility.feasible);
        }
        assert!(sdma.point.precoders.column(0).iter().all(|z| z.norm() == 0.0));
        let noma = run_ao(Scheme::NomaEs, &s.config, &s.channels, 3, &AoOptions::default(), &[], &solver).unwrap();
        assert!(noma.objective > 0.0 && noma.feasibility.feasible);
        let fast = run_fast(Scheme::Crs(Mode::FE), &s.config, &s.channels, 3, &FastOptions::default(), &solver).unwrap();
        assert!(fast.objective > 0.0 && fast.feasibility.feasible);
    }
}
