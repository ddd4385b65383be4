//! TOML configuration.
//!
//! Every section and key is optional; missing keys take the defaults below.
//!
//! ```toml
//! [system]
//! antennas = 4            # L
//! users = 4               # K
//! elements = 16           # N (0 removes the surface)
//! snr_db = 20.0           # sets P_t; omit to use bs_power instead
//! bs_power = 1.0          # W, only used without snr_db
//! relay_power_ratio = 0.5 # relay power as a fraction of P_t
//! noise_power = 1e-12     # W
//! self_interference = 1e-11
//!
//! [fading]                # path-loss exponents, Rician factor, variances
//! l0_db = -30.0
//! alpha_bu = 3.76
//! rician_k_db = 3.0
//!
//! [geometry]
//! bs = [0.0, 0.0, 0.0]
//! ris = [0.0, 50.0, 0.0]
//! radius = 5.0
//!
//! [plan]
//! sweep = "N"             # or "SNR"
//! values = [8, 16, 32]
//! schemes = ["CRS-FE", "RSMA-ES"]
//! algorithms = ["ao"]     # "ao" and/or "fast"
//! seeds = 20
//! seed_base = 0
//! output = "results.csv"
//!
//! [ao]
//! eps_outer = 1e-3
//! max_outer = 30
//! penalty = 0.01
//!
//! [fast]
//! phi = 0.3
//! reduced_constants = true
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use starcrs_core::baselines::Scheme;
use starcrs_core::channel::{FadingParams, ScenarioSpec, DEFAULT_NOISE_POWER, DEFAULT_SELF_INTERFERENCE};
use starcrs_core::fast::FastOptions;
use starcrs_core::rates::SinrModel;
use starcrs_core::record::Algorithm;
use starcrs_core::sca::AoOptions;

use crate::error::io_err;
use crate::plan::{ExperimentPlan, Sweep};
use crate::{Result, SimError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    pub antennas: usize,
    pub users: usize,
    pub elements: usize,
    pub snr_db: Option<f64>,
    pub bs_power: f64,
    pub relay_power_ratio: f64,
    pub noise_power: f64,
    pub self_interference: f64,
}

impl Default for SystemSection {
    fn default() -> Self {
        Self {
            antennas: 4,
            users: 4,
            elements: 16,
            snr_db: Some(20.0),
            bs_power: 1.0,
            relay_power_ratio: 0.5,
            noise_power: DEFAULT_NOISE_POWER,
            self_interference: DEFAULT_SELF_INTERFERENCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FadingSection {
    pub l0_db: f64,
    pub d0: f64,
    pub alpha_bu: f64,
    pub alpha_uu: f64,
    pub alpha_br: f64,
    pub alpha_ru: f64,
    pub rician_k_db: f64,
    pub sigma2_relay: f64,
    pub sigma2_dest: f64,
    pub sigma2_uu: f64,
}

impl Default for FadingSection {
    fn default() -> Self {
        let f = FadingParams::default();
        Self {
            l0_db: f.l0_db,
            d0: f.d0,
            alpha_bu: f.alpha_bu,
            alpha_uu: f.alpha_uu,
            alpha_br: f.alpha_br,
            alpha_ru: f.alpha_ru,
            rician_k_db: f.rician_k_db,
            sigma2_relay: f.sigma2_relay,
            sigma2_dest: f.sigma2_dest,
            sigma2_uu: f.sigma2_uu,
        }
    }
}

impl From<&FadingSection> for FadingParams {
    fn from(f: &FadingSection) -> Self {
        FadingParams {
            l0_db: f.l0_db,
            d0: f.d0,
            alpha_bu: f.alpha_bu,
            alpha_uu: f.alpha_uu,
            alpha_br: f.alpha_br,
            alpha_ru: f.alpha_ru,
            rician_k_db: f.rician_k_db,
            sigma2_relay: f.sigma2_relay,
            sigma2_dest: f.sigma2_dest,
            sigma2_uu: f.sigma2_uu,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometrySection {
    pub bs: [f64; 3],
    pub ris: [f64; 3],
    pub radius: f64,
}

impl Default for GeometrySection {
    fn default() -> Self {
        Self { bs: [0.0; 3], ris: [0.0, 50.0, 0.0], radius: 5.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanSection {
    pub sweep: Sweep,
    pub values: Vec<f64>,
    pub schemes: Vec<String>,
    pub algorithms: Vec<String>,
    pub seeds: u64,
    pub seed_base: u64,
    pub output: PathBuf,
}

impl Default for PlanSection {
    fn default() -> Self {
        Self {
            sweep: Sweep::Elements,
            values: vec![8.0, 16.0, 32.0],
            schemes: vec!["CRS-FE".into(), "RSMA-ES".into()],
            algorithms: vec!["ao".into()],
            seeds: 20,
            seed_base: 0,
            output: PathBuf::from("results.csv"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AoSection {
    pub eps_passive: f64,
    pub eps_active: f64,
    pub eps_outer: f64,
    pub max_inner: usize,
    pub max_outer: usize,
    pub penalty: f64,
    pub penalty_max: f64,
    pub residual_tol: f64,
    pub solver_tol: f64,
    pub extrapolate: bool,
}

impl Default for AoSection {
    fn default() -> Self {
        let o = AoOptions::default();
        Self {
            eps_passive: o.eps_passive,
            eps_active: o.eps_active,
            eps_outer: o.eps_outer,
            max_inner: o.max_inner,
            max_outer: o.max_outer,
            penalty: o.penalty,
            penalty_max: o.penalty_max,
            residual_tol: o.residual_tol,
            solver_tol: o.solver_tol,
            extrapolate: o.extrapolate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FastSection {
    pub phi: f64,
    /// Keep self-interference and cooperative terms in the reduced problem.
    pub reduced_constants: bool,
}

impl Default for FastSection {
    fn default() -> Self {
        Self { phi: 0.3, reduced_constants: true }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub system: SystemSection,
    pub fading: FadingSection,
    pub geometry: GeometrySection,
    pub plan: PlanSection,
    pub ao: AoSection,
    pub fast: FastSection,
}

impl SimConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: SimConfig = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config is always serializable")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(SimError::Config(m.into()));
        if self.system.antennas == 0 || self.system.users == 0 {
            return bad("antennas and users must be positive");
        }
        if !(self.fast.phi > 0.0 && self.fast.phi < 0.5) {
            return bad("fast.phi must lie in (0, 0.5)");
        }
        if self.plan.values.is_empty() || self.plan.seeds == 0 {
            return bad("plan needs at least one sweep value and one seed");
        }
        if self.plan.sweep == Sweep::Elements && self.plan.values.iter().any(|v| *v < 0.0 || v.fract() != 0.0) {
            return bad("element counts must be nonnegative integers");
        }
        self.schemes()?;
        self.algorithms()?;
        FadingParams::from(&self.fading).validate()?;
        Ok(())
    }

    pub fn schemes(&self) -> Result<Vec<Scheme>> {
        if self.plan.schemes.is_empty() {
            return Err(SimError::Config("plan.schemes is empty".into()));
        }
        self.plan.schemes.iter().map(|s| s.parse().map_err(SimError::from)).collect()
    }

    pub fn algorithms(&self) -> Result<Vec<Algorithm>> {
        if self.plan.algorithms.is_empty() {
            return Err(SimError::Config("plan.algorithms is empty".into()));
        }
        self.plan.algorithms.iter().map(|s| s.parse().map_err(SimError::from)).collect()
    }

    /// Scenario parameters, with the sweep variable set to `value` if given.
    pub fn scenario_spec(&self, sweep: Option<(Sweep, f64)>) -> Result<ScenarioSpec> {
        let s = &self.system;
        let mut spec = ScenarioSpec {
            antennas: s.antennas,
            users: s.users,
            elements: s.elements,
            bs_power: s.bs_power,
            relay_power_ratio: s.relay_power_ratio,
            noise_power: s.noise_power,
            self_interference: s.self_interference,
            fading: FadingParams::from(&self.fading),
            bs_pos: self.geometry.bs,
            ris_pos: self.geometry.ris,
            circle_radius: self.geometry.radius,
            ..ScenarioSpec::default()
        };
        let mut snr = s.snr_db;
        match sweep {
            Some((Sweep::Elements, v)) => spec.elements = v as usize,
            Some((Sweep::Snr, v)) => snr = Some(v),
            None => {}
        }
        if let Some(db) = snr {
            spec = spec.with_snr_db(db)?;
        }
        Ok(spec)
    }

    pub fn ao_options(&self) -> AoOptions {
        let a = &self.ao;
        AoOptions {
            eps_passive: a.eps_passive,
            eps_active: a.eps_active,
            eps_outer: a.eps_outer,
            max_inner: a.max_inner,
            max_outer: a.max_outer,
            penalty: a.penalty,
            penalty_max: a.penalty_max,
            residual_tol: a.residual_tol,
            solver_tol: a.solver_tol,
            extrapolate: a.extrapolate,
        }
    }

    pub fn fast_options(&self) -> FastOptions {
        FastOptions {
            phi: self.fast.phi,
            sinr: SinrModel::ZeroForced { constants: self.fast.reduced_constants },
            sca: self.ao_options(),
        }
    }

    pub fn plan(&self) -> Result<ExperimentPlan> {
        self.validate()?;
        Ok(ExperimentPlan {
            config: self.clone(),
            sweep: self.plan.sweep,
            values: self.plan.values.clone(),
            schemes: self.schemes()?,
            algorithms: self.algorithms()?,
            seeds: (0..self.plan.seeds).map(|i| self.plan.seed_base + i).collect(),
            output: self.plan.output.clone(),
        })
    }
}
