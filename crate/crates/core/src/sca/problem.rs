#[cfg(not(feature = "std"))]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::ChannelSet;
use crate::linalg::{norm_sqr, polar, CMat, CVec, Complex64, ZERO};
use crate::model::{DesignPoint, Mode, StarProtocol, SystemConfig, TimeVar};
use crate::rates::{
    best_common_split, check_time_allocation, effective_channels, mode_slots, noma_rates, slot_rates_with, RateBundle,
    SideSelect, SinrModel, Slot, T_LAMBDA, T_LAMBDA_1, T_LAMBDA_2, T_LAMBDA_R,
};
use crate::Result;

/// Strict positivity of direct-phase fractions.
pub const LAMBDA_MIN: f64 = 1e-4;

const INIT_STREAM: u64 = 2;

/// How user rates are formed from the streams.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RateModel {
    /// One common stream plus private streams, common rate split by `c`.
    RateSplitting,
    /// Superposition coding with SIC; `order` lists users strongest first.
    Noma { order: Vec<usize> },
}

/// Variables pinned by equality rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Restrictions {
    /// `λ = 1` (no cooperative phase).
    pub lambda_one: bool,
    /// `p_0 = 0` and `c = 0`.
    pub no_common: bool,
}

/// One optimization instance: system, channels, rate model and pins.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub config: SystemConfig,
    pub channels: ChannelSet,
    pub slots: Vec<Slot>,
    pub model: RateModel,
    pub restrictions: Restrictions,
    /// SINR expressions used by the objective and the convex steps.
    pub sinr: SinrModel,
    /// Fixed unit-norm precoder directions (one column per stream); only
    /// the complex stream amplitudes are optimized when set.
    pub directions: Option<CMat>,
}

impl Problem {
    /// The unrestricted problem of `config.mode`.
    pub fn new(config: SystemConfig, channels: ChannelSet) -> Result<Self> {
        config.validate()?;
        channels.check_dimensions(&config)?;
        let slots = mode_slots(config.mode);
        Ok(Self {
            config,
            channels,
            slots,
            model: RateModel::RateSplitting,
            restrictions: Restrictions::default(),
            sinr: SinrModel::Exact,
            directions: None,
        })
    }

    pub fn with_sinr_model(mut self, sinr: SinrModel) -> Self {
        self.sinr = sinr;
        self
    }

    /// Restricts the precoders to `directions` (`L × (K+1)`, unit columns).
    pub fn with_directions(mut self, directions: CMat) -> Result<Self> {
        if directions.nrows() != self.config.antennas || directions.ncols() != self.config.users + 1 {
            return Err(crate::Error::Dimension("precoder directions must be L x (K+1)".into()));
        }
        self.directions = Some(directions);
        Ok(self)
    }

    pub fn with_restrictions(mut self, restrictions: Restrictions) -> Self {
        self.restrictions = restrictions;
        self
    }

    pub fn with_model(mut self, model: RateModel) -> Self {
        self.model = model;
        self
    }

    pub fn mode(&self) -> Mode {
        self.config.mode
    }

    pub fn has_surface(&self) -> bool {
        self.config.elements > 0
    }

    /// Whether the common stream exists in this problem.
    pub fn has_common(&self) -> bool {
        matches!(self.model, RateModel::RateSplitting) && !self.restrictions.no_common
    }

    /// Time variables of the mode, in `TimeWeight` index order.
    pub fn time_indices(&self) -> Vec<usize> {
        self.mode()
            .descriptor()
            .time_vars
            .iter()
            .map(|v| match v {
                TimeVar::Lambda => T_LAMBDA,
                TimeVar::LambdaR => T_LAMBDA_R,
                TimeVar::Lambda1 => T_LAMBDA_1,
                TimeVar::Lambda2 => T_LAMBDA_2,
            })
            .collect()
    }

    /// Whether time variable `i` is pinned to a constant.
    pub fn time_pinned(&self, i: usize) -> bool {
        i == T_LAMBDA && (self.restrictions.lambda_one || matches!(self.model, RateModel::Noma { .. }))
    }

    /// Rates at `point` with its own common split.
    pub fn rates(&self, point: &DesignPoint) -> RateBundle {
        match &self.model {
            RateModel::RateSplitting => slot_rates_with(&self.config, &self.channels, point, &self.slots, self.sinr),
            RateModel::Noma { order } => noma_rates(&self.config, &self.channels, point, order)
                .unwrap_or_else(|_| slot_rates_with(&self.config, &self.channels, point, &self.slots, self.sinr)),
        }
    }

    /// Max-min objective at `point` with the common split chosen optimally.
    pub fn objective(&self, point: &DesignPoint) -> f64 {
        let r = self.rates(point);
        if self.has_common() {
            best_common_split(&r.private, r.common_cap).1
        } else {
            r.private.iter().copied().fold(f64::INFINITY, f64::min)
        }
    }

    /// Penalty function of the surface constraints (nonpositive on the
    /// relaxed set, zero exactly on the feasible set).
    pub fn penalty(&self, point: &DesignPoint) -> f64 {
        let n = self.config.elements;
        let mut pen = 0.0;
        for i in 0..n {
            let (r, t) = (point.psi_r[i], point.psi_t[i]);
            match self.mode().protocol() {
                StarProtocol::EnergySplitting => pen += r.norm_sqr() + t.norm_sqr() - 1.0,
                StarProtocol::ModeSwitching => {
                    pen += r.norm_sqr() + t.norm_sqr() - 1.0;
                    pen -= r.norm() - r.norm_sqr() + t.norm() - t.norm_sqr();
                }
                StarProtocol::TimeSwitching => pen += r.norm_sqr() - 1.0 + t.norm_sqr() - 1.0,
            }
        }
        pen
    }

    /// Snaps `point` onto the relaxed feasible set: power budget, exact time
    /// ordering, pinned variables, `|ψ|` bounds and the optimal common split.
    pub fn clean(&self, point: &DesignPoint) -> DesignPoint {
        let mut p = point.clone();
        if self.restrictions.no_common || matches!(self.model, RateModel::Noma { .. }) {
            p.precoders.column_mut(0).fill(ZERO);
        }
        let power = p.transmit_power();
        if power > self.config.bs_power {
            p.precoders *= Complex64::new((self.config.bs_power / power).sqrt(), 0.0);
        }
        self.clean_times(&mut p);
        for i in 0..self.config.elements {
            match self.mode().protocol() {
                StarProtocol::TimeSwitching => {
                    for psi in [&mut p.psi_r[i], &mut p.psi_t[i]] {
                        let m = psi.norm();
                        if m > 1.0 {
                            *psi /= m;
                        }
                    }
                }
                _ => {
                    let m = (p.psi_r[i].norm_sqr() + p.psi_t[i].norm_sqr()).sqrt();
                    if m > 1.0 {
                        p.psi_r[i] /= m;
                        p.psi_t[i] /= m;
                    }
                }
            }
        }
        self.refine_split(&mut p);
        p
    }

    fn clean_times(&self, p: &mut DesignPoint) {
        let clamp = |x: f64, lo: f64, hi: f64| if x.is_nan() { lo } else { x.max(lo).min(hi) };
        match self.mode() {
            Mode::FE | Mode::FM => {}
            Mode::FT => p.lambda_r = clamp(p.lambda_r, 0.0, 1.0),
            Mode::HE | Mode::HM => {
                p.lambda = if self.time_pinned(T_LAMBDA) { 1.0 } else { clamp(p.lambda, LAMBDA_MIN, 1.0) };
            }
            Mode::HT => {
                p.lambda_r = clamp(p.lambda_r, LAMBDA_MIN, 1.0 - LAMBDA_MIN);
                p.lambda_1 = clamp(p.lambda_1, LAMBDA_MIN, p.lambda_r);
                p.lambda_2 = clamp(p.lambda_2, LAMBDA_MIN, 1.0 - p.lambda_r);
            }
        }
        debug_assert!(check_time_allocation(self.mode(), p).is_ok());
    }

    /// Replaces the common split with the water-filling optimum.
    pub fn refine_split(&self, p: &mut DesignPoint) {
        if self.has_common() {
            let r = self.rates(p);
            p.common_split = best_common_split(&r.private, r.common_cap).0;
        } else {
            p.common_split.iter_mut().for_each(|c| *c = 0.0);
        }
    }

    /// Exact projection of the surface onto the mode's feasible set:
    /// unit-norm pairs (ES), binary amplitudes (MS), unit moduli (TS).
    pub fn project_surface(&self, point: &DesignPoint) -> DesignPoint {
        let mut p = point.clone();
        for i in 0..self.config.elements {
            let (r, t) = (p.psi_r[i], p.psi_t[i]);
            match self.mode().protocol() {
                StarProtocol::EnergySplitting => {
                    let m = (r.norm_sqr() + t.norm_sqr()).sqrt();
                    if m > 0.0 {
                        p.psi_r[i] = r / m;
                        p.psi_t[i] = t / m;
                    } else {
                        p.psi_r[i] = Complex64::new(FRAC_1_SQRT_2, 0.0);
                        p.psi_t[i] = Complex64::new(FRAC_1_SQRT_2, 0.0);
                    }
                }
                StarProtocol::ModeSwitching => {
                    let unit = |z: Complex64| if z.norm() > 0.0 { z / z.norm() } else { Complex64::new(1.0, 0.0) };
                    if r.norm() >= t.norm() {
                        p.psi_r[i] = unit(r);
                        p.psi_t[i] = ZERO;
                    } else {
                        p.psi_r[i] = ZERO;
                        p.psi_t[i] = unit(t);
                    }
                }
                StarProtocol::TimeSwitching => {
                    for psi in [&mut p.psi_r[i], &mut p.psi_t[i]] {
                        *psi = if psi.norm() > 0.0 { *psi / psi.norm() } else { Complex64::new(1.0, 0.0) };
                    }
                }
            }
        }
        self.refine_split(&mut p);
        p
    }

    /// Starting point: random surface phases (`β = ½` for ES/MS, unit
    /// amplitude for TS), MRT precoders at `0.9 P_t` split equally over the
    /// streams, `λ = λ_r = ½`, `λ_1 = λ_2 = ¼` and the optimal common split.
    pub fn initial_point(&self, seed: u64) -> DesignPoint {
        let cfg = &self.config;
        let mut p = DesignPoint::zeros(cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(INIT_STREAM);
        let amp = match self.mode().protocol() {
            StarProtocol::TimeSwitching => 1.0,
            _ => FRAC_1_SQRT_2,
        };
        for i in 0..cfg.elements {
            p.psi_r[i] = polar(amp, 2.0 * PI * rng.random::<f64>());
            p.psi_t[i] = polar(amp, 2.0 * PI * rng.random::<f64>());
        }
        p.lambda = if self.time_pinned(T_LAMBDA) { 1.0 } else { 0.5 };
        p.lambda_r = 0.5;
        p.lambda_1 = 0.25;
        p.lambda_2 = 0.25;
        p.precoders = mrt_precoders(cfg, &self.channels, &p, self.has_common(), 0.9 * cfg.bs_power);
        self.clean(&p)
    }
}

fn unit_or(v: CVec, fallback: usize) -> CVec {
    let n = norm_sqr(&v).sqrt();
    if n > 0.0 {
        v / Complex64::new(n, 0.0)
    } else {
        let mut e = CVec::from_element(v.len(), ZERO);
        e[fallback % v.len().max(1)] = Complex64::new(1.0, 0.0);
        e
    }
}

/// Matched-filter precoders on the per-user effective channels; the common
/// direction is the normalized sum of the private ones.
pub fn mrt_precoders(config: &SystemConfig, channels: &ChannelSet, point: &DesignPoint, common: bool, power: f64) -> CMat {
    let eff = effective_channels(config, channels, point, SideSelect::PerUser);
    let l = config.antennas;
    let k = config.users;
    let mut out = CMat::from_element(l, k + 1, ZERO);
    let streams = if common { k + 1 } else { k };
    let amp = Complex64::new((power / streams as f64).sqrt(), 0.0);
    let dirs: Vec<CVec> = eff.gt.iter().enumerate().map(|(u, g)| unit_or(g.clone(), u)).collect();
    for (u, d) in dirs.iter().enumerate() {
        out.set_column(u + 1, &(d * amp));
    }
    if common {
        let sum = dirs.iter().fold(CVec::from_element(l, ZERO), |acc, d| acc + d);
        out.set_column(0, &(unit_or(sum, 0) * amp));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{Scenario, ScenarioSpec};
    use crate::feasibility::validate;

    fn problem(mode: Mode) -> Problem {
        let spec = ScenarioSpec { elements: 4, mode, ..ScenarioSpec::default() }.with_snr_db(20.0).unwrap();
        let s = Scenario::draw(3, &spec).unwrap();
        Problem::new(s.config, s.channels).unwrap()
    }

    #[test]
    fn initial_point_is_feasible() {
        for mode in Mode::ALL {
            let pr = problem(mode);
            let p = pr.initial_point(1);
            let rep = validate(&pr.config, &pr.channels, &p, 1e-9).unwrap();
            // the MS start is the relaxed midpoint β = ½
            let binary_ok = mode.protocol() == StarProtocol::ModeSwitching || rep.binary_violation <= 1e-9;
            assert!(binary_ok && rep.star_violation <= 1e-9 && rep.power_slack >= 0.0, "{mode}: {rep:?}");
            assert!(rep.commonrate_slack >= -1e-9 && rep.time_violation == 0.0, "{mode}: {rep:?}");
            assert!((p.transmit_power() - 0.9 * pr.config.bs_power).abs() < 1e-9 * pr.config.bs_power);
            assert!(pr.penalty(&p).abs() < 1e-12 || mode.protocol() == StarProtocol::ModeSwitching);
        }
    }

    #[test]
    fn clean_enforces_time_order_exactly() {
        let pr = problem(Mode::HT);
        let mut p = pr.initial_point(0);
        p.lambda_r = 0.3;
        p.lambda_1 = 0.30000001;
        p.lambda_2 = 0.8;
        let c = pr.clean(&p);
        assert!(c.lambda_1 <= c.lambda_r && c.lambda_2 <= 1.0 - c.lambda_r);
        assert_eq!(validate(&pr.config, &pr.channels, &c, 0.0).unwrap().time_violation, 0.0);
    }

    #[test]
    fn objective_uses_best_split() {
        let pr = problem(Mode::FE);
        let mut p = pr.initial_point(0);
        let best = pr.objective(&p);
        p.common_split.iter_mut().for_each(|c| *c = 0.0);
        assert!(pr.rates(&p).objective <= best + 1e-12);
    }

    #[test]
    fn ms_projection_is_binary() {
        let pr = problem(Mode::FM);
        let p = pr.project_surface(&pr.initial_point(4));
        let rep = validate(&pr.config, &pr.channels, &p, 1e-12).unwrap();
        assert!(rep.binary_violation < 1e-12);
        assert!(rep.star_violation < 1e-12);
        assert!(pr.penalty(&p).abs() < 1e-12);
    }
}
