//! Constraint residuals of a design point.

use crate::channel::ChannelSet;
use crate::model::{DesignPoint, Mode, StarProtocol, SystemConfig};
use crate::rates::{mode_slots, slot_rates_unchecked};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityReport {
    /// `P_t - tr(P Pᴴ)`; negative when the budget is exceeded.
    pub power_slack: f64,
    /// ES/MS: `max_n | |ψ_r|² + |ψ_t|² - 1 |`; TS: `max | |ψ| - 1 |`.
    pub star_violation: f64,
    /// MS only: `max_n min(β_r, 1 - β_r)` with `β_r = |ψ_r|²`.
    pub binary_violation: f64,
    /// Largest violation of the time-allocation bounds and ordering.
    pub time_violation: f64,
    /// `R_c - Σ C_k`; negative when the common rate is over-allocated.
    pub commonrate_slack: f64,
    /// Most negative common-rate portion, as a nonnegative number.
    pub split_violation: f64,
    pub feasible: bool,
}

fn pos(x: f64) -> f64 {
    x.max(0.0)
}

fn time_violation(mode: Mode, p: &DesignPoint) -> f64 {
    let unit = |x: f64| pos(-x).max(pos(x - 1.0));
    match mode {
        Mode::FE | Mode::FM => 0.0,
        Mode::FT => unit(p.lambda_r),
        Mode::HE | Mode::HM => unit(p.lambda),
        Mode::HT => unit(p.lambda_r)
            .max(pos(-p.lambda_1))
            .max(pos(-p.lambda_2))
            .max(pos(p.lambda_1 - p.lambda_r))
            .max(pos(p.lambda_2 - (1.0 - p.lambda_r))),
    }
}

/// Residuals of every constraint of `config.mode` at `point`.
///
/// Channels are needed for the common-rate slack. Pure and deterministic.
pub fn validate(config: &SystemConfig, channels: &ChannelSet, point: &DesignPoint, tol: f64) -> Result<FeasibilityReport> {
    point.check_dimensions(config)?;
    channels.check_dimensions(config)?;
    let power_slack = config.bs_power - point.transmit_power();
    let protocol = config.mode.protocol();
    let mut star_violation: f64 = 0.0;
    let mut binary_violation: f64 = 0.0;
    for n in 0..config.elements {
        let (r, t) = (point.psi_r[n], point.psi_t[n]);
        match protocol {
            StarProtocol::EnergySplitting | StarProtocol::ModeSwitching => {
                star_violation = star_violation.max((r.norm_sqr() + t.norm_sqr() - 1.0).abs());
                if protocol == StarProtocol::ModeSwitching {
                    let beta = r.norm_sqr();
                    binary_violation = binary_violation.max(beta.min(1.0 - beta).abs());
                }
            }
            StarProtocol::TimeSwitching => {
                star_violation = star_violation.max((r.norm() - 1.0).abs()).max((t.norm() - 1.0).abs());
            }
        }
    }
    let time_violation = time_violation(config.mode, point);
    let rates = slot_rates_unchecked(config, channels, point, &mode_slots(config.mode));
    let commonrate_slack = rates.common_cap - point.common_split.iter().sum::<f64>();
    let split_violation = point.common_split.iter().map(|c| pos(-c)).fold(0.0, f64::max);
    let feasible = power_slack >= -tol
        && star_violation <= tol
        && binary_violation <= tol
        && time_violation <= tol
        && commonrate_slack >= -tol
        && split_violation <= tol;
    Ok(FeasibilityReport {
        power_slack,
        star_violation,
        binary_violation,
        time_violation,
        commonrate_slack,
        split_violation,
        feasible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{CMat, CVec, Complex64, ONE, ZERO};
    use alloc::vec;
    use approx::assert_relative_eq;

    fn setup(mode: Mode) -> (SystemConfig, ChannelSet) {
        let cfg = SystemConfig {
            antennas: 2,
            users: 2,
            elements: 3,
            reflect_users: vec![0],
            transmit_users: vec![1],
            relay_users: vec![0],
            dest_users: vec![1],
            bs_power: 2.0,
            relay_power: vec![1.0],
            noise_power: 1.0,
            self_interference: 0.0,
            mode,
        };
        let ch = ChannelSet {
            e: CMat::from_element(3, 2, ONE),
            g: vec![CVec::from_element(2, ONE), CVec::from_element(2, ONE)],
            h: vec![CVec::from_element(3, ONE), CVec::from_element(3, ONE)],
            huu: CMat::from_element(2, 2, ZERO),
            self_interference: CVec::from_element(2, ZERO),
        };
        (cfg, ch)
    }

    #[test]
    fn zero_precoder_reflect_only_is_feasible() {
        let (cfg, ch) = setup(Mode::FE);
        let mut p = DesignPoint::zeros(&cfg);
        p.psi_r.fill(ONE);
        let r = validate(&cfg, &ch, &p, 1e-9).unwrap();
        assert!(r.feasible);
        assert_eq!(r.power_slack, 2.0);
        assert_eq!(r.star_violation, 0.0);
    }

    #[test]
    fn both_unit_gives_unit_violation() {
        let (cfg, ch) = setup(Mode::FE);
        let mut p = DesignPoint::zeros(&cfg);
        p.psi_r.fill(ONE);
        p.psi_t.fill(ONE);
        let r = validate(&cfg, &ch, &p, 1e-9).unwrap();
        assert_relative_eq!(r.star_violation, 1.0);
        assert!(!r.feasible);
    }

    #[test]
    fn power_overshoot() {
        let (cfg, ch) = setup(Mode::FE);
        let mut p = DesignPoint::zeros(&cfg);
        p.psi_r.fill(ONE);
        p.precoders[(0, 1)] = Complex64::new((1.2f64 * 2.0).sqrt(), 0.0);
        let r = validate(&cfg, &ch, &p, 0.41).unwrap();
        assert_relative_eq!(r.power_slack, -0.4, epsilon = 1e-12);
        assert!(r.feasible);
        assert!(!validate(&cfg, &ch, &p, 0.39).unwrap().feasible);
    }

    #[test]
    fn ms_binariness() {
        let (cfg, ch) = setup(Mode::FM);
        let mut p = DesignPoint::zeros(&cfg);
        let half = Complex64::new(0.5f64.sqrt(), 0.0);
        p.psi_r.fill(half);
        p.psi_t.fill(half);
        let r = validate(&cfg, &ch, &p, 1e-3).unwrap();
        assert_relative_eq!(r.binary_violation, 0.5, epsilon = 1e-12);
        assert_relative_eq!(r.star_violation, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn ht_ordering_residual() {
        let (cfg, ch) = setup(Mode::HT);
        let mut p = DesignPoint::zeros(&cfg);
        p.psi_r.fill(ONE);
        p.psi_t.fill(ONE);
        assert_eq!(validate(&cfg, &ch, &p, 0.0).unwrap().time_violation, 0.0);
        p.lambda_1 = 0.7;
        let r = validate(&cfg, &ch, &p, 1e-9).unwrap();
        assert_relative_eq!(r.time_violation, 0.2, epsilon = 1e-12);
        assert!(r.commonrate_slack.is_finite());
    }

    #[test]
    fn pure_function() {
        let (cfg, ch) = setup(Mode::HE);
        let p = DesignPoint::zeros(&cfg);
        assert_eq!(validate(&cfg, &ch, &p, 1e-4).unwrap(), validate(&cfg, &ch, &p, 1e-4).unwrap());
    }
}
