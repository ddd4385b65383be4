//! Exact SINR and rate evaluation.
//!
//! Every mode is described as a list of [`Slot`]s: a slot is an orthogonal
//! fraction of the block with a time weight, a surface configuration and a
//! kind (full-duplex direct, half-duplex direct, or cooperative). The same
//! description drives the SCA formulation, so the optimizers and this engine
//! cannot disagree on the rate expressions.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::channel::ChannelSet;
use crate::linalg::{inner, log2_1p, CMat, CVec, ZERO};
use crate::model::{DesignPoint, Duplex, Mode, Side, StarProtocol, SystemConfig};
use crate::{Error, Result};

/// Which surface coefficients a user sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SideSelect {
    /// Each user sees the coefficients of its own side.
    PerUser,
    /// Users on the given side see its coefficients; the others see none.
    Only(Side),
    /// No surface at all.
    Zero,
}

impl SideSelect {
    /// Side whose coefficients reach `user`, if any.
    pub fn surface_for(self, config: &SystemConfig, user: usize) -> Option<Side> {
        let side = config.side(user);
        match self {
            SideSelect::PerUser => Some(side),
            SideSelect::Only(s) if s == side => Some(side),
            _ => None,
        }
    }
}

/// Index of each time variable inside [`TimeWeight::coef`].
pub const T_LAMBDA: usize = 0;
pub const T_LAMBDA_R: usize = 1;
pub const T_LAMBDA_1: usize = 2;
pub const T_LAMBDA_2: usize = 3;

/// Affine function `c0 + coef · (λ, λ_r, λ_1, λ_2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeWeight {
    pub c0: f64,
    pub coef: [f64; 4],
}

impl TimeWeight {
    pub const ONE: TimeWeight = TimeWeight { c0: 1.0, coef: [0.0; 4] };

    fn var(i: usize) -> Self {
        let mut coef = [0.0; 4];
        coef[i] = 1.0;
        Self { c0: 0.0, coef }
    }

    fn one_minus(i: usize) -> Self {
        let mut coef = [0.0; 4];
        coef[i] = -1.0;
        Self { c0: 1.0, coef }
    }

    pub fn eval(&self, t: &[f64; 4]) -> f64 {
        self.c0 + self.coef.iter().zip(t).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn is_constant(&self) -> bool {
        self.coef.iter().all(|c| *c == 0.0)
    }
}

/// Time variables of a point in [`TimeWeight`] order.
pub fn time_vector(point: &DesignPoint) -> [f64; 4] {
    [point.lambda, point.lambda_r, point.lambda_1, point.lambda_2]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotKind {
    /// BS transmission while relays forward simultaneously: self-interference
    /// at relays, MRC of the relayed copy at destinations.
    DirectFd,
    /// BS transmission alone.
    DirectHd,
    /// Relays forward the common stream; only destinations gain common rate.
    Coop,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slot {
    pub kind: SlotKind,
    pub surface: SideSelect,
    pub weight: TimeWeight,
}

/// Slot decomposition of a mode.
pub fn mode_slots(mode: Mode) -> Vec<Slot> {
    let ts = mode.protocol() == StarProtocol::TimeSwitching;
    let slot = |kind, surface, weight| Slot { kind, surface, weight };
    match (mode.duplex(), ts) {
        (Duplex::Full, false) => vec![slot(SlotKind::DirectFd, SideSelect::PerUser, TimeWeight::ONE)],
        (Duplex::Full, true) => vec![
            slot(SlotKind::DirectFd, SideSelect::Only(Side::Reflect), TimeWeight::var(T_LAMBDA_R)),
            slot(SlotKind::DirectFd, SideSelect::Only(Side::Transmit), TimeWeight::one_minus(T_LAMBDA_R)),
        ],
        (Duplex::Half, false) => vec![
            slot(SlotKind::DirectHd, SideSelect::PerUser, TimeWeight::var(T_LAMBDA)),
            slot(SlotKind::Coop, SideSelect::PerUser, TimeWeight::one_minus(T_LAMBDA)),
        ],
        (Duplex::Half, true) => {
            let mut lr_minus_l1 = TimeWeight::var(T_LAMBDA_R);
            lr_minus_l1.coef[T_LAMBDA_1] = -1.0;
            let mut rest = TimeWeight::one_minus(T_LAMBDA_R);
            rest.coef[T_LAMBDA_2] = -1.0;
            vec![
                slot(SlotKind::DirectHd, SideSelect::Only(Side::Reflect), TimeWeight::var(T_LAMBDA_1)),
                slot(SlotKind::Coop, SideSelect::Only(Side::Reflect), lr_minus_l1),
                slot(SlotKind::DirectHd, SideSelect::Only(Side::Transmit), TimeWeight::var(T_LAMBDA_2)),
                slot(SlotKind::Coop, SideSelect::Only(Side::Transmit), rest),
            ]
        }
    }
}

/// Checks the time-allocation constraints of `mode`.
pub fn check_time_allocation(mode: Mode, point: &DesignPoint) -> Result<()> {
    let in_unit = |x: f64| (0.0..=1.0).contains(&x);
    let err = |msg: &str| Err(Error::TimeOrdering(format!("{mode}: {msg}")));
    match mode {
        Mode::FE | Mode::FM => Ok(()),
        Mode::FT => {
            if in_unit(point.lambda_r) {
                Ok(())
            } else {
                err("lambda_r outside [0, 1]")
            }
        }
        Mode::HE | Mode::HM => {
            if point.lambda > 0.0 && point.lambda <= 1.0 {
                Ok(())
            } else {
                err("lambda outside (0, 1]")
            }
        }
        Mode::HT => {
            if !in_unit(point.lambda_r) {
                err("lambda_r outside [0, 1]")
            } else if !(point.lambda_1 > 0.0 && point.lambda_1 <= point.lambda_r) {
                err("need 0 < lambda_1 <= lambda_r")
            } else if !(point.lambda_2 > 0.0 && point.lambda_2 <= 1.0 - point.lambda_r) {
                err("need 0 < lambda_2 <= 1 - lambda_r")
            } else {
                Ok(())
            }
        }
    }
}

/// Effective BS-user channels and relay-destination scalars for one surface
/// configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannels {
    /// `gt[k]` with `gt[k]ᴴ = g_kᴴ + h_kᴴ diag(ψ) E`.
    pub gt: Vec<CVec>,
    /// `ht[(m, k)] = h_{m,k} + h_kᴴ diag(ψ)ᴴ h_m`, computed for every pair.
    pub ht: CMat,
}

/// Surface coefficients reaching `user` under `select`.
pub fn surface_of<'a>(config: &SystemConfig, point: &'a DesignPoint, select: SideSelect, user: usize) -> Option<&'a CVec> {
    select.surface_for(config, user).map(|s| point.psi(s))
}

pub fn effective_channels(
    config: &SystemConfig,
    channels: &ChannelSet,
    point: &DesignPoint,
    select: SideSelect,
) -> EffectiveChannels {
    let k = channels.users();
    let mut gt = Vec::with_capacity(k);
    for user in 0..k {
        let mut g = channels.g[user].clone();
        if let Some(psi) = surface_of(config, point, select, user) {
            // Eᴴ diag(conj ψ) h_k
            let w = CVec::from_fn(psi.len(), |n, _| psi[n].conj() * channels.h[user][n]);
            g += channels.e.adjoint() * w;
        }
        gt.push(g);
    }
    let mut ht = CMat::from_element(k, k, ZERO);
    for dest in 0..k {
        let psi = surface_of(config, point, select, dest);
        for m in 0..k {
            if m == dest {
                continue;
            }
            let mut v = channels.huu[(m, dest)];
            if let Some(psi) = psi {
                for n in 0..psi.len() {
                    v += channels.h[dest][n].conj() * psi[n].conj() * channels.h[m][n];
                }
            }
            ht[(m, dest)] = v;
        }
    }
    EffectiveChannels { gt, ht }
}

/// SINRs of one slot. Entries that do not apply (private SINR in a
/// cooperative slot, cooperative common SINR of a relay) are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotSinrs {
    /// Common SINR from the BS signal.
    pub common_direct: Vec<f64>,
    /// Common SINR from relayed copies (MRC part for FD destinations, the
    /// whole cooperative-slot SINR for HD destinations).
    pub common_coop: Vec<f64>,
    pub private: Vec<f64>,
}

impl SlotSinrs {
    /// SINR inside the common-rate logarithm of `user`.
    pub fn common(&self, user: usize) -> f64 {
        self.common_direct[user] + self.common_coop[user]
    }
}

/// Received power `|gtᴴ p|²` for every column of `precoders`.
fn stream_powers(gt: &CVec, precoders: &CMat) -> Vec<f64> {
    (0..precoders.ncols())
        .map(|j| inner(gt, &precoders.column(j).into_owned()).norm_sqr())
        .collect()
}

/// Cooperative SINR `Σ_m |h̃_{m,k}|² P_m / σ²` of destination `k`.
pub fn coop_sinr(config: &SystemConfig, eff: &EffectiveChannels, dest: usize) -> f64 {
    config
        .relay_users
        .iter()
        .zip(&config.relay_power)
        .map(|(&m, &pm)| eff.ht[(m, dest)].norm_sqr() * pm)
        .sum::<f64>()
        / config.noise_power
}

/// Self-interference power `|I_k|² P_k` (zero for destinations).
pub fn self_interference_power(config: &SystemConfig, channels: &ChannelSet, user: usize) -> f64 {
    if config.is_relay(user) {
        channels.self_interference[user].norm_sqr() * config.relay_power_of(user)
    } else {
        0.0
    }
}

/// Which terms enter the SINR expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SinrModel {
    /// Every interference, self-interference and cooperative term.
    #[default]
    Exact,
    /// Private streams are assumed perfectly nulled at the other users (as
    /// with zero-forcing directions): no private cross-interference, and the
    /// common stream sees only the user's own private stream. `constants`
    /// keeps the FD self-interference and the in-slot cooperative MRC term.
    ZeroForced { constants: bool },
}

pub fn slot_sinrs(config: &SystemConfig, channels: &ChannelSet, point: &DesignPoint, slot: &Slot) -> SlotSinrs {
    slot_sinrs_with(config, channels, point, slot, SinrModel::Exact)
}

pub fn slot_sinrs_with(
    config: &SystemConfig,
    channels: &ChannelSet,
    point: &DesignPoint,
    slot: &Slot,
    model: SinrModel,
) -> SlotSinrs {
    let k = config.users;
    let (nulled, constants) = match model {
        SinrModel::Exact => (false, true),
        SinrModel::ZeroForced { constants } => (true, constants),
    };
    let eff = effective_channels(config, channels, point, slot.surface);
    let mut out = SlotSinrs { common_direct: vec![0.0; k], common_coop: vec![0.0; k], private: vec![0.0; k] };
    for user in 0..k {
        let relay = config.is_relay(user);
        match slot.kind {
            SlotKind::Coop => {
                if !relay {
                    out.common_coop[user] = coop_sinr(config, &eff, user);
                }
            }
            SlotKind::DirectFd | SlotKind::DirectHd => {
                let pw = stream_powers(&eff.gt[user], &point.precoders);
                let privates: f64 = if nulled { pw[user + 1] } else { pw[1..].iter().sum() };
                let mut noise = config.noise_power;
                if slot.kind == SlotKind::DirectFd && constants {
                    noise += self_interference_power(config, channels, user);
                    if !relay {
                        out.common_coop[user] = coop_sinr(config, &eff, user);
                    }
                }
                out.common_direct[user] = pw[0] / (privates + noise);
                out.private[user] = pw[user + 1] / (privates - pw[user + 1] + noise);
            }
        }
    }
    out
}

/// Common and private SINRs of a full-duplex mode with each user on its own side.
pub fn sinr_fd(config: &SystemConfig, channels: &ChannelSet, point: &DesignPoint) -> SlotSinrs {
    let slot = Slot { kind: SlotKind::DirectFd, surface: SideSelect::PerUser, weight: TimeWeight::ONE };
    slot_sinrs(config, channels, point, &slot)
}

/// Phase-wise SINRs of a half-duplex mode with each user on its own side:
/// `common_direct`/`private` from the direct phase and `common_coop` from
/// the cooperative phase.
pub fn sinr_hd(config: &SystemConfig, channels: &ChannelSet, point: &DesignPoint) -> SlotSinrs {
    let direct = Slot { kind: SlotKind::DirectHd, surface: SideSelect::PerUser, weight: TimeWeight::ONE };
    let coop = Slot { kind: SlotKind::Coop, surface: SideSelect::PerUser, weight: TimeWeight::ONE };
    let mut out = slot_sinrs(config, channels, point, &direct);
    out.common_coop = slot_sinrs(config, channels, point, &coop).common_coop;
    out
}

/// Per-user rates of a design point, bits/s/Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct RateBundle {
    /// Per-user common rate `R_{c,k}`.
    pub common: Vec<f64>,
    /// Per-user private rate `R_k`.
    pub private: Vec<f64>,
    /// `min_k R_{c,k}`.
    pub common_cap: f64,
    /// `R_k + C_k`.
    pub total: Vec<f64>,
    /// `min_k (R_k + C_k)`.
    pub objective: f64,
}

impl RateBundle {
    fn assemble(common: Vec<f64>, private: Vec<f64>, split: &[f64]) -> Self {
        let common_cap = common.iter().copied().fold(f64::INFINITY, f64::min);
        let total: Vec<f64> = private.iter().zip(split).map(|(r, c)| r + c).collect();
        let objective = total.iter().copied().fold(f64::INFINITY, f64::min);
        Self { common, private, common_cap, total, objective }
    }
}

/// Rates of `config.mode` at `point`.
pub fn mode_rates(config: &SystemConfig, channels: &ChannelSet, point: &DesignPoint) -> Result<RateBundle> {
    slot_rates(config, channels, point, &mode_slots(config.mode))
}

/// Rates for an explicit slot list (used for the mode family and baselines).
pub fn slot_rates(config: &SystemConfig, channels: &ChannelSet, point: &DesignPoint, slots: &[Slot]) -> Result<RateBundle> {
    point.check_dimensions(config)?;
    channels.check_dimensions(config)?;
    check_time_allocation(config.mode, point)?;
    Ok(slot_rates_unchecked(config, channels, point, slots))
}

/// [`slot_rates`] without dimension and time-ordering checks.
pub(crate) fn slot_rates_unchecked(config: &SystemConfig, channels: &ChannelSet, point: &DesignPoint, slots: &[Slot]) -> RateBundle {
    slot_rates_with(config, channels, point, slots, SinrModel::Exact)
}

/// Unchecked slot rates under an explicit SINR model.
pub(crate) fn slot_rates_with(
    config: &SystemConfig,
    channels: &ChannelSet,
    point: &DesignPoint,
    slots: &[Slot],
    model: SinrModel,
) -> RateBundle {
    let t = time_vector(point);
    let k = config.users;
    let mut common = vec![0.0; k];
    let mut private = vec![0.0; k];
    for slot in slots {
        let w = slot.weight.eval(&t);
        if w == 0.0 {
            continue;
        }
        let s = slot_sinrs_with(config, channels, point, slot, model);
        for user in 0..k {
            if slot.kind == SlotKind::Coop && config.is_relay(user) {
                continue;
            }
            common[user] += w * log2_1p(s.common(user));
            if slot.kind != SlotKind::Coop {
                private[user] += w * log2_1p(s.private[user]);
            }
        }
    }
    RateBundle::assemble(common, private, &point.common_split)
}

/// Users sorted by descending effective channel gain `‖g̃_k‖²`
/// (ties by lowest index).
pub fn noma_order(config: &SystemConfig, channels: &ChannelSet, point: &DesignPoint) -> Vec<usize> {
    let eff = effective_channels(config, channels, point, SideSelect::PerUser);
    let gains: Vec<f64> = eff.gt.iter().map(crate::linalg::norm_sqr).collect();
    let mut order: Vec<usize> = (0..config.users).collect();
    order.sort_by(|&a, &b| gains[b].total_cmp(&gains[a]).then(a.cmp(&b)));
    order
}

/// Single-slot NOMA with successive interference cancellation.
///
/// `order` lists users strongest first. The stream of the user at position
/// `j` (precoder column `user + 1`) is decoded by every user at positions
/// `0..=j`; streams at positions `< j` are still interference at that stage
/// while weaker users' streams were already cancelled. The user's rate is the
/// minimum over its decoders. The common precoder column is ignored.
pub fn noma_rates(config: &SystemConfig, channels: &ChannelSet, point: &DesignPoint, order: &[usize]) -> Result<RateBundle> {
    point.check_dimensions(config)?;
    channels.check_dimensions(config)?;
    let k = config.users;
    if order.len() != k {
        return Err(Error::InvalidInput("NOMA order must list every user".into()));
    }
    let eff = effective_channels(config, channels, point, SideSelect::PerUser);
    let powers: Vec<Vec<f64>> = eff.gt.iter().map(|g| stream_powers(g, &point.precoders)).collect();
    let mut private = vec![0.0; k];
    for (j, &user) in order.iter().enumerate() {
        let mut rate = f64::INFINITY;
        for &decoder in &order[..=j] {
            let pw = &powers[decoder];
            let interference: f64 = order[..j].iter().map(|&s| pw[s + 1]).sum();
            rate = rate.min(log2_1p(pw[user + 1] / (interference + config.noise_power)));
        }
        private[user] = rate;
    }
    Ok(RateBundle::assemble(vec![0.0; k], private, &vec![0.0; k]))
}

/// Water-filling split of the common rate: maximizes `min_k (private_k + c_k)`
/// over `c ≥ 0`, `Σ c ≤ cap`. Returns the split and the resulting minimum.
pub fn best_common_split(private: &[f64], cap: f64) -> (Vec<f64>, f64) {
    let k = private.len();
    if k == 0 {
        return (Vec::new(), f64::INFINITY);
    }
    let cap = cap.max(0.0);
    let mut sorted: Vec<f64> = private.to_vec();
    sorted.sort_by(f64::total_cmp);
    // Find level t with Σ max(0, t - r_k) = cap.
    let mut level = sorted[0] + cap;
    let mut used = 0.0;
    for i in 0..k {
        used += sorted[i];
        let t = (cap + used) / (i + 1) as f64;
        if i + 1 == k || t <= sorted[i + 1] {
            level = t;
            break;
        }
    }
    let split: Vec<f64> = private.iter().map(|r| (level - r).max(0.0)).collect();
    // Guard rounding so Σ c never exceeds the cap.
    let total: f64 = split.iter().sum();
    let split = if total > cap && total > 0.0 {
        split.iter().map(|c| c * cap / total).collect()
    } else {
        split
    };
    let objective = private.iter().zip(&split).map(|(r, c)| r + c).fold(f64::INFINITY, f64::min);
    (split, objective)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cvec, Complex64, I, ONE};
    use approx::assert_relative_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn single_user() -> (SystemConfig, ChannelSet, DesignPoint) {
        let config = SystemConfig {
            antennas: 1,
            users: 1,
            elements: 0,
            reflect_users: vec![0],
            transmit_users: vec![],
            relay_users: vec![0],
            dest_users: vec![],
            bs_power: 3.0,
            relay_power: vec![0.0],
            noise_power: 1.0,
            self_interference: 0.0,
            mode: Mode::FE,
        };
        let ch = ChannelSet {
            e: CMat::from_element(0, 1, ZERO),
            g: vec![cvec(&[ONE])],
            h: vec![CVec::zeros(0)],
            huu: CMat::from_element(1, 1, ZERO),
            self_interference: cvec(&[ZERO]),
        };
        let mut p = DesignPoint::zeros(&config);
        p.precoders[(0, 0)] = c(2f64.sqrt());
        p.precoders[(0, 1)] = c(1.0);
        (config, ch, p)
    }

    #[test]
    fn single_user_fd_hand_values() {
        let (cfg, ch, p) = single_user();
        let s = sinr_fd(&cfg, &ch, &p);
        assert_relative_eq!(s.common_direct[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(s.private[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn one_element_correction() {
        let mut cfg = single_user().0;
        cfg.elements = 1;
        cfg.antennas = 2;
        let mut e = CMat::from_element(1, 2, ZERO);
        e[(0, 0)] = ONE;
        let ch = ChannelSet {
            e,
            g: vec![CVec::from_element(2, ZERO)],
            h: vec![cvec(&[ONE])],
            huu: CMat::from_element(1, 1, ZERO),
            self_interference: cvec(&[ZERO]),
        };
        let mut p = DesignPoint::zeros(&cfg);
        p.psi_r = cvec(&[I]);
        let eff = effective_channels(&cfg, &ch, &p, SideSelect::PerUser);
        // gtᴴ = (0, 0) + 1 · j · (1, 0)
        assert_eq!(eff.gt[0][0].conj(), I);
        assert_eq!(eff.gt[0][1], ZERO);
    }

    #[test]
    fn ht_uses_conjugated_surface() {
        let cfg = SystemConfig {
            antennas: 1,
            users: 2,
            elements: 1,
            reflect_users: vec![0, 1],
            transmit_users: vec![],
            relay_users: vec![0],
            dest_users: vec![1],
            bs_power: 1.0,
            relay_power: vec![1.0],
            noise_power: 1.0,
            self_interference: 0.0,
            mode: Mode::HE,
        };
        let mut huu = CMat::from_element(2, 2, ZERO);
        huu[(0, 1)] = c(0.5);
        let ch = ChannelSet {
            e: CMat::from_element(1, 1, ONE),
            g: vec![cvec(&[ONE]), cvec(&[ONE])],
            h: vec![cvec(&[c(2.0)]), cvec(&[Complex64::new(0.0, 1.0)])],
            huu,
            self_interference: cvec(&[ZERO, ZERO]),
        };
        let mut p = DesignPoint::zeros(&cfg);
        let psi = Complex64::new(0.6, 0.8);
        p.psi_r = cvec(&[psi]);
        let eff = effective_channels(&cfg, &ch, &p, SideSelect::PerUser);
        // h_{m,k} + conj(h_k) conj(ψ) h_m
        let expected = c(0.5) + Complex64::new(0.0, -1.0) * psi.conj() * c(2.0);
        assert_relative_eq!((eff.ht[(0, 1)] - expected).norm(), 0.0, epsilon = 1e-15);
        let zero = effective_channels(&cfg, &ch, &p, SideSelect::Zero);
        assert_eq!(zero.ht[(0, 1)], c(0.5));
        assert_eq!(zero.gt[1], ch.g[1]);
    }

    #[test]
    fn hd_coop_hand_value() {
        let cfg = SystemConfig {
            antennas: 1,
            users: 2,
            elements: 0,
            reflect_users: vec![0, 1],
            transmit_users: vec![],
            relay_users: vec![0],
            dest_users: vec![1],
            bs_power: 1.0,
            relay_power: vec![1.0],
            noise_power: 1.0,
            self_interference: 0.0,
            mode: Mode::HE,
        };
        let mut huu = CMat::from_element(2, 2, ZERO);
        huu[(0, 1)] = c(2.0);
        let ch = ChannelSet {
            e: CMat::from_element(0, 1, ZERO),
            g: vec![cvec(&[ONE]), cvec(&[ONE])],
            h: vec![CVec::zeros(0), CVec::zeros(0)],
            huu,
            self_interference: cvec(&[ZERO, ZERO]),
        };
        let p = DesignPoint::zeros(&cfg);
        assert_relative_eq!(sinr_hd(&cfg, &ch, &p).common_coop[1], 4.0, epsilon = 1e-15);
        let mut cfg0 = cfg.clone();
        cfg0.relay_power = vec![0.0];
        assert_eq!(sinr_hd(&cfg0, &ch, &p).common_coop[1], 0.0);
    }

    #[test]
    fn time_ordering_rejected() {
        let (mut cfg, ch, mut p) = single_user();
        cfg.mode = Mode::HT;
        p.lambda_r = 0.3;
        p.lambda_1 = 0.4;
        assert!(matches!(mode_rates(&cfg, &ch, &p), Err(Error::TimeOrdering(_))));
        p.lambda_1 = 0.2;
        p.lambda_2 = 0.7;
        assert!(mode_rates(&cfg, &ch, &p).is_ok());
    }

    #[test]
    fn water_filling() {
        let (split, obj) = best_common_split(&[1.0, 2.0, 4.0], 2.0);
        assert_relative_eq!(obj, 2.5, epsilon = 1e-12);
        assert_relative_eq!(split[0], 1.5, epsilon = 1e-12);
        assert_relative_eq!(split[1], 0.5, epsilon = 1e-12);
        assert_eq!(split[2], 0.0);
        let (split, obj) = best_common_split(&[1.0, 1.0], 0.0);
        assert_eq!(split, vec![0.0, 0.0]);
        assert_eq!(obj, 1.0);
        let (_, obj) = best_common_split(&[0.0, 0.0, 0.0], 3.0);
        assert_relative_eq!(obj, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn noma_two_users() {
        let cfg = SystemConfig {
            antennas: 1,
            users: 2,
            elements: 0,
            reflect_users: vec![0, 1],
            transmit_users: vec![],
            relay_users: vec![0],
            dest_users: vec![1],
            bs_power: 1.0,
            relay_power: vec![0.0],
            noise_power: 1.0,
            self_interference: 0.0,
            mode: Mode::HE,
        };
        let ch = ChannelSet {
            e: CMat::from_element(0, 1, ZERO),
            g: vec![cvec(&[c(2.0)]), cvec(&[c(1.0)])],
            h: vec![CVec::zeros(0), CVec::zeros(0)],
            huu: CMat::from_element(2, 2, ZERO),
            self_interference: cvec(&[ZERO, ZERO]),
        };
        let mut p = DesignPoint::zeros(&cfg);
        p.precoders[(0, 1)] = c(1.0);
        p.precoders[(0, 2)] = c(2.0);
        let order = noma_order(&cfg, &ch, &p);
        assert_eq!(order, vec![0, 1]);
        let r = noma_rates(&cfg, &ch, &p, &order).unwrap();
        // strong user: own stream after cancelling the weak one, |2·1|² / 1
        assert_relative_eq!(r.private[0], 5f64.log2(), epsilon = 1e-12);
        // weak stream: min(at weak: 4/(1+1), at strong: 16/(4+1))
        assert_relative_eq!(r.private[1], 3f64.log2(), epsilon = 1e-12);
    }
}
