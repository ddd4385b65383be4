//! Shared data model: system configuration, transmission modes and design points.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::linalg::{CMat, CVec, ZERO};
use crate::{Error, Result};

/// Relaying protocol of the cooperative phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Duplex {
    Full,
    Half,
}

/// Operating protocol of the surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StarProtocol {
    EnergySplitting,
    ModeSwitching,
    TimeSwitching,
}

/// Time-allocation variables a mode optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TimeVar {
    /// Direct-phase fraction of the half-duplex modes.
    Lambda,
    /// Reflection-slot fraction of the time-switching modes.
    LambdaR,
    /// Direct-phase fraction inside the reflection slot.
    Lambda1,
    /// Direct-phase fraction inside the transmission slot.
    Lambda2,
}

/// The six transmission modes (relaying protocol x surface protocol).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    FE,
    FM,
    FT,
    HE,
    HM,
    HT,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeDescriptor {
    pub duplex: Duplex,
    pub star_protocol: StarProtocol,
    pub time_vars: &'static [TimeVar],
}

impl Mode {
    pub const ALL: [Mode; 6] = [Mode::FE, Mode::FM, Mode::FT, Mode::HE, Mode::HM, Mode::HT];

    pub fn descriptor(self) -> ModeDescriptor {
        use StarProtocol::*;
        let (duplex, star_protocol, time_vars): (_, _, &'static [TimeVar]) = match self {
            Mode::FE => (Duplex::Full, EnergySplitting, &[]),
            Mode::FM => (Duplex::Full, ModeSwitching, &[]),
            Mode::FT => (Duplex::Full, TimeSwitching, &[TimeVar::LambdaR]),
            Mode::HE => (Duplex::Half, EnergySplitting, &[TimeVar::Lambda]),
            Mode::HM => (Duplex::Half, ModeSwitching, &[TimeVar::Lambda]),
            Mode::HT => (
                Duplex::Half,
                TimeSwitching,
                &[TimeVar::LambdaR, TimeVar::Lambda1, TimeVar::Lambda2],
            ),
        };
        ModeDescriptor { duplex, star_protocol, time_vars }
    }

    pub fn duplex(self) -> Duplex {
        self.descriptor().duplex
    }

    pub fn protocol(self) -> StarProtocol {
        self.descriptor().star_protocol
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::FE => "FE",
            Mode::FM => "FM",
            Mode::FT => "FT",
            Mode::HE => "HE",
            Mode::HM => "HM",
            Mode::HT => "HT",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInput(format!("unknown mode '{s}'")))
    }
}

/// Which half-space a user lies in relative to the surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Reflect,
    Transmit,
}

/// Counts, user partitions, powers and the selected mode.
///
/// User indices are zero-based throughout the crate.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// BS antenna count `L`.
    pub antennas: usize,
    /// User count `K`.
    pub users: usize,
    /// Surface element count `N`; zero means no surface.
    pub elements: usize,
    pub reflect_users: Vec<usize>,
    pub transmit_users: Vec<usize>,
    pub relay_users: Vec<usize>,
    pub dest_users: Vec<usize>,
    /// BS power budget `P_t` in watts.
    pub bs_power: f64,
    /// Transmit power of each relay, parallel to `relay_users` (watts).
    pub relay_power: Vec<f64>,
    /// Noise power `σ²` in watts.
    pub noise_power: f64,
    /// Self-interference channel variance `Ω_I²`.
    pub self_interference: f64,
    pub mode: Mode,
}

fn check_partition(a: &[usize], b: &[usize], k: usize, what: &str) -> Result<()> {
    let mut seen = vec![false; k];
    for &u in a.iter().chain(b) {
        if u >= k {
            return Err(Error::InvalidConfig(format!("{what}: user index {u} out of range")));
        }
        if seen[u] {
            return Err(Error::InvalidConfig(format!("{what}: user {u} listed twice")));
        }
        seen[u] = true;
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::InvalidConfig(format!("{what}: sets do not cover every user")));
    }
    Ok(())
}

impl SystemConfig {
    /// Validates the partition and power invariants.
    pub fn validate(&self) -> Result<()> {
        if self.antennas == 0 || self.users == 0 {
            return Err(Error::InvalidConfig("need at least one antenna and one user".into()));
        }
        check_partition(&self.reflect_users, &self.transmit_users, self.users, "reflect/transmit")?;
        check_partition(&self.relay_users, &self.dest_users, self.users, "relay/destination")?;
        if self.relay_power.len() != self.relay_users.len() {
            return Err(Error::InvalidConfig("one relay power per relay user required".into()));
        }
        if !(self.bs_power > 0.0) || !(self.noise_power > 0.0) {
            return Err(Error::InvalidConfig("P_t and sigma^2 must be positive".into()));
        }
        if self.relay_power.iter().any(|p| !(*p >= 0.0)) || !(self.self_interference >= 0.0) {
            return Err(Error::InvalidConfig("relay power and Omega_I^2 must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn side(&self, user: usize) -> Side {
        if self.transmit_users.contains(&user) {
            Side::Transmit
        } else {
            Side::Reflect
        }
    }

    pub fn is_relay(&self, user: usize) -> bool {
        self.relay_users.contains(&user)
    }

    /// Relay transmit power of `user`, zero for destinations.
    pub fn relay_power_of(&self, user: usize) -> f64 {
        self.relay_users
            .iter()
            .position(|&u| u == user)
            .map_or(0.0, |i| self.relay_power[i])
    }

    pub fn with_mode(&self, mode: Mode) -> Self {
        Self { mode, ..self.clone() }
    }

    /// Same configuration with the surface removed (`N = 0`).
    pub fn without_surface(&self) -> Self {
        Self { elements: 0, ..self.clone() }
    }
}

/// One candidate solution: precoders, surface coefficients, common-rate
/// split and time allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignPoint {
    /// `L x (K+1)` precoders; column 0 carries the common stream.
    pub precoders: CMat,
    /// Common-rate portions `C_k` in bits/s/Hz.
    pub common_split: Vec<f64>,
    pub psi_r: CVec,
    pub psi_t: CVec,
    /// Direct-phase fraction (HE/HM).
    pub lambda: f64,
    /// Reflection-slot fraction (FT/HT).
    pub lambda_r: f64,
    /// HT direct-phase fraction in the reflection slot.
    pub lambda_1: f64,
    /// HT direct-phase fraction in the transmission slot.
    pub lambda_2: f64,
}

impl DesignPoint {
    /// All-zero precoders and surface, `λ = 1`, `λ_r = 1/2`, `λ_1 = λ_2 = 1/4`.
    pub fn zeros(config: &SystemConfig) -> Self {
        Self {
            precoders: CMat::from_element(config.antennas, config.users + 1, ZERO),
            common_split: vec![0.0; config.users],
            psi_r: CVec::from_element(config.elements, ZERO),
            psi_t: CVec::from_element(config.elements, ZERO),
            lambda: 1.0,
            lambda_r: 0.5,
            lambda_1: 0.25,
            lambda_2: 0.25,
        }
    }

    pub fn check_dimensions(&self, config: &SystemConfig) -> Result<()> {
        let ok = self.precoders.nrows() == config.antennas
            && self.precoders.ncols() == config.users + 1
            && self.common_split.len() == config.users
            && self.psi_r.len() == config.elements
            && self.psi_t.len() == config.elements;
        if ok {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "design point shape P {}x{}, c {}, psi {}/{} does not match L={}, K={}, N={}",
                self.precoders.nrows(),
                self.precoders.ncols(),
                self.common_split.len(),
                self.psi_r.len(),
                self.psi_t.len(),
                config.antennas,
                config.users,
                config.elements
            )))
        }
    }

    pub fn transmit_power(&self) -> f64 {
        crate::linalg::frobenius_sqr(&self.precoders)
    }

    pub fn psi(&self, side: Side) -> &CVec {
        match side {
            Side::Reflect => &self.psi_r,
            Side::Transmit => &self.psi_t,
        }
    }
}
