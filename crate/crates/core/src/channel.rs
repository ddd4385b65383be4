//! Geometry, large-scale path loss and seeded small-scale fading.
//!
//! BS-user and user-user links are Rayleigh; BS-surface and surface-user
//! links are Rician with a uniform-linear-array line-of-sight component whose
//! angles are drawn from the seed.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{norm_sqr, polar, CMat, CVec, Complex64, ZERO};
use crate::model::{Mode, SystemConfig};
use crate::{Error, Result};

const GEOMETRY_STREAM: u64 = 0;
const FADING_STREAM: u64 = 1;

pub type Point3 = [f64; 3];

fn distance(a: &Point3, b: &Point3) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Node positions in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub bs_pos: Point3,
    pub ris_pos: Point3,
    pub user_pos: Vec<Point3>,
    pub circle_radius: f64,
}

impl Geometry {
    /// Users dropped uniformly in a horizontal disc centred on the surface.
    pub fn random(seed: u64, users: usize, bs_pos: Point3, ris_pos: Point3, circle_radius: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(GEOMETRY_STREAM);
        let user_pos = (0..users)
            .map(|_| {
                let r = circle_radius * rng.random::<f64>().sqrt();
                let phi = 2.0 * PI * rng.random::<f64>();
                [ris_pos[0] + r * phi.cos(), ris_pos[1] + r * phi.sin(), ris_pos[2]]
            })
            .collect();
        Self { bs_pos, ris_pos, user_pos, circle_radius }
    }

    /// Default layout: BS at the origin, surface at (0, 50, 0), 5 m user disc.
    pub fn default_layout(seed: u64, users: usize) -> Self {
        Self::random(seed, users, [0.0; 3], [0.0, 50.0, 0.0], 5.0)
    }

    pub fn bs_to_user(&self, k: usize) -> f64 {
        distance(&self.bs_pos, &self.user_pos[k])
    }

    pub fn ris_to_user(&self, k: usize) -> f64 {
        distance(&self.ris_pos, &self.user_pos[k])
    }

    pub fn bs_to_ris(&self) -> f64 {
        distance(&self.bs_pos, &self.ris_pos)
    }

    pub fn user_to_user(&self, m: usize, n: usize) -> f64 {
        distance(&self.user_pos[m], &self.user_pos[n])
    }

    /// True when the user is on the far side of the surface plane from the BS.
    ///
    /// The plane passes through the surface and is normal to the BS-surface
    /// axis; points on the plane count as transmission side.
    pub fn on_transmit_side(&self, k: usize) -> bool {
        let n: Vec<f64> = (0..3).map(|i| self.ris_pos[i] - self.bs_pos[i]).collect();
        let proj: f64 = (0..3).map(|i| (self.user_pos[k][i] - self.ris_pos[i]) * n[i]).sum();
        proj >= 0.0
    }
}

/// Large-scale and small-scale fading constants.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingParams {
    /// Path loss at the reference distance, dB.
    pub l0_db: f64,
    /// Reference distance, meters.
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

impl Default for FadingParams {
    fn default() -> Self {
        Self {
            l0_db: -30.0,
            d0: 1.0,
            alpha_bu: 3.76,
            alpha_uu: 3.76,
            alpha_br: 2.2,
            alpha_ru: 2.2,
            rician_k_db: 3.0,
            sigma2_relay: 1.0,
            sigma2_dest: 0.3,
            sigma2_uu: 1.0,
        }
    }
}

impl FadingParams {
    pub fn validate(&self) -> Result<()> {
        let exps = [self.alpha_bu, self.alpha_uu, self.alpha_br, self.alpha_ru];
        if !(self.d0 > 0.0) || exps.iter().any(|a| !(*a >= 0.0)) {
            return Err(Error::InvalidConfig("d0 must be positive and exponents nonnegative".into()));
        }
        let vars = [self.sigma2_relay, self.sigma2_dest, self.sigma2_uu];
        if vars.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidConfig("fading variances must be nonnegative".into()));
        }
        Ok(())
    }

    fn rician_weights(&self) -> (f64, f64) {
        let kappa = 10f64.powf(self.rician_k_db / 10.0);
        ((kappa / (1.0 + kappa)).sqrt(), (1.0 / (1.0 + kappa)).sqrt())
    }
}

/// Linear power gain `L0 (d/d0)^(-alpha)`.
pub fn path_loss(d: f64, alpha: f64, params: &FadingParams) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::InvalidInput(format!("distance must be positive, got {d}")));
    }
    Ok(10f64.powf(params.l0_db / 10.0) * (d / params.d0).powf(-alpha))
}

/// Every channel of one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// BS to surface, `N x L`.
    pub e: CMat,
    /// BS to user `k`, length `L`.
    pub g: Vec<CVec>,
    /// Surface to user `k`, length `N`.
    pub h: Vec<CVec>,
    /// `huu[(m, n)]` is the link from user `m` to user `n`; the diagonal is unused.
    pub huu: CMat,
    /// Self-interference realization `I_k` of each user (only relays use it).
    pub self_interference: CVec,
}

impl ChannelSet {
    pub fn antennas(&self) -> usize {
        self.e.ncols().max(self.g.first().map_or(0, |g| g.len()))
    }

    pub fn elements(&self) -> usize {
        self.e.nrows()
    }

    pub fn users(&self) -> usize {
        self.g.len()
    }

    /// The same realization with the surface removed.
    pub fn without_surface(&self) -> Self {
        let l = self.g.first().map_or(0, |g| g.len());
        Self {
            e: CMat::from_element(0, l, ZERO),
            g: self.g.clone(),
            h: self.g.iter().map(|_| CVec::from_element(0, ZERO)).collect(),
            huu: self.huu.clone(),
            self_interference: self.self_interference.clone(),
        }
    }

    /// The same realization with every surface path zeroed but `N` kept.
    pub fn with_zero_surface(&self) -> Self {
        let mut out = self.clone();
        out.e.fill(ZERO);
        for h in &mut out.h {
            h.fill(ZERO);
        }
        out
    }

    pub fn check_dimensions(&self, config: &SystemConfig) -> Result<()> {
        let (l, k, n) = (config.antennas, config.users, config.elements);
        let ok = self.e.nrows() == n
            && (n == 0 || self.e.ncols() == l)
            && self.g.len() == k
            && self.g.iter().all(|g| g.len() == l)
            && self.h.len() == k
            && self.h.iter().all(|h| h.len() == n)
            && self.huu.nrows() == k
            && self.huu.ncols() == k
            && self.self_interference.len() == k;
        if ok {
            Ok(())
        } else {
            Err(Error::Dimension(format!("channel set does not match L={l}, K={k}, N={n}")))
        }
    }
}

fn cn01(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
}

fn steering(len: usize, angle: f64) -> CVec {
    CVec::from_iterator(len, (0..len).map(|m| polar(1.0, PI * m as f64 * angle.sin())))
}

fn uniform_angle(rng: &mut ChaCha8Rng) -> f64 {
    PI * (rng.random::<f64>() - 0.5)
}

/// Draws one channel realization.
///
/// Small-scale draws are taken with unit variance in a fixed order and then
/// scaled, so the same seed yields bit-identical channels and zero variances
/// yield exact zeros.
pub fn generate(seed: u64, config: &SystemConfig, geom: &Geometry, params: &FadingParams) -> Result<ChannelSet> {
    config.validate()?;
    params.validate()?;
    let (l, k, n) = (config.antennas, config.users, config.elements);
    if geom.user_pos.len() != k {
        return Err(Error::Dimension(format!("geometry has {} users, config {k}", geom.user_pos.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(FADING_STREAM);
    let (w_los, w_nlos) = params.rician_weights();

    let aoa = uniform_angle(&mut rng);
    let aod = uniform_angle(&mut rng);
    let los = steering(n, aoa) * steering(l, aod).adjoint();
    let br_gain = path_loss(geom.bs_to_ris(), params.alpha_br, params)?.sqrt();
    let e = CMat::from_fn(n, l, |r, c| {
        br_gain * (w_los * los[(r, c)] + w_nlos * cn01(&mut rng))
    });

    let mut g = Vec::with_capacity(k);
    let mut h = Vec::with_capacity(k);
    for user in 0..k {
        let var = if config.is_relay(user) { params.sigma2_relay } else { params.sigma2_dest };
        let amp = (path_loss(geom.bs_to_user(user), params.alpha_bu, params)? * var).sqrt();
        g.push(CVec::from_fn(l, |_, _| amp * cn01(&mut rng)));

        let ru_gain = path_loss(geom.ris_to_user(user), params.alpha_ru, params)?.sqrt();
        let los = steering(n, uniform_angle(&mut rng));
        h.push(CVec::from_fn(n, |i, _| ru_gain * (w_los * los[i] + w_nlos * cn01(&mut rng))));
    }

    let mut huu = CMat::from_element(k, k, ZERO);
    for m in 0..k {
        for j in 0..k {
            let draw = cn01(&mut rng);
            if m != j {
                let amp = (path_loss(geom.user_to_user(m, j), params.alpha_uu, params)? * params.sigma2_uu).sqrt();
                huu[(m, j)] = amp * draw;
            }
        }
    }
    let si_amp = config.self_interference.sqrt();
    let self_interference = CVec::from_fn(k, |_, _| si_amp * cn01(&mut rng));
    Ok(ChannelSet { e, g, h, huu, self_interference })
}

/// User roles derived from a realization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grouping {
    pub relay_users: Vec<usize>,
    pub dest_users: Vec<usize>,
    pub reflect_users: Vec<usize>,
    pub transmit_users: Vec<usize>,
}

/// One relay (largest `‖g_k‖²`, lowest index on ties); sides from the
/// half-space each user occupies.
pub fn group_users(channels: &ChannelSet, geom: &Geometry) -> Grouping {
    let k = channels.users();
    let mut relay = 0;
    let mut best = f64::NEG_INFINITY;
    for (u, g) in channels.g.iter().enumerate() {
        let gain = norm_sqr(g);
        if gain > best {
            best = gain;
            relay = u;
        }
    }
    let (transmit_users, reflect_users): (Vec<usize>, Vec<usize>) =
        (0..k).partition(|&u| geom.user_pos.get(u).is_some_and(|_| geom.on_transmit_side(u)));
    Grouping {
        relay_users: if k == 0 { Vec::new() } else { alloc::vec![relay] },
        dest_users: (0..k).filter(|&u| u != relay || k == 0).collect(),
        reflect_users,
        transmit_users,
    }
}

/// Inputs for drawing a complete simulation instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub antennas: usize,
    pub users: usize,
    pub elements: usize,
    pub mode: Mode,
    pub bs_power: f64,
    /// Relay power as a fraction of `bs_power`.
    pub relay_power_ratio: f64,
    pub noise_power: f64,
    pub self_interference: f64,
    pub fading: FadingParams,
    pub bs_pos: Point3,
    pub ris_pos: Point3,
    pub circle_radius: f64,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            antennas: 4,
            users: 4,
            elements: 16,
            mode: Mode::FE,
            bs_power: 1.0,
            relay_power_ratio: 0.5,
            noise_power: 1e-12,
            self_interference: DEFAULT_SELF_INTERFERENCE,
            fading: FadingParams::default(),
            bs_pos: [0.0; 3],
            ris_pos: [0.0, 50.0, 0.0],
            circle_radius: 5.0,
        }
    }
}

/// Default `Ω_I²`: -110 dB residual self-interference after cancellation.
pub const DEFAULT_SELF_INTERFERENCE: f64 = 1e-11;

/// Noise power of -90 dBm in watts.
pub const DEFAULT_NOISE_POWER: f64 = 1e-12;

impl ScenarioSpec {
    /// Sets `P_t` so that `P_t G_ref / σ² = 10^(snr_db/10)`, where `G_ref` is
    /// the mean gain of a relay-variance direct link at the BS-surface distance.
    pub fn with_snr_db(mut self, snr_db: f64) -> Result<Self> {
        let d = distance(&self.bs_pos, &self.ris_pos);
        let reference = path_loss(d, self.fading.alpha_bu, &self.fading)? * self.fading.sigma2_relay;
        self.bs_power = 10f64.powf(snr_db / 10.0) * self.noise_power / reference;
        Ok(self)
    }
}

/// A fully specified instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub config: SystemConfig,
    pub geometry: Geometry,
    pub channels: ChannelSet,
}

impl Scenario {
    /// Draws geometry and fading for `seed` and groups the users.
    ///
    /// Channels are first drawn with every user at relay variance to pick the
    /// relay, then redrawn from the same stream with the final variances; the
    /// scaling keeps the relay the strongest user.
    pub fn draw(seed: u64, spec: &ScenarioSpec) -> Result<Self> {
        let geometry = Geometry::random(seed, spec.users, spec.bs_pos, spec.ris_pos, spec.circle_radius);
        let mut config = SystemConfig {
            antennas: spec.antennas,
            users: spec.users,
            elements: spec.elements,
            reflect_users: (0..spec.users).collect(),
            transmit_users: Vec::new(),
            relay_users: Vec::new(),
            dest_users: (0..spec.users).collect(),
            bs_power: spec.bs_power,
            relay_power: Vec::new(),
            noise_power: spec.noise_power,
            self_interference: spec.self_interference,
            mode: spec.mode,
        };
        let mut uniform = spec.fading.clone();
        uniform.sigma2_dest = uniform.sigma2_relay;
        let provisional = generate(seed, &config, &geometry, &uniform)?;
        let grouping = group_users(&provisional, &geometry);
        config.relay_power = grouping.relay_users.iter().map(|_| spec.relay_power_ratio * spec.bs_power).collect();
        config.relay_users = grouping.relay_users;
        config.dest_users = grouping.dest_users;
        config.reflect_users = grouping.reflect_users;
        config.transmit_users = grouping.transmit_users;
        config.validate()?;
        let channels = generate(seed, &config, &geometry, &spec.fading)?;
        Ok(Self { config, geometry, channels })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_relative_eq;

    fn config(k: usize, l: usize, n: usize) -> SystemConfig {
        SystemConfig {
            antennas: l,
            users: k,
            elements: n,
            reflect_users: (0..k).collect(),
            transmit_users: vec![],
            relay_users: vec![0],
            dest_users: (1..k).collect(),
            bs_power: 1.0,
            relay_power: vec![0.5],
            noise_power: 1e-12,
            self_interference: 1e-11,
            mode: Mode::FE,
        }
    }

    #[test]
    fn path_loss_reference_values() {
        let p = FadingParams::default();
        assert_relative_eq!(path_loss(1.0, 2.2, &p).unwrap(), 1e-3, max_relative = 1e-12);
        assert_relative_eq!(path_loss(10.0, 2.0, &p).unwrap(), 1e-5, max_relative = 1e-12);
        for d in [0.5, 3.0, 70.0] {
            assert_relative_eq!(path_loss(d, 0.0, &p).unwrap(), 1e-3, max_relative = 1e-12);
        }
        assert!(path_loss(0.0, 2.0, &p).is_err());
        assert!(path_loss(-1.0, 2.0, &p).is_err());
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = config(4, 4, 8);
        let geom = Geometry::default_layout(3, 4);
        let a = generate(11, &cfg, &geom, &FadingParams::default()).unwrap();
        let b = generate(11, &cfg, &geom, &FadingParams::default()).unwrap();
        assert_eq!(a, b);
        let c = generate(12, &cfg, &geom, &FadingParams::default()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_destination_variance_zeroes_direct_links() {
        let cfg = config(3, 2, 4);
        let geom = Geometry::default_layout(1, 3);
        let params = FadingParams { sigma2_dest: 0.0, ..FadingParams::default() };
        let ch = generate(5, &cfg, &geom, &params).unwrap();
        for &d in &cfg.dest_users {
            assert!(ch.g[d].iter().all(|z| *z == ZERO));
        }
        assert!(ch.g[0].iter().any(|z| *z != ZERO));
    }

    #[test]
    fn users_inside_circle() {
        let geom = Geometry::default_layout(9, 50);
        for k in 0..50 {
            assert!(geom.ris_to_user(k) <= geom.circle_radius + 1e-12);
        }
    }

    #[test]
    fn grouping_picks_strongest_and_lowest_on_ties() {
        let geom = Geometry::default_layout(0, 2);
        let mut ch = ChannelSet {
            e: CMat::from_element(0, 1, ZERO),
            g: vec![CVec::from_element(1, Complex64::new(2.0, 0.0)), CVec::from_element(1, Complex64::new(1.0, 0.0))],
            h: vec![CVec::zeros(0), CVec::zeros(0)],
            huu: CMat::from_element(2, 2, ZERO),
            self_interference: CVec::from_element(2, ZERO),
        };
        assert_eq!(group_users(&ch, &geom).relay_users, vec![0]);
        ch.g[1] = ch.g[0].clone();
        let grouping = group_users(&ch, &geom);
        assert_eq!(grouping.relay_users, vec![0]);
        assert_eq!(grouping.dest_users, vec![1]);
    }

    #[test]
    fn sides_follow_surface_plane() {
        let geom = Geometry {
            bs_pos: [0.0; 3],
            ris_pos: [0.0, 50.0, 0.0],
            user_pos: vec![[1.0, 48.0, 0.0], [0.0, 52.0, 0.0]],
            circle_radius: 5.0,
        };
        assert!(!geom.on_transmit_side(0));
        assert!(geom.on_transmit_side(1));
    }

    #[test]
    fn scenario_relay_is_strongest_user() {
        let spec = ScenarioSpec { elements: 8, ..ScenarioSpec::default() }.with_snr_db(20.0).unwrap();
        for seed in 0..5 {
            let s = Scenario::draw(seed, &spec).unwrap();
            let relay = s.config.relay_users[0];
            let gains: Vec<f64> = s.channels.g.iter().map(norm_sqr).collect();
            assert!(gains.iter().all(|&x| x <= gains[relay]));
            s.channels.check_dimensions(&s.config).unwrap();
        }
    }
}
