//! Low-complexity optimizer: one projected gradient step for the surface,
//! fixed zero-forcing / dominant-direction precoders, and a reduced SCA over
//! stream powers, common split and time allocation.

use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use nalgebra::linalg::SVD;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::channel::ChannelSet;
use crate::conic::ConicSolver;
use crate::linalg::{frobenius_sqr, CMat, CVec, Complex64, ONE, ZERO};
use crate::model::{DesignPoint, Side, StarProtocol, SystemConfig};
use crate::rates::{effective_channels, SideSelect, SinrModel};
use crate::sca::{solve_active, AoOptions, Problem};
use crate::{Error, Result};

/// Relative singular-value threshold for the numerical rank.
const RANK_TOL: f64 = 1e-10;
/// Ridge added to a singular ZF Gram matrix.
const ZF_RIDGE: f64 = 1e-8;

fn check_square(x: &CMat) -> Result<()> {
    if x.nrows() != x.ncols() {
        return Err(Error::Dimension(alloc::format!("expected a square matrix, got {}x{}", x.nrows(), x.ncols())));
    }
    Ok(())
}

/// `½(Xᵀ + X)`.
pub fn sym(x: &CMat) -> Result<CMat> {
    check_square(x)?;
    Ok((x.transpose() + x) * Complex64::new(0.5, 0.0))
}

fn svd(x: &CMat) -> Result<(CMat, Vec<f64>, CMat)> {
    let s = SVD::try_new(x.clone(), true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let u = s.u.ok_or_else(|| Error::Numerical("SVD without U".into()))?;
    let v = s.v_t.ok_or_else(|| Error::Numerical("SVD without V".into()))?.adjoint();
    Ok((u, s.singular_values.iter().copied().collect(), v))
}

fn is_unitary(m: &CMat, tol: f64) -> bool {
    let n = m.ncols();
    (m.adjoint() * m - CMat::identity(n, n)).iter().all(|z| z.norm() <= tol)
}

/// Nearest unitary matrix `Û Vᴴ` with `Û = [U_R, V*_{N-R}]`.
///
/// The completion of the rank-deficient part keeps the result symmetric for
/// symmetric input. If it is not orthonormal (non-symmetric rank-deficient
/// input) the SVD's own null-space columns are used instead.
pub fn uni(x: &CMat) -> Result<CMat> {
    check_square(x)?;
    let n = x.nrows();
    if n == 0 {
        return Ok(CMat::zeros(0, 0));
    }
    let (u, s, v) = svd(x)?;
    let top = s.first().copied().unwrap_or(0.0);
    let rank = s.iter().filter(|&&v| v > RANK_TOL * top && v > 0.0).count();
    let mut uh = u.clone();
    for j in rank..n {
        let col = v.column(j).map(|z| z.conj());
        uh.set_column(j, &col);
    }
    if rank < n && !is_unitary(&uh, 1e-10) {
        uh = u;
    }
    Ok(uh * v.adjoint())
}

/// `uni(sym(X))`: a symmetric unitary matrix.
pub fn symuni(x: &CMat) -> Result<CMat> {
    uni(&sym(x)?)
}

/// Closed-form surface of one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    /// `diag(Θ_r, Θ_t)` (2N × 2N).
    pub theta_big: CMat,
    pub psi_r: CVec,
    pub psi_t: CVec,
    /// Step size `√N / ‖H Gᴴ E_xᴴ‖_F` of the boundary gradient step.
    pub armijo_alpha: f64,
    pub phi: f64,
}

/// `H` (rows of the stacked surface, one column per user on `sides`) and
/// `G` (BS channels of the same users) of the sum-gain problem.
fn stacked(config: &SystemConfig, channels: &ChannelSet, sides: &[Side]) -> (CMat, CMat) {
    let n = config.elements;
    let users: Vec<usize> = (0..config.users).filter(|&k| sides.contains(&config.side(k))).collect();
    let mut h = CMat::zeros(n * sides.len(), users.len());
    let mut g = CMat::zeros(config.antennas, users.len());
    for (col, &k) in users.iter().enumerate() {
        let block = sides.iter().position(|&s| s == config.side(k)).unwrap();
        for e in 0..n {
            h[(block * n + e, col)] = channels.h[k][e];
        }
        g.set_column(col, &channels.g[k]);
    }
    (h, g)
}

/// Gradient `H Gᴴ E_xᴴ` of the sum channel gain at `Θ = 0` over the
/// stacked surface of `sides`.
pub fn sum_gain_gradient(config: &SystemConfig, channels: &ChannelSet, sides: &[Side]) -> CMat {
    let (h, g) = stacked(config, channels, sides);
    let ex = stacked_e(channels, sides.len());
    h * g.adjoint() * ex.adjoint()
}

fn stacked_e(channels: &ChannelSet, copies: usize) -> CMat {
    let (n, l) = (channels.e.nrows(), channels.e.ncols());
    CMat::from_fn(n * copies, l, |i, j| channels.e[(i % n.max(1), j)])
}

/// `f(Θ) = ‖Gᴴ + Hᴴ Θ E_x‖²_F` of the relaxed sum-gain problem (ES stacking).
pub fn sum_gain(config: &SystemConfig, channels: &ChannelSet, theta: &CMat) -> f64 {
    let sides = [Side::Reflect, Side::Transmit];
    let (h, g) = stacked(config, channels, &sides);
    let ex = stacked_e(channels, 2);
    frobenius_sqr(&(g.adjoint() + h.adjoint() * theta * ex))
}

/// Both sides of the step-size condition
/// `f(αD) ≥ f(0) + φ α tr(∇ᴴ D)` with `D = ∇f(0)`.
pub fn armijo_sides(config: &SystemConfig, channels: &ChannelSet, alpha: f64, phi: f64) -> (f64, f64) {
    let d = sum_gain_gradient(config, channels, &[Side::Reflect, Side::Transmit]);
    let n = d.nrows();
    let lhs = sum_gain(config, channels, &(&d * Complex64::new(alpha, 0.0)));
    let rhs = sum_gain(config, channels, &CMat::zeros(n, n)) + phi * alpha * frobenius_sqr(&d);
    (lhs, rhs)
}

fn unit_phase(z: Complex64) -> Complex64 {
    if z.norm() > 0.0 {
        z / z.norm()
    } else {
        ONE
    }
}

/// Closed-form passive beamforming of `config.mode`.
///
/// ES: `(√2/2) diag(symuni(H Gᴴ E_xᴴ))`, then each element pair is scaled to
/// unit total energy. MS: the side with the larger projected amplitude gets
/// amplitude 1 with the projected phase. TS: per-side projection with unit
/// amplitude; a side without users gets all-ones.
pub fn closed_form_theta(config: &SystemConfig, channels: &ChannelSet, phi: f64) -> Result<ProjectionResult> {
    channels.check_dimensions(config)?;
    let n = config.elements;
    let mut psi_r = CVec::from_element(n, ZERO);
    let mut psi_t = CVec::from_element(n, ZERO);
    let both = [Side::Reflect, Side::Transmit];
    let d = sum_gain_gradient(config, channels, &both);
    let dn = frobenius_sqr(&d).sqrt();
    let armijo_alpha = if dn > 0.0 { (n as f64).sqrt() / dn } else { 0.0 };
    match config.mode.protocol() {
        StarProtocol::EnergySplitting | StarProtocol::ModeSwitching => {
            let u = symuni(&d)?;
            let scale = Complex64::new(FRAC_1_SQRT_2, 0.0);
            for e in 0..n {
                let (r, t) = (u[(e, e)] * scale, u[(n + e, n + e)] * scale);
                if config.mode.protocol() == StarProtocol::ModeSwitching {
                    if r.norm() >= t.norm() {
                        psi_r[e] = unit_phase(r);
                    } else {
                        psi_t[e] = unit_phase(t);
                    }
                } else {
                    let m = (r.norm_sqr() + t.norm_sqr()).sqrt();
                    if m > 0.0 {
                        psi_r[e] = r / m;
                        psi_t[e] = t / m;
                    } else {
                        psi_r[e] = Complex64::new(FRAC_1_SQRT_2, 0.0);
                        psi_t[e] = Complex64::new(FRAC_1_SQRT_2, 0.0);
                    }
                }
            }
        }
        StarProtocol::TimeSwitching => {
            for (side, psi) in [(Side::Reflect, &mut psi_r), (Side::Transmit, &mut psi_t)] {
                let has_users = (0..config.users).any(|k| config.side(k) == side);
                if !has_users {
                    psi.fill(ONE);
                    continue;
                }
                let u = symuni(&sum_gain_gradient(config, channels, &[side]))?;
                for e in 0..n {
                    psi[e] = unit_phase(u[(e, e)]);
                }
            }
        }
    }
    let mut theta_big = CMat::zeros(2 * n, 2 * n);
    for e in 0..n {
        theta_big[(e, e)] = psi_r[e];
        theta_big[(n + e, n + e)] = psi_t[e];
    }
    Ok(ProjectionResult { theta_big, psi_r, psi_t, armijo_alpha, phi })
}

/// Unit-norm precoder directions: column 0 is the dominant left singular
/// vector of the effective channel matrix, columns `1..=K` are normalized
/// zero-forcing directions. The flag reports a ridge-regularized inverse.
pub fn precoder_directions(effective: &[CVec], antennas: usize) -> Result<(CMat, bool)> {
    let k = effective.len();
    let mut out = CMat::zeros(antennas, k + 1);
    if k == 0 {
        return Ok((out, false));
    }
    let g = CMat::from_columns(effective);
    let (u, _, _) = svd(&g)?;
    out.set_column(0, &u.column(0));
    let unit: Vec<CVec> = effective
        .iter()
        .map(|v| {
            let n = v.norm();
            if n > 0.0 { v / Complex64::new(n, 0.0) } else { v.clone() }
        })
        .collect();
    let gbar = CMat::from_columns(&unit);
    let gram = gbar.adjoint() * &gbar;
    let (inv, ridged) = match gram.clone().try_inverse().filter(|m| m.iter().all(|z| z.re.is_finite() && z.im.is_finite())) {
        Some(inv) if condition_ok(&gram) => (inv, false),
        _ => {
            let reg = gram + CMat::identity(k, k) * Complex64::new(ZF_RIDGE, 0.0);
            (reg.try_inverse().ok_or_else(|| Error::Numerical("ZF inverse failed".into()))?, true)
        }
    };
    let p = gbar * inv;
    for j in 0..k {
        let col = p.column(j);
        let n = col.norm();
        if n > 0.0 {
            out.set_column(j + 1, &(col / Complex64::new(n, 0.0)));
        }
    }
    Ok((out, ridged))
}

fn condition_ok(gram: &CMat) -> bool {
    let ev = gram.clone().svd(false, false).singular_values;
    let max = ev.iter().copied().fold(0.0, f64::max);
    let min = ev.iter().copied().fold(f64::INFINITY, f64::min);
    max > 0.0 && min > 1e-12 * max
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FastOptions {
    /// Shrinkage factor of the step-size condition, in (0, 0.5).
    pub phi: f64,
    /// SINR model of the reduced power-allocation problem.
    pub sinr: SinrModel,
    /// Tolerances of the reduced SCA (only the active-step fields are used).
    pub sca: AoOptions,
}

impl Default for FastOptions {
    fn default() -> Self {
        Self { phi: 0.3, sinr: SinrModel::ZeroForced { constants: true }, sca: AoOptions::default() }
    }
}

#[derive(Debug, Clone)]
pub struct FastResult {
    pub point: DesignPoint,
    /// True objective (exact SINRs) at `point`.
    pub objective: f64,
    /// Objective of the reduced problem per SCA iteration.
    pub trace: Vec<f64>,
    pub projection: Option<ProjectionResult>,
    pub ridge_used: bool,
    pub solver_failed: bool,
}

/// Low-complexity optimizer for the problem `pr` (its restrictions apply).
pub fn fast_optimize<S: ConicSolver + ?Sized>(pr: &Problem, opts: &FastOptions, solver: &S) -> Result<FastResult> {
    let cfg = &pr.config;
    let mut point = DesignPoint::zeros(cfg);
    let projection = if pr.has_surface() {
        let proj = closed_form_theta(cfg, &pr.channels, opts.phi)?;
        point.psi_r = proj.psi_r.clone();
        point.psi_t = proj.psi_t.clone();
        Some(proj)
    } else {
        None
    };
    let eff = effective_channels(cfg, &pr.channels, &point, SideSelect::PerUser);
    let (dirs, ridge_used) = precoder_directions(&eff.gt, cfg.antennas)?;
    let reduced = pr.clone().with_directions(dirs.clone())?.with_sinr_model(opts.sinr);

    let common = reduced.has_common();
    let streams = if common { cfg.users + 1 } else { cfg.users };
    let amp = Complex64::new((cfg.bs_power / streams as f64).sqrt(), 0.0);
    point.precoders = dirs * amp;
    let descriptor = cfg.mode.descriptor();
    point.lambda = if reduced.time_pinned(crate::rates::T_LAMBDA) || descriptor.time_vars.is_empty() { 1.0 } else { 0.5 };
    point.lambda_r = 0.5;
    point.lambda_1 = 0.25;
    point.lambda_2 = 0.25;
    let start = reduced.clean(&point);
    let out = solve_active(&reduced, &start, &opts.sca, solver);
    let mut point = out.point;
    pr.refine_split(&mut point);
    Ok(FastResult {
        objective: pr.objective(&point),
        point,
        trace: out.trace,
        projection,
        ridge_used,
        solver_failed: out.solver_failed,
    })
}
