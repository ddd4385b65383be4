//! Emission of the convexified passive and active subproblems.
//!
//! Inside a program the system is normalized: precoders are divided by
//! `√P_t` (budget 1), received amplitudes by `σ` (unit noise). Every rate
//! term `log2(1 + Σ parts)` is lower-bounded around the current point:
//! ratio parts through `ν(δ, η) ≤ ϖ(num)` with `η` above the denominator,
//! relayed parts through `ϖ`, the logarithm through a tangent of `-log u`
//! with `u (1 + S) ≥ 1`, and variable time weights through the bilinear
//! bound. All bounds are tight at the expansion point, so the current point
//! is feasible with its true objective.

#[cfg(not(feature = "std"))]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{LN_2, SQRT_2};

use crate::conic::{ComplexAffine, ConicProgram, LinExpr};
use crate::linalg::{inner, CMat, CVec, Complex64};
use crate::model::{DesignPoint, Side, StarProtocol};
use crate::rates::{
    effective_channels, self_interference_power, time_vector, EffectiveChannels, SideSelect, SinrModel, SlotKind,
    TimeWeight,
    T_LAMBDA, T_LAMBDA_1, T_LAMBDA_2, T_LAMBDA_R,
};

use super::problem::{Problem, RateModel, LAMBDA_MIN};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum StepKind {
    /// Precoders, common split and time allocation with the surface fixed.
    Active,
    /// Surface (and common split) with everything else fixed; `penalty` is
    /// the weight of the surface-constraint penalty.
    Passive { penalty: f64 },
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Layout {
    pub p: Option<usize>,
    pub psi: [Option<usize>; 2],
    pub c: Option<usize>,
    pub tau: [Option<usize>; 4],
    pub x: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct StepProgram {
    pub program: ConicProgram,
    pub layout: Layout,
}

/// Smallest normalization of an auxiliary variable.
const FLOOR: f64 = 1e-12;

struct Ratio {
    num: ComplexAffine,
    den: Vec<ComplexAffine>,
    den_const: f64,
}

#[derive(Default)]
struct RateTerm {
    ratios: Vec<Ratio>,
    /// Parts of the form `Σ |a|²` without a denominator (relayed copies).
    sums: Vec<ComplexAffine>,
}

enum RateVal {
    Const(f64),
    Var { alpha: usize, alpha0: f64 },
}

fn is_const(a: &ComplexAffine) -> bool {
    a.terms.is_empty()
}

fn side_index(side: Side) -> usize {
    match side {
        Side::Reflect => 0,
        Side::Transmit => 1,
    }
}

fn select_index(select: SideSelect) -> usize {
    match select {
        SideSelect::PerUser => 0,
        SideSelect::Only(Side::Reflect) => 1,
        SideSelect::Only(Side::Transmit) => 2,
        SideSelect::Zero => 3,
    }
}

struct Ctx<'a> {
    pr: &'a Problem,
    point: &'a DesignPoint,
    kind: StepKind,
    prog: ConicProgram,
    x0: Vec<f64>,
    layout: Layout,
    inv_sigma: f64,
    sqrt_pt: f64,
    eff: [Option<EffectiveChannels>; 4],
    /// `E p_j` for every precoder column (passive step).
    ep: Vec<CVec>,
}

impl<'a> Ctx<'a> {
    fn base_var(&mut self, value: f64) -> usize {
        let i = self.prog.add_var();
        self.x0.push(value);
        i
    }

    fn eff(&mut self, select: SideSelect) -> &EffectiveChannels {
        let i = select_index(select);
        if self.eff[i].is_none() {
            self.eff[i] = Some(effective_channels(&self.pr.config, &self.pr.channels, self.point, select));
        }
        self.eff[i].as_ref().unwrap()
    }

    fn surface_var(&self, select: SideSelect, user: usize) -> Option<usize> {
        select
            .surface_for(&self.pr.config, user)
            .and_then(|s| self.layout.psi[side_index(s)])
    }

    /// Normalized `g̃_userᴴ p_col / σ`.
    fn signal(&mut self, user: usize, col: usize, select: SideSelect) -> ComplexAffine {
        let inv_sigma = self.inv_sigma;
        match self.kind {
            StepKind::Active => {
                let l = self.pr.config.antennas;
                let base = self.layout.p.expect("active step has precoder variables");
                let f = self.sqrt_pt * inv_sigma;
                let gt = self.eff(select).gt[user].clone();
                if let Some(dirs) = &self.pr.directions {
                    let mut a = ComplexAffine::default();
                    a.add_term(base + 2 * col, inner(&gt, &dirs.column(col).into_owned()) * f);
                    return a;
                }
                let mut a = ComplexAffine::default();
                for row in 0..l {
                    a.add_term(base + 2 * (col * l + row), gt[row].conj() * f);
                }
                a
            }
            StepKind::Passive { .. } => {
                let p = self.point.precoders.column(col).into_owned();
                let mut a = ComplexAffine::constant(inner(&self.pr.channels.g[user], &p) * inv_sigma);
                if let Some(base) = self.surface_var(select, user) {
                    let h = &self.pr.channels.h[user];
                    for n in 0..h.len() {
                        a.add_term(base + 2 * n, h[n].conj() * self.ep[col][n] * inv_sigma);
                    }
                }
                a
            }
        }
    }

    /// Normalized `conj(h̃_{m,dest}) √P_m / σ`.
    fn coop(&mut self, m: usize, pm: f64, dest: usize, select: SideSelect) -> ComplexAffine {
        let f = pm.sqrt() * self.inv_sigma;
        match self.kind {
            StepKind::Active => ComplexAffine::constant(self.eff(select).ht[(m, dest)].conj() * f),
            StepKind::Passive { .. } => {
                let ch = &self.pr.channels;
                let mut a = ComplexAffine::constant(ch.huu[(m, dest)].conj() * f);
                if let Some(base) = self.surface_var(select, dest) {
                    for n in 0..ch.h[dest].len() {
                        a.add_term(base + 2 * n, ch.h[dest][n] * ch.h[m][n].conj() * f);
                    }
                }
                a
            }
        }
    }

    /// `Re(conj(a0)·a)·2 − |a0|²`: tangent minorant of `|a|²`.
    fn varpi(&self, a: &ComplexAffine) -> LinExpr {
        let a0 = a.eval(&self.x0);
        let mut e = a.real_inner(a0).scaled(2.0);
        e.add_constant(-a0.norm_sqr());
        e
    }

    fn sq_parts(a: &ComplexAffine) -> [LinExpr; 2] {
        let (re, im) = a.parts();
        [re, im]
    }

    /// Emits the bound of `log2(1 + Σ parts)`. Every auxiliary variable is
    /// normalized by its value at the expansion point, so the program stays
    /// well scaled even with cooperative SINRs in the millions.
    fn emit_rate(&mut self, term: &RateTerm) -> RateVal {
        let mut constant = 0.0;
        let mut total0 = 0.0;
        let mut s = LinExpr::zero();
        for ratio in &term.ratios {
            let num0 = ratio.num.eval(&self.x0).norm_sqr();
            let den0 = ratio.den_const + ratio.den.iter().map(|d| d.eval(&self.x0).norm_sqr()).sum::<f64>();
            total0 += num0 / den0;
            let den_var = ratio.den.iter().any(|d| !is_const(d));
            if is_const(&ratio.num) && !den_var {
                constant += num0 / den0;
                continue;
            }
            // δ = a δ', η = den0 η', num = √(a den0) num'
            let prod = num0.max(FLOOR * den0);
            let a = prod / den0;
            let delta = self.prog.add_nonneg_var();
            s.add_term(delta, a);
            let varpi = self.varpi(&ratio.num.scaled(1.0 / prod.sqrt()));
            if !den_var {
                let mut row = varpi;
                row.add_term(delta, -1.0);
                self.prog.add_ge(row);
            } else {
                let eta = self.prog.add_var();
                let scale = 1.0 / den0.sqrt();
                let u: Vec<LinExpr> = ratio.den.iter().flat_map(|d| Self::sq_parts(&d.scaled(scale))).collect();
                let mut rhs = LinExpr::var(eta);
                rhs.add_constant(-ratio.den_const / den0);
                self.prog.add_sq_le(u, rhs);
                // ¼(δ'+η')² ≤ ϖ(num') + ½(δ'0−η'0)(δ'−η') − ¼(δ'0−η'0)²
                let d0 = num0 / prod - 1.0;
                let mut rhs = varpi;
                rhs.add_term(delta, 0.5 * d0).add_term(eta, -0.5 * d0).add_constant(-0.25 * d0 * d0);
                let mut half_sum = LinExpr::term(delta, 0.5);
                half_sum.add_term(eta, 0.5);
                self.prog.add_sq_le(vec![half_sum], rhs);
            }
        }
        if !term.sums.is_empty() {
            let value0: f64 = term.sums.iter().map(|a| a.eval(&self.x0).norm_sqr()).sum();
            total0 += value0;
            if term.sums.iter().all(is_const) {
                constant += value0;
            } else {
                let a = value0.max(FLOOR);
                let xi = self.prog.add_nonneg_var();
                s.add_term(xi, a);
                let mut row = LinExpr::term(xi, -1.0);
                for part in &term.sums {
                    let v = self.varpi(&part.scaled(1.0 / a.sqrt()));
                    row.add_scaled(&v, 1.0);
                }
                self.prog.add_ge(row);
            }
        }
        if s.terms.is_empty() {
            return RateVal::Const((1.0 + constant).log2());
        }
        // α ≤ log2(X0) + (1 − v)/ln2,  v (1 + S)/X0 ≥ 1
        let x0 = 1.0 + total0;
        let alpha = self.prog.add_var();
        let v = self.prog.add_var();
        s.add_constant(1.0 + constant);
        self.prog.add_rsoc(LinExpr::var(v), s.scaled(1.0 / x0), vec![LinExpr::constant(SQRT_2)]);
        let mut row = LinExpr::constant(x0.log2() + 1.0 / LN_2);
        row.add_term(v, -1.0 / LN_2).add_term(alpha, -1.0);
        self.prog.add_ge(row);
        RateVal::Var { alpha, alpha0: x0.log2() }
    }

    /// Affine expression of a slot weight in the program variables.
    fn weight_expr(&self, w: &TimeWeight) -> (LinExpr, f64) {
        let t0 = time_vector(self.point);
        let mut e = LinExpr::constant(w.c0);
        for i in 0..4 {
            if w.coef[i] == 0.0 {
                continue;
            }
            match self.layout.tau[i] {
                Some(v) if !self.pr.time_pinned(i) => {
                    e.add_term(v, w.coef[i]);
                }
                _ => {
                    e.add_constant(w.coef[i] * t0[i]);
                }
            }
        }
        (e, w.eval(&t0))
    }

    /// Adds a concave lower bound of `w · rate` to `acc`.
    fn add_weighted(&mut self, acc: &mut LinExpr, rate: RateVal, w: &TimeWeight) {
        let (wexpr, w0) = self.weight_expr(w);
        match rate {
            RateVal::Const(r) => acc.add_scaled(&wexpr, r),
            RateVal::Var { alpha, .. } if wexpr.terms.is_empty() => acc.add_term(alpha, w0),
            RateVal::Var { alpha, alpha0 } => {
                // w α ≥ ½(α0+w0)(α+w) − ¼(α0+w0)² − q,  q ≥ ¼(α−w)²
                let m = alpha0 + w0;
                let q = self.prog.add_var();
                let mut diff = LinExpr::term(alpha, 0.5);
                diff.add_scaled(&wexpr, -0.5);
                self.prog.add_sq_le(vec![diff], LinExpr::var(q));
                acc.add_term(alpha, 0.5 * m).add_scaled(&wexpr, 0.5 * m);
                acc.add_constant(-0.25 * m * m).add_term(q, -1.0)
            }
        };
    }
}

pub(crate) fn build(pr: &Problem, point: &DesignPoint, kind: StepKind) -> StepProgram {
    let cfg = &pr.config;
    let (l, k, n) = (cfg.antennas, cfg.users, cfg.elements);
    let sqrt_pt = cfg.bs_power.sqrt();
    let ep = match kind {
        StepKind::Passive { .. } if n > 0 => (0..=k)
            .map(|j| &pr.channels.e * point.precoders.column(j).into_owned())
            .collect(),
        _ => Vec::new(),
    };
    let mut ctx = Ctx {
        pr,
        point,
        kind,
        prog: ConicProgram::new(),
        x0: Vec::new(),
        layout: Layout::default(),
        inv_sigma: 1.0 / cfg.noise_power.sqrt(),
        sqrt_pt,
        eff: [None, None, None, None],
        ep,
    };
    let common = pr.has_common();
    let pin_p0 = !common;

    match kind {
        StepKind::Active if pr.directions.is_some() => {
            let dirs = pr.directions.as_ref().unwrap();
            let base = ctx.prog.n_vars;
            for j in 0..=k {
                let q = inner(&dirs.column(j).into_owned(), &point.precoders.column(j).into_owned()) / sqrt_pt;
                let re = ctx.base_var(q.re);
                let im = ctx.base_var(q.im);
                if j == 0 && pin_p0 {
                    ctx.prog.add_eq(LinExpr::var(re));
                    ctx.prog.add_eq(LinExpr::var(im));
                }
            }
            ctx.layout.p = Some(base);
            let all: Vec<LinExpr> = (base..base + 2 * (k + 1)).map(LinExpr::var).collect();
            ctx.prog.add_soc(LinExpr::constant(1.0), all);
        }
        StepKind::Active => {
            let base = ctx.prog.n_vars;
            for j in 0..=k {
                for row in 0..l {
                    let z = point.precoders[(row, j)] / sqrt_pt;
                    let re = ctx.base_var(z.re);
                    let im = ctx.base_var(z.im);
                    if j == 0 && pin_p0 {
                        ctx.prog.add_eq(LinExpr::var(re));
                        ctx.prog.add_eq(LinExpr::var(im));
                    }
                }
            }
            ctx.layout.p = Some(base);
            let all: Vec<LinExpr> = (base..base + 2 * l * (k + 1)).map(LinExpr::var).collect();
            ctx.prog.add_soc(LinExpr::constant(1.0), all);
        }
        StepKind::Passive { penalty } => {
            if n > 0 {
                for (s, psi) in [&point.psi_r, &point.psi_t].into_iter().enumerate() {
                    let base = ctx.prog.n_vars;
                    for z in psi.iter() {
                        ctx.base_var(z.re);
                        ctx.base_var(z.im);
                    }
                    ctx.layout.psi[s] = Some(base);
                }
                add_surface_constraints(&mut ctx, penalty);
            }
        }
    }

    if matches!(pr.model, RateModel::RateSplitting) {
        let base = ctx.prog.n_vars;
        for u in 0..k {
            let c = ctx.base_var(point.common_split[u]);
            ctx.prog.nonneg_vars.push(c);
            if !common {
                ctx.prog.add_eq(LinExpr::var(c));
            }
        }
        ctx.layout.c = Some(base);
    }

    if kind == StepKind::Active {
        let t0 = time_vector(point);
        for i in pr.time_indices() {
            let v = ctx.base_var(t0[i]);
            ctx.layout.tau[i] = Some(v);
            if pr.time_pinned(i) {
                ctx.prog.add_eq(LinExpr::var(v) - LinExpr::constant(t0[i]));
            }
        }
        add_time_constraints(&mut ctx);
    }

    let x = ctx.prog.add_var();
    ctx.layout.x = x;
    ctx.prog.objective[x] = 1.0;

    match &pr.model {
        RateModel::RateSplitting => add_rate_splitting_rows(&mut ctx),
        RateModel::Noma { order } => add_noma_rows(&mut ctx, order),
    }
    StepProgram { program: ctx.prog, layout: ctx.layout }
}

fn add_surface_constraints(ctx: &mut Ctx, penalty: f64) {
    let n = ctx.pr.config.elements;
    let [r, t] = [ctx.layout.psi[0].unwrap(), ctx.layout.psi[1].unwrap()];
    let protocol = ctx.pr.mode().protocol();
    let mut pen = LinExpr::zero();
    for e in 0..n {
        let idx = [r + 2 * e, t + 2 * e];
        let parts = |i: usize| vec![LinExpr::var(i), LinExpr::var(i + 1)];
        // tangent of |ψ|² at the current value
        let mut tangent = LinExpr::zero();
        for &i in &idx {
            let (a, b) = (ctx.x0[i], ctx.x0[i + 1]);
            tangent.add_term(i, 2.0 * a).add_term(i + 1, 2.0 * b);
            tangent.add_constant(-(a * a + b * b));
        }
        match protocol {
            StarProtocol::EnergySplitting | StarProtocol::ModeSwitching => {
                let mut both = parts(idx[0]);
                both.extend(parts(idx[1]));
                ctx.prog.add_soc(LinExpr::constant(1.0), both);
                pen.add_scaled(&tangent, 1.0);
                pen.add_constant(-1.0);
                if protocol == StarProtocol::ModeSwitching {
                    // −(|ψ| − |ψ|²) with an epigraph for |ψ|
                    pen.add_scaled(&tangent, 1.0);
                    for &i in &idx {
                        let s = ctx.prog.add_var();
                        ctx.prog.add_soc(LinExpr::var(s), parts(i));
                        pen.add_term(s, -1.0);
                    }
                }
            }
            StarProtocol::TimeSwitching => {
                for &i in &idx {
                    ctx.prog.add_soc(LinExpr::constant(1.0), parts(i));
                }
                pen.add_scaled(&tangent, 1.0);
                pen.add_constant(-2.0);
            }
        }
    }
    ctx.prog.add_objective(&pen.scaled(penalty));
}

fn add_time_constraints(ctx: &mut Ctx) {
    let tau = ctx.layout.tau;
    let var = |i: usize| LinExpr::var(tau[i].unwrap());
    let mut ge = |e: LinExpr| ctx.prog.add_ge(e);
    match ctx.pr.mode() {
        crate::model::Mode::FT => {
            ge(var(T_LAMBDA_R));
            ge(LinExpr::constant(1.0) - var(T_LAMBDA_R));
        }
        crate::model::Mode::HE | crate::model::Mode::HM => {
            ge(var(T_LAMBDA) - LinExpr::constant(LAMBDA_MIN));
            ge(LinExpr::constant(1.0) - var(T_LAMBDA));
        }
        crate::model::Mode::HT => {
            ge(var(T_LAMBDA_1) - LinExpr::constant(LAMBDA_MIN));
            ge(var(T_LAMBDA_2) - LinExpr::constant(LAMBDA_MIN));
            ge(var(T_LAMBDA_R) - var(T_LAMBDA_1));
            ge(LinExpr::constant(1.0) - var(T_LAMBDA_R) - var(T_LAMBDA_2));
        }
        _ => {}
    }
}

fn direct_ratio(ctx: &mut Ctx, user: usize, col: usize, select: SideSelect, interferers: &[usize], noise: f64) -> Ratio {
    let num = ctx.signal(user, col, select);
    let den = interferers.iter().map(|&j| ctx.signal(user, j, select)).collect();
    Ratio { num, den, den_const: noise }
}

fn add_rate_splitting_rows(ctx: &mut Ctx) {
    let pr = ctx.pr;
    let cfg = &pr.config;
    let k = cfg.users;
    let common = pr.has_common();
    let c_base = ctx.layout.c.unwrap();
    let mut private_rows: Vec<LinExpr> = (0..k).map(|_| LinExpr::zero()).collect();
    let mut common_rows: Vec<LinExpr> = (0..k).map(|_| LinExpr::zero()).collect();
    let relays: Vec<(usize, f64)> = cfg.relay_users.iter().copied().zip(cfg.relay_power.iter().copied()).collect();
    let (nulled, constants) = match pr.sinr {
        SinrModel::Exact => (false, true),
        SinrModel::ZeroForced { constants } => (true, constants),
    };
    let slots = pr.slots.clone();
    for slot in &slots {
        for user in 0..k {
            let relay = cfg.is_relay(user);
            match slot.kind {
                SlotKind::Coop => {
                    if relay || !common {
                        continue;
                    }
                    let sums = relays.iter().map(|&(m, pm)| ctx.coop(m, pm, user, slot.surface)).collect();
                    let rate = ctx.emit_rate(&RateTerm { ratios: Vec::new(), sums });
                    let mut acc = core::mem::take(&mut common_rows[user]);
                    ctx.add_weighted(&mut acc, rate, &slot.weight);
                    common_rows[user] = acc;
                }
                SlotKind::DirectFd | SlotKind::DirectHd => {
                    let mut noise = 1.0;
                    if slot.kind == SlotKind::DirectFd && constants {
                        noise += self_interference_power(cfg, &pr.channels, user) / cfg.noise_power;
                    }
                    let others: Vec<usize> = if nulled { Vec::new() } else { (1..=k).filter(|&j| j != user + 1).collect() };
                    let ratio = direct_ratio(ctx, user, user + 1, slot.surface, &others, noise);
                    let rate = ctx.emit_rate(&RateTerm { ratios: vec![ratio], sums: Vec::new() });
                    let mut acc = core::mem::take(&mut private_rows[user]);
                    ctx.add_weighted(&mut acc, rate, &slot.weight);
                    private_rows[user] = acc;

                    if common {
                        let all: Vec<usize> = if nulled { vec![user + 1] } else { (1..=k).collect() };
                        let ratio = direct_ratio(ctx, user, 0, slot.surface, &all, noise);
                        let sums = if slot.kind == SlotKind::DirectFd && !relay && constants {
                            relays.iter().map(|&(m, pm)| ctx.coop(m, pm, user, slot.surface)).collect()
                        } else {
                            Vec::new()
                        };
                        let rate = ctx.emit_rate(&RateTerm { ratios: vec![ratio], sums });
                        let mut acc = core::mem::take(&mut common_rows[user]);
                        ctx.add_weighted(&mut acc, rate, &slot.weight);
                        common_rows[user] = acc;
                    }
                }
            }
        }
    }
    let x = ctx.layout.x;
    for (user, mut row) in private_rows.into_iter().enumerate() {
        row.add_term(c_base + user, 1.0).add_term(x, -1.0);
        ctx.prog.add_ge(row);
    }
    if common {
        for mut row in common_rows {
            for u in 0..k {
                row.add_term(c_base + u, -1.0);
            }
            ctx.prog.add_ge(row);
        }
    }
}

fn add_noma_rows(ctx: &mut Ctx, order: &[usize]) {
    let x = ctx.layout.x;
    for (j, &user) in order.iter().enumerate() {
        let stronger: Vec<usize> = order[..j].iter().map(|&s| s + 1).collect();
        for &decoder in &order[..=j] {
            let ratio = direct_ratio(ctx, decoder, user + 1, SideSelect::PerUser, &stronger, 1.0);
            let rate = ctx.emit_rate(&RateTerm { ratios: vec![ratio], sums: Vec::new() });
            let mut row = LinExpr::term(x, -1.0);
            ctx.add_weighted(&mut row, rate, &TimeWeight::ONE);
            ctx.prog.add_ge(row);
        }
    }
}

/// Reads the step variables back into a design point (before cleaning).
pub(crate) fn extract(pr: &Problem, point: &DesignPoint, sp: &StepProgram, x: &[f64]) -> DesignPoint {
    let cfg = &pr.config;
    let (l, k, n) = (cfg.antennas, cfg.users, cfg.elements);
    let mut out = point.clone();
    if let (Some(base), Some(dirs)) = (sp.layout.p, &pr.directions) {
        let sqrt_pt = cfg.bs_power.sqrt();
        out.precoders = CMat::from_fn(l, k + 1, |row, j| {
            dirs[(row, j)] * Complex64::new(x[base + 2 * j], x[base + 2 * j + 1]) * sqrt_pt
        });
    } else if let Some(base) = sp.layout.p {
        let sqrt_pt = cfg.bs_power.sqrt();
        out.precoders = CMat::from_fn(l, k + 1, |row, j| {
            let i = base + 2 * (j * l + row);
            Complex64::new(x[i], x[i + 1]) * sqrt_pt
        });
    }
    for (s, psi) in [&mut out.psi_r, &mut out.psi_t].into_iter().enumerate() {
        if let Some(base) = sp.layout.psi[s] {
            *psi = CVec::from_fn(n, |e, _| Complex64::new(x[base + 2 * e], x[base + 2 * e + 1]));
        }
    }
    if let Some(base) = sp.layout.c {
        out.common_split = (0..k).map(|u| x[base + u].max(0.0)).collect();
    }
    let mut t = time_vector(&out);
    for i in 0..4 {
        if let Some(v) = sp.layout.tau[i] {
            t[i] = x[v];
        }
    }
    out.lambda = t[T_LAMBDA];
    out.lambda_r = t[T_LAMBDA_R];
    out.lambda_1 = t[T_LAMBDA_1];
    out.lambda_2 = t[T_LAMBDA_2];
    out
}
