//! Real conic programs and the contract a back-end solver satisfies.
//!
//! Programs maximize a linear objective over affine equalities, affine
//! nonnegativity rows, second-order cones `‖u‖ ≤ t` and rotated cones
//! `‖u‖² ≤ 2 s t`. Complex decision vectors are lifted to interleaved
//! `(re, im)` pairs.

#[cfg(not(feature = "std"))]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use crate::linalg::{CVec, Complex64};
use crate::{Error, Result};

#[cfg(feature = "clarabel")]
mod clarabel_backend;
#[cfg(feature = "clarabel")]
pub use clarabel_backend::ClarabelSolver;

/// Sparse affine expression `Σ a_i x_i + constant`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self { terms: Vec::new(), constant: c }
    }

    pub fn var(i: usize) -> Self {
        Self { terms: vec![(i, 1.0)], constant: 0.0 }
    }

    pub fn term(i: usize, a: f64) -> Self {
        Self { terms: vec![(i, a)], constant: 0.0 }
    }

    pub fn add_term(&mut self, i: usize, a: f64) -> &mut Self {
        if a != 0.0 {
            self.terms.push((i, a));
        }
        self
    }

    pub fn add_constant(&mut self, c: f64) -> &mut Self {
        self.constant += c;
        self
    }

    /// `self += a · other`.
    pub fn add_scaled(&mut self, other: &LinExpr, a: f64) -> &mut Self {
        if a != 0.0 {
            self.terms.extend(other.terms.iter().map(|&(i, c)| (i, a * c)));
            self.constant += a * other.constant;
        }
        self
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = LinExpr::zero();
        out.add_scaled(self, a);
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(i, a)| a * x[i]).sum::<f64>()
    }

    /// Merges duplicate indices and drops coefficients that are zero or
    /// negligible (below `1e-14` of the largest one).
    pub fn compact(&mut self) {
        self.terms.sort_by_key(|t| t.0);
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(self.terms.len());
        for &(i, a) in &self.terms {
            match out.last_mut() {
                Some(last) if last.0 == i => last.1 += a,
                _ => out.push((i, a)),
            }
        }
        let big = out.iter().fold(0.0f64, |m, t| m.max(t.1.abs()));
        out.retain(|t| t.1 != 0.0 && t.1.abs() > 1e-14 * big);
        self.terms = out;
    }

    fn max_index(&self) -> Option<usize> {
        self.terms.iter().map(|t| t.0).max()
    }

    fn is_finite(&self) -> bool {
        self.constant.is_finite() && self.terms.iter().all(|t| t.1.is_finite())
    }
}

impl Add for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: LinExpr) -> LinExpr {
        self.add_scaled(&rhs, 1.0);
        self
    }
}

impl Sub for LinExpr {
    type Output = LinExpr;
    fn sub(mut self, rhs: LinExpr) -> LinExpr {
        self.add_scaled(&rhs, -1.0);
        self
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        self.scaled(-1.0)
    }
}

impl Mul<f64> for LinExpr {
    type Output = LinExpr;
    fn mul(self, a: f64) -> LinExpr {
        self.scaled(a)
    }
}

/// `‖u‖ ≤ t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SocBlock {
    pub t: LinExpr,
    pub u: Vec<LinExpr>,
}

/// `‖u‖² ≤ 2 s t`, `s, t ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RsocBlock {
    pub s: LinExpr,
    pub t: LinExpr,
    pub u: Vec<LinExpr>,
}

impl RsocBlock {
    /// Equivalent standard cone `‖(√2 u, s - t)‖ ≤ s + t`.
    pub fn to_soc(&self) -> SocBlock {
        let mut u: Vec<LinExpr> = self.u.iter().map(|e| e.scaled(core::f64::consts::SQRT_2)).collect();
        u.push(self.s.clone() - self.t.clone());
        SocBlock { t: self.s.clone() + self.t.clone(), u }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConicProgram {
    pub n_vars: usize,
    /// Maximize `objectiveᵀ x + objective_constant`.
    pub objective: Vec<f64>,
    pub objective_constant: f64,
    /// Rows `expr = 0`.
    pub eq_constraints: Vec<LinExpr>,
    /// Rows `expr ≥ 0`.
    pub ineq_constraints: Vec<LinExpr>,
    pub nonneg_vars: Vec<usize>,
    pub soc_blocks: Vec<SocBlock>,
    pub rsoc_blocks: Vec<RsocBlock>,
}

impl ConicProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self) -> usize {
        self.n_vars += 1;
        self.objective.push(0.0);
        self.n_vars - 1
    }

    /// Adds `n` consecutive variables and returns the first index.
    pub fn add_vars(&mut self, n: usize) -> usize {
        let first = self.n_vars;
        self.n_vars += n;
        self.objective.resize(self.n_vars, 0.0);
        first
    }

    pub fn add_nonneg_var(&mut self) -> usize {
        let i = self.add_var();
        self.nonneg_vars.push(i);
        i
    }

    pub fn add_eq(&mut self, mut expr: LinExpr) {
        expr.compact();
        self.eq_constraints.push(expr);
    }

    /// `expr ≥ 0`.
    pub fn add_ge(&mut self, mut expr: LinExpr) {
        expr.compact();
        self.ineq_constraints.push(expr);
    }

    /// `‖u‖ ≤ t`.
    pub fn add_soc(&mut self, mut t: LinExpr, mut u: Vec<LinExpr>) {
        t.compact();
        u.iter_mut().for_each(LinExpr::compact);
        self.soc_blocks.push(SocBlock { t, u });
    }

    pub fn add_rsoc(&mut self, mut s: LinExpr, mut t: LinExpr, mut u: Vec<LinExpr>) {
        s.compact();
        t.compact();
        u.iter_mut().for_each(LinExpr::compact);
        self.rsoc_blocks.push(RsocBlock { s, t, u });
    }

    /// `‖u‖² ≤ rhs` written as `‖(u, (rhs-1)/2)‖ ≤ (rhs+1)/2`.
    pub fn add_sq_le(&mut self, u: Vec<LinExpr>, rhs: LinExpr) {
        let mut cone = u;
        let mut lo = rhs.scaled(0.5);
        lo.add_constant(-0.5);
        let mut hi = rhs.scaled(0.5);
        hi.add_constant(0.5);
        cone.push(lo);
        self.add_soc(hi, cone);
    }

    pub fn add_objective(&mut self, expr: &LinExpr) {
        for &(i, a) in &expr.terms {
            self.objective[i] += a;
        }
        self.objective_constant += expr.constant;
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective_constant + self.objective.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }

    /// Rejects out-of-range indices and non-finite coefficients.
    pub fn check(&self) -> Result<()> {
        if self.objective.len() != self.n_vars {
            return Err(Error::Dimension("objective length differs from n_vars".into()));
        }
        let exprs = self
            .eq_constraints
            .iter()
            .chain(&self.ineq_constraints)
            .chain(self.soc_blocks.iter().flat_map(|b| core::iter::once(&b.t).chain(&b.u)))
            .chain(self.rsoc_blocks.iter().flat_map(|b| [&b.s, &b.t].into_iter().chain(&b.u)));
        for e in exprs {
            if e.max_index().is_some_and(|i| i >= self.n_vars) {
                return Err(Error::Dimension("constraint references an unknown variable".into()));
            }
            if !e.is_finite() {
                return Err(Error::Numerical("non-finite coefficient in program".into()));
            }
        }
        if self.nonneg_vars.iter().any(|&i| i >= self.n_vars) || self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::Dimension("bad nonnegative index or objective".into()));
        }
        Ok(())
    }

    /// Largest constraint violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut v: f64 = 0.0;
        for e in &self.eq_constraints {
            v = v.max(e.eval(x).abs());
        }
        for e in &self.ineq_constraints {
            v = v.max(-e.eval(x));
        }
        for &i in &self.nonneg_vars {
            v = v.max(-x[i]);
        }
        let soc_violation = |b: &SocBlock| {
            let n: f64 = b.u.iter().map(|e| e.eval(x).powi(2)).sum::<f64>();
            n.sqrt() - b.t.eval(x)
        };
        for b in &self.soc_blocks {
            v = v.max(soc_violation(b));
        }
        for b in &self.rsoc_blocks {
            v = v.max(soc_violation(&b.to_soc()));
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIter,
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub objective_value: f64,
    pub solver_iters: u32,
}

/// A conic back end. Infeasibility and failures are reported through
/// [`SolveStatus`], never by panicking.
pub trait ConicSolver {
    fn solve(&self, program: &ConicProgram, tol: f64) -> SolveResult;
}

/// Default solver tolerance.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Interleaved `(re, im)` lifting.
pub fn lift_complex(v: &CVec) -> Vec<f64> {
    v.iter().flat_map(|z| [z.re, z.im]).collect()
}

/// Inverse of [`lift_complex`]; `x` must have even length.
pub fn unlift_complex(x: &[f64]) -> Result<CVec> {
    if x.len() % 2 != 0 {
        return Err(Error::Dimension("lifted vector has odd length".into()));
    }
    Ok(CVec::from_iterator(x.len() / 2, x.chunks(2).map(|c| Complex64::new(c[0], c[1]))))
}

/// Real and imaginary parts of a complex affine function of lifted
/// variables: `constant + Σ coeff_j · z_j` where `z_j = x[2v_j] + i x[2v_j+1]`
/// for the complex variable starting at real index `v_j`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComplexAffine {
    pub constant: Complex64,
    /// `(real index of the re-part, coefficient)`; the im-part is the next index.
    pub terms: Vec<(usize, Complex64)>,
}

impl ComplexAffine {
    pub fn constant(c: Complex64) -> Self {
        Self { constant: c, terms: Vec::new() }
    }

    pub fn add_term(&mut self, re_index: usize, coeff: Complex64) {
        if coeff.re != 0.0 || coeff.im != 0.0 {
            self.terms.push((re_index, coeff));
        }
    }

    /// `(Re, Im)` as real affine expressions.
    pub fn parts(&self) -> (LinExpr, LinExpr) {
        let mut re = LinExpr::constant(self.constant.re);
        let mut im = LinExpr::constant(self.constant.im);
        for &(i, c) in &self.terms {
            // c · (a + i b) = (c.re a - c.im b) + i (c.im a + c.re b)
            re.add_term(i, c.re).add_term(i + 1, -c.im);
            im.add_term(i, c.im).add_term(i + 1, c.re);
        }
        (re, im)
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.constant + self.terms.iter().map(|&(i, c)| c * Complex64::new(x[i], x[i + 1])).sum::<Complex64>()
    }

    /// `Re(conj(w) · self)`, the real inner product with a fixed `w`.
    pub fn real_inner(&self, w: Complex64) -> LinExpr {
        let mut out = LinExpr::constant((w.conj() * self.constant).re);
        for &(i, c) in &self.terms {
            let d = w.conj() * c;
            out.add_term(i, d.re).add_term(i + 1, -d.im);
        }
        out
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { constant: self.constant * a, terms: self.terms.iter().map(|&(i, c)| (i, c * a)).collect() }
    }
}
