//! Convex/concave bounds used by the SCA steps.

#[cfg(not(feature = "std"))]
use num_traits::Float;
use crate::linalg::{inner, CVec, Complex64};

/// Convex majorant of `a·b` expanded at `(a0, b0)`:
/// `¼(a+b)² − ½(a0−b0)(a−b) + ¼(a0−b0)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuBound {
    pub a0: f64,
    pub b0: f64,
}

impl NuBound {
    pub fn eval(&self, a: f64, b: f64) -> f64 {
        let d0 = self.a0 - self.b0;
        0.25 * (a + b) * (a + b) - 0.5 * d0 * (a - b) + 0.25 * d0 * d0
    }
}

/// Value of the majorant of `a·b` at `(a, b)` expanded at `(a0, b0)`.
pub fn nu_bound(a: f64, b: f64, a0: f64, b0: f64) -> f64 {
    NuBound { a0, b0 }.eval(a, b)
}

/// Affine minorant of `|ḡ + sᴴψ|²` expanded at `ψ0`:
/// `2 Re{(sᴴψ0 + ḡ)* sᴴψ} − |sᴴψ0|² + |ḡ|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct VarpiBound {
    /// `sᴴψ0 + ḡ`.
    pub anchor: Complex64,
    pub g: Complex64,
    pub s: CVec,
    pub constant: f64,
}

impl VarpiBound {
    pub fn eval(&self, psi: &CVec) -> f64 {
        2.0 * (self.anchor.conj() * inner(&self.s, psi)).re + self.constant
    }
}

pub fn varpi_bound(psi0: &CVec, g: Complex64, s: &CVec) -> VarpiBound {
    let sp0 = inner(s, psi0);
    VarpiBound { anchor: sp0 + g, g, s: s.clone(), constant: g.norm_sqr() - sp0.norm_sqr() }
}

/// Concave minorant of `w·α`, expanded at `(α0, w0)`:
/// `½(α0+w0)(α+w) − ¼(α0+w0)² − ¼(α−w)²`, i.e. `−ν(α0, −w0)` evaluated at `(α, −w)`.
pub fn bilinear_lower(alpha: f64, w: f64, alpha0: f64, w0: f64) -> f64 {
    -nu_bound(alpha, -w, alpha0, -w0)
}

/// Lower bound of `log2(x)` through `u ≥ 1/x`, tight at `x0` with `u = 1/x0`:
/// `log2(x0) + (1 − x0·u)/ln 2`.
pub fn log2_lower(u: f64, x0: f64) -> f64 {
    x0.log2() + (1.0 - x0 * u) / core::f64::consts::LN_2
}
