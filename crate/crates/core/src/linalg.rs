//! Complex linear-algebra aliases and small helpers shared across modules.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

pub type CVec = DVector<Complex64>;
pub type CMat = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `aᴴ b`.
pub fn inner(a: &CVec, b: &CVec) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub fn frobenius_sqr(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

pub fn polar(magnitude: f64, phase: f64) -> Complex64 {
    Complex64::new(magnitude * phase.cos(), magnitude * phase.sin())
}

pub fn log2_1p(x: f64) -> f64 {
    (1.0 + x).log2()
}

pub fn cvec(values: &[Complex64]) -> CVec {
    CVec::from_column_slice(values)
}

pub fn real_cvec(values: &[f64]) -> CVec {
    CVec::from_iterator(values.len(), values.iter().map(|&v| Complex64::new(v, 0.0)))
}

/// Columns of `m` as owned vectors.
pub fn columns(m: &CMat) -> Vec<CVec> {
    (0..m.ncols()).map(|j| m.column(j).into_owned()).collect()
}
