//! Base field abstraction: every tensor carries entries from either ℝ or ℂ.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Field tag of a tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Field::Real => f.write_str("real"),
            Field::Complex => f.write_str("complex"),
        }
    }
}

/// Scalar entries of a tensor. Implemented for `f64` and `Complex64`.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Default
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    const FIELD: Field;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_real(x: f64) -> Self;
    fn conj(self) -> Self;
    fn modulus(self) -> f64;
    fn modulus_sqr(self) -> f64;
    fn re(self) -> f64;
    fn scale(self, x: f64) -> Self;

    /// Numerical rank of a row-major `rows × cols` matrix: singular values
    /// above `tol · σ_max` are counted.
    fn matrix_rank(rows: usize, cols: usize, data: &[Self], tol: f64) -> usize;

    /// Unit-modulus phase of `self`; `1` for zero.
    fn phase(self) -> Self {
        let m = self.modulus();
        if m == 0.0 {
            Self::one()
        } else {
            self.scale(1.0 / m)
        }
    }
}

impl Scalar for f64 {
    const FIELD: Field = Field::Real;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn conj(self) -> Self {
        self
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn modulus_sqr(self) -> f64 {
        self * self
    }
    fn re(self) -> f64 {
        self
    }
    fn scale(self, x: f64) -> Self {
        self * x
    }
    fn matrix_rank(rows: usize, cols: usize, data: &[Self], tol: f64) -> usize {
        let m = nalgebra::DMatrix::from_row_slice(rows, cols, data);
        count_above(m.singular_values().as_slice(), tol)
    }
}

impl Scalar for Complex64 {
    const FIELD: Field = Field::Complex;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn modulus_sqr(self) -> f64 {
        self.norm_sqr()
    }
    fn re(self) -> f64 {
        self.re
    }
    fn scale(self, x: f64) -> Self {
        self * x
    }
    fn matrix_rank(rows: usize, cols: usize, data: &[Self], tol: f64) -> usize {
        let m = nalgebra::DMatrix::from_row_slice(rows, cols, data);
        count_above(m.singular_values().as_slice(), tol)
    }
}

fn count_above(singular: &[f64], tol: f64) -> usize {
    let top = singular.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    singular.iter().filter(|&&s| s > tol * top).count()
}

/// Hermitian inner product `Σ x_i conj(y_i)`.
pub fn dot<S: Scalar>(x: &[S], y: &[S]) -> S {
    x.iter()
        .zip(y)
        .fold(S::zero(), |acc, (&a, &b)| acc + a * b.conj())
}

pub fn norm<S: Scalar>(x: &[S]) -> f64 {
    x.iter().map(|v| v.modulus_sqr()).sum::<f64>().sqrt()
}

/// Returns `x / ‖x‖`, or `None` for the zero vector.
pub fn normalized<S: Scalar>(x: &[S]) -> Option<Vec<S>> {
    let n = norm(x);
    if n == 0.0 || !n.is_finite() {
        return None;
    }
    Some(x.iter().map(|v| v.scale(1.0 / n)).collect())
}
