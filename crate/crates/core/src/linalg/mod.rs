//! Dense matrix kernels.
//!
//! Everything the purification engines touch is a real symmetric matrix held
//! as a full row-major square. Products go through [`multiply`], which bumps a
//! per-thread counter so tests can audit how many `M x M` products an
//! algorithm performs.
//!
//! Traces of products of two symmetric matrices never need a product:
//! `Tr[A B] = sum_ij A_ij B_ij`, see [`trace_of_product`].

mod jacobi;

use std::cell::Cell;
use std::fmt;
use std::ops::{Add, Mul, Sub};

pub use jacobi::{eig_oracle, EigenDecomposition};

use crate::error::LinalgError;

thread_local! {
    static MULTIPLY_COUNT: Cell<u64> = const { Cell::new(0) };
}

/// Number of calls to [`multiply`] made on the current thread.
pub fn multiply_count() -> u64 {
    MULTIPLY_COUNT.with(|c| c.get())
}

/// Resets the current thread's product counter to zero.
pub fn reset_multiply_count() {
    MULTIPLY_COUNT.with(|c| c.set(0));
}

/// Dense real symmetric matrix of order `M`.
#[derive(Clone, PartialEq)]
pub struct SymMatrix {
    order: usize,
    data: Vec<f64>,
}

/// Dense real square matrix with no symmetry contract.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix {
    order: usize,
    data: Vec<f64>,
}

/// Lower and upper bound on the spectrum of a symmetric matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralBounds {
    pub lower: f64,
    pub upper: f64,
}

impl SpectralBounds {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64, slack: f64) -> bool {
        x >= self.lower - slack && x <= self.upper + slack
    }
}

fn max_asymmetry(order: usize, data: &[f64]) -> (f64, f64) {
    let mut asym = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..order {
        for j in 0..order {
            let a = data[i * order + j];
            scale = scale.max(a.abs());
            if j > i {
                asym = asym.max((a - data[j * order + i]).abs());
            }
        }
    }
    (asym, scale)
}

impl SymMatrix {
    pub fn zeros(order: usize) -> Self {
        assert!(order >= 1, "matrix order must be positive");
        Self {
            order,
            data: vec![0.0; order * order],
        }
    }

    pub fn identity(order: usize) -> Self {
        Self::scaled_identity(order, 1.0)
    }

    pub fn scaled_identity(order: usize, value: f64) -> Self {
        let mut m = Self::zeros(order);
        for i in 0..order {
            m.data[i * order + i] = value;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = v;
        }
        m
    }

    /// Builds a matrix from row-major data, requiring it to be symmetric to
    /// within `1e-14 * max|a_ij|`. The stored result is exactly symmetric.
    pub fn from_row_major(order: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if order == 0 {
            return Err(LinalgError::EmptyMatrix);
        }
        if data.len() != order * order {
            return Err(LinalgError::BadLength {
                expected: order * order,
                found: data.len(),
            });
        }
        let (asym, scale) = max_asymmetry(order, &data);
        if asym > 1e-14 * scale {
            return Err(LinalgError::NotSymmetric { asymmetry: asym });
        }
        let mut out = Self { order, data };
        out.symmetrize_in_place();
        Ok(out)
    }

    /// Builds a matrix from the lower triangle, given row by row
    /// (`a00, a10, a11, a20, ...`).
    pub fn from_lower_triangle(order: usize, lower: &[f64]) -> Result<Self, LinalgError> {
        if order == 0 {
            return Err(LinalgError::EmptyMatrix);
        }
        let expected = order * (order + 1) / 2;
        if lower.len() != expected {
            return Err(LinalgError::BadLength {
                expected,
                found: lower.len(),
            });
        }
        let mut m = Self::zeros(order);
        let mut k = 0;
        for i in 0..order {
            for j in 0..=i {
                m.data[i * order + j] = lower[k];
                m.data[j * order + i] = lower[k];
                k += 1;
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.order + j]
    }

    /// Sets `a_ij` and `a_ji` together.
    pub fn set_sym(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.order + j] = value;
        self.data[j * self.order + i] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.order).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        trace(self)
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius_norm(self)
    }

    /// Largest `|a_ij|`.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// `alpha * self + beta * other`.
    pub fn lin_comb(&self, alpha: f64, other: &SymMatrix, beta: f64) -> SymMatrix {
        assert_eq!(self.order, other.order, "order mismatch");
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        SymMatrix {
            order: self.order,
            data,
        }
    }

    pub fn scale(&self, alpha: f64) -> SymMatrix {
        SymMatrix {
            order: self.order,
            data: self.data.iter().map(|a| alpha * a).collect(),
        }
    }

    /// `self + shift * I`.
    pub fn shift_diagonal(&self, shift: f64) -> SymMatrix {
        let mut out = self.clone();
        for i in 0..self.order {
            out.data[i * self.order + i] += shift;
        }
        out
    }

    /// `I - self`, the hole (complement) matrix.
    pub fn complement(&self) -> SymMatrix {
        self.scale(-1.0).shift_diagonal(1.0)
    }

    fn symmetrize_in_place(&mut self) {
        let n = self.order;
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (self.data[i * n + j] + self.data[j * n + i]);
                self.data[i * n + j] = avg;
                self.data[j * n + i] = avg;
            }
        }
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SymMatrix({}x{}) [", self.order, self.order)?;
        for i in 0..self.order.min(8) {
            let row: Vec<String> = (0..self.order.min(8))
                .map(|j| format!("{:>10.4e}", self.get(i, j)))
                .collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

impl SquareMatrix {
    pub fn zeros(order: usize) -> Self {
        Self {
            order,
            data: vec![0.0; order * order],
        }
    }

    pub fn from_row_major(order: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if data.len() != order * order {
            return Err(LinalgError::BadLength {
                expected: order * order,
                found: data.len(),
            });
        }
        Ok(Self { order, data })
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.order + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.order + j] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> SquareMatrix {
        let n = self.order;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j];
            }
        }
        out
    }

    /// `(X + X^T) / 2`.
    pub fn symmetrize(&self) -> SymMatrix {
        let n = self.order;
        let mut out = SymMatrix::zeros(n);
        for i in 0..n {
            out.data[i * n + i] = self.data[i * n + i];
            for j in (i + 1)..n {
                let avg = 0.5 * (self.data[i * n + j] + self.data[j * n + i]);
                out.data[i * n + j] = avg;
                out.data[j * n + i] = avg;
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
    }
}

impl From<&SymMatrix> for SquareMatrix {
    fn from(s: &SymMatrix) -> Self {
        SquareMatrix {
            order: s.order,
            data: s.data.clone(),
        }
    }
}

fn gemm(order: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut c = vec![0.0; order * order];
    for i in 0..order {
        let c_row = &mut c[i * order..(i + 1) * order];
        for k in 0..order {
            let aik = a[i * order + k];
            if aik == 0.0 {
                continue;
            }
            let b_row = &b[k * order..(k + 1) * order];
            for (cij, bkj) in c_row.iter_mut().zip(b_row) {
                *cij += aik * bkj;
            }
        }
    }
    c
}

/// Exact product `a * b`. Counts as one matrix product.
pub fn multiply(a: &SymMatrix, b: &SymMatrix) -> Result<SquareMatrix, LinalgError> {
    if a.order != b.order {
        return Err(LinalgError::DimensionMismatch {
            left: a.order,
            right: b.order,
        });
    }
    MULTIPLY_COUNT.with(|c| c.set(c.get() + 1));
    Ok(SquareMatrix {
        order: a.order,
        data: gemm(a.order, &a.data, &b.data),
    })
}

/// Product of two commuting symmetric matrices (in practice, two polynomials
/// in the same matrix), symmetrized to remove roundoff asymmetry.
pub fn multiply_sym(a: &SymMatrix, b: &SymMatrix) -> Result<SymMatrix, LinalgError> {
    multiply(a, b).map(|p| p.symmetrize())
}

/// General dense product, uncounted. Used for basis rotations and oracle
/// reconstructions, never inside purification.
pub fn multiply_general(a: &SquareMatrix, b: &SquareMatrix) -> Result<SquareMatrix, LinalgError> {
    if a.order != b.order {
        return Err(LinalgError::DimensionMismatch {
            left: a.order,
            right: b.order,
        });
    }
    Ok(SquareMatrix {
        order: a.order,
        data: gemm(a.order, &a.data, &b.data),
    })
}

pub fn trace(a: &SymMatrix) -> f64 {
    (0..a.order).map(|i| a.get(i, i)).sum()
}

/// `Tr[a b]` for symmetric `a`, `b`, evaluated elementwise without a product.
pub fn trace_of_product(a: &SymMatrix, b: &SymMatrix) -> f64 {
    assert_eq!(a.order, b.order, "order mismatch");
    a.data.iter().zip(&b.data).map(|(x, y)| x * y).sum()
}

pub fn frobenius_norm(a: &SymMatrix) -> f64 {
    a.data.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Geršgorin disc bounds: every eigenvalue lies in
/// `[min_i (a_ii - r_i), max_i (a_ii + r_i)]` with `r_i = sum_{j != i} |a_ij|`.
pub fn gershgorin_bounds(h: &SymMatrix) -> SpectralBounds {
    let n = h.order;
    let mut lower = f64::INFINITY;
    let mut upper = f64::NEG_INFINITY;
    for i in 0..n {
        let row = &h.data[i * n..(i + 1) * n];
        let center = row[i];
        let radius: f64 = row
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, x)| x.abs())
            .sum();
        lower = lower.min(center - radius);
        upper = upper.max(center + radius);
    }
    SpectralBounds { lower, upper }
}

impl Add for &SymMatrix {
    type Output = SymMatrix;
    fn add(self, rhs: &SymMatrix) -> SymMatrix {
        self.lin_comb(1.0, rhs, 1.0)
    }
}

impl Sub for &SymMatrix {
    type Output = SymMatrix;
    fn sub(self, rhs: &SymMatrix) -> SymMatrix {
        self.lin_comb(1.0, rhs, -1.0)
    }
}

impl Mul<f64> for &SymMatrix {
    type Output = SymMatrix;
    fn mul(self, rhs: f64) -> SymMatrix {
        self.scale(rhs)
    }
}
