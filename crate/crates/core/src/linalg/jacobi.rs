//! Cyclic Jacobi eigensolver for dense symmetric matrices.
//!
//! Only used as a reference: verification, ground-state oracles and tests.
//! It is never called from a purification loop.

use super::{SquareMatrix, SymMatrix};
use crate::error::LinalgError;

const MAX_SWEEPS: usize = 100;

/// `A = V diag(values) V^T`, eigenvalues ascending, eigenvectors in the
/// columns of `vectors`.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: SquareMatrix,
}

impl EigenDecomposition {
    /// Column `k` of `V`.
    pub fn vector(&self, k: usize) -> Vec<f64> {
        let n = self.vectors.order();
        (0..n).map(|i| self.vectors.get(i, k)).collect()
    }

    /// `V diag(values) V^T`.
    pub fn reconstruct(&self) -> SymMatrix {
        self.reconstruct_with(&self.values)
    }

    /// `V diag(f) V^T` for an arbitrary set of eigenvalues.
    pub fn reconstruct_with(&self, values: &[f64]) -> SymMatrix {
        let n = self.vectors.order();
        let v = self.vectors.as_slice();
        let mut out = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let mut s = 0.0;
                for k in 0..n {
                    s += v[i * n + k] * values[k] * v[j * n + k];
                }
                out.set(i, j, s);
                out.set(j, i, s);
            }
        }
        out.symmetrize()
    }
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            s += a[i * n + j] * a[i * n + j];
        }
    }
    s.sqrt()
}

/// Diagonalizes `a` by cyclic sweeps of plane rotations.
pub fn eig_oracle(a: &SymMatrix) -> Result<EigenDecomposition, LinalgError> {
    let n = a.order();
    let mut m = a.as_slice().to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let scale = a.frobenius_norm();
    let mut converged = n == 1 || scale == 0.0;
    let mut sweep = 0;
    while !converged {
        if sweep == MAX_SWEEPS {
            return Err(LinalgError::EigenNoConvergence { sweeps: MAX_SWEEPS });
        }
        sweep += 1;
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                // skip rotations that cannot change the diagonal at working precision
                if sweep > 3 && apq.abs() < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
                    m[p * n + q] = 0.0;
                    m[q * n + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;

                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        converged = off_diagonal_norm(&m, n) <= 1e-15 * scale;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].total_cmp(&m[j * n + j]));
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vectors = SquareMatrix::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors.set(row, col, v[row * n + src]);
        }
    }
    Ok(EigenDecomposition { values, vectors })
}
