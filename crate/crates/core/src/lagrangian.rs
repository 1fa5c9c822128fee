//! The McWeeny idempotency functional and its trace-constrained Lagrangian.
//!
//! With `D` a density matrix and `D̄ = I - D` its hole counterpart:
//!
//! ```text
//! Ω(D)      = Tr[(D² - D)²]
//! ∇Ω(D)     = 2 (2D³ - 3D² + D)
//! L(D, γ)   = Ω(D) - γ (Tr[3D² - 2D³] - N)
//! ∇L(D, γ)  = ∇Ω(D) - 6γ (D - D²)
//! c(D)      = Tr[D² D̄] / Tr[D D̄]
//! γ(c)      = 1/3 - 2c/3
//! ```
//!
//! With `γ = γ(c(D))` the gradient `∇L` is traceless, which is what makes the
//! fixed-step descent `D - ∇L/2` conserve the trace.

use crate::error::{LinalgError, StepError};
use crate::linalg::{frobenius_norm, multiply_sym, trace, trace_of_product, SymMatrix};

/// Relative floor on `Tr[D D̄]`, scaled by the matrix order. Below
/// `1e-14 * M` the ratio `c` is numerically meaningless.
pub const DEGENERACY_FLOOR: f64 = 1e-14;

pub fn degeneracy_floor(order: usize) -> f64 {
    DEGENERACY_FLOOR * order as f64
}

/// `D`, `D²` and `D³` of one iterate. Building it costs exactly two
/// matrix products; every scalar and matrix quantity of this module can be
/// read off it without further products.
#[derive(Clone, Debug)]
pub struct Powers {
    pub d: SymMatrix,
    pub d2: SymMatrix,
    pub d3: SymMatrix,
}

impl Powers {
    pub fn new(d: SymMatrix) -> Result<Self, LinalgError> {
        let d2 = multiply_sym(&d, &d)?;
        let d3 = multiply_sym(&d, &d2)?;
        Ok(Self { d, d2, d3 })
    }

    pub fn order(&self) -> usize {
        self.d.order()
    }

    /// `D D̄ = D - D²`.
    pub fn particle_hole(&self) -> SymMatrix {
        &self.d - &self.d2
    }

    /// `D² D̄ = D² - D³`.
    pub fn particle2_hole(&self) -> SymMatrix {
        &self.d2 - &self.d3
    }

    /// `Tr[D D̄]`.
    pub fn idempotency_error(&self) -> f64 {
        trace(&self.d) - trace(&self.d2)
    }

    /// `Tr[D² D̄]`.
    pub fn trace_particle2_hole(&self) -> f64 {
        trace(&self.d2) - trace(&self.d3)
    }

    pub fn c(&self) -> Result<f64, StepError> {
        c_from_traces(
            self.trace_particle2_hole(),
            self.idempotency_error(),
            self.order(),
        )
    }

    pub fn omega(&self) -> f64 {
        let r = self.particle_hole();
        trace_of_product(&r, &r)
    }

    pub fn grad_omega(&self) -> SymMatrix {
        // 2(2D³ - 3D² + D)
        self.d3
            .lin_comb(4.0, &self.d2, -6.0)
            .lin_comb(1.0, &self.d, 2.0)
    }

    pub fn grad_lagrangian(&self, gamma: f64) -> SymMatrix {
        self.grad_omega()
            .lin_comb(1.0, &self.particle_hole(), -6.0 * gamma)
    }

    /// `L(D, γ)` for a trace target `n_target`.
    pub fn lagrangian(&self, gamma: f64, n_target: f64) -> f64 {
        let aux_trace = 3.0 * trace(&self.d2) - 2.0 * trace(&self.d3);
        self.omega() - gamma * (aux_trace - n_target)
    }
}

fn c_from_traces(num: f64, den: f64, order: usize) -> Result<f64, StepError> {
    if den.abs() <= degeneracy_floor(order) {
        return Err(StepError::Degenerate {
            idempotency_error: den,
        });
    }
    Ok(num / den)
}

/// `Tr[D (I - D)] = Tr D - ‖D‖²_F`, evaluated without a matrix product.
pub fn idempotency_error(d: &SymMatrix) -> f64 {
    trace(d) - trace_of_product(d, d)
}

/// `Ω = Tr[(D² - D)²]`. One product.
pub fn omega_mcweeny(d: &SymMatrix) -> Result<f64, LinalgError> {
    let d2 = multiply_sym(d, d)?;
    let r = &d2 - d;
    Ok(trace_of_product(&r, &r))
}

/// `∇Ω = 2(2D³ - 3D² + D)`.
pub fn grad_omega(d: &SymMatrix) -> Result<SymMatrix, LinalgError> {
    Ok(Powers::new(d.clone())?.grad_omega())
}

/// `c = Tr[D² D̄] / Tr[D D̄]` for an explicitly supplied hole matrix.
pub fn compute_c(d: &SymMatrix, dbar: &SymMatrix) -> Result<f64, StepError> {
    let d_sq = multiply_sym(d, d)?;
    c_from_traces(
        trace_of_product(&d_sq, dbar),
        trace_of_product(d, dbar),
        d.order(),
    )
}

/// `γ = 1/3 - 2c/3`: the multiplier of the trace constraint once the
/// traceless-gradient condition is imposed.
pub fn compute_gamma(c: f64) -> f64 {
    1.0 / 3.0 - 2.0 * c / 3.0
}

/// `∇L = ∇Ω - 6γ(D - D²)`.
pub fn grad_lagrangian(d: &SymMatrix, gamma: f64) -> Result<SymMatrix, LinalgError> {
    Ok(Powers::new(d.clone())?.grad_lagrangian(gamma))
}

/// `L(D, γ) = Ω - γ(Tr[3D² - 2D³] - N)`.
pub fn lagrangian_value(d: &SymMatrix, gamma: f64, n_target: f64) -> Result<f64, LinalgError> {
    Ok(Powers::new(d.clone())?.lagrangian(gamma, n_target))
}

/// Per-eigenvalue restriction of the Lagrangian:
/// `(x² - x)² - γ(3x² - 2x³)`. The constant `+γN` is left out; it shifts
/// every curve by the same amount and does not change the well shape.
pub fn scalar_lagrangian(x: f64, gamma: f64) -> f64 {
    let w = x * x - x;
    w * w - gamma * (3.0 * x * x - 2.0 * x * x * x)
}

/// `d/dx` of [`scalar_lagrangian`]: `2(2x³ - 3x² + x) - 6γ(x - x²)`.
pub fn scalar_lagrangian_derivative(x: f64, gamma: f64) -> f64 {
    2.0 * (2.0 * x * x * x - 3.0 * x * x + x) - 6.0 * gamma * (x - x * x)
}

/// Per-iterate scalar diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LagrangianDiagnostics {
    pub omega: f64,
    pub lagrangian: f64,
    pub gamma: f64,
    pub c: f64,
    /// `Tr ∇L / Tr[D D̄]`; zero up to roundoff.
    pub d: f64,
    pub grad_norm: f64,
    pub trace_d: f64,
    pub energy: f64,
}

impl LagrangianDiagnostics {
    /// Evaluates all diagnostics of an iterate. `n_target` is the trace the
    /// iterate is constrained to (N for particles, M - N for holes).
    pub fn evaluate(
        powers: &Powers,
        h: &SymMatrix,
        n_target: f64,
    ) -> Result<Self, StepError> {
        let c = powers.c()?;
        let gamma = compute_gamma(c);
        let grad = powers.grad_lagrangian(gamma);
        Ok(Self {
            omega: powers.omega(),
            lagrangian: powers.lagrangian(gamma, n_target),
            gamma,
            c,
            d: trace(&grad) / powers.idempotency_error(),
            grad_norm: frobenius_norm(&grad),
            trace_d: trace(&powers.d),
            energy: trace_of_product(h, &powers.d),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eig_oracle;

    #[test]
    fn omega_of_projector_and_half_identity() {
        let p = SymMatrix::from_diagonal(&[1.0, 0.0, 1.0, 0.0]);
        assert_eq!(omega_mcweeny(&p).unwrap(), 0.0);
        let half = SymMatrix::scaled_identity(100, 0.5);
        assert!((omega_mcweeny(&half).unwrap() - 6.25).abs() < 1e-12);
    }

    #[test]
    fn grad_omega_vanishes_at_stationary_points() {
        let p = SymMatrix::from_diagonal(&[1.0, 0.0, 1.0]);
        assert_eq!(grad_omega(&p).unwrap().max_abs(), 0.0);
        let half = SymMatrix::scaled_identity(5, 0.5);
        assert!(grad_omega(&half).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn c_of_half_identity() {
        let half = SymMatrix::scaled_identity(10, 0.5);
        let c = compute_c(&half, &half.complement()).unwrap();
        assert!((c - 0.5).abs() < 1e-15);
    }

    #[test]
    fn c_of_perturbed_projector() {
        // diag(1 - δ, 1, 1, 0, 0): Tr[D D̄] = (1-δ)δ, Tr[D² D̄] = (1-δ)²δ, so c = 1 - δ
        let delta = 1e-3;
        let d = SymMatrix::from_diagonal(&[1.0 - delta, 1.0, 1.0, 0.0, 0.0]);
        let c = compute_c(&d, &d.complement()).unwrap();
        let expected = (1.0 - delta) * (1.0 - delta) * delta / ((1.0 - delta) * delta);
        assert!((c - expected).abs() < 1e-12);
    }

    #[test]
    fn c_of_projector_is_degenerate() {
        let p = SymMatrix::from_diagonal(&[1.0, 0.0, 1.0]);
        assert!(matches!(
            compute_c(&p, &p.complement()),
            Err(StepError::Degenerate { .. })
        ));
    }

    #[test]
    fn gamma_values() {
        assert_eq!(compute_gamma(0.5), 0.0);
        assert!((compute_gamma(0.0) - 1.0 / 3.0).abs() < 1e-16);
        assert!((compute_gamma(1.0) + 1.0 / 3.0).abs() < 1e-16);
        // affine, slope -2/3
        for k in 0..10 {
            let c = k as f64 / 10.0;
            let g = compute_gamma(c);
            assert!((-1.0 / 3.0 - 1e-15..=1.0 / 3.0 + 1e-15).contains(&g));
            assert!((compute_gamma(c + 0.1) - g + 0.2 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn grad_lagrangian_at_zero_gamma_is_grad_omega() {
        let d = SymMatrix::from_diagonal(&[0.2, 0.7, 0.9]);
        assert_eq!(
            grad_lagrangian(&d, 0.0).unwrap(),
            grad_omega(&d).unwrap()
        );
    }

    #[test]
    fn omega_is_spectral_sum() {
        let v = eig_oracle(&SymMatrix::from_row_major(
            3,
            vec![1.0, 0.3, -0.2, 0.3, 0.5, 0.1, -0.2, 0.1, 2.0],
        )
        .unwrap())
        .unwrap();
        let lambdas = [0.1, 0.45, 0.8];
        let d = v.reconstruct_with(&lambdas);
        let expected: f64 = lambdas.iter().map(|l| (l * l - l) * (l * l - l)).sum();
        assert!((omega_mcweeny(&d).unwrap() - expected).abs() < 1e-10);
    }

    #[test]
    fn scalar_curve_points() {
        assert_eq!(scalar_lagrangian(0.0, 0.0), 0.0);
        assert_eq!(scalar_lagrangian(1.0, 0.0), 0.0);
        assert_eq!(scalar_lagrangian(0.5, 0.0), 1.0 / 16.0);
        for g in [-0.3, -0.1, 0.2, 0.33] {
            assert!((scalar_lagrangian(1.0, g) + g).abs() < 1e-15);
        }
    }

    fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        let fa = f(a);
        assert!(fa * f(b) <= 0.0);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if (f(m) > 0.0) == (fa > 0.0) {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn scalar_curve_minima_match_derivative_roots() {
        // derivative = 2x(x-1)(2x-1) + 6γx(x-1) = 2x(x-1)(2x - 1 + 3γ)
        // roots: 0, 1, and the moving middle point (1 - 3γ)/2
        for gamma in [0.2, -0.2] {
            let dfdx = |x| scalar_lagrangian_derivative(x, gamma);
            let mid = bisect(dfdx, 0.05, 0.95);
            assert!((mid - (1.0 - 3.0 * gamma) / 2.0).abs() < 1e-12);
            let left = bisect(dfdx, -0.5, 0.5 * mid);
            let right = bisect(dfdx, 0.5 * (1.0 + mid), 1.5);
            assert!(left.abs() < 1e-12 && (right - 1.0).abs() < 1e-12);
            // the outer roots are minima, the middle one a maximum
            let f = |x| scalar_lagrangian(x, gamma);
            assert!(f(left) < f(left + 1e-3) && f(left) < f(left - 1e-3));
            assert!(f(right) < f(right + 1e-3) && f(right) < f(right - 1e-3));
            assert!(f(mid) > f(mid + 1e-3) && f(mid) > f(mid - 1e-3));
        }
    }
}
