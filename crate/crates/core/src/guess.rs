//! Initial density matrices.
//!
//! All guesses are affine in the Hamiltonian, `β₁ I + β₂ (μ I - H)`, with
//! the spectral bounds taken from Geršgorin discs and `μ = Tr H / M` unless
//! overridden:
//!
//! * particle guess: `β₁ = θ`, `β₂ = min(β, β̄)`, spectrum in `[0, 1]`;
//! * hole guess: `β₁ = θ̄`, `β₂ = -max(β, β̄)`, trace `M - N`;
//! * mixed guess: `α D₀ + (1 - α)(I - D̄₀)`, trace `N` for every `α`;
//!
//! where `β = θ / (H_max - μ)` and `β̄ = θ̄ / (μ - H_min)`.
//!
//! The mixing coefficient can also be searched for so that `Tr D₀²` hits a
//! prescribed target ([`solve_alpha`]).

use crate::error::GuessError;
use crate::linalg::{gershgorin_bounds, multiply_sym, trace, trace_of_product, SpectralBounds, SymMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GuessKind {
    ParticlePmcp,
    HolePmcp,
    MixedFixedAlpha,
    MixedOptimizedAlpha,
}

/// Which subspace a guess matrix describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Occupation {
    /// The matrix is `D`, trace `N`.
    Particle,
    /// The matrix is `D̄`, trace `M - N`.
    Hole,
}

/// A-priori eigenvalue range of a constructed guess.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EigenRange {
    ZeroOne,
    MinusHalfThreeHalves,
    /// No a-priori bound (the hole guess overshoots `[0, 1]` on one side
    /// whenever `β ≠ β̄`).
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GuessConfig {
    pub kind: GuessKind,
    /// Mixing coefficient for [`GuessKind::MixedFixedAlpha`].
    pub alpha: f64,
    /// Target parameter of the α search.
    pub delta: f64,
    /// Replaces `Tr H / M` as the chemical potential.
    pub mu_override: Option<f64>,
    /// Replaces the Geršgorin bounds of `H`.
    pub bounds_override: Option<SpectralBounds>,
}

impl Default for GuessConfig {
    fn default() -> Self {
        Self {
            kind: GuessKind::ParticlePmcp,
            alpha: 0.5,
            delta: 2.0 / 3.0,
            mu_override: None,
            bounds_override: None,
        }
    }
}

impl GuessConfig {
    pub fn with_kind(kind: GuessKind) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), GuessError> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(GuessError::InvalidConfig(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(GuessError::InvalidConfig(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        Ok(())
    }
}

/// Trace inequalities that make `c ∈ [0, 1]` on the first iteration:
/// (a) `Tr D₀ = N`, (b) `Tr D₀ > Tr D₀² > Tr D₀³`,
/// (c) `Tr D₀³ > 2 Tr D₀² - Tr D₀`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GuessConstraints {
    pub trace_ok: bool,
    pub ordering_ok: bool,
    pub cubic_ok: bool,
    pub trace1: f64,
    pub trace2: f64,
    pub trace3: f64,
}

impl GuessConstraints {
    pub fn all(&self) -> bool {
        self.trace_ok && self.ordering_ok && self.cubic_ok
    }
}

#[derive(Clone, Debug)]
pub struct GuessReport {
    pub matrix: SymMatrix,
    pub occupation: Occupation,
    pub beta1: f64,
    pub beta2: f64,
    pub alpha_used: Option<f64>,
    /// Set when the α search failed and the plain particle guess was used.
    pub alpha_fallback: Option<AlphaFallback>,
    pub mu_used: f64,
    pub constraints: GuessConstraints,
    pub eigen_range: EigenRange,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlphaSolution {
    pub alpha: f64,
    pub target: f64,
}

/// The α search found no admissible root; the run proceeds with `alpha`
/// (always 1, the plain particle guess).
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaFallback {
    pub alpha: f64,
    pub target: f64,
    pub reason: String,
}

/// `μ̃ = Tr H / M`.
pub fn estimate_mu(h: &SymMatrix) -> f64 {
    trace(h) / h.order() as f64
}

#[derive(Clone, Copy, Debug)]
struct Scaling {
    theta: f64,
    mu: f64,
    beta: f64,
    beta_bar: f64,
}

fn scaling(h: &SymMatrix, n_occ: usize, cfg: &GuessConfig) -> Result<Scaling, GuessError> {
    cfg.validate()?;
    let m = h.order();
    if n_occ == 0 || n_occ >= m {
        return Err(GuessError::InvalidOccupancy { n_occ, order: m });
    }
    let theta = n_occ as f64 / m as f64;
    let mu = cfg.mu_override.unwrap_or_else(|| estimate_mu(h));
    let bounds = cfg.bounds_override.unwrap_or_else(|| gershgorin_bounds(h));
    // strict bracketing, otherwise β or β̄ is infinite or negative
    if !(bounds.lower < mu && mu < bounds.upper) {
        return Err(GuessError::InvalidChemicalPotential {
            mu,
            lower: bounds.lower,
            upper: bounds.upper,
        });
    }
    Ok(Scaling {
        theta,
        mu,
        beta: theta / (bounds.upper - mu),
        beta_bar: (1.0 - theta) / (mu - bounds.lower),
    })
}

/// `β₁ I + β₂ (μ I - H)`.
fn affine_guess(h: &SymMatrix, beta1: f64, beta2: f64, mu: f64) -> SymMatrix {
    h.scale(-beta2).shift_diagonal(beta1 + beta2 * mu)
}

/// Evaluates the trace inequalities of a guess against the trace target
/// `n_occ`. Costs one matrix product.
pub fn check_guess_constraints(d0: &SymMatrix, n_occ: usize) -> GuessConstraints {
    let d2 = multiply_sym(d0, d0).expect("square operands");
    let trace1 = trace(d0);
    let trace2 = trace(&d2);
    let trace3 = trace_of_product(&d2, d0);
    let m = d0.order() as f64;
    GuessConstraints {
        trace_ok: (trace1 - n_occ as f64).abs() <= 1e-9 * m,
        ordering_ok: trace1 > trace2 && trace2 > trace3,
        cubic_ok: trace3 > 2.0 * trace2 - trace1,
        trace1,
        trace2,
        trace3,
    }
}

/// `D₀ = θ I + min(β, β̄)(μ I - H)`.
pub fn build_particle_guess(
    h: &SymMatrix,
    n_occ: usize,
    cfg: &GuessConfig,
) -> Result<GuessReport, GuessError> {
    let s = scaling(h, n_occ, cfg)?;
    let beta2 = s.beta.min(s.beta_bar);
    let matrix = affine_guess(h, s.theta, beta2, s.mu);
    let constraints = check_guess_constraints(&matrix, n_occ);
    Ok(GuessReport {
        matrix,
        occupation: Occupation::Particle,
        beta1: s.theta,
        beta2,
        alpha_used: None,
        alpha_fallback: None,
        mu_used: s.mu,
        constraints,
        eigen_range: EigenRange::ZeroOne,
    })
}

/// `D̄₀ = θ̄ I - max(β, β̄)(μ I - H)`, trace `M - N`.
pub fn build_hole_guess(
    h: &SymMatrix,
    n_occ: usize,
    cfg: &GuessConfig,
) -> Result<GuessReport, GuessError> {
    let s = scaling(h, n_occ, cfg)?;
    let beta2 = -s.beta.max(s.beta_bar);
    let matrix = affine_guess(h, 1.0 - s.theta, beta2, s.mu);
    let constraints = check_guess_constraints(&matrix, h.order() - n_occ);
    Ok(GuessReport {
        matrix,
        occupation: Occupation::Hole,
        beta1: 1.0 - s.theta,
        beta2,
        alpha_used: None,
        alpha_fallback: None,
        mu_used: s.mu,
        constraints,
        eigen_range: EigenRange::Unbounded,
    })
}

fn mixed_with_alpha(h: &SymMatrix, alpha: f64, s: &Scaling) -> (SymMatrix, f64) {
    let particle = affine_guess(h, s.theta, s.beta.min(s.beta_bar), s.mu);
    let hole = affine_guess(h, 1.0 - s.theta, -s.beta.max(s.beta_bar), s.mu);
    let matrix = particle.lin_comb(alpha, &hole.complement(), 1.0 - alpha);
    // α D₀ + (1-α)(I - D̄₀) = θ I + (α min + (1-α) max)(μ I - H)
    let beta2 = alpha * s.beta.min(s.beta_bar) + (1.0 - alpha) * s.beta.max(s.beta_bar);
    (matrix, beta2)
}

/// `α D₀ + (1 - α)(I - D̄₀)` with `α = cfg.alpha`.
pub fn build_mixed_guess(
    h: &SymMatrix,
    n_occ: usize,
    cfg: &GuessConfig,
) -> Result<GuessReport, GuessError> {
    let s = scaling(h, n_occ, cfg)?;
    let (matrix, beta2) = mixed_with_alpha(h, cfg.alpha, &s);
    let constraints = check_guess_constraints(&matrix, n_occ);
    Ok(GuessReport {
        matrix,
        occupation: Occupation::Particle,
        beta1: s.theta,
        beta2,
        alpha_used: Some(cfg.alpha),
        alpha_fallback: None,
        mu_used: s.mu,
        constraints,
        eigen_range: EigenRange::MinusHalfThreeHalves,
    })
}

/// Target for `Tr D₀²`: `(1 - δ) N` when `θ ≤ 1 - δ`, `N - δ (M - N)` otherwise.
pub fn alpha_target(order: usize, n_occ: usize, delta: f64) -> f64 {
    let n = n_occ as f64;
    let theta = n / order as f64;
    if theta <= 1.0 - delta {
        n - delta * n
    } else {
        n - delta * (order as f64 - n)
    }
}

/// Roots of `q2 α² + q1 α + q0` inside `[0, 1]`.
fn unit_interval_roots(q2: f64, q1: f64, q0: f64, scale: f64) -> Vec<f64> {
    let eps = 1e-14 * scale.max(1.0);
    let mut roots = Vec::new();
    if q2.abs() <= eps {
        if q1.abs() > eps {
            roots.push(-q0 / q1);
        } else if q0.abs() <= 1e-9 * scale.max(1.0) {
            roots.push(0.5);
        }
    } else {
        let disc = q1 * q1 - 4.0 * q2 * q0;
        if disc >= 0.0 {
            // numerically stable pair
            let q = -0.5 * (q1 + q1.signum() * disc.sqrt());
            if q != 0.0 {
                roots.push(q / q2);
                roots.push(q0 / q);
            } else {
                roots.push(0.0);
            }
        }
    }
    roots
        .into_iter()
        .filter(|r| r.is_finite() && (-1e-12..=1.0 + 1e-12).contains(r))
        .map(|r| r.clamp(0.0, 1.0))
        .collect()
}

/// Searches `α ∈ [0, 1]` such that the mixed guess has `Tr D₀²` equal to
/// [`alpha_target`]. With `A = D₀` and `B = I - D̄₀` this is the quadratic
///
/// ```text
/// α² Tr A² + 2α(1-α) Tr[AB] + (1-α)² Tr B² = T
/// ```
///
/// When two roots are admissible the one closest to 1/2 wins (ties go to the
/// larger α). The resulting guess must also satisfy every trace inequality
/// of [`check_guess_constraints`], otherwise the search reports a fallback
/// to `α = 1`.
pub fn solve_alpha(
    h: &SymMatrix,
    n_occ: usize,
    cfg: &GuessConfig,
) -> Result<Result<AlphaSolution, AlphaFallback>, GuessError> {
    let s = scaling(h, n_occ, cfg)?;
    let target = alpha_target(h.order(), n_occ, cfg.delta);
    let fallback = |reason: String| {
        Ok(Err(AlphaFallback {
            alpha: 1.0,
            target,
            reason,
        }))
    };

    let a = affine_guess(h, s.theta, s.beta.min(s.beta_bar), s.mu);
    let b = affine_guess(h, 1.0 - s.theta, -s.beta.max(s.beta_bar), s.mu).complement();
    let taa = trace_of_product(&a, &a);
    let tbb = trace_of_product(&b, &b);
    let tab = trace_of_product(&a, &b);

    let q2 = taa - 2.0 * tab + tbb;
    let q1 = 2.0 * (tab - tbb);
    let q0 = tbb - target;
    let mut roots = unit_interval_roots(q2, q1, q0, taa.max(tbb));
    if roots.is_empty() {
        return fallback(format!(
            "no root in [0, 1] for Tr D0^2 = {target} (Tr A^2 = {taa}, Tr B^2 = {tbb})"
        ));
    }
    roots.sort_by(|x, y| {
        (x - 0.5)
            .abs()
            .total_cmp(&(y - 0.5).abs())
            .then(y.total_cmp(x))
    });
    let alpha = roots[0];
    let (matrix, _) = mixed_with_alpha(h, alpha, &s);
    let constraints = check_guess_constraints(&matrix, n_occ);
    if !constraints.all() {
        return fallback(format!(
            "alpha = {alpha} violates the trace inequalities ({constraints:?})"
        ));
    }
    Ok(Ok(AlphaSolution { alpha, target }))
}

/// Builds the guess selected by `cfg.kind`.
pub fn build_guess(
    h: &SymMatrix,
    n_occ: usize,
    cfg: &GuessConfig,
) -> Result<GuessReport, GuessError> {
    match cfg.kind {
        GuessKind::ParticlePmcp => build_particle_guess(h, n_occ, cfg),
        GuessKind::HolePmcp => build_hole_guess(h, n_occ, cfg),
        GuessKind::MixedFixedAlpha => build_mixed_guess(h, n_occ, cfg),
        GuessKind::MixedOptimizedAlpha => match solve_alpha(h, n_occ, cfg)? {
            Ok(sol) => {
                let cfg = GuessConfig {
                    alpha: sol.alpha,
                    ..cfg.clone()
                };
                build_mixed_guess(h, n_occ, &cfg)
            }
            Err(fb) => {
                let mut report = build_particle_guess(h, n_occ, cfg)?;
                report.alpha_used = Some(fb.alpha);
                report.alpha_fallback = Some(fb);
                Ok(report)
            }
        },
    }
}
