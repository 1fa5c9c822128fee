//! Purification engines and the iteration driver.
//!
//! Three recursions are provided, each costing two matrix products per step
//! (`D²` and `D³ = D·D²`):
//!
//! * McWeeny: `D ← 3D² - 2D³`. Grand canonical; the trace drifts unless the
//!   chemical potential happens to be right.
//! * canonical (two-branch) purification, parametrized by
//!   `c = Tr[D² D̄] / Tr[D D̄]`:
//!   `c ≤ 1/2`: `D ← [(1+c)D² + (1-2c)D - D³] / (1-c)`,
//!   `c > 1/2`: `D ← [(1+c)D² - D³] / c`.
//! * hole-particle canonical purification:
//!   `D ← D + 2 (D² D̄ - c D D̄)`, which is the fixed-step descent
//!   `D - ∇L/2` of the trace-constrained McWeeny Lagrangian.
//!
//! The driver stops when `Tr[D D̄]` drops below the tolerance. The hole
//! matrix is never stored: `D̄ = I - D` is formed where needed.

use crate::error::{PurifyError, StepError};
use crate::guess::{build_guess, GuessConfig, GuessReport, Occupation};
use crate::lagrangian::{compute_gamma, idempotency_error, LagrangianDiagnostics, Powers};
use crate::linalg::{eig_oracle, trace, trace_of_product, SymMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    McWeeny,
    Pmcp,
    Hpcp,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::McWeeny => "mcweeny",
            Method::Pmcp => "pmcp",
            Method::Hpcp => "hpcp",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Subspace {
    Particle,
    /// Purify `D̄` towards trace `M - N` and return `I - D̄`.
    Hole,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PmcpBranch {
    /// `c ≤ 1/2`
    Low,
    /// `c > 1/2`
    High,
}

impl PmcpBranch {
    pub fn for_c(c: f64) -> Self {
        if c <= 0.5 {
            PmcpBranch::Low
        } else {
            PmcpBranch::High
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PurifierConfig {
    pub method: Method,
    pub subspace: Subspace,
    /// Convergence threshold on `|Tr[D D̄]|`.
    pub tol: f64,
    pub max_iter: usize,
    pub record_trace: bool,
    /// Oracle eigenvalues of every iterate. Expensive; for tests and plots.
    pub record_eigenvalues: bool,
    /// Descent step length for McWeeny and hole-particle steps.
    pub step_length: f64,
}

impl Default for PurifierConfig {
    fn default() -> Self {
        Self {
            method: Method::Hpcp,
            subspace: Subspace::Particle,
            tol: 1e-6,
            max_iter: 100,
            record_trace: true,
            record_eigenvalues: false,
            step_length: 0.5,
        }
    }
}

impl PurifierConfig {
    pub fn with_method(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), PurifyError> {
        if !(self.tol > 0.0) {
            return Err(PurifyError::InvalidConfig(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(PurifyError::InvalidConfig("max_iter must be at least 1".into()));
        }
        if !(self.step_length > 0.0) {
            return Err(PurifyError::InvalidConfig(format!(
                "step_length must be positive, got {}",
                self.step_length
            )));
        }
        Ok(())
    }
}

/// Diagnostics of iterate `n`. The step quantities (`c`, `γ`, ...) need
/// `D²` and `D³`; they are `None` on the terminal iterate, where no step
/// is taken and those products are never formed.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub n: usize,
    /// `Tr D` of the particle matrix.
    pub trace_d: f64,
    /// `Tr[D D̄]`.
    pub idempotency_error: f64,
    /// `Tr[H D]` of the particle matrix.
    pub energy: f64,
    pub c: Option<f64>,
    pub gamma: Option<f64>,
    pub d: Option<f64>,
    pub omega: Option<f64>,
    pub lagrangian: Option<f64>,
    pub grad_norm: Option<f64>,
    pub eigenvalues: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FailureReason {
    MaxIterations,
    RunawayDetected,
    /// `c` became undefined while `Tr[D D̄]` was still above the tolerance.
    DegenerateTraces,
}

impl FailureReason {
    pub fn name(&self) -> &'static str {
        match self {
            FailureReason::MaxIterations => "max_iterations",
            FailureReason::RunawayDetected => "runaway",
            FailureReason::DegenerateTraces => "degenerate_traces",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub converged: bool,
    /// Number of purification steps taken.
    pub iterations: usize,
    /// Final particle density matrix.
    pub final_d: SymMatrix,
    pub records: Vec<IterationRecord>,
    pub failure_reason: Option<FailureReason>,
    pub guess: GuessReport,
}

impl RunResult {
    pub fn final_idempotency_error(&self) -> f64 {
        idempotency_error(&self.final_d)
    }
}

/// `D ← D - σ ∇Ω`; `σ = 1/2` gives `3D² - 2D³`.
fn mcweeny_update(p: &Powers, step_length: f64) -> SymMatrix {
    if step_length == 0.5 {
        p.d2.lin_comb(3.0, &p.d3, -2.0)
    } else {
        p.d.lin_comb(1.0, &p.grad_omega(), -step_length)
    }
}

/// `D ← D + 4σ (D² D̄ - c D D̄)`; with `σ = 1/2` this is the closed form
/// `D + 2(D² D̄ - c D D̄)`.
fn hpcp_update(p: &Powers, c: f64, step_length: f64) -> SymMatrix {
    let correction = p.particle2_hole().lin_comb(1.0, &p.particle_hole(), -c);
    p.d.lin_comb(1.0, &correction, 4.0 * step_length)
}

fn pm_polynomial(d: &SymMatrix, d2: &SymMatrix, d3: &SymMatrix, c: f64, branch: PmcpBranch) -> SymMatrix {
    match branch {
        PmcpBranch::Low => d2
            .lin_comb(1.0 + c, d, 1.0 - 2.0 * c)
            .lin_comb(1.0, d3, -1.0)
            .scale(1.0 / (1.0 - c)),
        PmcpBranch::High => d2.lin_comb(1.0 + c, d3, -1.0).scale(1.0 / c),
    }
}

/// One canonical-purification update of the particle matrix with a given
/// `c` and branch polynomial.
pub fn pm_particle_update(d: &SymMatrix, c: f64, branch: PmcpBranch) -> Result<SymMatrix, StepError> {
    let p = Powers::new(d.clone())?;
    Ok(pm_polynomial(&p.d, &p.d2, &p.d3, c, branch))
}

/// The hole-dual counterpart of [`pm_particle_update`], expressed for the
/// particle matrix through `D = I - D̄`:
///
/// ```text
/// c ≤ 1/2: D ← I - [-(D̄³) + (2-c) D̄² - (1-2c) D̄] / c
/// c > 1/2: D ← I - [-(D̄³) + (2-c) D̄²] / (1-c)
/// ```
pub fn pm_hole_dual_update(d: &SymMatrix, c: f64, branch: PmcpBranch) -> Result<SymMatrix, StepError> {
    let p = Powers::new(d.complement())?;
    let poly = match branch {
        PmcpBranch::Low => p
            .d2
            .lin_comb(2.0 - c, &p.d, -(1.0 - 2.0 * c))
            .lin_comb(1.0, &p.d3, -1.0)
            .scale(1.0 / c),
        PmcpBranch::High => p.d2.lin_comb(2.0 - c, &p.d3, -1.0).scale(1.0 / (1.0 - c)),
    };
    Ok(poly.complement())
}

/// `3D² - 2D³`.
pub fn mcweeny_step(d: &SymMatrix) -> Result<SymMatrix, StepError> {
    Ok(mcweeny_update(&Powers::new(d.clone())?, 0.5))
}

/// Canonical two-branch purification step. Returns the new matrix, the `c`
/// of the input and the branch taken.
pub fn pmcp_step(d: &SymMatrix) -> Result<(SymMatrix, f64, PmcpBranch), StepError> {
    let p = Powers::new(d.clone())?;
    let c = p.c()?;
    let branch = PmcpBranch::for_c(c);
    Ok((pm_polynomial(&p.d, &p.d2, &p.d3, c, branch), c, branch))
}

/// Hole-particle canonical purification step,
/// `D + 2(D² D̄ - c D D̄)`. Returns the new matrix and the `c` of the input.
pub fn hpcp_step(d: &SymMatrix) -> Result<(SymMatrix, f64), StepError> {
    let p = Powers::new(d.clone())?;
    let c = p.c()?;
    Ok((hpcp_update(&p, c, 0.5), c))
}

fn advance(method: Method, p: &Powers, c: f64, step_length: f64) -> SymMatrix {
    match method {
        Method::McWeeny => mcweeny_update(p, step_length),
        Method::Pmcp => pm_polynomial(&p.d, &p.d2, &p.d3, c, PmcpBranch::for_c(c)),
        Method::Hpcp => hpcp_update(p, c, step_length),
    }
}

/// Valid range of `c` before a run is declared a runaway.
pub const RUNAWAY_C_RANGE: (f64, f64) = (-0.5, 1.5);

/// Builds the configured guess and purifies it.
pub fn run_purification(
    h: &SymMatrix,
    n_occ: usize,
    guess_cfg: &GuessConfig,
    cfg: &PurifierConfig,
) -> Result<RunResult, PurifyError> {
    cfg.validate()?;
    let guess = build_guess(h, n_occ, guess_cfg)?;
    purify_from_guess(h, n_occ, guess, cfg)
}

/// Purifies an already constructed guess.
pub fn purify_from_guess(
    h: &SymMatrix,
    n_occ: usize,
    guess: GuessReport,
    cfg: &PurifierConfig,
) -> Result<RunResult, PurifyError> {
    cfg.validate()?;
    let m = h.order();
    if guess.matrix.order() != m {
        return Err(PurifyError::InvalidConfig(format!(
            "guess order {} does not match Hamiltonian order {m}",
            guess.matrix.order()
        )));
    }
    if n_occ == 0 || n_occ >= m {
        return Err(PurifyError::InvalidConfig(format!(
            "occupancy {n_occ} must lie strictly between 0 and {m}"
        )));
    }

    let hole = cfg.subspace == Subspace::Hole;
    let n_target = if hole { (m - n_occ) as f64 } else { n_occ as f64 };
    let mut x = match (hole, guess.occupation) {
        (false, Occupation::Particle) | (true, Occupation::Hole) => guess.matrix.clone(),
        _ => guess.matrix.complement(),
    };
    let trace_h = trace(h);

    let mut records = Vec::new();
    let mut converged = false;
    let mut failure = None;
    let mut iterations = 0;

    for n in 0..=cfg.max_iter {
        iterations = n;
        let idem = idempotency_error(&x);
        let tr = trace(&x);
        let (trace_d, energy) = if hole {
            (m as f64 - tr, trace_h - trace_of_product(h, &x))
        } else {
            (tr, trace_of_product(h, &x))
        };
        let mut record = IterationRecord {
            n,
            trace_d,
            idempotency_error: idem,
            energy,
            c: None,
            gamma: None,
            d: None,
            omega: None,
            lagrangian: None,
            grad_norm: None,
            eigenvalues: None,
        };
        if cfg.record_eigenvalues {
            let particle = if hole { x.complement() } else { x.clone() };
            record.eigenvalues = Some(eig_oracle(&particle)?.values);
        }

        if !(idem.is_finite() && tr.is_finite()) {
            failure = Some(FailureReason::RunawayDetected);
        } else if idem.abs() <= cfg.tol {
            converged = true;
        } else if n == cfg.max_iter {
            failure = Some(FailureReason::MaxIterations);
        }
        if converged || failure.is_some() {
            if cfg.record_trace {
                records.push(record);
            }
            break;
        }

        let powers = Powers::new(x)?;
        let diag = match LagrangianDiagnostics::evaluate(&powers, h, n_target) {
            Ok(d) => d,
            Err(StepError::Degenerate { .. }) => {
                failure = Some(FailureReason::DegenerateTraces);
                x = powers.d;
                if cfg.record_trace {
                    records.push(record);
                }
                break;
            }
            Err(StepError::Linalg(e)) => return Err(e.into()),
        };
        let c = diag.c;
        record.c = Some(c);
        record.gamma = Some(compute_gamma(c));
        record.d = Some(diag.d);
        record.omega = Some(diag.omega);
        record.lagrangian = Some(diag.lagrangian);
        record.grad_norm = Some(diag.grad_norm);
        if cfg.record_trace {
            records.push(record);
        }
        if !(c.is_finite() && c >= RUNAWAY_C_RANGE.0 && c <= RUNAWAY_C_RANGE.1) {
            failure = Some(FailureReason::RunawayDetected);
            x = powers.d;
            break;
        }
        x = advance(cfg.method, &powers, c, cfg.step_length);
    }

    let final_d = if hole { x.complement() } else { x };
    Ok(RunResult {
        converged,
        iterations,
        final_d,
        records,
        failure_reason: failure,
        guess,
    })
}
