//! Trace-conserving density matrix purification.
//!
//! Given a symmetric Hamiltonian `H` of order `M` and an occupancy `N`,
//! the purifiers iterate an initial guess `D₀` towards the rank-`N`
//! projector onto the lowest eigenvectors of `H`, using only matrix
//! products and traces:
//!
//! * McWeeny: `D ← 3D² - 2D³` (does not conserve the trace);
//! * canonical (PMCP): the trace-conserving two-branch polynomial;
//! * hole-particle canonical (HPCP): `D ← D + 2(D² D̄ - c D D̄)` with
//!   `D̄ = I - D` and `c = Tr[D² D̄] / Tr[D D̄]`.
//!
//! Each step costs two matrix products.
//!
//! ```
//! use purikit::{generate_hamiltonian, run_purification, GuessConfig, HamiltonianSpec, PurifierConfig};
//!
//! let spec = HamiltonianSpec::new(40, 12, 0.5, 1);
//! let h = generate_hamiltonian(&spec).unwrap();
//! let run = run_purification(&h, 12, &GuessConfig::default(), &PurifierConfig::default()).unwrap();
//! assert!(run.converged);
//! assert!((run.final_d.trace() - 12.0).abs() < 1e-8);
//! ```

pub mod bench;
pub mod error;
pub mod guess;
pub mod hamgen;
pub mod lagrangian;
pub mod linalg;
pub mod mtx;
pub mod purify;
pub mod verify;

pub use bench::{
    convergence_profile, gap_fits, gap_scan, linear_fit, run_sweep, sample_seed, sample_spec, CellResult, GapFit,
    LinearFit, MethodVariant, ProfileRow, RunningStats, SweepConfig, SweepResult,
};
pub use error::{
    BenchError, ConfigError, GuessError, LinalgError, MtxError, PurifyError, SpecError, StepError, VerifyError,
};
pub use guess::{
    build_guess, solve_alpha, AlphaFallback, AlphaSolution, EigenRange, GuessConfig, GuessConstraints, GuessKind,
    GuessReport, Occupation,
};
pub use hamgen::{generate_hamiltonian, generate_spectrum, Basis, HamiltonianSpec};
pub use linalg::{SpectralBounds, SquareMatrix, SymMatrix};
pub use mtx::{load_matrix, parse_matrix_market, save_matrix, write_matrix_market};
pub use purify::{
    purify_from_guess, run_purification, FailureReason, IterationRecord, Method, PurifierConfig, RunResult, Subspace,
};
pub use verify::{verify, VerificationReport};
