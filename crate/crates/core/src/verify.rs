//! Checks on a converged density matrix.
//!
//! The three residuals below vanish exactly for a rank-`N` orthogonal
//! projector; `passed` requires each of them to be at most
//! [`VERIFY_TOL`]. Oracle comparisons against a diagonalized Hamiltonian are
//! reported alongside but do not enter `passed`.

use crate::error::VerifyError;
use crate::linalg::{eig_oracle, frobenius_norm, trace, trace_of_product, SymMatrix};

pub const VERIFY_TOL: f64 = 1e-6;

/// Frontier gaps at or below this make the ground-state projector ambiguous.
pub const FRONTIER_DEGENERACY: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    /// `|‖D‖_F - sqrt(Tr D)|`
    pub norm_trace_gap: f64,
    /// `|‖D‖²_F - N|`
    pub norm_occupancy_gap: f64,
    /// `|‖D‖_F - N|`, the unsquared reading, for reference only.
    pub norm_occupancy_gap_literal: f64,
    /// Distance of the sorted occupation spectrum to `(1,…,1,0,…,0)`.
    pub spectrum_gap: f64,
    pub oracle_projector_distance: Option<f64>,
    pub oracle_energy_gap: Option<f64>,
    pub passed: bool,
}

/// `|‖D‖_F - sqrt(Tr D)|`.
pub fn verify_norm_trace(d: &SymMatrix) -> Result<f64, VerifyError> {
    let tr = trace(d);
    if tr < 0.0 {
        return Err(VerifyError::NegativeTrace(tr));
    }
    Ok((frobenius_norm(d) - tr.sqrt()).abs())
}

/// `|‖D‖²_F - N| = |Tr D² - N|`.
pub fn verify_occupancy_norm(d: &SymMatrix, n_occ: usize) -> f64 {
    (trace_of_product(d, d) - n_occ as f64).abs()
}

/// Euclidean distance between the eigenvalues of `d`, sorted descending,
/// and `N` ones followed by `M - N` zeros.
pub fn verify_spectrum(d: &SymMatrix, n_occ: usize) -> Result<f64, VerifyError> {
    let m = d.order();
    if n_occ > m {
        return Err(VerifyError::InvalidOccupancy { n_occ, order: m });
    }
    let eig = eig_oracle(d)?;
    let dist2: f64 = eig
        .values
        .iter()
        .rev()
        .enumerate()
        .map(|(k, &l)| {
            let target = if k < n_occ { 1.0 } else { 0.0 };
            (l - target) * (l - target)
        })
        .sum();
    Ok(dist2.sqrt())
}

/// Projector onto the `N` lowest eigenvectors of `h` and its energy
/// `sum_{i ≤ N} ε_i`.
pub fn ground_state_oracle(h: &SymMatrix, n_occ: usize) -> Result<(SymMatrix, f64), VerifyError> {
    let m = h.order();
    if n_occ == 0 || n_occ > m {
        return Err(VerifyError::InvalidOccupancy { n_occ, order: m });
    }
    let eig = eig_oracle(h)?;
    if n_occ < m {
        let gap = eig.values[n_occ] - eig.values[n_occ - 1];
        if gap <= FRONTIER_DEGENERACY {
            return Err(VerifyError::DegenerateFrontier { gap });
        }
    }
    let occupations: Vec<f64> = (0..m).map(|k| if k < n_occ { 1.0 } else { 0.0 }).collect();
    let projector = eig.reconstruct_with(&occupations);
    let energy = eig.values[..n_occ].iter().sum();
    Ok((projector, energy))
}

/// Runs every check. With a Hamiltonian, also compares against the
/// ground-state oracle.
pub fn verify(
    d: &SymMatrix,
    n_occ: usize,
    hamiltonian: Option<&SymMatrix>,
) -> Result<VerificationReport, VerifyError> {
    let norm_trace_gap = verify_norm_trace(d)?;
    let norm_occupancy_gap = verify_occupancy_norm(d, n_occ);
    let spectrum_gap = verify_spectrum(d, n_occ)?;
    let (oracle_projector_distance, oracle_energy_gap) = match hamiltonian {
        Some(h) => {
            let (p, e) = ground_state_oracle(h, n_occ)?;
            (
                Some((d - &p).frobenius_norm()),
                Some((trace_of_product(h, d) - e).abs()),
            )
        }
        None => (None, None),
    };
    Ok(VerificationReport {
        norm_trace_gap,
        norm_occupancy_gap,
        norm_occupancy_gap_literal: (frobenius_norm(d) - n_occ as f64).abs(),
        spectrum_gap,
        oracle_projector_distance,
        oracle_energy_gap,
        passed: norm_trace_gap <= VERIFY_TOL
            && norm_occupancy_gap <= VERIFY_TOL
            && spectrum_gap <= VERIFY_TOL,
    })
}
