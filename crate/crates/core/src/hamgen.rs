//! Random gapped test Hamiltonians.
//!
//! The spectrum has `N` occupied levels in `[low, -Δε/2]` and `M - N`
//! virtual levels in `[Δε/2, high]`, with the two frontier levels pinned at
//! `∓Δε/2` so that the gap is exactly `Δε`. The remaining levels are
//! uniform draws.
//!
//! Random numbers come from ChaCha8 seeded through `seed_from_u64`. Uniform
//! variates are formed from the top 53 bits of each `u64` so that they do
//! not depend on any sampling algorithm outside this file.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::SpecError;
use crate::linalg::{multiply_general, SquareMatrix, SymMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Basis {
    Diagonal,
    RandomOrthogonal,
}

impl Basis {
    pub fn name(&self) -> &'static str {
        match self {
            Basis::Diagonal => "diagonal",
            Basis::RandomOrthogonal => "orthogonal",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "diagonal" => Some(Basis::Diagonal),
            "orthogonal" | "random-orthogonal" => Some(Basis::RandomOrthogonal),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianSpec {
    pub m: usize,
    pub n_occ: usize,
    pub gap: f64,
    pub range_low: f64,
    pub range_high: f64,
    pub seed: u64,
    pub basis: Basis,
}

impl HamiltonianSpec {
    /// `M x M` diagonal spectrum on `[-2.5, 2.5]`.
    pub fn new(m: usize, n_occ: usize, gap: f64, seed: u64) -> Self {
        Self {
            m,
            n_occ,
            gap,
            range_low: -2.5,
            range_high: 2.5,
            seed,
            basis: Basis::Diagonal,
        }
    }

    pub fn with_basis(mut self, basis: Basis) -> Self {
        self.basis = basis;
        self
    }

    pub fn theta(&self) -> f64 {
        self.n_occ as f64 / self.m as f64
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        let fail = |msg: String| Err(SpecError::Invalid(msg));
        if self.n_occ == 0 || self.n_occ >= self.m {
            return fail(format!("need 0 < n_occ < m, got n_occ={} m={}", self.n_occ, self.m));
        }
        if !(self.gap > 0.0 && self.gap.is_finite()) {
            return fail(format!("gap must be positive, got {}", self.gap));
        }
        if !(self.range_low < self.range_high) || !self.range_low.is_finite() || !self.range_high.is_finite() {
            return fail(format!(
                "need range_low < range_high, got [{}, {}]",
                self.range_low, self.range_high
            ));
        }
        if !(-0.5 * self.gap >= self.range_low && 0.5 * self.gap <= self.range_high) {
            return fail(format!(
                "gap {} does not fit in [{}, {}] around zero",
                self.gap, self.range_low, self.range_high
            ));
        }
        Ok(())
    }

    /// Flat `key=value` lines.
    pub fn to_kv(&self) -> String {
        format!(
            "m={}\nn_occ={}\ngap={:e}\nrange_low={}\nrange_high={}\nseed={}\nbasis={}\n",
            self.m,
            self.n_occ,
            self.gap,
            self.range_low,
            self.range_high,
            self.seed,
            self.basis.name()
        )
    }
}

fn uniform01(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Ascending eigenvalues of the Hamiltonian described by `spec`.
pub fn generate_spectrum(spec: &HamiltonianSpec) -> Result<Vec<f64>, SpecError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    spectrum_from_rng(spec, &mut rng)
}

fn spectrum_from_rng(spec: &HamiltonianSpec, rng: &mut ChaCha8Rng) -> Result<Vec<f64>, SpecError> {
    let half = 0.5 * spec.gap;
    let mut values = Vec::with_capacity(spec.m);
    for _ in 0..spec.n_occ - 1 {
        values.push(spec.range_low + (-half - spec.range_low) * uniform01(rng));
    }
    values.push(-half);
    values.push(half);
    for _ in 0..spec.m - spec.n_occ - 1 {
        values.push(half + (spec.range_high - half) * uniform01(rng));
    }
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Orthogonal factor of the QR decomposition of `a` (Gram-Schmidt with one
/// reorthogonalization pass; the implied `R` has a positive diagonal).
fn orthonormal_factor(a: &SquareMatrix) -> SquareMatrix {
    let n = a.order();
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| a.get(i, j)).collect()).collect();
    for j in 0..n {
        for _pass in 0..2 {
            for k in 0..j {
                let (done, rest) = cols.split_at_mut(j);
                let qk = &done[k];
                let v = &mut rest[0];
                let r: f64 = qk.iter().zip(v.iter()).map(|(x, y)| x * y).sum();
                for (vi, qi) in v.iter_mut().zip(qk) {
                    *vi -= r * qi;
                }
            }
        }
        let norm = cols[j].iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in cols[j].iter_mut() {
            *x /= norm;
        }
    }
    let mut q = SquareMatrix::zeros(n);
    for (j, col) in cols.iter().enumerate() {
        for (i, &x) in col.iter().enumerate() {
            q.set(i, j, x);
        }
    }
    q
}

/// Builds the test Hamiltonian. Bit-reproducible for a fixed spec.
pub fn generate_hamiltonian(spec: &HamiltonianSpec) -> Result<SymMatrix, SpecError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let values = spectrum_from_rng(spec, &mut rng)?;
    match spec.basis {
        Basis::Diagonal => Ok(SymMatrix::from_diagonal(&values)),
        Basis::RandomOrthogonal => {
            let n = spec.m;
            let gauss: Vec<f64> = (0..n * n)
                .map(|_| StandardNormal.sample(&mut rng))
                .collect();
            let q = orthonormal_factor(&SquareMatrix::from_row_major(n, gauss).expect("n*n entries"));
            // Qᵀ Λ Q
            let mut lq = q.clone();
            for i in 0..n {
                for j in 0..n {
                    lq.set(i, j, values[i] * q.get(i, j));
                }
            }
            let h = multiply_general(&q.transpose(), &lq).expect("same order");
            Ok(h.symmetrize())
        }
    }
}
