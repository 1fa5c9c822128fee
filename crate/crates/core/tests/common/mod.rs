#![allow(dead_code)]

use purikit::linalg::eig_oracle;
use purikit::{generate_hamiltonian, Basis, HamiltonianSpec, SymMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense symmetric density matrix with spectrum inside (0, 1), in a random
/// orthonormal basis.
pub fn random_density(m: usize, seed: u64) -> SymMatrix {
    let spec = HamiltonianSpec::new(m, m / 2, 0.1, seed).with_basis(Basis::RandomOrthogonal);
    let h = generate_hamiltonian(&spec).unwrap();
    h.shift_diagonal(2.6).scale(1.0 / 5.2)
}

/// Symmetric matrix with entries uniform in [-1, 1].
pub fn random_symmetric(m: usize, seed: u64) -> SymMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = SymMatrix::zeros(m);
    for i in 0..m {
        for j in 0..=i {
            s.set_sym(i, j, rng.random_range(-1.0..1.0));
        }
    }
    s
}

pub fn eigenvalues(a: &SymMatrix) -> Vec<f64> {
    eig_oracle(a).unwrap().values
}

/// `c` from the eigenvalues alone.
pub fn spectral_c(values: &[f64]) -> f64 {
    let num: f64 = values.iter().map(|x| x * x * (1.0 - x)).sum();
    let den: f64 = values.iter().map(|x| x * (1.0 - x)).sum();
    num / den
}
