//! Seeded sampling helpers. Every randomized routine in the crate draws from
//! a `ChaCha8Rng` built here so results depend only on the seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{ComplexMatrix, Ket, C64};

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian (independent N(0,1) real and imaginary parts).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn gaussian_ket<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Ket {
    Ket::from_vec_unchecked((0..dim).map(|_| complex_gaussian(rng)).collect())
}

/// Uniformly distributed unit vector.
pub fn unit_ket<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Ket {
    loop {
        if let Some(k) = gaussian_ket(rng, dim).normalized() {
            return k;
        }
    }
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn hermitian_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    gaussian_matrix(rng, n, n).hermitian_part()
}

/// `G G*` for a Gaussian `n x rank` matrix `G`.
pub fn psd_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> ComplexMatrix {
    let g = gaussian_matrix(rng, n, rank);
    &g * &g.adjoint()
}
