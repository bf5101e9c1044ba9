//! Shared helpers for unit tests; thin wrappers over the public generators.

use crate::problems::generators;
use crate::symlinalg::{SpdMatrix, SymMatrix};
use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    generators::rng_from_seed(seed)
}

pub fn rel_err(got: &DMatrix<f64>, want: &DMatrix<f64>) -> f64 {
    let denom = want.norm().max(1e-300);
    (got - want).norm() / denom
}

pub fn standard_normal_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    generators::standard_normal_matrix(rows, cols, rng)
}

pub fn spd_from_spectrum(n: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> SpdMatrix {
    generators::gen_spd_loguniform(n, lo, hi, rng)
}

pub fn random_unit_sym(n: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
    generators::gen_unit_sym(n, rng)
}
