//! Seeded random fixtures shared by the unit tests. Everything is
//! deterministic: each test passes its own seed.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::operator::{Matrix, Operator};

#[allow(non_snake_case)]
pub fn C(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, dim: usize) -> Operator {
    let mat = DMatrix::from_fn(dim, dim, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    Operator::from_matrix(mat)
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> Operator {
    random_matrix(rng, dim).hermitize()
}

/// Random full-rank density operator: normalized A A† + small identity floor.
pub fn random_density(rng: &mut ChaCha8Rng, dim: usize) -> Operator {
    let a = random_matrix(rng, dim);
    let mut m: Matrix = a.matrix() * a.matrix().adjoint();
    for i in 0..dim {
        m[(i, i)] += C64::new(1e-3, 0.0);
    }
    let tr = m.trace();
    Operator::from_matrix(m / tr)
}
