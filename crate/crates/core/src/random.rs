//! Seeded samplers. All randomized checks go through [`rng`] so that a seed
//! fully determines every sampled element.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{AElement, CPElement};
use crate::dynamics::DynSystem;
use crate::linalg::{CMatrix, C64};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Real and imaginary parts uniform in `[-1, 1)`.
pub fn complex(rng: &mut impl Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex(rng))
}

pub fn hermitian(rng: &mut impl Rng, n: usize) -> CMatrix {
    matrix(rng, n, n).hermitian_part()
}

pub fn a_element(rng: &mut impl Rng, system: &DynSystem) -> AElement {
    let n = system.fiber_dim();
    let blocks: Vec<CMatrix> = (0..system.points()).map(|_| matrix(rng, n, n)).collect();
    AElement::from_blocks(system, blocks).expect("blocks have fiber shape")
}

pub fn cp_element(rng: &mut impl Rng, system: &DynSystem) -> CPElement {
    let coeffs = system
        .group()
        .elements()
        .map(|_| a_element(rng, system))
        .collect();
    CPElement::from_coeffs(system, coeffs).expect("one coefficient per element")
}

/// Random real scalar weights for a linear combination.
pub fn weights(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
}
