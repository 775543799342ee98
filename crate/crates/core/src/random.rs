//! Seeded random states and local operators.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::qmat::{CMat, DensityMatrix, LocalOperator};

pub type StateRng = ChaCha8Rng;

pub fn rng(seed: u64) -> StateRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Hilbert–Schmidt (induced) ensemble: GG†/Tr(GG†) with G a 4×rank Ginibre matrix.
pub fn hilbert_schmidt_state<R: Rng + ?Sized>(rng: &mut R, rank: usize) -> Result<DensityMatrix> {
    if !(1..=4).contains(&rank) {
        return Err(Error::OutOfRange {
            name: "rank",
            value: rank as f64,
            lo: 1.0,
            hi: 4.0,
        });
    }
    let g = ginibre(rng, 4, rank);
    DensityMatrix::from_unnormalized(&(&g * &g.adjoint()))
}

/// Haar-random 2×2 unitary (QR of a Ginibre matrix with phase correction).
pub fn haar_unitary_2<R: Rng + ?Sized>(rng: &mut R) -> CMat {
    let g = ginibre(rng, 2, 2);
    let (a, b) = (g.column(0), g.column(1));
    let na = (a[0].norm_sqr() + a[1].norm_sqr()).sqrt();
    let q0 = [a[0] / na, a[1] / na];
    let proj = q0[0].conj() * b[0] + q0[1].conj() * b[1];
    let r1 = [b[0] - proj * q0[0], b[1] - proj * q0[1]];
    let nr = (r1[0].norm_sqr() + r1[1].norm_sqr()).sqrt();
    let q1 = [r1[0] / nr, r1[1] / nr];
    CMat::from_rows([[q0[0], q1[0]], [q0[1], q1[1]]])
}

/// Random filter with largest singular value exactly one.
pub fn unit_norm_filter<R: Rng + ?Sized>(rng: &mut R) -> LocalOperator {
    loop {
        if let Ok(op) = LocalOperator::normalized(ginibre(rng, 2, 2)) {
            return op;
        }
    }
}

/// Random filter with operator norm uniformly scaled into [0, 1].
pub fn contraction<R: Rng + ?Sized>(rng: &mut R) -> LocalOperator {
    let op = unit_norm_filter(rng);
    let s: f64 = rng.random();
    LocalOperator::new(op.matrix().scale(s)).expect("scaled contraction")
}
