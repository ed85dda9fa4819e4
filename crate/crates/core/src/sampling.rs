//! Seeded random parameter sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lax::LaxParams;
use crate::linalg::C64;

pub const DEFAULT_SEED: u64 = 42;
pub const U_CHOICES: [f64; 6] = [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform (by area) on the annulus `r_min <= |z| <= r_max`.
pub fn annulus<R: Rng>(rng: &mut R, r_min: f64, r_max: f64) -> C64 {
    let r2 = rng.random_range(r_min * r_min..=r_max * r_max);
    let theta = rng.random_range(0.0..std::f64::consts::TAU);
    C64::from_polar(r2.sqrt(), theta)
}

/// `lambda, omega` on the annulus `0.3..1.5`, `u` from [`U_CHOICES`].
pub fn sample_params<R: Rng>(rng: &mut R) -> LaxParams {
    let lambda = annulus(rng, 0.3, 1.5);
    let omega = annulus(rng, 0.3, 1.5);
    let u = U_CHOICES[rng.random_range(0..U_CHOICES.len())];
    LaxParams { lambda, omega, u }
}

pub fn sample_many(seed: u64, count: usize) -> Vec<LaxParams> {
    let mut r = rng(seed);
    (0..count).map(|_| sample_params(&mut r)).collect()
}

/// Random complex vector with entries uniform in the unit square.
pub fn random_vector<R: Rng>(rng: &mut R, len: usize) -> Vec<C64> {
    (0..len)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}
