//! Seeded random streams.
//!
//! Every random quantity in the crate comes from ChaCha20 (the
//! `rand_chacha` implementation, 20 rounds, stream 0). The 256-bit key is the
//! little-endian encoding of the 64-bit seed followed by 24 zero bytes, so the
//! stream can be reproduced from any ChaCha20 implementation.
//!
//! * A uniform double is `(next_u64 >> 11) * 2^-53`, i.e. in `[0, 1)`.
//! * Standard normals come in pairs from the Box-Muller transform with
//!   `u1 = 1 - U` (in `(0, 1]`) and `u2 = U'`:
//!   `r = sqrt(-2 ln u1)`, `(r cos 2πu2, r sin 2πu2)`.
//! * A standard complex Gaussian (mean 0, `E|g|^2 = 1`) is `(z0 + i z1) / sqrt 2`
//!   for one Box-Muller pair.
//!
//! Per-cell seeds are derived with the SplitMix64 finalizer, see [`derive_seed`].

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub struct Stream {
    inner: ChaCha20Rng,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        Self { inner: ChaCha20Rng::from_seed(key) }
    }

    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// One Box-Muller pair of independent standard normals.
    #[inline]
    pub fn normal_pair(&mut self) -> (f64, f64) {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        (r * c, r * s)
    }

    #[inline]
    pub fn complex_gaussian(&mut self) -> Complex64 {
        let (a, b) = self.normal_pair();
        Complex64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
    }

    /// Uniform point on the unit sphere (Archimedes: `x3` uniform in `[-1, 1]`).
    pub fn sphere_point(&mut self) -> [f64; 3] {
        let x3 = 2.0 * self.uniform() - 1.0;
        let phi = std::f64::consts::TAU * self.uniform();
        let rho = (1.0 - x3 * x3).max(0.0).sqrt();
        [rho * phi.cos(), rho * phi.sin(), x3]
    }
}

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `seed_cell = mix64(mix64(mix64(master) ^ n) ^ index)`.
pub fn derive_seed(master: u64, n: u64, index: u64) -> u64 {
    mix64(mix64(mix64(master) ^ n) ^ index)
}
