//! Named, seeded random streams.
//!
//! Every randomized routine in the crate draws from a ChaCha stream derived
//! from a 64-bit seed and a stream name, so results are reproducible and
//! independent streams never alias.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Derive a stream by folding a name and an index into the base seed.
pub fn stream(seed: u64, name: &str, index: u64) -> ChaCha12Rng {
    // FNV-1a over the name, then splitmix-style finalization.
    let mut h: u64 = 0xcbf29ce484222325;
    for b in name.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    let mut z = seed ^ h ^ index.wrapping_mul(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^= z >> 31;
    ChaCha12Rng::seed_from_u64(z)
}

/// Standard complex Gaussian via Box-Muller.
pub fn complex_gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    let r = (-2.0 * u1.ln()).sqrt();
    let phi = 2.0 * std::f64::consts::PI * u2;
    // Variance 1/2 per component, so |z|^2 has mean 1.
    Complex64::new(r * phi.cos(), r * phi.sin()) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-random unitary of the given dimension (Ginibre + QR with phase fix).
pub fn haar_unitary<R: Rng>(dim: usize, rng: &mut R) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    // Fix the phase ambiguity so the distribution is Haar.
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase.conj();
        }
    }
    q
}
