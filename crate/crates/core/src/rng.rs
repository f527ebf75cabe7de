//! Seeded random streams.
//!
//! Every realization owns a ChaCha8 stream keyed by
//! `stream_seed(master, label, index)`, so a realization's draws do not
//! depend on which worker produced it or in what order.
//!
//! Complex Gaussians use Box–Muller: with `u1` uniform on `(0, 1]` and `u2`
//! uniform on `[0, 1)`, `z = sqrt(-ln u1) · exp(j 2π u2)` is `CN(0, 1)`
//! (each real component has variance 1/2). Uniforms take the top 53 bits of
//! `next_u64`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finaliser.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// Seed of stream `index` under `label` for a given master seed.
pub fn stream_seed(master: u64, label: &str, index: u64) -> u64 {
    let a = mix64(master.wrapping_add(GOLDEN));
    let b = mix64(a ^ fnv1a(label));
    mix64(b.wrapping_add(index.wrapping_mul(GOLDEN)))
}

/// Random stream for one realization.
#[derive(Clone, Debug)]
pub struct StreamRng {
    inner: ChaCha8Rng,
}

impl StreamRng {
    pub fn new(seed: u64) -> Self {
        let mut key = [0u8; 32];
        let mut s = seed;
        for chunk in key.chunks_exact_mut(8) {
            s = s.wrapping_add(GOLDEN);
            chunk.copy_from_slice(&mix64(s).to_le_bytes());
        }
        Self {
            inner: ChaCha8Rng::from_seed(key),
        }
    }

    pub fn derive(master: u64, label: &str, index: u64) -> Self {
        Self::new(stream_seed(master, label, index))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `(0, 1]`.
    #[inline]
    pub fn uniform_open_closed(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Circularly-symmetric complex Gaussian `CN(0, 1)`.
    #[inline]
    pub fn complex_normal(&mut self) -> Complex64 {
        let u1 = self.uniform_open_closed();
        let u2 = self.uniform();
        Complex64::from_polar((-u1.ln()).sqrt(), 2.0 * PI * u2)
    }

    /// Zero-mean Laplacian with scale `b` (standard deviation `b·√2`).
    pub fn laplacian(&mut self, b: f64) -> f64 {
        // u on (-1/2, 1/2]; ln(1 - 2|u|) is finite unless |u| = 1/2
        let u = self.uniform_open_closed() - 0.5;
        let t = (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE);
        -b * u.signum() * t.ln()
    }
}
