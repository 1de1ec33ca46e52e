//! Deterministic seeded randomness.
//!
//! A SplitMix64 generator: 64-bit seed, 64-bit counter-style state, and the
//! guarantee that an identical seed plus an identical call sequence yields
//! an identical output stream. Parallel code never shares a generator;
//! instead each task derives its own stream from the run seed and the task
//! indices via [`derive_seed`], so parallel and serial execution agree
//! bit-exactly.

use crate::scalar::Scalar;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent stream seed from a run seed and task indices
/// (epoch number, member index, time index, ...).
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    let mut s = mix(seed ^ 0xD1B5_4A32_D192_ED03);
    for &t in tags {
        s = mix(s.wrapping_add(GOLDEN).wrapping_add(t));
    }
    s
}

/// Stream tags for [`derive_seed`], one per consumer so streams never collide.
pub mod streams {
    pub const INIT: u64 = 1;
    pub const EPOCH: u64 = 2;
    pub const VALIDATION: u64 = 3;
    pub const LATENT_PRIOR: u64 = 4;
    pub const DECODER_NOISE: u64 = 5;
    pub const GENERATE: u64 = 6;
    pub const SYNTH_NOISE: u64 = 7;
    pub const SYNTH_PHASE: u64 = 8;
}

/// SplitMix64 stream with a cached spare normal draw.
#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
    spare_normal: Option<f64>,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng { state: seed, spare_normal: None }
    }

    /// Stream for a task identified by `tags` under the run seed.
    pub fn substream(seed: u64, tags: &[u64]) -> Self {
        Rng::new(derive_seed(seed, tags))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix(self.state)
    }

    /// Uniform draw in `[0, 1)` with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `[lo, hi)`.
    #[inline]
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal draw (Box-Muller; the second value of each pair is
    /// cached, so draws come in deterministic pairs).
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        // u1 in (0, 1] so the log is finite.
        let u1 = ((self.next_u64() >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64);
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(r * theta.sin());
        r * theta.cos()
    }

    /// `n` i.i.d. standard normal draws.
    pub fn standard_normal_vec<T: Scalar>(&mut self, n: usize) -> Vec<T> {
        (0..n).map(|_| T::of(self.standard_normal())).collect()
    }

    /// In-place Fisher-Yates shuffle. The modulo bias at 64 bits is far
    /// below anything observable.
    pub fn shuffle<T>(&mut self, slice: &mut [T]) {
        for i in (1..slice.len()).rev() {
            let j = (self.next_u64() % (i as u64 + 1)) as usize;
            slice.swap(i, j);
        }
    }
}

/// `n` standard normal draws from `rng`.
pub fn sample_standard_normal<T: Scalar>(rng: &mut Rng, n: usize) -> Vec<T> {
    rng.standard_normal_vec(n)
}
