//! Counter-based random streams.
//!
//! Every Gaussian increment is a pure function of `(seed, particle, step)`,
//! so particle updates can run in any order and still reproduce the same
//! path bit for bit.

use rand_core::{impls, RngCore};
use rand_distr::{Distribution, StandardNormal};

#[inline(always)]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A short stream keyed by `(seed, particle, step)`; successive draws walk
/// a counter through the splitmix64 finalizer.
#[derive(Clone, Debug)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(seed: u64, particle: u64, step: u64) -> Self {
        let key = mix64(mix64(seed ^ 0x9E37_79B9_7F4A_7C15).wrapping_add(particle) ^ mix64(step.wrapping_add(0xD134_2543_DE82_EF95)));
        CounterRng { key, counter: 0 }
    }
}

impl RngCore for CounterRng {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(0x9E37_79B9_7F4A_7C15);
        mix64(self.key ^ self.counter)
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        impls::fill_bytes_via_next(self, dst)
    }
}

/// Standard normal draw for one particle at one step.
#[inline]
pub fn gaussian(seed: u64, particle: u64, step: u64) -> f64 {
    StandardNormal.sample(&mut CounterRng::new(seed, particle, step))
}

/// Uniform draw in `[0, 1)` for one particle, used by i.i.d. initial sampling.
pub fn uniform(seed: u64, particle: u64, step: u64) -> f64 {
    let mut rng = CounterRng::new(seed, particle, step);
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
