//! Keyed random streams.
//!
//! Every episode gets its own ChaCha stream whose 256-bit key is built from
//! `(master_seed, run_index, policy_index)`. Streams are therefore derived by
//! keying rather than by sequential splitting, so episodes can be replayed or
//! scheduled on any worker in any order.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

const DOMAIN_TAG: u64 = 0x4d45_442d_6261_6e64; // "MED-band"

/// Identity of one episode's random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub run_index: u64,
    pub policy_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, run_index: u64, policy_index: u64) -> Self {
        Self {
            master_seed,
            run_index,
            policy_index,
        }
    }
}

/// A deterministic source of uniforms owned by exactly one episode.
#[derive(Debug, Clone)]
pub struct RandomStream {
    inner: ChaCha12Rng,
}

impl RandomStream {
    /// Uniform real in `[0, 1)` with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Mutable access to the underlying generator for `rand_distr` samplers.
    pub fn rng(&mut self) -> &mut impl Rng {
        &mut self.inner
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Derives the stream for `spec`. Pure function of its argument.
pub fn derive_stream(spec: SeedSpec) -> RandomStream {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&spec.master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&spec.run_index.to_le_bytes());
    key[16..24].copy_from_slice(&spec.policy_index.to_le_bytes());
    key[24..32].copy_from_slice(&DOMAIN_TAG.to_le_bytes());
    RandomStream {
        inner: ChaCha12Rng::from_seed(key),
    }
}

/// Inverse-CDF draw of an index with probability `weights[j] / sum(weights)`.
///
/// Cumulative sums are taken in index order, so the outcome depends only on the
/// uniform `u` and the weight vector. Returns `None` if no weight is positive.
pub fn sample_index(weights: &[f64], u: f64) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let target = u * total;
    let mut acc = 0.0;
    let mut last_positive = None;
    for (j, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = Some(j);
            if target < acc {
                return Some(j);
            }
        }
    }
    // rounding can leave target == acc at the top end
    last_positive
}
