//! Counter-based random streams.
//!
//! A stream is identified by `(master_seed, stream_id)`. The `k`-th output is a
//! pure function of the key and `k`, so a sampler can address values by pair
//! index instead of consuming them in order, and replicas running on different
//! threads never share state.

use rand_core::RngCore;
use serde::{Deserialize, Serialize};

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
#[inline]
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    master_seed: u64,
    stream_id: u64,
    #[serde(skip)]
    k0: u64,
    #[serde(skip)]
    k1: u64,
    #[serde(skip)]
    counter: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let k0 = mix64(master_seed.wrapping_add(GOLDEN));
        let k1 = mix64(
            k0 ^ mix64(
                stream_id
                    .wrapping_mul(GOLDEN)
                    .wrapping_add(0x632b_e59b_d9b4_e019),
            ),
        );
        Self {
            master_seed,
            stream_id,
            k0,
            k1,
            counter: 0,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Number of values consumed so far.
    pub fn position(&self) -> u64 {
        self.counter
    }

    /// The raw 64-bit value at `index`, independent of the current position.
    #[inline]
    pub fn value_at(&self, index: u64) -> u64 {
        mix64(mix64(index ^ self.k0).wrapping_add(self.k1))
    }

    /// A uniform in `[0, 1)` at `index`.
    #[inline]
    pub fn uniform_at(&self, index: u64) -> f64 {
        to_unit(self.value_at(index))
    }

    /// Moves the cursor forward by `count` values without producing them.
    pub fn advance(&mut self, count: u64) {
        self.counter = self.counter.wrapping_add(count);
    }

    /// Next uniform in `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        to_unit(self.next_u64())
    }

    /// Next uniform in `(0, 1]`, safe to pass to `ln`.
    #[inline]
    pub fn uniform_open0(&mut self) -> f64 {
        1.0 - self.uniform()
    }

    /// A child stream under the same master seed.
    pub fn split(&self, child: u64) -> RngStream {
        RngStream::new(
            self.master_seed,
            mix64(self.stream_id ^ mix64(child.wrapping_add(GOLDEN))),
        )
    }
}

#[inline]
fn to_unit(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        let v = self.value_at(self.counter);
        self.counter = self.counter.wrapping_add(1);
        v
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        rand_core::impls::fill_bytes_via_next(self, dst)
    }
}
