//! Keyed splitmix64 hashing and streams.
//!
//! Tie-break weights and fuzzed instances both come from this family, so a
//! run is reproducible from its seed alone on every platform.

use crate::instance::{BidderId, Bundle};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// The splitmix64 output function applied to `z + gamma`.
pub fn splitmix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a sequence of 64-bit words into a keyed state.
#[derive(Debug, Clone, Copy)]
pub struct KeyedHasher {
    state: u64,
}

impl KeyedHasher {
    pub fn new(key: u64) -> Self {
        KeyedHasher { state: key }
    }

    pub fn word(&mut self, w: u64) -> &mut Self {
        self.state = splitmix64(self.state ^ w);
        self
    }

    /// Length-prefixed bytes, zero-padded to whole little-endian words.
    pub fn bytes(&mut self, bytes: &[u8]) -> &mut Self {
        self.word(bytes.len() as u64);
        for chunk in bytes.chunks(8) {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            self.word(u64::from_le_bytes(buf));
        }
        self
    }

    pub fn finish(&self) -> u64 {
        self.state
    }
}

/// The pseudo-random weight of bidder `n` receiving `bundle` under `seed`.
///
/// Input words: the bidder id, the number of goods in the bundle, then each
/// good's identifier bytes (length-prefixed) in canonical order.
pub fn bundle_weight(seed: u64, bidder: BidderId, bundle: &Bundle) -> u64 {
    let mut h = KeyedHasher::new(seed);
    h.word(u64::from(bidder.get())).word(bundle.len() as u64);
    for good in bundle.iter() {
        h.bytes(good.as_str().as_bytes());
    }
    h.finish()
}

/// Sequential splitmix64 stream.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        let out = splitmix64(self.state);
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        out
    }

    /// Uniform draw from `0..bound` (bound > 0), by rejection.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % bound;
            }
        }
    }

    pub fn coin(&mut self) -> bool {
        self.next_u64() >> 63 == 1
    }
}
