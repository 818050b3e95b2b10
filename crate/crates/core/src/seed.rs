//! Deterministic random streams keyed by `(master seed, replication, purpose)`.
//!
//! The master seed is expanded into a ChaCha key; the replication index and
//! purpose tag select the ChaCha stream, so streams never overlap and do not
//! depend on the order in which replications are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// What a stream is used for. Each purpose gets its own stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum Purpose {
    Generate,
    Partition,
    Model,
    /// Free-form tag for callers with extra needs.
    Custom(u8),
}

impl Purpose {
    fn tag(self) -> u8 {
        match self {
            Purpose::Generate => 1,
            Purpose::Partition => 2,
            Purpose::Model => 3,
            Purpose::Custom(t) => t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SeedSpec {
    pub master_seed: u64,
}

impl SeedSpec {
    pub const fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    /// Replication indices must stay below 2^56.
    pub fn stream(&self, replication: u64, purpose: Purpose) -> ChaCha8Rng {
        debug_assert!(replication < 1 << 56);
        let mut key = [0u8; 32];
        let mut state = self.master_seed;
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream((replication << 8) | u64::from(purpose.tag()));
        rng
    }

    /// A 64-bit value derived from the stream, for seeding deterministic
    /// models.
    pub fn derive_u64(&self, replication: u64, purpose: Purpose) -> u64 {
        use rand::RngCore;
        self.stream(replication, purpose).next_u64()
    }
}

pub(crate) fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes the bit patterns of `x` with `seed` into `[0, 1)`.
pub(crate) fn hash_unit(seed: u64, x: &[f64]) -> f64 {
    let mut state = seed;
    let mut h = splitmix64(&mut state);
    for v in x {
        state ^= v.to_bits();
        h ^= splitmix64(&mut state);
    }
    (h >> 11) as f64 / (1u64 << 53) as f64
}
