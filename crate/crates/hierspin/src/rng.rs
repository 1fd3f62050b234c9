//! Per-replica random streams.
//!
//! Every replica owns a ChaCha8 stream keyed by the master seed and selected
//! by the replica index, so streams never overlap and runs are reproducible
//! regardless of scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Master seed plus replica index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub replica_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, replica_index: u64) -> Self {
        Self {
            master_seed,
            replica_index,
        }
    }

    /// Seed for a derived sub-experiment (e.g. the coupled limit process).
    #[must_use]
    pub fn derive(&self, salt: u64) -> Self {
        let mixed = self
            .master_seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .rotate_left(17)
            ^ salt.wrapping_mul(0xD1B5_4A32_D192_ED03);
        Self {
            master_seed: mixed,
            replica_index: self.replica_index,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.replica_index);
        rng
    }
}
