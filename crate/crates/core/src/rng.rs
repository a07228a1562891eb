//! Reproducible randomness.
//!
//! Every random draw in the crate comes from ChaCha8 (a 64-bit-counter,
//! stream-addressable generator from `rand_chacha`). A root seed is split per
//! component by selecting a distinct ChaCha stream, so sensor noise and PV
//! siting never share a sequence and adding draws to one component cannot
//! perturb another. ChaCha output is specified bit-for-bit and therefore
//! identical on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    SensorNoise,
    Siting,
    /// Per-scenario seed derivation in sweeps.
    Scenario(u32),
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::SensorNoise => 1,
            Stream::Siting => 2,
            Stream::Scenario(k) => 0x1_0000_0000 + k as u64,
        }
    }
}

pub fn seeded(root: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    rng.set_stream(stream.id());
    rng
}

/// Derives a child seed for component `stream` from `root`.
pub fn derive_seed(root: u64, stream: Stream) -> u64 {
    use rand::RngCore;
    seeded(root, stream).next_u64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn streams_are_independent_and_stable() {
        let a = seeded(7, Stream::SensorNoise).next_u64();
        let b = seeded(7, Stream::Siting).next_u64();
        assert_ne!(a, b);
        assert_eq!(a, seeded(7, Stream::SensorNoise).next_u64());
        assert_ne!(derive_seed(7, Stream::Scenario(0)), derive_seed(7, Stream::Scenario(1)));
    }
}
