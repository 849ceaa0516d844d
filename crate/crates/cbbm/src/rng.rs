//! Deterministic random streams with hierarchical substream derivation.
//!
//! Every particle draws from its own generator whose 128-bit key is derived
//! from `(base seed, replicate index, lineage)`. Two properties follow:
//! identical seeds and derivation paths replay bit-identical draw sequences,
//! and replicate results are independent of scheduling order because no
//! particle ever touches another particle's stream.

use rand_pcg::rand_core::SeedableRng;
use rand_pcg::Pcg64Mcg;

/// The generator behind every stream. PCG64-MCG carries exactly the 128 bits
/// of a [`StreamKey`], costs nothing to construct and is comfortably strong
/// for Monte Carlo work.
pub type StreamRng = Pcg64Mcg;

/// 128-bit key material identifying one stream in the derivation tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey {
    hi: u64,
    lo: u64,
}

/// SplitMix64 finalizer; full-period 64-bit mixer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

impl StreamKey {
    /// Root of the derivation tree for a base seed.
    pub fn root(base_seed: u64) -> Self {
        Self { hi: mix64(base_seed), lo: mix64(base_seed ^ 0xA0761D6478BD642F) }
    }

    /// Derives the child stream with the given index. The two limbs mix the
    /// index through different constants so collisions across the tree need
    /// a simultaneous 128-bit coincidence.
    pub fn child(&self, index: u64) -> Self {
        let t = mix64(index ^ 0xE7037ED1A0B428DB);
        Self {
            hi: mix64(self.hi ^ t ^ self.lo.rotate_left(32)),
            lo: mix64(self.lo.wrapping_add(t).wrapping_add(self.hi)),
        }
    }

    /// Instantiates the generator for this key.
    pub fn rng(&self) -> StreamRng {
        let mut seed = [0u8; 16];
        seed[..8].copy_from_slice(&self.hi.to_le_bytes());
        seed[8..].copy_from_slice(&self.lo.to_le_bytes());
        Pcg64Mcg::from_seed(seed)
    }
}
