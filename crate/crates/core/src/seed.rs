//! Splittable seeding. Every randomized routine in this crate takes an
//! explicit [`Seed`]; child seeds are derived by mixing a tag into the
//! parent, so independent subcomputations draw from independent streams
//! and parallel schedules cannot change results.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A 64-bit seed that can be split into independent child seeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Seed(pub u64);

impl Seed {
    /// Derive the child seed for subcomputation `tag`.
    pub fn child(self, tag: u64) -> Seed {
        Seed(splitmix64(self.0 ^ splitmix64(tag.wrapping_add(0x9e37_79b9_7f4a_7c15))))
    }

    /// Counter-based generator for this seed.
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
