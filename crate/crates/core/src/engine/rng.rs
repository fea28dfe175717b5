use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

pub type ZenoRng = Xoshiro256PlusPlus;

/// Recorded in every run so that results can be reproduced elsewhere.
pub const RNG_ALGORITHM: &str = "xoshiro256++";

/// Salt separating the noise stream from the jump/tau stream of the same
/// trajectory, so that adding noise does not move the jump points.
const NOISE_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// Generator for trajectory `index` of a run seeded with `seed`.
pub fn substream(seed: u64, index: u64) -> ZenoRng {
    ZenoRng::seed_from_u64(seed ^ index)
}

pub(crate) fn noise_substream(seed: u64, index: u64) -> ZenoRng {
    ZenoRng::seed_from_u64((seed ^ index).wrapping_add(NOISE_SALT))
}
