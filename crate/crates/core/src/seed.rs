//! Deterministic derivation of sub-seeds from a base seed.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the stream identified by `tags`, independent of evaluation order.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(mix(base), |s, &t| mix(s ^ mix(t.wrapping_add(GOLDEN))))
}

/// Stream tags.
pub mod stream {
    pub const SYNTH: u64 = 1;
    pub const SYNTH_BREAK: u64 = 2;
    pub const GLOBAL_MC: u64 = 3;
    pub const ROLLING_MC: u64 = 4;
    pub const ROLLING_FULL: u64 = 5;
}
