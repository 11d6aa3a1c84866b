//! Deterministic seed derivation.
//!
//! Every stochastic stage receives its own 64-bit seed derived from a root
//! seed and a stream id. Replicate r of a stage then derives a further
//! sub-seed from (stage seed, r). The derivation is a splitmix64 step, so
//! sub-streams are decorrelated and the whole run is reproducible from the
//! single root seed regardless of execution order or thread count.

/// Derives a child seed from a root seed and a stream id.
pub fn derive_seed(root: u64, stream: u64) -> u64 {
    splitmix64(root.wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
