//! Deterministic seed derivation.
//!
//! Every stochastic operation in the toolkit takes an explicit seed, and
//! nested operations (kernel matrix cells, per-point forwards, per-epoch
//! gradients) derive sub-seeds from it with the SplitMix64 finalizer below.
//! The scheme is fixed so that identical inputs reproduce identical streams
//! on any platform.

/// SplitMix64 finalizer: a bijective 64-bit mix with good avalanche.
pub fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Derive a sub-seed from a base seed and an ordered list of tags.
///
/// Folding each tag through `mix64` keeps `derive(s, &[a, b])` distinct from
/// `derive(s, &[b, a])` and from `derive(s, &[a ^ b])`.
pub fn derive(seed: u64, parts: &[u64]) -> u64 {
    let mut acc = mix64(seed);
    for &p in parts {
        acc = mix64(acc ^ mix64(p));
    }
    acc
}

/// Derive a sub-seed that also depends on the bit patterns of a float slice.
///
/// Used when the sub-stream must be a pure function of a data point rather
/// than of its position, e.g. kernel rows against unseen test points.
pub fn derive_from_floats(seed: u64, tag: u64, values: &[f64]) -> u64 {
    let mut acc = mix64(seed ^ mix64(tag));
    for v in values {
        acc = mix64(acc ^ v.to_bits());
    }
    acc
}
