//! Deterministic seed derivation for independent random streams.

/// SplitMix64 finalizer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a master seed and a tag path, so every
/// (cell, repetition, arm, ...) combination gets an independent stream
/// regardless of evaluation order.
pub(crate) fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    let mut state = splitmix64(master ^ 0xA076_1D64_78BD_642F);
    for &tag in tags {
        state = splitmix64(state ^ tag.wrapping_mul(0xE703_7ED1_A0B4_28DB));
    }
    state
}
