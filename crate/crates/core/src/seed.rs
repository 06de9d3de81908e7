//! Seed splitting for independent, reproducible random streams.
//!
//! Every trial of an experiment and every sampling line within a trial gets
//! its own seed: `derive_seed(base, index) = base ^ splitmix64(index)`.
//! Results therefore do not depend on the order in which trials run.

/// One round of the SplitMix64 output function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for stream `index` derived from `base`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    base ^ splitmix64(index)
}
