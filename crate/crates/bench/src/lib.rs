//! Benchmark-only crate; see `benches/core_ops.rs`.
//!
//! Shared fixtures live here so the bench target stays small.

use sunflower_core::family::{generate_extremal, generate_random_family};
use sunflower_core::SetFamily;

/// The stock subjects the benchmarks run against.
pub fn extremal_4_3() -> SetFamily {
    generate_extremal(4, 3).unwrap()
}

pub fn random_family(n: u32, k: u32, l: usize, seed: u64) -> SetFamily {
    generate_random_family(n, k, l, seed, false).unwrap()
}
