//! Fixtures shared by the kernel benchmarks in `benches/`.

use resonance_core::construct::{enumerate_support, gal_divisor_set};
use resonance_core::{sieve_primes, ConstructionParams, PrimeTable, ResonatorSet};

pub fn table() -> PrimeTable {
    sieve_primes(1_000_000).expect("sieve")
}

/// The Gál divisor set for primes up to 13 with exponents below 3.
pub fn gal_set(table: &PrimeTable) -> ResonatorSet {
    gal_divisor_set(table, 13.0, 3, 1 << 20).expect("gal set")
}

/// A near-half support at `N = 10^4`, `sigma = 0.6`.
pub fn near_half_set(table: &PrimeTable, budget: usize) -> ResonatorSet {
    let p = ConstructionParams::near_half_with_n(1e8, 10_000, 0.6);
    enumerate_support(table, &p, budget).expect("near-half support")
}
