//! Resonator set constructions.

mod discretize;
mod factored;
mod gal;
mod near_half;
mod params;
mod set;

pub use discretize::{additive_discretize, discretize_points, sandwich_factor, window_halfwidth};
pub use factored::{Divisors, FactoredInt};
pub use gal::{gal_divisor_set, gal_params_for};
pub use near_half::{
    bin1, bin2, bin2_ratio, block_threshold, cardinality_bound, check_support, enumerate_support,
    near_half_band, near_half_weight, prime_blocks, prune_count, support_from_band, BandGeometry,
    BandPrime, BlockCount, CardinalityBound,
};
pub use params::{default_a, default_alpha, ConstructionParams, DEFAULT_B};
pub use set::{Element, ResonatorSet, SetKind};
