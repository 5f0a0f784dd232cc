//! Simplex geometry, the global coupling `g(., p)` and mismatch probabilities.

mod alphabet;
mod coupling;
mod estimate;
mod prob;

pub use alphabet::Alphabet;
pub use coupling::{
    barycentric_map, classify, encode_innovation, mismatch_exact, mismatch_mc, near_optimal_pair,
    sample_uniform_simplex, total_variation, uniform_minus_one,
};
pub use estimate::{Estimate, MismatchEstimate};
pub use prob::{ProbVec, SimplexPoint, NORMALIZATION_TOL};

pub(crate) use coupling::{barycentric_raw, classify_raw, fill_uniform, tv_raw};
