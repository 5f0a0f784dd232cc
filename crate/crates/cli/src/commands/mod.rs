pub mod coupling;
pub mod influence;
pub mod prime;
pub mod reconstruct;

/// Standard-error multiplier of every Monte Carlo check.
pub const SIGMA_K: f64 = 4.0;
/// Tolerance of checks between closed forms.
pub const EXACT_TOL: f64 = 1e-12;
