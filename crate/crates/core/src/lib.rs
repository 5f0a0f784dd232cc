//! Global couplings of probability vectors through the uniform simplex,
//! influence coefficients of stationary finite-alphabet processes, and
//! reconstruction of a process from its innovations.
//!
//! The crate is organized in four layers:
//!
//! - [`simplex`]: the coupling `g(U, p)`, its inverse construction of
//!   innovations, and exact / Monte Carlo mismatch probabilities.
//! - [`process`]: context kernels `p(.|x)` for the example processes, their
//!   finite Markov lifts and stationary word laws.
//! - [`influence`]: the pointwise coefficients `gamma_n`, `delta_n`,
//!   `alpha_n`, the average influence `eta_n`, and the summability conditions.
//! - [`reconstruction`]: coupled innovations, approximations started in the
//!   past, the domination chain, priming sets and the block schedule.

pub mod error;
pub mod influence;
pub mod process;
pub mod reconstruction;
pub mod rng;
pub mod simplex;
pub mod stats;

pub use error::{Error, Result};
pub use rng::Streams;
pub use simplex::{Alphabet, Estimate, MismatchEstimate, ProbVec, SimplexPoint};
