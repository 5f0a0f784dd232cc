//! Pointwise and average influence coefficients of a context kernel and the
//! series conditions built on them.

mod coefficients;
mod conditions;
mod eta;
mod profile;

pub use coefficients::{
    alpha_n, coefficients, coefficients_at, delta_n, gamma_n, Coefficients, Mode, MAX_IMAGE_SETS,
};
pub use conditions::{check_h, check_hprime, ConditionReport, TailDescriptor, Verdict};
pub use eta::{
    eta_n_exact, eta_n_mc, gamma0_floor, scenery_eta_enumerated, verify_gamma0_floor,
    vlmc_eta_bound, ContextLengthBound, EtaMcOptions, EtaMcResult, FloorCheck,
};
pub use profile::{influence_profile, InfluenceProfile, InfluenceRecord, McSettings, Violation};
