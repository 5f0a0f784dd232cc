//! Context kernels for the processes under study, with finite-state lifts,
//! exact stationary word laws and path samplers.

mod kernel;
mod lift;
pub mod rwrs;
mod spec;
mod stationary;
mod tree;
mod word;

pub use kernel::{
    eval_kernel, misread_rwrs, parity_chain, renewed_rwrs, rwrs, sample_path, ClosedForm,
    ContextKernel, EtaForm, MemoryKind, SampleOptions, MAX_LIFT_STATES,
};
pub use lift::{Lift, STATIONARY_TOL};
pub use rwrs::{rwrs_admissible, RenewedTrace};
pub use spec::ProcessSpec;
pub use stationary::{
    stationary_word_law, vlmc_context_length, ContextLength, StationaryLaw, MAX_WORDS,
};
pub use tree::{ContextTree, TreeSpec};
pub use word::Word;

pub(crate) use word::for_each_word;
