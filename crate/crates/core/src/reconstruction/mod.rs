//! Governing innovations, reconstruction of the present from them, and the
//! priming and successive-approximation machinery.

mod context;
mod domination;
mod pair;
mod priming;
mod schedule;
mod subsequence;

pub use context::DEFAULT_DEPTH;
pub use domination::{classify_tail, domination_p0, DeltaSequence, DominationChain, Recurrence};
pub use pair::{
    generate_pair, reconstruct, reconstruction_experiment, CoupledPath, ExperimentSetup,
    ReconstructionRow, ReconstructionTrace,
};
pub use priming::{
    build_priming_set, calibrate_thresholds, cell_frequency, cell_measure,
    conditional_block_accuracy, satisfies_priming, BlockAccuracy, Calibration, PrimingSet,
    CALIBRATION_CONFIDENCE, MIN_ACCEPTANCE,
};
pub use schedule::{
    build_schedule, certified_tail, common_beta, successive_approximation, successive_experiment,
    Block, BlockOutcome, LevelStats, Schedule, ScheduleLevel, SuccessiveReport, SuccessiveRun,
    WordLaws, MAX_BLOCKS,
};
pub use subsequence::{extract_subsequence, SubsequenceExtractor, SubsequenceReport};
