use thiserror::Error;

/// Errors raised by the coupling, influence and reconstruction routines.
///
/// Every variant maps to a stable upper-case code (see [`Error::code`]) that
/// the command-line front-end reports verbatim.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("alphabets differ")]
    AlphabetMismatch,

    #[error("symbol {0:?} is not in the alphabet")]
    UnknownSymbol(String),

    #[error("symbol index {0} has zero probability")]
    ZeroProbabilitySymbol(usize),

    #[error("sample is empty")]
    EmptySample,

    #[error("alphabet has {size} symbols, need at least {needed}")]
    AlphabetTooSmall { size: usize, needed: usize },

    #[error("parameter {name} = {value} is out of range")]
    ParamOutOfRange { name: &'static str, value: f64 },

    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("invalid probability vector: {0}")]
    InvalidProbVec(String),

    #[error("invalid simplex point: {0}")]
    InvalidSimplexPoint(String),

    #[error("computation is intractable: {0}")]
    Intractable(String),

    #[error("operation not applicable: {0}")]
    NotApplicable(String),

    #[error("kernel has no evaluator")]
    NoEvaluator,

    #[error("coefficient {value} at index {index} is outside [0,1]")]
    InvalidCoefficient { index: usize, value: f64 },

    #[error("gamma_0 = 1, no positive floor exists")]
    NoFloor,

    #[error("2*delta_{index} = {value} >= 1")]
    DegenerateDelta { index: usize, value: f64 },

    #[error("process does not satisfy the priming condition")]
    PrimingViolated,

    #[error("calibration starved: acceptance rate {rate:e} after {attempts} attempts")]
    CalibrationStarved { rate: f64, attempts: u64 },

    #[error("average influences are not summable")]
    HprimeFails,

    #[error("no hit among {blocks} blocks (expected hit count {expected})")]
    NoHit { blocks: usize, expected: f64 },

    #[error("invalid process spec: {0}")]
    InvalidSpec(String),
}

impl Error {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::AlphabetMismatch => "ALPHABET_MISMATCH",
            Error::UnknownSymbol(_) => "UNKNOWN_SYMBOL",
            Error::ZeroProbabilitySymbol(_) => "ZERO_PROBABILITY_SYMBOL",
            Error::EmptySample => "EMPTY_SAMPLE",
            Error::AlphabetTooSmall { .. } => "ALPHABET_TOO_SMALL",
            Error::ParamOutOfRange { .. } => "PARAM_OUT_OF_RANGE",
            Error::InvalidAlphabet(_) => "INVALID_ALPHABET",
            Error::InvalidProbVec(_) => "INVALID_PROB_VEC",
            Error::InvalidSimplexPoint(_) => "INVALID_SIMPLEX_POINT",
            Error::Intractable(_) => "INTRACTABLE",
            Error::NotApplicable(_) => "NOT_APPLICABLE",
            Error::NoEvaluator => "NO_EVALUATOR",
            Error::InvalidCoefficient { .. } => "INVALID_COEFFICIENT",
            Error::NoFloor => "NO_FLOOR",
            Error::DegenerateDelta { .. } => "DEGENERATE_DELTA",
            Error::PrimingViolated => "PRIMING_VIOLATED",
            Error::CalibrationStarved { .. } => "CALIBRATION_STARVED",
            Error::HprimeFails => "HPRIME_FAILS",
            Error::NoHit { .. } => "NO_HIT",
            Error::InvalidSpec(_) => "INVALID_SPEC",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
