use thiserror::Error;

/// Errors produced across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("index {index} is out of range for this weight sequence (available: {available})")]
    IndexOutOfRange { index: String, available: String },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("horizon exhausted after {built} of {requested} schedule entries")]
    HorizonExhausted {
        built: usize,
        requested: usize,
        partial: Box<crate::weights::UbarSchedule>,
    },

    #[error("adjacency matrix is not aperiodic and irreducible: {0}")]
    NotAperiodicIrreducible(String),

    #[error("invalid adjacency matrix: {0}")]
    InvalidAdjacency(String),

    #[error("word is not admissible: {0}")]
    Inadmissible(String),

    #[error("enumeration of {requested} words exceeds the cap of {cap}")]
    CapExceeded { requested: f64, cap: u64 },

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("position {position} with depth {depth} runs past word length {len}")]
    OutOfRange {
        position: usize,
        depth: usize,
        len: usize,
    },

    #[error("|q|*||phi|| = {0} exceeds the overflow guard 700")]
    OverflowGuard(f64),

    #[error("t = {t} lies outside the spectrum domain [{lo}, {hi}]")]
    Domain { t: f64, lo: f64, hi: f64 },

    #[error("could not bracket the Legendre minimiser for t = {0}")]
    Bracket(f64),

    #[error("word family below target size: {family} has e^{achieved:.4} words, target e^{target:.4}")]
    CardinalityShortfall {
        family: &'static str,
        achieved: f64,
        target: f64,
    },

    #[error("target {t} is not bracketed by the family integrals ({at_zero}, {at_one})")]
    PBracket { t: f64, at_zero: f64, at_one: f64 },

    #[error("word has zero mass under the measure: {0}")]
    ZeroMass(String),

    #[error("schedule too short: covers {covered} symbols, {requested} requested")]
    ScheduleTooShort { covered: u64, requested: u64 },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
