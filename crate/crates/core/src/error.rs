use thiserror::Error;

/// Every way an engine operation can fail.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interval bounds [{lower}; {upper}]: bounds must be finite with upper >= lower")]
    InvalidBounds { lower: f64, upper: f64 },

    #[error("[{new_lower}; {new_upper}] is not contained in [{old_lower}; {old_upper}]")]
    NotAContraction {
        old_lower: f64,
        old_upper: f64,
        new_lower: f64,
        new_upper: f64,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("unknown id `{0}`")]
    UnknownId(String),

    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    #[error("inconsistent relation on `{criterion}`: closure reverses strict preference `{preferred}` over `{other}`")]
    InconsistentRelation {
        criterion: String,
        preferred: String,
        other: String,
    },

    #[error("wrong structure variant: expected {expected}, found {found}")]
    WrongVariant {
        expected: &'static str,
        found: &'static str,
    },

    #[error("`{0}` is in the Pareto set, nothing eliminated it")]
    NotEliminated(String),

    #[error("superiority degree of `{0}` against itself is undefined")]
    SamePair(String),

    #[error("contradictory information on `{criterion}`: `{preferred}` over `{other}` would downgrade an existing strict preference")]
    ContradictoryInformation {
        criterion: String,
        preferred: String,
        other: String,
    },

    #[error("stale sequence number: expected {expected}, got {got}")]
    StaleSequence { expected: u64, got: u64 },

    #[error("refinement log is empty")]
    EmptyLog,

    #[error("log replay failed at event {sequence}: {source}")]
    Replay {
        sequence: u64,
        #[source]
        source: Box<Error>,
    },

    /// An engine invariant failed. Never caused by user input.
    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
