use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph is disconnected: no path between `{from}` and `{to}`")]
    Disconnected { from: String, to: String },

    #[error("unknown point `{0}`")]
    UnknownPoint(String),

    #[error("invalid edge ({u}, {v}): {reason}")]
    InvalidEdge { u: String, v: String, reason: &'static str },

    #[error("metric violates {0}")]
    NotAMetric(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("conflicting observations for location `{0}`")]
    ConflictingObservation(String),

    #[error("cannot condition on an empty scenario set")]
    EmptyConditioning,

    #[error("degenerate metric: {0}")]
    DegenerateMetric(String),

    #[error("zero-length tour has no defined score")]
    ZeroLengthTour,

    #[error("no candidate tour has positive score")]
    NoProgress,

    #[error("planner anomaly: {0}")]
    Anomaly(String),

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error("rounding invariant violated: {0}")]
    Rounding(String),

    #[error("instance outside brute-force bounds: {0}")]
    TooLarge(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}
