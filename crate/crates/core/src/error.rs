use std::path::PathBuf;

use crate::domain::{FactorId, MetricId, MovieId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("score {0} outside the 1..=5 scale")]
    ScoreOutOfRange(i64),

    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {reason}")]
    Parse { path: PathBuf, reason: String },

    #[error("{rejected} of {total} rows rejected (limit is 10%); first problems: {sample}")]
    TooManyRejected {
        rejected: usize,
        total: usize,
        sample: String,
    },

    #[error("only {available} rated movies for {requested} clusters; lower n_clusters")]
    NotEnoughItems { available: usize, requested: usize },

    #[error("only {distinct} distinguishable item groups for {requested} clusters; lower n_clusters")]
    IndistinctItems { distinct: usize, requested: usize },

    #[error("vector lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },

    #[error("situation has no profiled contextual condition")]
    NoProfiledConditions,

    #[error("no candidate items left to recommend")]
    NoCandidates,

    #[error("movie {0} has no ratings")]
    NoRatings(MovieId),

    #[error("unknown movie {0}")]
    UnknownMovie(MovieId),

    #[error("no similar user has rated movie {0}")]
    NoNeighborRatings(MovieId),

    #[error("contextual factor {0} is not assigned")]
    MissingFactor(FactorId),

    #[error("user history is empty")]
    EmptyHistory,

    #[error("movie {0} has neither director nor actors")]
    NoContentAttributes(MovieId),

    #[error("factor {0} has no responses")]
    EmptyFactor(MetricId),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("weights sum to {0}, expected 1")]
    UnnormalizedWeights(f64),

    #[error("appraisal vector sums to {0}, expected 1")]
    UnnormalizedAppraisal(f64),

    #[error("no complete sessions")]
    NoCompleteSessions,

    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// Violations of the study session state machine.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProtocolError {
    #[error("operation requires phase {expected}, session is in {actual}")]
    WrongPhase {
        expected: &'static str,
        actual: &'static str,
    },
    #[error("{0} already answered")]
    Duplicate(String),
    #[error("{0} out of order")]
    OutOfOrder(String),
    #[error("{0} does not exist")]
    NoSuchTask(String),
    #[error("{0}")]
    Validation(String),
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            reason: reason.into(),
        }
    }
}
