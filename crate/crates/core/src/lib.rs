//! Context-aware movie recommendation, explanation rendering, the study
//! session protocol, and the analyses run over collected sessions.
//!
//! The fuzzy synthetic evaluation is generic over [`Scalar`]; the aliases
//! below fix it to `f64` (the default) or an exact rational.

pub mod analytics;
pub mod domain;
pub mod error;
pub mod eventlog;
pub mod explain;
pub mod fuzzy;
pub mod ingest;
pub mod protocol;
pub mod recommender;
pub mod report;
pub mod scalar;
pub mod setup;
pub mod simulate;
pub mod stats;
pub mod synthetic;

pub use error::{Error, ProtocolError, Result};
pub use scalar::Scalar;

pub type Rational64 = num_rational::Ratio<i64>;

pub type MappingMatrix = fuzzy::FuzzyMappingMatrix<f64>;
pub type Weights = fuzzy::WeightVector<f64>;
pub type Appraisal = fuzzy::AppraisalVector<f64>;
pub type ExactMappingMatrix = fuzzy::FuzzyMappingMatrix<Rational64>;
pub type ExactWeights = fuzzy::WeightVector<Rational64>;
pub type ExactAppraisal = fuzzy::AppraisalVector<Rational64>;
