//! Shared vocabulary: movies, contextual factors and situations, ratings,
//! explanation styles, evaluation metrics and appraisal grades.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }
    };
}

string_id!(
    /// Opaque user identifier.
    UserId
);
string_id!(
    /// Opaque movie identifier, unique within a catalog.
    MovieId
);
string_id!(
    /// One value of a contextual factor, e.g. `sunny` for Weather.
    ConditionId
);

/// A rating on the 1..=5 scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "u8")]
pub struct Score(u8);

impl Score {
    pub const MIN: u8 = 1;
    pub const MAX: u8 = 5;

    pub fn new(value: i64) -> Result<Self> {
        if (i64::from(Self::MIN)..=i64::from(Self::MAX)).contains(&value) {
            Ok(Score(value as u8))
        } else {
            Err(Error::ScoreOutOfRange(value))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0)
    }
}

impl TryFrom<i64> for Score {
    type Error = Error;
    fn try_from(v: i64) -> Result<Self> {
        Score::new(v)
    }
}

impl From<Score> for u8 {
    fn from(s: Score) -> u8 {
        s.0
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Movie {
    pub movie_id: MovieId,
    pub title: String,
    #[serde(default)]
    pub director: String,
    #[serde(default)]
    pub actors: Vec<String>,
    #[serde(default)]
    pub genres: Vec<String>,
    #[serde(default)]
    pub year: Option<i32>,
}

impl Movie {
    pub fn new(movie_id: impl Into<MovieId>, title: impl Into<String>) -> Result<Self> {
        let title = title.into();
        if title.trim().is_empty() {
            return Err(Error::invalid("movie", "title must not be empty"));
        }
        Ok(Movie {
            movie_id: movie_id.into(),
            title,
            director: String::new(),
            actors: Vec::new(),
            genres: Vec::new(),
            year: None,
        })
    }
}

impl From<String> for MovieId {
    fn from(s: String) -> Self {
        MovieId(s)
    }
}

/// A contextual factor. The four study factors are named; anything else a
/// dataset carries is kept as [`FactorId::Other`] and passed through.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FactorId {
    PhysicalWellness,
    Mood,
    Location,
    Weather,
    Other(String),
}

impl FactorId {
    /// The factors the study keeps, in schema order.
    pub const STUDY: [FactorId; 4] = [
        FactorId::PhysicalWellness,
        FactorId::Mood,
        FactorId::Location,
        FactorId::Weather,
    ];

    pub fn is_study(&self) -> bool {
        !matches!(self, FactorId::Other(_))
    }

    pub fn name(&self) -> &str {
        match self {
            FactorId::PhysicalWellness => "PhysicalWellness",
            FactorId::Mood => "Mood",
            FactorId::Location => "Location",
            FactorId::Weather => "Weather",
            FactorId::Other(s) => s,
        }
    }
}

impl fmt::Display for FactorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FactorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_alphanumeric())
            .flat_map(char::to_lowercase)
            .collect();
        if key.is_empty() {
            return Err(Error::invalid("factor", "empty factor name"));
        }
        Ok(match key.as_str() {
            "physicalwellness" | "physical" => FactorId::PhysicalWellness,
            "mood" => FactorId::Mood,
            "location" => FactorId::Location,
            "weather" => FactorId::Weather,
            _ => FactorId::Other(s.trim().to_owned()),
        })
    }
}

impl Serialize for FactorId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for FactorId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextualFactor {
    pub factor_id: FactorId,
    pub vocabulary: Vec<ConditionId>,
}

impl ContextualFactor {
    pub fn new<I, S>(factor_id: FactorId, vocabulary: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let vocabulary: Vec<ConditionId> = vocabulary.into_iter().map(|c| ConditionId(c.into())).collect();
        if vocabulary.is_empty() {
            return Err(Error::invalid("factor", format!("{factor_id} has an empty vocabulary")));
        }
        for (i, c) in vocabulary.iter().enumerate() {
            if vocabulary[..i].contains(c) {
                return Err(Error::invalid(
                    "factor",
                    format!("{factor_id} lists condition {c} twice"),
                ));
            }
        }
        Ok(ContextualFactor { factor_id, vocabulary })
    }

    pub fn contains(&self, condition: &ConditionId) -> bool {
        self.vocabulary.contains(condition)
    }
}

/// Default vocabularies for the four study factors, following the CoMoDa
/// documentation. A schema file overrides them.
pub fn default_study_factors() -> Vec<ContextualFactor> {
    let table: [(FactorId, &[&str]); 4] = [
        (FactorId::PhysicalWellness, &["healthy", "ill"]),
        (FactorId::Mood, &["positive", "neutral", "negative"]),
        (FactorId::Location, &["home", "public", "friends_house"]),
        (FactorId::Weather, &["sunny", "rainy", "stormy", "snowy", "cloudy"]),
    ];
    table
        .into_iter()
        .map(|(id, vocab)| ContextualFactor::new(id, vocab.iter().copied()).expect("static vocabulary"))
        .collect()
}

/// Assignment of one condition per contextual factor. Equality is structural.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ContextualSituation {
    pub assignments: BTreeMap<FactorId, ConditionId>,
}

impl ContextualSituation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I, C>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (FactorId, C)>,
        C: Into<String>,
    {
        ContextualSituation {
            assignments: pairs.into_iter().map(|(f, c)| (f, ConditionId(c.into()))).collect(),
        }
    }

    pub fn with(mut self, factor: FactorId, condition: impl Into<String>) -> Self {
        self.assignments.insert(factor, ConditionId(condition.into()));
        self
    }

    pub fn get(&self, factor: &FactorId) -> Option<&ConditionId> {
        self.assignments.get(factor)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FactorId, &ConditionId)> {
        self.assignments.iter()
    }

    /// Only the four study factors.
    pub fn study_only(&self) -> Self {
        ContextualSituation {
            assignments: self
                .assignments
                .iter()
                .filter(|(f, _)| f.is_study())
                .map(|(f, c)| (f.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn has_all_study_factors(&self) -> bool {
        FactorId::STUDY.iter().all(|f| self.assignments.contains_key(f))
    }

    pub fn require_study_factors(&self) -> Result<()> {
        match FactorId::STUDY.iter().find(|f| !self.assignments.contains_key(f)) {
            Some(f) => Err(Error::MissingFactor(f.clone())),
            None => Ok(()),
        }
    }

    /// Every assigned condition of a schema factor must belong to that
    /// factor's vocabulary. Factors missing from the schema pass through.
    pub fn validate(&self, factors: &[ContextualFactor]) -> Result<()> {
        for (f, c) in &self.assignments {
            if let Some(schema) = factors.iter().find(|s| &s.factor_id == f) {
                if !schema.contains(c) {
                    return Err(Error::invalid(
                        "situation",
                        format!("condition {c} is not in the vocabulary of {f}"),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextualRating {
    pub user_id: UserId,
    pub movie_id: MovieId,
    pub score: Score,
    pub situation: ContextualSituation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ExplanationStyle {
    Avg,
    Per,
    Simu,
    Simi,
    Content,
    ContextAware,
}

impl ExplanationStyle {
    pub const ALL: [ExplanationStyle; 6] = [
        ExplanationStyle::Avg,
        ExplanationStyle::Per,
        ExplanationStyle::Simu,
        ExplanationStyle::Simi,
        ExplanationStyle::Content,
        ExplanationStyle::ContextAware,
    ];

    /// Row order used by the report tables (alphabetical by label).
    pub const REPORT_ORDER: [ExplanationStyle; 6] = [
        ExplanationStyle::Avg,
        ExplanationStyle::Content,
        ExplanationStyle::ContextAware,
        ExplanationStyle::Per,
        ExplanationStyle::Simi,
        ExplanationStyle::Simu,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ExplanationStyle::Avg => "Avg",
            ExplanationStyle::Per => "Per",
            ExplanationStyle::Simu => "Simu",
            ExplanationStyle::Simi => "Simi",
            ExplanationStyle::Content => "Content",
            ExplanationStyle::ContextAware => "Context-aware",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ExplanationStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ExplanationStyle {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_alphanumeric())
            .flat_map(char::to_lowercase)
            .collect();
        ExplanationStyle::ALL
            .into_iter()
            .find(|st| {
                st.label()
                    .chars()
                    .filter(|c| c.is_alphanumeric())
                    .flat_map(char::to_lowercase)
                    .eq(key.chars())
            })
            .ok_or_else(|| Error::invalid("explanation style", s.to_owned()))
    }
}

/// Explanation goals, in the column order of the questionnaire tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MetricId {
    Efficiency,
    Effectiveness,
    Persuasiveness,
    Satisfaction,
    Trust,
    Transparency,
}

impl MetricId {
    pub const ALL: [MetricId; 6] = [
        MetricId::Efficiency,
        MetricId::Effectiveness,
        MetricId::Persuasiveness,
        MetricId::Satisfaction,
        MetricId::Trust,
        MetricId::Transparency,
    ];

    pub fn label(self) -> &'static str {
        match self {
            MetricId::Efficiency => "Efficiency",
            MetricId::Effectiveness => "Effectiveness",
            MetricId::Persuasiveness => "Persuasiveness",
            MetricId::Satisfaction => "Satisfaction",
            MetricId::Trust => "Trust",
            MetricId::Transparency => "Transparency",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for MetricId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        MetricId::ALL
            .into_iter()
            .find(|m| m.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::invalid("metric", s.to_owned()))
    }
}

/// Linguistic appraisal grades, ordinal and aligned with Likert scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AppraisalGrade {
    VeryPoor = 1,
    Poor = 2,
    Medium = 3,
    Good = 4,
    VeryGood = 5,
}

impl AppraisalGrade {
    pub const ALL: [AppraisalGrade; 5] = [
        AppraisalGrade::VeryPoor,
        AppraisalGrade::Poor,
        AppraisalGrade::Medium,
        AppraisalGrade::Good,
        AppraisalGrade::VeryGood,
    ];

    pub fn ordinal(self) -> u8 {
        self as u8
    }

    pub fn label(self) -> &'static str {
        match self {
            AppraisalGrade::VeryPoor => "Very poor",
            AppraisalGrade::Poor => "Poor",
            AppraisalGrade::Medium => "Medium",
            AppraisalGrade::Good => "Good",
            AppraisalGrade::VeryGood => "Very good",
        }
    }
}

impl fmt::Display for AppraisalGrade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Crisp link between a questionnaire score and the grade with the same
/// ordinal value.
pub fn grade_of_score(score: i64) -> Result<AppraisalGrade> {
    let s = Score::new(score)?;
    Ok(AppraisalGrade::ALL[usize::from(s.get()) - 1])
}
