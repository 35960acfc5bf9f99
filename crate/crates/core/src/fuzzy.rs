//! Fuzzy synthetic evaluation of explanation styles.
//!
//! Questionnaire scores per evaluation factor become rows of a fuzzy mapping
//! matrix `R` (share of respondents giving each grade). A weight vector `W`
//! over the factors is composed with `R` into an appraisal vector `E` over the
//! grades, and the style is classified at the grade of maximal membership.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::domain::{AppraisalGrade, ExplanationStyle, MetricId, Score};
use crate::error::{Error, Result};
use crate::protocol::Session;
use crate::scalar::Scalar;

/// The ordered evaluation factors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FactorSet {
    factors: Vec<MetricId>,
}

impl FactorSet {
    pub fn new(factors: Vec<MetricId>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::invalid("factor set", "no factors"));
        }
        for (i, f) in factors.iter().enumerate() {
            if factors[..i].contains(f) {
                return Err(Error::invalid("factor set", format!("{f} listed twice")));
            }
        }
        Ok(FactorSet { factors })
    }

    pub fn factors(&self) -> &[MetricId] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn position(&self, m: MetricId) -> Option<usize> {
        self.factors.iter().position(|&f| f == m)
    }
}

impl Default for FactorSet {
    fn default() -> Self {
        FactorSet {
            factors: MetricId::ALL.to_vec(),
        }
    }
}

/// The ordered appraisal grades.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GradeSet {
    grades: Vec<AppraisalGrade>,
}

impl GradeSet {
    pub fn new(grades: Vec<AppraisalGrade>) -> Result<Self> {
        if grades.is_empty() || grades.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(
                "grade set",
                "grades must be non-empty and strictly ascending",
            ));
        }
        Ok(GradeSet { grades })
    }

    pub fn grades(&self) -> &[AppraisalGrade] {
        &self.grades
    }

    pub fn len(&self) -> usize {
        self.grades.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grades.is_empty()
    }
}

impl Default for GradeSet {
    fn default() -> Self {
        GradeSet {
            grades: AppraisalGrade::ALL.to_vec(),
        }
    }
}

fn sum<T: Scalar>(v: &[T]) -> T {
    v.iter().cloned().fold(T::zero(), |a, b| a + b)
}

/// Row-stochastic `s × p` membership matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzyMappingMatrix<T> {
    rows: Vec<Vec<T>>,
}

impl<T: Scalar> FuzzyMappingMatrix<T> {
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        let p = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || p == 0 {
            return Err(Error::Dimension("mapping matrix must be non-empty".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::Dimension(format!(
                    "row {i} has {} grades, expected {p}",
                    row.len()
                )));
            }
            if row.iter().any(|x| *x < T::zero() || *x > T::one()) {
                return Err(Error::invalid(
                    "mapping matrix",
                    format!("row {i} has an entry outside [0, 1]"),
                ));
            }
            let s = sum(row);
            if !s.approx_eq(&T::one()) {
                return Err(Error::invalid(
                    "mapping matrix",
                    format!("row {i} sums to {}", s.to_f64()),
                ));
            }
        }
        Ok(FuzzyMappingMatrix { rows })
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.rows[i]
    }

    pub fn n_factors(&self) -> usize {
        self.rows.len()
    }

    pub fn n_grades(&self) -> usize {
        self.rows[0].len()
    }
}

/// Non-negative factor weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightVector<T> {
    weights: Vec<T>,
}

impl<T: Scalar> WeightVector<T> {
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("weights", "no weights"));
        }
        if weights.iter().any(|w| *w < T::zero()) {
            return Err(Error::invalid("weights", "negative weight"));
        }
        let s = sum(&weights);
        if !s.approx_eq(&T::one()) {
            return Err(Error::UnnormalizedWeights(s.to_f64()));
        }
        Ok(WeightVector { weights })
    }

    pub fn equal(n: usize) -> Self {
        assert!(n > 0, "at least one factor");
        WeightVector {
            weights: vec![T::from_ratio(1, n); n],
        }
    }

    pub fn one_hot(n: usize, index: usize) -> Self {
        assert!(index < n, "index within the factor count");
        let mut weights = vec![T::zero(); n];
        weights[index] = T::one();
        WeightVector { weights }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Reads a weights document: `Metric = weight` pairs, unnamed factors
    /// weigh zero.
    ///
    /// ```toml
    /// Persuasiveness = 0.5
    /// Trust = 0.5
    /// ```
    pub fn from_toml(text: &str, factors: &FactorSet) -> Result<Self> {
        let doc: BTreeMap<String, f64> = toml::from_str(text).map_err(|e| Error::Parse {
            path: "<weights>".into(),
            reason: e.to_string(),
        })?;
        let mut weights = vec![T::zero(); factors.len()];
        for (name, w) in doc {
            let metric: MetricId = name.parse()?;
            let i = factors
                .position(metric)
                .ok_or_else(|| Error::invalid("weights", format!("{metric} is not an evaluation factor")))?;
            weights[i] = T::from_f64(w).ok_or_else(|| Error::invalid("weights", format!("{w} is not finite")))?;
        }
        WeightVector::new(weights)
    }
}

/// Overall appraisal over the grades.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AppraisalVector<T> {
    e: Vec<T>,
}

impl<T: Scalar> AppraisalVector<T> {
    /// Wraps published or externally computed memberships without checks.
    pub fn from_memberships(e: Vec<T>) -> Self {
        AppraisalVector { e }
    }

    pub fn memberships(&self) -> &[T] {
        &self.e
    }

    pub fn sum(&self) -> T {
        sum(&self.e)
    }
}

/// Rule combining weights and memberships into an appraisal vector.
pub trait CompositionOperator<T: Scalar> {
    fn compose(&self, w: &WeightVector<T>, r: &FuzzyMappingMatrix<T>) -> Result<AppraisalVector<T>>;
}

/// Weighted sum: `e_j = Σ_i w_i · r_ij` over the factors.
#[derive(Debug, Clone, Copy, Default)]
pub struct SumOperator;

impl<T: Scalar> CompositionOperator<T> for SumOperator {
    fn compose(&self, w: &WeightVector<T>, r: &FuzzyMappingMatrix<T>) -> Result<AppraisalVector<T>> {
        if w.len() != r.n_factors() {
            return Err(Error::Dimension(format!(
                "{} weights for {} factors",
                w.len(),
                r.n_factors()
            )));
        }
        let e = (0..r.n_grades())
            .map(|j| {
                w.as_slice()
                    .iter()
                    .zip(r.rows())
                    .fold(T::zero(), |acc, (wi, row)| acc + wi.clone() * row[j].clone())
            })
            .collect();
        Ok(AppraisalVector { e })
    }
}

pub fn compose<T: Scalar>(w: &WeightVector<T>, r: &FuzzyMappingMatrix<T>) -> Result<AppraisalVector<T>> {
    SumOperator.compose(w, r)
}

/// `r_ik` = share of factor `i`'s responses equal to grade `k`'s score.
pub fn build_mapping_matrix<T: Scalar>(
    factors: &FactorSet,
    responses: &BTreeMap<MetricId, Vec<Score>>,
    grades: &GradeSet,
) -> Result<FuzzyMappingMatrix<T>> {
    let rows = factors
        .factors()
        .iter()
        .map(|&f| {
            let scores = responses
                .get(&f)
                .filter(|s| !s.is_empty())
                .ok_or(Error::EmptyFactor(f))?;
            let n = scores.len();
            let row: Vec<T> = grades
                .grades()
                .iter()
                .map(|g| T::from_ratio(scores.iter().filter(|s| s.get() == g.ordinal()).count(), n))
                .collect();
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    FuzzyMappingMatrix::new(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification<T> {
    pub grade: AppraisalGrade,
    pub membership: T,
    /// Another grade shares the maximal membership.
    pub tie: bool,
}

/// Grade of maximal membership; ties go to the higher grade.
pub fn classify<T: Scalar>(e: &AppraisalVector<T>, grades: &GradeSet) -> Result<Classification<T>> {
    if e.e.is_empty() || e.e.len() != grades.len() {
        return Err(Error::Dimension(format!(
            "{} memberships for {} grades",
            e.e.len(),
            grades.len()
        )));
    }
    let mut best = 0;
    let mut tie = false;
    for (j, v) in e.e.iter().enumerate().skip(1) {
        if *v > e.e[best] {
            best = j;
            tie = false;
        } else if *v == e.e[best] {
            best = j;
            tie = true;
        }
    }
    Ok(Classification {
        grade: grades.grades()[best],
        membership: e.e[best].clone(),
        tie,
    })
}

/// Membership-weighted mean grade ordinal, comparable to a Likert mean.
pub fn implied_mean<T: Scalar>(e: &AppraisalVector<T>, grades: &GradeSet) -> Result<T> {
    implied_mean_within(e, grades, T::tolerance())
}

/// [`implied_mean`] accepting vectors whose sum is within `tolerance` of one,
/// e.g. memberships published at four decimals.
pub fn implied_mean_within<T: Scalar>(e: &AppraisalVector<T>, grades: &GradeSet, tolerance: T) -> Result<T> {
    if e.e.len() != grades.len() {
        return Err(Error::Dimension(format!(
            "{} memberships for {} grades",
            e.e.len(),
            grades.len()
        )));
    }
    let s = e.sum();
    if (s.clone() - T::one()).abs() > tolerance {
        return Err(Error::UnnormalizedAppraisal(s.to_f64()));
    }
    Ok(e.e.iter().zip(grades.grades()).fold(T::zero(), |acc, (v, g)| {
        acc + v.clone() * T::from_ratio(usize::from(g.ordinal()), 1)
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StyleEvaluation<T> {
    pub style: ExplanationStyle,
    pub matrix: FuzzyMappingMatrix<T>,
    pub appraisal: AppraisalVector<T>,
    pub classification: Classification<T>,
}

/// Likert scores of one style grouped by metric, over complete sessions.
pub fn style_responses(sessions: &[Session], style: ExplanationStyle) -> BTreeMap<MetricId, Vec<Score>> {
    let mut out: BTreeMap<MetricId, Vec<Score>> = BTreeMap::new();
    for s in sessions.iter().filter(|s| s.is_complete()) {
        for r in s.likert.iter().filter(|r| r.style == style) {
            out.entry(r.metric).or_default().push(r.score);
        }
    }
    out
}

pub fn evaluate_style<T: Scalar>(
    sessions: &[Session],
    style: ExplanationStyle,
    weights: &WeightVector<T>,
) -> Result<StyleEvaluation<T>> {
    let factors = FactorSet::default();
    let grades = GradeSet::default();
    let responses = style_responses(sessions, style);
    let matrix = build_mapping_matrix(&factors, &responses, &grades)?;
    let appraisal = compose(weights, &matrix)?;
    let classification = classify(&appraisal, &grades)?;
    Ok(StyleEvaluation {
        style,
        matrix,
        appraisal,
        classification,
    })
}
