//! Objective and subjective aggregates, metric correlations and significance
//! tests over collected sessions.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::{ExplanationStyle, MetricId};
use crate::error::{Error, Result};
use crate::protocol::Session;
use crate::stats::{one_way_anova, spearman, tukey_hsd, Anova, Spearman, TukeyHsd};

fn complete(sessions: &[Session]) -> impl Iterator<Item = &Session> {
    sessions.iter().filter(|s| s.is_complete())
}

fn require_complete(sessions: &[Session]) -> Result<()> {
    if complete(sessions).next().is_none() {
        return Err(Error::NoCompleteSessions);
    }
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Persuasion {
    Positive,
    Neutral,
    Negative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveRow {
    pub style: ExplanationStyle,
    pub n_trials: usize,
    /// Efficiency: mean time to give r, in seconds.
    pub mean_time_s: f64,
    /// Effectiveness and persuasiveness: mean of r − r′.
    pub mean_diff: f64,
    /// Supplementary effectiveness figure: mean of |r − r′|.
    pub mean_abs_diff: f64,
    pub persuasion: Persuasion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveReport {
    /// Report order; styles without trials are absent.
    pub rows: Vec<ObjectiveRow>,
}

impl ObjectiveReport {
    pub fn row(&self, style: ExplanationStyle) -> Option<&ObjectiveRow> {
        self.rows.iter().find(|r| r.style == style)
    }
}

/// Per-trial `(t in seconds, r − r′)` of complete trials, by style.
fn trial_values(sessions: &[Session]) -> BTreeMap<ExplanationStyle, Vec<(f64, f64)>> {
    let mut out: BTreeMap<ExplanationStyle, Vec<(f64, f64)>> = BTreeMap::new();
    for s in complete(sessions) {
        for t in &s.trials {
            if let (Some(ms), Some(d)) = (t.t_ms, t.diff()) {
                out.entry(t.style).or_default().push((ms as f64 / 1000.0, f64::from(d)));
            }
        }
    }
    out
}

pub fn objective_report(sessions: &[Session]) -> Result<ObjectiveReport> {
    require_complete(sessions)?;
    let values = trial_values(sessions);
    let rows = ExplanationStyle::REPORT_ORDER
        .iter()
        .filter_map(|style| {
            let v = values.get(style)?;
            let times: Vec<f64> = v.iter().map(|p| p.0).collect();
            let diffs: Vec<f64> = v.iter().map(|p| p.1).collect();
            let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
            let mean_diff = mean(&diffs);
            let persuasion = if mean_diff > 0.0 {
                Persuasion::Positive
            } else if mean_diff < 0.0 {
                Persuasion::Negative
            } else {
                Persuasion::Neutral
            };
            Some(ObjectiveRow {
                style: *style,
                n_trials: v.len(),
                mean_time_s: mean(&times),
                mean_diff,
                mean_abs_diff: mean(&abs),
                persuasion,
            })
        })
        .collect();
    Ok(ObjectiveReport { rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubjectiveCell {
    pub mean: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectiveRow {
    pub style: ExplanationStyle,
    /// Empty cells are absent.
    pub cells: BTreeMap<MetricId, SubjectiveCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectiveReport {
    pub rows: Vec<SubjectiveRow>,
}

impl SubjectiveReport {
    pub fn cell(&self, style: ExplanationStyle, metric: MetricId) -> Option<&SubjectiveCell> {
        self.rows.iter().find(|r| r.style == style)?.cells.get(&metric)
    }
}

pub fn subjective_report(sessions: &[Session]) -> Result<SubjectiveReport> {
    require_complete(sessions)?;
    let mut sums: BTreeMap<(ExplanationStyle, MetricId), (u64, usize)> = BTreeMap::new();
    for s in complete(sessions) {
        for l in &s.likert {
            let e = sums.entry((l.style, l.metric)).or_insert((0, 0));
            e.0 += u64::from(l.score.get());
            e.1 += 1;
        }
    }
    let rows = ExplanationStyle::REPORT_ORDER
        .iter()
        .map(|&style| SubjectiveRow {
            style,
            cells: MetricId::ALL
                .iter()
                .filter_map(|&m| {
                    let &(sum, n) = sums.get(&(style, m))?;
                    Some((
                        m,
                        SubjectiveCell {
                            mean: sum as f64 / n as f64,
                            n,
                        },
                    ))
                })
                .collect(),
        })
        .collect();
    Ok(SubjectiveReport { rows })
}

/// Where each metric's per-session value comes from when correlating.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationSource {
    /// The six questionnaire scores of the style.
    #[default]
    Likert,
    /// Efficiency from t, effectiveness from |r − r′| and persuasiveness from
    /// r − r′; the other three from the questionnaire.
    Mixed,
}

impl FromStr for CorrelationSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "likert" => Ok(CorrelationSource::Likert),
            "mixed" => Ok(CorrelationSource::Mixed),
            _ => Err(Error::invalid(
                "correlation source",
                format!("{s:?} is neither likert nor mixed"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    pub style: ExplanationStyle,
    pub n: usize,
    /// Indexed by [`MetricId::index`]; `None` where a metric is constant.
    pub cells: Vec<Vec<Option<Spearman<f64>>>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: MetricId, b: MetricId) -> Option<&Spearman<f64>> {
        self.cells[a.index()][b.index()].as_ref()
    }
}

fn metric_vectors(sessions: &[Session], style: ExplanationStyle, source: CorrelationSource) -> Vec<Vec<f64>> {
    let mut cols = vec![Vec::new(); MetricId::ALL.len()];
    for s in complete(sessions) {
        let Some(trial) = s.trials.iter().find(|t| t.style == style) else {
            continue;
        };
        let likert = |m: MetricId| {
            s.likert
                .iter()
                .find(|l| l.style == style && l.metric == m)
                .map(|l| l.score.as_f64())
        };
        let row: Option<Vec<f64>> = MetricId::ALL
            .iter()
            .map(|&m| match (source, m) {
                (CorrelationSource::Mixed, MetricId::Efficiency) => trial.t_ms.map(|t| t as f64 / 1000.0),
                (CorrelationSource::Mixed, MetricId::Effectiveness) => trial.diff().map(|d| f64::from(d.abs())),
                (CorrelationSource::Mixed, MetricId::Persuasiveness) => trial.diff().map(f64::from),
                _ => likert(m),
            })
            .collect();
        if let Some(row) = row {
            for (c, v) in cols.iter_mut().zip(row) {
                c.push(v);
            }
        }
    }
    cols
}

pub fn correlation_matrix(
    sessions: &[Session],
    style: ExplanationStyle,
    source: CorrelationSource,
) -> Result<CorrelationMatrix> {
    require_complete(sessions)?;
    let cols = metric_vectors(sessions, style, source);
    let n = cols[0].len();
    if n < 3 {
        return Err(Error::TooFewObservations { needed: 3, got: n });
    }
    let k = cols.len();
    let mut cells = vec![vec![None; k]; k];
    for i in 0..k {
        for j in i..k {
            let s = spearman(&cols[i], &cols[j])?;
            let s = if i == j && s.rho.is_some() {
                // a non-constant metric correlates perfectly with itself
                Spearman {
                    rho: Some(1.0),
                    p_value: Some(0.0),
                    n,
                }
            } else {
                s
            };
            if s.rho.is_some() {
                cells[i][j] = Some(s);
                cells[j][i] = Some(s);
            }
        }
    }
    Ok(CorrelationMatrix { style, n, cells })
}

pub fn correlation_report(sessions: &[Session], source: CorrelationSource) -> Result<Vec<CorrelationMatrix>> {
    ExplanationStyle::REPORT_ORDER
        .iter()
        .map(|&s| correlation_matrix(sessions, s, source))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    /// One observation per trial or per questionnaire answer.
    Response,
    /// One observation per session: the mean of its six questionnaire scores.
    Participant,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignificanceTest {
    pub measure: String,
    pub granularity: Granularity,
    /// Group order of the Tukey indices.
    pub styles: Vec<ExplanationStyle>,
    pub anova: Anova<f64>,
    pub tukey: TukeyHsd<f64>,
}

fn test_groups(measure: &str, granularity: Granularity, groups: Vec<Vec<f64>>, alpha: f64) -> Result<SignificanceTest> {
    Ok(SignificanceTest {
        measure: measure.to_owned(),
        granularity,
        styles: ExplanationStyle::REPORT_ORDER.to_vec(),
        anova: one_way_anova(&groups)?,
        tukey: tukey_hsd(&groups, alpha)?,
    })
}

/// One-way ANOVA across styles followed by Tukey HSD, for the response time,
/// r − r′, each questionnaire metric, and the per-participant questionnaire
/// mean.
pub fn significance_tests(sessions: &[Session], alpha: f64) -> Result<Vec<SignificanceTest>> {
    require_complete(sessions)?;
    let trials = trial_values(sessions);
    let by_style = |f: &dyn Fn(&(f64, f64)) -> f64| -> Vec<Vec<f64>> {
        ExplanationStyle::REPORT_ORDER
            .iter()
            .map(|s| trials.get(s).map_or_else(Vec::new, |v| v.iter().map(f).collect()))
            .collect()
    };
    let mut out = vec![
        test_groups("time_s", Granularity::Response, by_style(&|p| p.0), alpha)?,
        test_groups("r_minus_r_prime", Granularity::Response, by_style(&|p| p.1), alpha)?,
    ];
    for m in MetricId::ALL {
        let groups = ExplanationStyle::REPORT_ORDER
            .iter()
            .map(|&style| {
                complete(sessions)
                    .flat_map(|s| s.likert.iter())
                    .filter(|l| l.style == style && l.metric == m)
                    .map(|l| l.score.as_f64())
                    .collect()
            })
            .collect();
        out.push(test_groups(m.label(), Granularity::Response, groups, alpha)?);
    }
    let participant_means = ExplanationStyle::REPORT_ORDER
        .iter()
        .map(|&style| {
            complete(sessions)
                .map(|s| {
                    let v: Vec<f64> = s
                        .likert
                        .iter()
                        .filter(|l| l.style == style)
                        .map(|l| l.score.as_f64())
                        .collect();
                    mean(&v)
                })
                .collect()
        })
        .collect();
    out.push(test_groups(
        "likert_mean",
        Granularity::Participant,
        participant_means,
        alpha,
    )?);
    Ok(out)
}
