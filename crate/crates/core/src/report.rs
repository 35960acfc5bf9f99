//! Table renderings shared by the command-line tool and the HTTP service.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::analytics::{
    correlation_report, objective_report, significance_tests, subjective_report, CorrelationMatrix, CorrelationSource,
    Granularity, ObjectiveReport, SignificanceTest, SubjectiveReport,
};
use crate::domain::{AppraisalGrade, ExplanationStyle, MetricId};
use crate::error::{Error, Result};
use crate::fuzzy::{evaluate_style, implied_mean, GradeSet, WeightVector};
use crate::protocol::Session;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Table {
    /// Table 3: response time and r − r′.
    Objective,
    /// Table 4: questionnaire means.
    Subjective,
    /// Table 5: Spearman correlations between metrics.
    Correlation,
    /// Table 6: fuzzy synthetic evaluation.
    Fuzzy,
    /// ANOVA and Tukey HSD across styles.
    Significance,
}

impl FromStr for Table {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "3" | "objective" => Ok(Table::Objective),
            "4" | "subjective" => Ok(Table::Subjective),
            "5" | "correlation" => Ok(Table::Correlation),
            "6" | "fuzzy" => Ok(Table::Fuzzy),
            "anova" | "significance" => Ok(Table::Significance),
            _ => Err(Error::invalid(
                "table",
                format!("{s:?} is not one of 3, 4, 5, 6, anova"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            _ => Err(Error::invalid("format", format!("{s:?} is neither text nor json"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    pub weights: WeightVector<f64>,
    pub correlation_source: CorrelationSource,
    pub alpha: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            weights: WeightVector::equal(MetricId::ALL.len()),
            correlation_source: CorrelationSource::Likert,
            alpha: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzyRow {
    pub style: ExplanationStyle,
    /// Mapping matrix, one row per metric in [`MetricId::ALL`] order.
    pub matrix: Vec<Vec<f64>>,
    pub memberships: Vec<f64>,
    pub grade: AppraisalGrade,
    pub membership: f64,
    pub tie: bool,
    pub implied_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzyReport {
    pub weights: Vec<f64>,
    pub rows: Vec<FuzzyRow>,
}

pub fn fuzzy_report(sessions: &[Session], weights: &WeightVector<f64>) -> Result<FuzzyReport> {
    if !sessions.iter().any(Session::is_complete) {
        return Err(Error::NoCompleteSessions);
    }
    let grades = GradeSet::default();
    let rows = ExplanationStyle::REPORT_ORDER
        .iter()
        .map(|&style| {
            let ev = evaluate_style(sessions, style, weights)?;
            Ok(FuzzyRow {
                style,
                matrix: ev.matrix.rows().to_vec(),
                memberships: ev.appraisal.memberships().to_vec(),
                grade: ev.classification.grade,
                membership: ev.classification.membership,
                tie: ev.classification.tie,
                implied_mean: implied_mean(&ev.appraisal, &grades)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(FuzzyReport {
        weights: weights.as_slice().to_vec(),
        rows,
    })
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

/// Computes and renders one table.
pub fn render(table: Table, sessions: &[Session], opts: &AnalysisOptions, format: Format) -> Result<String> {
    Ok(match (table, format) {
        (Table::Objective, Format::Text) => objective_text(&objective_report(sessions)?),
        (Table::Objective, Format::Json) => json(&objective_report(sessions)?),
        (Table::Subjective, Format::Text) => subjective_text(&subjective_report(sessions)?),
        (Table::Subjective, Format::Json) => json(&subjective_report(sessions)?),
        (Table::Correlation, Format::Text) => correlation_text(&correlation_report(sessions, opts.correlation_source)?),
        (Table::Correlation, Format::Json) => json(&correlation_report(sessions, opts.correlation_source)?),
        (Table::Fuzzy, Format::Text) => fuzzy_text(&fuzzy_report(sessions, &opts.weights)?),
        (Table::Fuzzy, Format::Json) => json(&fuzzy_report(sessions, &opts.weights)?),
        (Table::Significance, Format::Text) => significance_text(&significance_tests(sessions, opts.alpha)?),
        (Table::Significance, Format::Json) => json(&significance_tests(sessions, opts.alpha)?),
    })
}

const STYLE_W: usize = 14;

pub fn objective_text(r: &ObjectiveReport) -> String {
    let mut out = String::from("Table 3. Efficiency, effectiveness and persuasiveness (averages)\n");
    let _ = writeln!(
        out,
        "{:<STYLE_W$} {:>10} {:>9} {:>9} {:>14} {:>6}",
        "Style", "Time (s)", "r - r'", "|r - r'|", "Persuasiveness", "n"
    );
    for row in &r.rows {
        let _ = writeln!(
            out,
            "{:<STYLE_W$} {:>10.2} {:>9.2} {:>9.2} {:>14} {:>6}",
            row.style.label(),
            row.mean_time_s,
            row.mean_diff,
            row.mean_abs_diff,
            format!("{:?}", row.persuasion).to_lowercase(),
            row.n_trials
        );
    }
    out.push_str("|r - r'| is a supplementary effectiveness figure.\n");
    out
}

pub fn subjective_text(r: &SubjectiveReport) -> String {
    let mut out = String::from("Table 4. Subjective evaluation (mean Likert score)\n");
    let _ = write!(out, "{:<STYLE_W$}", "Style");
    for m in MetricId::ALL {
        let _ = write!(out, " {:>14}", m.label());
    }
    out.push('\n');
    for row in &r.rows {
        let _ = write!(out, "{:<STYLE_W$}", row.style.label());
        for m in MetricId::ALL {
            match row.cells.get(&m) {
                Some(c) => {
                    let _ = write!(out, " {:>14.2}", c.mean);
                }
                None => {
                    let _ = write!(out, " {:>14}", "-");
                }
            }
        }
        out.push('\n');
    }
    out
}

pub fn correlation_text(matrices: &[CorrelationMatrix]) -> String {
    let mut out = String::from("Table 5. Spearman rank correlation of metrics (* p<0.05, ** p<0.01, *** p<0.001)\n");
    for m in matrices {
        let _ = writeln!(out, "\n{} (n = {})", m.style.label(), m.n);
        let _ = write!(out, "{:<STYLE_W$}", "");
        for b in MetricId::ALL {
            let _ = write!(out, " {:>14}", b.label());
        }
        out.push('\n');
        for a in MetricId::ALL {
            let _ = write!(out, "{:<STYLE_W$}", a.label());
            for b in MetricId::ALL {
                let cell = match m.get(a, b) {
                    Some(s) => format!("{:.3}{}", s.rho.expect("present cells carry rho"), s.stars()),
                    None => "-".to_owned(),
                };
                let _ = write!(out, " {cell:>14}");
            }
            out.push('\n');
        }
    }
    out
}

pub fn fuzzy_text(r: &FuzzyReport) -> String {
    let mut out = String::from("Table 6. Overall evaluation of explanation types ([x] marks the largest membership)\n");
    let _ = write!(out, "{:<STYLE_W$}", "Style");
    for g in AppraisalGrade::ALL {
        let _ = write!(out, " {:>10}", g.label());
    }
    let _ = writeln!(out, " {:>10} {:>7}", "Grade", "Mean");
    for row in &r.rows {
        let _ = write!(out, "{:<STYLE_W$}", row.style.label());
        let best = AppraisalGrade::ALL
            .iter()
            .position(|&g| g == row.grade)
            .expect("grade is one of the five");
        for (j, e) in row.memberships.iter().enumerate() {
            let cell = if j == best {
                format!("[{e:.4}]")
            } else {
                format!("{e:.4}")
            };
            let _ = write!(out, " {cell:>10}");
        }
        let grade = if row.tie {
            format!("{}*", row.grade.label())
        } else {
            row.grade.label().to_owned()
        };
        let _ = writeln!(out, " {grade:>10} {:>7.3}", row.implied_mean);
    }
    if r.rows.iter().any(|row| row.tie) {
        out.push_str("* tie for the largest membership, resolved toward the higher grade\n");
    }
    out
}

pub fn significance_text(tests: &[SignificanceTest]) -> String {
    let mut out = String::from("One-way ANOVA across explanation styles with Tukey HSD\n");
    for t in tests {
        let gran = match t.granularity {
            Granularity::Response => "per response",
            Granularity::Participant => "per participant",
        };
        let _ = writeln!(
            out,
            "\n{} ({gran}): F({}, {}) = {:.4}, p = {:.4}, critical q = {:.4}",
            t.measure, t.anova.df_between, t.anova.df_within, t.anova.f, t.anova.p_value, t.tukey.critical_q
        );
        let significant: Vec<String> = t
            .tukey
            .pairs
            .iter()
            .filter(|p| p.significant)
            .map(|p| {
                format!(
                    "{} vs {} (diff {:+.3}, p {:.4})",
                    t.styles[p.i].label(),
                    t.styles[p.j].label(),
                    p.mean_diff,
                    p.p_value
                )
            })
            .collect();
        if significant.is_empty() {
            out.push_str("  no significant pairs\n");
        } else {
            for s in significant {
                let _ = writeln!(out, "  {s}");
            }
        }
    }
    out
}
