//! Synthetic cohorts driven through the real protocol.
//!
//! A profile is a TOML document of categorical distributions:
//!
//! ```toml
//! seed_scores = [0.1, 0.2, 0.4, 0.2, 0.1]   # weights of scores 1..=5
//!
//! [likert]
//! default = [0, 0, 0, 1, 0]
//! [likert.styles.Simi]
//! Trust = [0, 0, 1, 0, 0]
//!
//! [trials.default]
//! r = [0, 0, 0, 1, 0]
//! diff = { values = [0], weights = [1] }
//! t_ms = { values = [5000], weights = [1] }
//! ```
//!
//! Per-style tables under `[trials.styles.<Style>]` and
//! `[likert.styles.<Style>]` override the defaults.

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Deserialize;

use crate::domain::{ExplanationStyle, MetricId};
use crate::error::{Error, Result};
use crate::eventlog::LogRecord;
use crate::protocol::{NextTask, Participant, Session, SessionEvent, StudyContext};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Categorical {
    pub values: Vec<i64>,
    pub weights: Vec<f64>,
}

impl Categorical {
    fn validate(&self, what: &str) -> Result<()> {
        if self.values.is_empty() || self.values.len() != self.weights.len() {
            return Err(Error::invalid(
                "simulation profile",
                format!("{what}: values and weights must be non-empty and of equal length"),
            ));
        }
        WeightedIndex::new(&self.weights).map_err(|e| Error::invalid("simulation profile", format!("{what}: {e}")))?;
        Ok(())
    }

    fn sample(&self, rng: &mut impl Rng) -> i64 {
        let idx = WeightedIndex::new(&self.weights).expect("validated");
        self.values[idx.sample(rng)]
    }

    /// Samples among the values accepted by `keep`, renormalizing; `None`
    /// when no admissible value has positive weight.
    fn sample_where(&self, rng: &mut impl Rng, keep: impl Fn(i64) -> bool) -> Option<i64> {
        let w: Vec<f64> = self
            .values
            .iter()
            .zip(&self.weights)
            .map(|(&v, &w)| if keep(v) { w } else { 0.0 })
            .collect();
        let idx = WeightedIndex::new(&w).ok()?;
        Some(self.values[idx.sample(rng)])
    }
}

/// Weights of Likert scores 1..=5.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(transparent)]
pub struct ScoreWeights(pub [f64; 5]);

impl ScoreWeights {
    fn categorical(&self) -> Categorical {
        Categorical {
            values: (1..=5).collect(),
            weights: self.0.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialProfile {
    pub r: ScoreWeights,
    /// Distribution of r − r′.
    pub diff: Categorical,
    pub t_ms: Categorical,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialProfiles {
    pub default: TrialProfile,
    #[serde(default)]
    pub styles: BTreeMap<String, TrialProfile>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LikertProfiles {
    pub default: ScoreWeights,
    #[serde(default)]
    pub styles: BTreeMap<String, BTreeMap<String, ScoreWeights>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationProfile {
    pub seed_scores: ScoreWeights,
    pub likert: LikertProfiles,
    pub trials: TrialProfiles,
}

/// Profile with every key resolved to a style or metric.
#[derive(Debug, Clone)]
pub struct ResolvedProfile {
    seed: Categorical,
    likert: BTreeMap<(ExplanationStyle, MetricId), Categorical>,
    trials: BTreeMap<ExplanationStyle, (Categorical, Categorical, Categorical)>,
}

impl SimulationProfile {
    pub fn from_toml(text: &str) -> Result<ResolvedProfile> {
        let p: SimulationProfile = toml::from_str(text).map_err(|e| Error::Parse {
            path: "<simulation profile>".into(),
            reason: e.to_string(),
        })?;
        p.resolve()
    }

    /// Every style gives `likert` on every metric and `r`, `r − r′`, `t_ms`
    /// with certainty.
    pub fn dirac(likert: i64, r: i64, diff: i64, t_ms: i64) -> Result<ResolvedProfile> {
        let one_hot = |s: i64| -> Result<ScoreWeights> {
            let mut w = [0.0; 5];
            *w.get_mut((s - 1) as usize).ok_or(Error::ScoreOutOfRange(s))? = 1.0;
            Ok(ScoreWeights(w))
        };
        let point = |v: i64| Categorical {
            values: vec![v],
            weights: vec![1.0],
        };
        SimulationProfile {
            seed_scores: one_hot(likert)?,
            likert: LikertProfiles {
                default: one_hot(likert)?,
                styles: BTreeMap::new(),
            },
            trials: TrialProfiles {
                default: TrialProfile {
                    r: one_hot(r)?,
                    diff: point(diff),
                    t_ms: point(t_ms),
                },
                styles: BTreeMap::new(),
            },
        }
        .resolve()
    }

    pub fn resolve(&self) -> Result<ResolvedProfile> {
        let seed = self.seed_scores.categorical();
        seed.validate("seed_scores")?;
        let mut likert_overrides: BTreeMap<(ExplanationStyle, MetricId), &ScoreWeights> = BTreeMap::new();
        for (style, metrics) in &self.likert.styles {
            let style: ExplanationStyle = style.parse()?;
            for (metric, w) in metrics {
                likert_overrides.insert((style, metric.parse()?), w);
            }
        }
        let mut trial_overrides: BTreeMap<ExplanationStyle, &TrialProfile> = BTreeMap::new();
        for (style, t) in &self.trials.styles {
            trial_overrides.insert(style.parse()?, t);
        }
        let mut likert = BTreeMap::new();
        let mut trials = BTreeMap::new();
        for style in ExplanationStyle::ALL {
            for metric in MetricId::ALL {
                let c = likert_overrides
                    .get(&(style, metric))
                    .copied()
                    .unwrap_or(&self.likert.default)
                    .categorical();
                c.validate(&format!("likert {style}/{metric}"))?;
                likert.insert((style, metric), c);
            }
            let t = trial_overrides.get(&style).copied().unwrap_or(&self.trials.default);
            let r = t.r.categorical();
            r.validate(&format!("trials {style} r"))?;
            t.diff.validate(&format!("trials {style} diff"))?;
            t.t_ms.validate(&format!("trials {style} t_ms"))?;
            if t.t_ms.values.iter().any(|&v| v < 0) {
                return Err(Error::invalid(
                    "simulation profile",
                    format!("trials {style} t_ms: negative time"),
                ));
            }
            trials.insert(style, (r, t.diff.clone(), t.t_ms.clone()));
        }
        Ok(ResolvedProfile { seed, likert, trials })
    }
}

/// Fixed synthetic demographics.
pub fn synthetic_participant(i: usize) -> Participant {
    const AGES: [&str; 4] = ["18-24", "25-34", "35-44", "45+"];
    Participant {
        age_band: AGES[i % AGES.len()].into(),
        gender: if i.is_multiple_of(2) { "female" } else { "male" }.into(),
        education: "undergraduate".into(),
        occupation: "student".into(),
        watching_frequency: "weekly".into(),
    }
}

/// Base of the deterministic server timestamps of simulated events.
pub const SIMULATED_EPOCH_MS: i64 = 1_700_000_000_000;

/// Runs `n` complete sessions and returns their events in log order.
pub fn simulate(ctx: &StudyContext, profile: &ResolvedProfile, n: usize, seed: u64) -> Result<Vec<LogRecord>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut log = Vec::with_capacity(n * crate::protocol::COMPLETE_SESSION_EVENTS);
    let mut clock = SIMULATED_EPOCH_MS;
    for i in 0..n {
        let id = format!("sim-{seed}-{i:05}");
        let session_seed: u64 = rng.gen();
        let (mut session, created) = Session::start(&ctx.dataset, id.clone(), synthetic_participant(i), session_seed)?;
        let mut push = |event: SessionEvent, session: &Session| {
            clock += 1000;
            log.push(LogRecord {
                seq: session.version,
                session_id: id.clone(),
                server_ts: clock,
                idempotency_key: None,
                event,
            });
        };
        push(created, &session);
        loop {
            let event = match session.next_task() {
                NextTask::Seed { task_index, .. } => {
                    let score = profile.seed.sample(&mut rng);
                    session.submit_seed_rating(ctx, task_index, score)?
                }
                NextTask::Explanation { trial_index, .. } => {
                    let (r, _, t) = &profile.trials[&session.trials[trial_index].style];
                    let (r, t) = (r.sample(&mut rng), t.sample(&mut rng));
                    session.record_explanation_rating(&ctx.config, trial_index, r, t)?
                }
                NextTask::Detail { trial_index, .. } => {
                    let trial = &session.trials[trial_index];
                    let r = i64::from(trial.r.expect("detail follows r").get());
                    let (_, diff, _) = &profile.trials[&trial.style];
                    let d = diff.sample_where(&mut rng, |d| (1..=5).contains(&(r - d))).unwrap_or(0);
                    session.record_detail_rating(trial_index, r - d)?
                }
                NextTask::Likert { style, metric, .. } => {
                    let score = profile.likert[&(style, metric)].sample(&mut rng);
                    session.submit_likert(style, metric, score)?
                }
                NextTask::Complete => break,
            };
            push(event, &session);
        }
    }
    Ok(log)
}
