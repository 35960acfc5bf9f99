//! The four-step within-subject study session as an event-sourced state
//! machine.
//!
//! Every operation first decides an event against the current state and then
//! applies it, so replaying a session's events through [`Session::replay`]
//! rebuilds the same value. The recommendation step is the only one that
//! needs the dataset; its outcome travels inside the event that completes the
//! seed ratings, which keeps replay free of recommender state.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{
    ContextualRating, ContextualSituation, ExplanationStyle, FactorId, MetricId, Movie, MovieId, Score, UserId,
};
use crate::error::{Error, ProtocolError, Result};
use crate::explain::{explain, explain_or_fallback, similar_users, ExplainContext, Explanation, PhraseTable};
use crate::ingest::Dataset;
use crate::recommender::{popularity_ranking, RecommenderModel};

pub const SEED_TASKS: usize = 12;
pub const TRIALS: usize = 6;
pub const LIKERT_CELLS: usize = TRIALS * MetricId::ALL.len();
/// Events in a complete session: creation, seeds, r, r′ and the questionnaire.
pub const COMPLETE_SESSION_EVENTS: usize = 1 + SEED_TASKS + 2 * TRIALS + LIKERT_CELLS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    SeedRating,
    Trials,
    Questionnaire,
    Complete,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::SeedRating => "SeedRating",
            Phase::Trials => "Trials",
            Phase::Questionnaire => "Questionnaire",
            Phase::Complete => "Complete",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Participant {
    pub age_band: String,
    pub gender: String,
    pub education: String,
    pub occupation: String,
    pub watching_frequency: String,
}

impl Participant {
    pub fn validate(&self) -> Result<(), ProtocolError> {
        let fields = [
            ("age_band", &self.age_band),
            ("gender", &self.gender),
            ("education", &self.education),
            ("occupation", &self.occupation),
            ("watching_frequency", &self.watching_frequency),
        ];
        match fields.iter().find(|(_, v)| v.trim().is_empty()) {
            Some((name, _)) => Err(ProtocolError::Validation(format!("demographics field {name} is empty"))),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedTask {
    pub movie_id: MovieId,
    pub situation: ContextualSituation,
    pub score: Option<Score>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub style: ExplanationStyle,
    pub movie_id: MovieId,
    pub explanation: Explanation,
    pub r: Option<Score>,
    pub t_ms: Option<u64>,
    pub r_prime: Option<Score>,
}

impl TrialRecord {
    pub fn is_complete(&self) -> bool {
        self.r.is_some() && self.r_prime.is_some()
    }

    /// `r − r′` once both ratings exist.
    pub fn diff(&self) -> Option<i32> {
        Some(i32::from(self.r?.get()) - i32::from(self.r_prime?.get()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LikertResponse {
    pub style: ExplanationStyle,
    pub metric: MetricId,
    pub score: Score,
}

/// Output of the recommendation step, frozen into the event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialPlan {
    pub target_situation: ContextualSituation,
    pub trials: Vec<PlannedTrial>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedTrial {
    pub style: ExplanationStyle,
    pub movie_id: MovieId,
    pub explanation: Explanation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "payload", rename_all = "snake_case")]
pub enum SessionEvent {
    SessionCreated {
        participant: Participant,
        rng_seed: u64,
        seed_tasks: Vec<(MovieId, ContextualSituation)>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        diagnostics: Vec<String>,
    },
    SeedRated {
        task_index: usize,
        score: Score,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        plan: Option<TrialPlan>,
    },
    ExplanationRated {
        trial_index: usize,
        r: Score,
        t_ms: u64,
    },
    DetailRated {
        trial_index: usize,
        r_prime: Score,
    },
    LikertSubmitted {
        style: ExplanationStyle,
        metric: MetricId,
        score: Score,
    },
}

impl SessionEvent {
    pub fn kind(&self) -> &'static str {
        match self {
            SessionEvent::SessionCreated { .. } => "session_created",
            SessionEvent::SeedRated { .. } => "seed_rated",
            SessionEvent::ExplanationRated { .. } => "explanation_rated",
            SessionEvent::DetailRated { .. } => "detail_rated",
            SessionEvent::LikertSubmitted { .. } => "likert_submitted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolConfig {
    /// Per explanations count ratings at or above this score.
    pub per_threshold: u8,
    /// Neighbourhood size for Simu explanations.
    pub simu_neighbours: usize,
    /// Server-side ceiling on reported response times.
    pub max_t_ms: u64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            per_threshold: 4,
            simu_neighbours: 20,
            max_t_ms: 600_000,
        }
    }
}

/// Immutable inputs shared by all sessions of a study.
#[derive(Debug, Clone)]
pub struct StudyContext {
    pub dataset: Dataset,
    pub model: RecommenderModel,
    pub phrases: PhraseTable,
    pub config: ProtocolConfig,
}

impl StudyContext {
    pub fn new(dataset: Dataset, model: RecommenderModel) -> Self {
        StudyContext {
            dataset,
            model,
            phrases: PhraseTable::default(),
            config: ProtocolConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    pub participant: Participant,
    pub phase: Phase,
    pub seed_tasks: Vec<SeedTask>,
    pub target_situation: Option<ContextualSituation>,
    pub trials: Vec<TrialRecord>,
    pub likert: Vec<LikertResponse>,
    pub rng_seed: u64,
    /// Number of events applied so far.
    pub version: u64,
    pub diagnostics: Vec<String>,
}

/// What the participant should do next.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NextTask {
    Seed {
        task_index: usize,
        movie_id: MovieId,
        situation: ContextualSituation,
    },
    Explanation {
        trial_index: usize,
        text: String,
    },
    Detail {
        trial_index: usize,
        movie_id: MovieId,
    },
    Likert {
        style: ExplanationStyle,
        metric: MetricId,
        answered: usize,
    },
    Complete,
}

fn check_score(value: i64, what: &str) -> Result<Score, ProtocolError> {
    Score::new(value).map_err(|_| ProtocolError::Validation(format!("{what} {value} outside the 1..=5 scale")))
}

fn trial_rng(seed: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

/// Every combination of the study factors' vocabularies is equally likely.
fn random_study_situation(ds: &Dataset, rng: &mut impl Rng) -> Result<ContextualSituation> {
    let mut s = ContextualSituation::new();
    for f in FactorId::STUDY {
        let factor = ds.factor(&f).ok_or_else(|| Error::MissingFactor(f.clone()))?;
        let c = factor.vocabulary.choose(rng).expect("vocabularies are non-empty");
        s = s.with(f, c.as_str());
    }
    Ok(s)
}

impl Session {
    /// Samples the seed tasks; the returned event creates the session.
    pub fn start(
        ds: &Dataset,
        session_id: impl Into<String>,
        participant: Participant,
        rng_seed: u64,
    ) -> Result<(Session, SessionEvent)> {
        participant.validate()?;
        if ds.n_movies() < SEED_TASKS {
            return Err(Error::NotEnoughItems {
                available: ds.n_movies(),
                requested: SEED_TASKS,
            });
        }
        let mut rng = ChaCha20Rng::seed_from_u64(rng_seed);
        let catalog: Vec<&MovieId> = ds.movies.keys().collect();
        let movies: Vec<MovieId> = catalog
            .choose_multiple(&mut rng, SEED_TASKS)
            .map(|m| (*m).clone())
            .collect();
        let observed = ds.observed_study_situations();
        let mut diagnostics = Vec::new();
        if observed.is_empty() {
            diagnostics.push("no fully observed study situation; seed situations drawn from the vocabularies".into());
        }
        let seed_tasks = movies
            .into_iter()
            .map(|m| {
                let s = match observed.choose(&mut rng) {
                    Some(s) => s.clone(),
                    None => random_study_situation(ds, &mut rng)?,
                };
                Ok((m, s))
            })
            .collect::<Result<Vec<_>>>()?;
        let event = SessionEvent::SessionCreated {
            participant,
            rng_seed,
            seed_tasks,
            diagnostics,
        };
        let session = Session::replay(session_id, std::slice::from_ref(&event))?;
        Ok((session, event))
    }

    /// Rebuilds a session from its events, validating each transition.
    pub fn replay(session_id: impl Into<String>, events: &[SessionEvent]) -> Result<Session> {
        let Some((
            SessionEvent::SessionCreated {
                participant,
                rng_seed,
                seed_tasks,
                diagnostics,
            },
            rest,
        )) = events.split_first()
        else {
            return Err(ProtocolError::Validation("event log must start with session_created".into()).into());
        };
        if seed_tasks.len() != SEED_TASKS {
            return Err(ProtocolError::Validation(format!(
                "expected {SEED_TASKS} seed tasks, got {}",
                seed_tasks.len()
            ))
            .into());
        }
        let mut session = Session {
            session_id: session_id.into(),
            participant: participant.clone(),
            phase: Phase::SeedRating,
            seed_tasks: seed_tasks
                .iter()
                .map(|(m, s)| SeedTask {
                    movie_id: m.clone(),
                    situation: s.clone(),
                    score: None,
                })
                .collect(),
            target_situation: None,
            trials: Vec::new(),
            likert: Vec::new(),
            rng_seed: *rng_seed,
            version: 1,
            diagnostics: diagnostics.clone(),
        };
        for e in rest {
            session.apply(e)?;
        }
        Ok(session)
    }

    pub fn is_complete(&self) -> bool {
        self.phase == Phase::Complete
    }

    pub fn user_id(&self) -> UserId {
        UserId::new(format!("session:{}", self.session_id))
    }

    fn expect_phase(&self, expected: Phase) -> Result<(), ProtocolError> {
        if self.phase != expected {
            return Err(ProtocolError::WrongPhase {
                expected: expected.name(),
                actual: self.phase.name(),
            });
        }
        Ok(())
    }

    fn seed_task(&self, index: usize) -> Result<&SeedTask, ProtocolError> {
        self.seed_tasks
            .get(index)
            .ok_or_else(|| ProtocolError::NoSuchTask(format!("seed task {index}")))
    }

    fn trial(&self, index: usize) -> Result<&TrialRecord, ProtocolError> {
        self.trials
            .get(index)
            .ok_or_else(|| ProtocolError::NoSuchTask(format!("trial {index}")))
    }

    fn answered_seeds(&self) -> usize {
        self.seed_tasks.iter().filter(|t| t.score.is_some()).count()
    }

    /// Applies an already decided event. Fails without side effects when the
    /// event is not legal in the current state.
    pub fn apply(&mut self, event: &SessionEvent) -> Result<(), ProtocolError> {
        match event {
            SessionEvent::SessionCreated { .. } => {
                return Err(ProtocolError::Duplicate("session creation".into()));
            }
            SessionEvent::SeedRated {
                task_index,
                score,
                plan,
            } => {
                self.expect_phase(Phase::SeedRating)?;
                if self.seed_task(*task_index)?.score.is_some() {
                    return Err(ProtocolError::Duplicate(format!("seed task {task_index}")));
                }
                let completes = self.answered_seeds() + 1 == SEED_TASKS;
                let plan = match (completes, plan) {
                    (true, Some(p)) => Some(validate_plan(p, &self.seed_tasks)?),
                    (false, None) => None,
                    (true, None) => {
                        return Err(ProtocolError::Validation(
                            "last seed rating carries no trial plan".into(),
                        ))
                    }
                    (false, Some(_)) => {
                        return Err(ProtocolError::Validation(
                            "trial plan before the last seed rating".into(),
                        ))
                    }
                };
                self.seed_tasks[*task_index].score = Some(*score);
                if let Some(p) = plan {
                    self.target_situation = Some(p.target_situation.clone());
                    self.trials = p
                        .trials
                        .iter()
                        .map(|t| TrialRecord {
                            style: t.style,
                            movie_id: t.movie_id.clone(),
                            explanation: t.explanation.clone(),
                            r: None,
                            t_ms: None,
                            r_prime: None,
                        })
                        .collect();
                    self.diagnostics.extend(p.diagnostics.iter().cloned());
                    self.phase = Phase::Trials;
                }
            }
            SessionEvent::ExplanationRated { trial_index, r, t_ms } => {
                self.expect_phase(Phase::Trials)?;
                let trial = self.trial(*trial_index)?;
                if trial.r.is_some() {
                    return Err(ProtocolError::Duplicate(format!(
                        "explanation rating of trial {trial_index}"
                    )));
                }
                if self.trials[..*trial_index].iter().any(|t| !t.is_complete()) {
                    return Err(ProtocolError::OutOfOrder(format!("trial {trial_index}")));
                }
                let t = &mut self.trials[*trial_index];
                t.r = Some(*r);
                t.t_ms = Some(*t_ms);
            }
            SessionEvent::DetailRated { trial_index, r_prime } => {
                self.expect_phase(Phase::Trials)?;
                let trial = self.trial(*trial_index)?;
                if trial.r.is_none() {
                    return Err(ProtocolError::OutOfOrder(format!(
                        "detail rating of trial {trial_index} before its explanation rating"
                    )));
                }
                if trial.r_prime.is_some() {
                    return Err(ProtocolError::Duplicate(format!(
                        "detail rating of trial {trial_index}"
                    )));
                }
                self.trials[*trial_index].r_prime = Some(*r_prime);
                if self.trials.iter().all(TrialRecord::is_complete) {
                    self.phase = Phase::Questionnaire;
                }
            }
            SessionEvent::LikertSubmitted { style, metric, score } => {
                self.expect_phase(Phase::Questionnaire)?;
                if self.likert.iter().any(|l| l.style == *style && l.metric == *metric) {
                    return Err(ProtocolError::Duplicate(format!("likert cell ({style}, {metric})")));
                }
                self.likert.push(LikertResponse {
                    style: *style,
                    metric: *metric,
                    score: *score,
                });
                if self.likert.len() == LIKERT_CELLS {
                    self.phase = Phase::Complete;
                }
            }
        }
        self.version += 1;
        Ok(())
    }

    fn commit(&mut self, event: SessionEvent) -> Result<SessionEvent> {
        self.apply(&event)?;
        Ok(event)
    }

    /// Records a seed score. The twelfth answer also runs the recommendation
    /// step and moves the session to the trials.
    pub fn submit_seed_rating(&mut self, ctx: &StudyContext, task_index: usize, score: i64) -> Result<SessionEvent> {
        self.expect_phase(Phase::SeedRating)?;
        let score = check_score(score, "score")?;
        if self.seed_task(task_index)?.score.is_some() {
            return Err(ProtocolError::Duplicate(format!("seed task {task_index}")).into());
        }
        let plan = if self.answered_seeds() + 1 == SEED_TASKS {
            let mut answered = self.clone();
            answered.seed_tasks[task_index].score = Some(score);
            Some(answered.plan_trials(ctx)?)
        } else {
            None
        };
        self.commit(SessionEvent::SeedRated {
            task_index,
            score,
            plan,
        })
    }

    /// The recommendation step: a random target situation, recommendations
    /// on the session-local dataset and a seeded style-to-movie assignment.
    pub fn plan_trials(&self, ctx: &StudyContext) -> Result<TrialPlan> {
        let seeds: Vec<(MovieId, ContextualSituation, Score)> = self
            .seed_tasks
            .iter()
            .map(|t| {
                t.score
                    .map(|s| (t.movie_id.clone(), t.situation.clone(), s))
                    .ok_or(Error::TooFewObservations {
                        needed: SEED_TASKS,
                        got: self.answered_seeds(),
                    })
            })
            .collect::<Result<_>>()?;
        let mut rng = trial_rng(self.rng_seed);
        let target = random_study_situation(&ctx.dataset, &mut rng)?;

        let user = self.user_id();
        let mut ratings = ctx.dataset.ratings.clone();
        ratings.extend(seeds.iter().map(|(m, s, score)| ContextualRating {
            user_id: user.clone(),
            movie_id: m.clone(),
            score: *score,
            situation: s.clone(),
            timestamp: None,
        }));
        let local = ctx.dataset.with_ratings(ratings);
        let exclude: BTreeSet<MovieId> = seeds.iter().map(|(m, _, _)| m.clone()).collect();

        let mut diagnostics = Vec::new();
        let mut movies: Vec<MovieId> = match ctx.model.recommend_in_context(&local, &target, &user, &exclude) {
            Ok((_, recs)) => recs.movie_ids().take(TRIALS).cloned().collect(),
            Err(Error::NoCandidates) => Vec::new(),
            Err(e) => return Err(e),
        };
        if movies.len() < TRIALS {
            let short = movies.len();
            let mut taken: BTreeSet<MovieId> = exclude.clone();
            taken.extend(movies.iter().cloned());
            movies.extend(popularity_ranking(&local, &taken).into_iter().take(TRIALS - short));
            diagnostics.push(format!(
                "recommender returned {short} of {TRIALS} movies; padded from popularity ranking"
            ));
            if movies.len() < TRIALS {
                return Err(Error::NotEnoughItems {
                    available: movies.len(),
                    requested: TRIALS,
                });
            }
        }

        let history: Vec<Movie> = seeds
            .iter()
            .filter_map(|(m, _, _)| ctx.dataset.movies.get(m).cloned())
            .collect();
        let neighbours = similar_users(&local, &user, ctx.config.simu_neighbours);
        let ectx = ExplainContext {
            dataset: &local,
            user: &user,
            history: &history,
            situation: &target,
            phrases: &ctx.phrases,
            neighbours: &neighbours,
            per_threshold: ctx.config.per_threshold,
        };
        let movie_records: Vec<&Movie> = movies
            .iter()
            .map(|m| ctx.dataset.movies.get(m).ok_or_else(|| Error::UnknownMovie(m.clone())))
            .collect::<Result<_>>()?;

        let mut styles = ExplanationStyle::ALL.to_vec();
        styles.shuffle(&mut rng);
        // renders[m][s]: style s can explain movie m without falling back
        let renders: Vec<Vec<bool>> = movie_records
            .iter()
            .map(|m| styles.iter().map(|&s| explain(s, m, &ectx).is_ok()).collect())
            .collect();
        let order = match first_renderable_assignment(&renders) {
            Some(order) => order,
            None => {
                diagnostics.push("no style assignment renders every explanation; using fallback text".into());
                (0..TRIALS).collect()
            }
        };
        let trials = movie_records
            .iter()
            .zip(&order)
            .map(|(m, &si)| {
                let style = styles[si];
                Ok(PlannedTrial {
                    style,
                    movie_id: m.movie_id.clone(),
                    explanation: explain_or_fallback(style, m, &ectx)?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(TrialPlan {
            target_situation: target,
            trials,
            diagnostics,
        })
    }

    /// Stores `r` and its response time; times above the configured ceiling
    /// are clamped to it.
    pub fn record_explanation_rating(
        &mut self,
        config: &ProtocolConfig,
        trial_index: usize,
        r: i64,
        t_ms: i64,
    ) -> Result<SessionEvent> {
        self.expect_phase(Phase::Trials)?;
        self.trial(trial_index)?;
        let r = check_score(r, "r")?;
        if t_ms < 0 {
            return Err(ProtocolError::Validation(format!("t_ms {t_ms} is negative")).into());
        }
        let t_ms = (t_ms as u64).min(config.max_t_ms);
        self.commit(SessionEvent::ExplanationRated { trial_index, r, t_ms })
    }

    pub fn record_detail_rating(&mut self, trial_index: usize, r_prime: i64) -> Result<SessionEvent> {
        self.expect_phase(Phase::Trials)?;
        self.trial(trial_index)?;
        let r_prime = check_score(r_prime, "r_prime")?;
        self.commit(SessionEvent::DetailRated { trial_index, r_prime })
    }

    pub fn submit_likert(&mut self, style: ExplanationStyle, metric: MetricId, score: i64) -> Result<SessionEvent> {
        self.expect_phase(Phase::Questionnaire)?;
        let score = check_score(score, "score")?;
        self.commit(SessionEvent::LikertSubmitted { style, metric, score })
    }

    pub fn next_task(&self) -> NextTask {
        match self.phase {
            Phase::SeedRating => {
                let (i, t) = self
                    .seed_tasks
                    .iter()
                    .enumerate()
                    .find(|(_, t)| t.score.is_none())
                    .expect("seed phase has an open task");
                NextTask::Seed {
                    task_index: i,
                    movie_id: t.movie_id.clone(),
                    situation: t.situation.clone(),
                }
            }
            Phase::Trials => {
                let (i, t) = self
                    .trials
                    .iter()
                    .enumerate()
                    .find(|(_, t)| !t.is_complete())
                    .expect("trial phase has an open trial");
                if t.r.is_none() {
                    NextTask::Explanation {
                        trial_index: i,
                        text: t.explanation.text.clone(),
                    }
                } else {
                    NextTask::Detail {
                        trial_index: i,
                        movie_id: t.movie_id.clone(),
                    }
                }
            }
            Phase::Questionnaire => {
                let (style, metric) = ExplanationStyle::ALL
                    .iter()
                    .flat_map(|&s| MetricId::ALL.iter().map(move |&m| (s, m)))
                    .find(|(s, m)| !self.likert.iter().any(|l| l.style == *s && l.metric == *m))
                    .expect("questionnaire phase has an open cell");
                NextTask::Likert {
                    style,
                    metric,
                    answered: self.likert.len(),
                }
            }
            Phase::Complete => NextTask::Complete,
        }
    }
}

fn validate_plan<'a>(plan: &'a TrialPlan, seeds: &[SeedTask]) -> Result<&'a TrialPlan, ProtocolError> {
    if plan.trials.len() != TRIALS {
        return Err(ProtocolError::Validation(format!(
            "trial plan has {} trials",
            plan.trials.len()
        )));
    }
    let styles: BTreeSet<ExplanationStyle> = plan.trials.iter().map(|t| t.style).collect();
    let movies: BTreeSet<&MovieId> = plan.trials.iter().map(|t| &t.movie_id).collect();
    if styles.len() != TRIALS || movies.len() != TRIALS {
        return Err(ProtocolError::Validation(
            "trial plan must pair six distinct styles with six distinct movies".into(),
        ));
    }
    if seeds.iter().any(|s| movies.contains(&s.movie_id)) {
        return Err(ProtocolError::Validation("trial plan reuses a seed movie".into()));
    }
    Ok(plan)
}

/// First permutation, in lexicographic order, that gives every movie a style
/// it can render. `renders[m][s]` is the renderability table.
fn first_renderable_assignment(renders: &[Vec<bool>]) -> Option<Vec<usize>> {
    fn go(renders: &[Vec<bool>], used: &mut Vec<bool>, order: &mut Vec<usize>) -> bool {
        let m = order.len();
        if m == renders.len() {
            return true;
        }
        for s in 0..used.len() {
            if !used[s] && renders[m][s] {
                used[s] = true;
                order.push(s);
                if go(renders, used, order) {
                    return true;
                }
                order.pop();
                used[s] = false;
            }
        }
        false
    }
    let n = renders.first().map_or(0, Vec::len);
    let mut used = vec![false; n];
    let mut order = Vec::with_capacity(renders.len());
    go(renders, &mut used, &mut order).then_some(order)
}
