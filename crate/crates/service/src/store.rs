//! Session store: an append-only event log on disk plus in-memory snapshots
//! rebuilt from it on open.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::hash::{Hash, Hasher};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use serde::Serialize;

use recexp_core::domain::{ContextualSituation, ExplanationStyle, MetricId, Movie};
use recexp_core::eventlog::{parse_log, replay_sessions, LogRecord};
use recexp_core::protocol::{
    NextTask, Participant, Phase, Session, SessionEvent, StudyContext, LIKERT_CELLS, SEED_TASKS, TRIALS,
};
use recexp_core::{Error as CoreError, ProtocolError};

/// Milliseconds since the Unix epoch.
pub type Clock = Arc<dyn Fn() -> i64 + Send + Sync>;
/// New session id given the number of sessions already stored.
pub type IdGenerator = Arc<dyn Fn(usize) -> String + Send + Sync>;

pub fn system_clock() -> Clock {
    Arc::new(|| {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_millis() as i64)
    })
}

pub fn random_ids() -> IdGenerator {
    Arc::new(|_| uuid::Uuid::new_v4().simple().to_string())
}

/// Reproducible ids for tests and replays of scripted studies.
pub fn seeded_ids(seed: u64) -> IdGenerator {
    Arc::new(move |n| {
        let mut h = DefaultHasher::new();
        (seed, n).hash(&mut h);
        format!("{:016x}{n:06}", h.finish())
    })
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("unknown session {0}")]
    NotFound(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("{0}")]
    Malformed(String),
    #[error("no complete sessions")]
    NoCompleteSessions,
    #[error(transparent)]
    Core(CoreError),
    #[error("event log {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl From<CoreError> for StoreError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Protocol(p) => StoreError::Protocol(p),
            CoreError::NoCompleteSessions => StoreError::NoCompleteSessions,
            other => StoreError::Core(other),
        }
    }
}

pub type StoreResult<T> = Result<T, StoreError>;

/// Acknowledgment of one durably stored event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Ack {
    pub session_id: String,
    pub seq: u64,
    pub event: &'static str,
    pub phase: Phase,
}

impl Ack {
    fn of(session: &Session, event: &SessionEvent) -> Self {
        Ack {
            session_id: session.session_id.clone(),
            seq: session.version,
            event: event.kind(),
            phase: session.phase,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Seed {
        task_index: usize,
        score: i64,
    },
    Explanation {
        trial_index: usize,
        r: i64,
        t_ms: i64,
    },
    Detail {
        trial_index: usize,
        r_prime: i64,
    },
    Likert {
        style: ExplanationStyle,
        metric: MetricId,
        score: i64,
    },
}

/// The participant-facing view of the next step. Explanation views carry
/// only the trial handle and the explanation text.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TaskView {
    Seed {
        task_index: usize,
        of: usize,
        movie: Movie,
        situation: ContextualSituation,
    },
    Explanation {
        trial_index: usize,
        of: usize,
        text: String,
    },
    Detail {
        trial_index: usize,
        of: usize,
        movie: Movie,
    },
    Likert {
        style: ExplanationStyle,
        metric: MetricId,
        answered: usize,
        of: usize,
        /// The explanation the participant saw in this style.
        example: String,
    },
    Complete {
        export: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NextView {
    pub session_id: String,
    pub phase: Phase,
    pub task: TaskView,
}

struct Entry {
    session: Session,
    acks: HashMap<String, Ack>,
}

struct LogFile {
    path: PathBuf,
    file: File,
}

impl LogFile {
    fn io(&self, source: std::io::Error) -> StoreError {
        StoreError::Io {
            path: self.path.clone(),
            source,
        }
    }

    /// Appends and syncs; the event counts as stored only after this returns.
    fn append(&mut self, record: &LogRecord) -> StoreResult<()> {
        self.file
            .write_all(record.to_line().as_bytes())
            .and_then(|()| self.file.sync_data())
            .map_err(|e| self.io(e))
    }

    fn read_all(&mut self) -> StoreResult<String> {
        let mut text = String::new();
        self.file
            .seek(SeekFrom::Start(0))
            .and_then(|_| self.file.read_to_string(&mut text))
            .and_then(|_| self.file.seek(SeekFrom::End(0)))
            .map_err(|e| self.io(e))?;
        Ok(text)
    }
}

pub struct Store {
    ctx: Arc<StudyContext>,
    seed_base: u64,
    clock: Clock,
    ids: IdGenerator,
    log: Mutex<LogFile>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Entry>>>>,
    /// Creation acks by idempotency key; the lock also serializes creation.
    creations: Mutex<HashMap<String, Ack>>,
}

fn session_seed(base: u64, id: &str) -> u64 {
    let mut h = DefaultHasher::new();
    id.hash(&mut h);
    base ^ h.finish()
}

impl Store {
    /// Opens (or creates) the event log and rebuilds every session from it.
    /// A torn final line left by a crash mid-append is discarded.
    pub fn open(
        path: &Path,
        ctx: Arc<StudyContext>,
        seed_base: u64,
        clock: Clock,
        ids: IdGenerator,
    ) -> StoreResult<Self> {
        let io = |source| StoreError::Io {
            path: path.to_owned(),
            source,
        };
        let file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(path)
            .map_err(io)?;
        let mut log = LogFile {
            path: path.to_owned(),
            file,
        };
        let mut text = log.read_all()?;
        if !text.is_empty() && !text.ends_with('\n') {
            let keep = text.rfind('\n').map_or(0, |i| i + 1);
            tracing::warn!(dropped = text.len() - keep, "discarding torn final log line");
            log.file.set_len(keep as u64).map_err(io)?;
            text.truncate(keep);
        }
        let records = parse_log(&text)?;

        let mut entries: HashMap<String, Entry> = HashMap::new();
        let mut creations = HashMap::new();
        for r in &records {
            match (&r.event, entries.get_mut(&r.session_id)) {
                (SessionEvent::SessionCreated { .. }, None) => {
                    let session = Session::replay(r.session_id.clone(), std::slice::from_ref(&r.event))?;
                    if let Some(k) = &r.idempotency_key {
                        creations.insert(k.clone(), Ack::of(&session, &r.event));
                    }
                    entries.insert(
                        r.session_id.clone(),
                        Entry {
                            session,
                            acks: HashMap::new(),
                        },
                    );
                }
                (_, Some(entry)) if r.seq == entry.session.version + 1 => {
                    entry.session.apply(&r.event)?;
                    if let Some(k) = &r.idempotency_key {
                        entry.acks.insert(k.clone(), Ack::of(&entry.session, &r.event));
                    }
                }
                _ => {
                    return Err(StoreError::Malformed(format!(
                        "event log: unexpected event {} of session {}",
                        r.seq, r.session_id
                    )))
                }
            }
        }
        tracing::info!(sessions = entries.len(), events = records.len(), "event log replayed");
        Ok(Store {
            ctx,
            seed_base,
            clock,
            ids,
            log: Mutex::new(log),
            sessions: RwLock::new(entries.into_iter().map(|(k, v)| (k, Arc::new(Mutex::new(v)))).collect()),
            creations: Mutex::new(creations),
        })
    }

    pub fn context(&self) -> &StudyContext {
        &self.ctx
    }

    fn append(&self, session: &Session, event: &SessionEvent, key: Option<&str>) -> StoreResult<()> {
        let record = LogRecord {
            seq: session.version,
            session_id: session.session_id.clone(),
            server_ts: (self.clock)(),
            idempotency_key: key.map(str::to_owned),
            event: event.clone(),
        };
        self.log.lock().expect("log lock").append(&record)
    }

    fn entry(&self, id: &str) -> StoreResult<Arc<Mutex<Entry>>> {
        self.sessions
            .read()
            .expect("sessions lock")
            .get(id)
            .cloned()
            .ok_or_else(|| StoreError::NotFound(id.to_owned()))
    }

    pub fn create(&self, participant: Participant, key: Option<&str>) -> StoreResult<Ack> {
        participant.validate()?;
        let mut creations = self.creations.lock().expect("creation lock");
        if let Some(ack) = key.and_then(|k| creations.get(k)) {
            return Ok(ack.clone());
        }
        let n = self.sessions.read().expect("sessions lock").len();
        let id = (self.ids)(n);
        if self.sessions.read().expect("sessions lock").contains_key(&id) {
            return Err(StoreError::Protocol(ProtocolError::Duplicate(format!(
                "session id {id}"
            ))));
        }
        let (session, event) = Session::start(
            &self.ctx.dataset,
            id.clone(),
            participant,
            session_seed(self.seed_base, &id),
        )?;
        self.append(&session, &event, key)?;
        let ack = Ack::of(&session, &event);
        if let Some(k) = key {
            creations.insert(k.to_owned(), ack.clone());
        }
        self.sessions.write().expect("sessions lock").insert(
            id,
            Arc::new(Mutex::new(Entry {
                session,
                acks: HashMap::new(),
            })),
        );
        Ok(ack)
    }

    /// Decides the event on a copy, appends it, then publishes the new state.
    pub fn submit(&self, id: &str, command: Command, key: Option<&str>) -> StoreResult<Ack> {
        let entry = self.entry(id)?;
        let mut entry = entry.lock().expect("session lock");
        if let Some(ack) = key.and_then(|k| entry.acks.get(k)) {
            return Ok(ack.clone());
        }
        let mut next = entry.session.clone();
        let event = match command {
            Command::Seed { task_index, score } => next.submit_seed_rating(&self.ctx, task_index, score)?,
            Command::Explanation { trial_index, r, t_ms } => {
                next.record_explanation_rating(&self.ctx.config, trial_index, r, t_ms)?
            }
            Command::Detail { trial_index, r_prime } => next.record_detail_rating(trial_index, r_prime)?,
            Command::Likert { style, metric, score } => next.submit_likert(style, metric, score)?,
        };
        self.append(&next, &event, key)?;
        let ack = Ack::of(&next, &event);
        entry.session = next;
        if let Some(k) = key {
            entry.acks.insert(k.to_owned(), ack.clone());
        }
        Ok(ack)
    }

    pub fn session(&self, id: &str) -> StoreResult<Session> {
        Ok(self.entry(id)?.lock().expect("session lock").session.clone())
    }

    pub fn next(&self, id: &str) -> StoreResult<NextView> {
        let session = self.session(id)?;
        let movie = |m| {
            self.ctx
                .dataset
                .movies
                .get(m)
                .cloned()
                .ok_or_else(|| StoreError::Core(CoreError::UnknownMovie(m.clone())))
        };
        let task = match session.next_task() {
            NextTask::Seed {
                task_index,
                movie_id,
                situation,
            } => TaskView::Seed {
                task_index,
                of: SEED_TASKS,
                movie: movie(&movie_id)?,
                situation,
            },
            NextTask::Explanation { trial_index, text } => TaskView::Explanation {
                trial_index,
                of: TRIALS,
                text,
            },
            NextTask::Detail { trial_index, movie_id } => TaskView::Detail {
                trial_index,
                of: TRIALS,
                movie: movie(&movie_id)?,
            },
            NextTask::Likert {
                style,
                metric,
                answered,
            } => TaskView::Likert {
                style,
                metric,
                answered,
                of: LIKERT_CELLS,
                example: session
                    .trials
                    .iter()
                    .find(|t| t.style == style)
                    .map(|t| t.explanation.text.clone())
                    .unwrap_or_default(),
            },
            NextTask::Complete => TaskView::Complete {
                export: "/export?format=ndjson".into(),
            },
        };
        Ok(NextView {
            session_id: session.session_id,
            phase: session.phase,
            task,
        })
    }

    /// The whole event log as stored.
    pub fn export(&self) -> StoreResult<String> {
        self.log.lock().expect("log lock").read_all()
    }

    /// All sessions as of one point in the log.
    pub fn snapshot(&self) -> StoreResult<Vec<Session>> {
        let text = self.export()?;
        Ok(replay_sessions(&parse_log(&text)?)?)
    }

    pub fn len(&self) -> usize {
        self.sessions.read().expect("sessions lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
