use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use recexp_core::setup::StudySetup;

use crate::store::{random_ids, seeded_ids, system_clock, Clock, IdGenerator};

/// Settings read from `RECEXP_*` environment variables.
#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub listen: SocketAddr,
    pub event_log: PathBuf,
    pub setup: StudySetup,
    pub seed_base: u64,
    /// Freeze server timestamps (tests and scripted runs).
    pub fixed_clock_ms: Option<i64>,
    /// Derive session ids from this seed instead of random UUIDs.
    pub id_seed: Option<u64>,
}

impl ServiceConfig {
    pub fn from_env() -> Result<Self, String> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(var: impl Fn(&str) -> Option<String>) -> Result<Self, String> {
        fn parsed<T: std::str::FromStr>(name: &str, v: Option<String>) -> Result<Option<T>, String> {
            v.map(|s| s.parse().map_err(|_| format!("{name}: cannot parse {s:?}")))
                .transpose()
        }
        let path = |k: &str| var(k).map(PathBuf::from);
        Ok(ServiceConfig {
            listen: parsed("RECEXP_LISTEN", var("RECEXP_LISTEN"))?.unwrap_or_else(|| ([127, 0, 0, 1], 8080).into()),
            event_log: path("RECEXP_EVENT_LOG").unwrap_or_else(|| PathBuf::from("events.ndjson")),
            setup: StudySetup {
                ratings: path("RECEXP_RATINGS"),
                catalog: path("RECEXP_CATALOG"),
                schema: path("RECEXP_SCHEMA"),
                synthetic: path("RECEXP_SYNTHETIC"),
                recommender: path("RECEXP_RECOMMENDER_CONFIG"),
            },
            seed_base: parsed("RECEXP_SEED_BASE", var("RECEXP_SEED_BASE"))?.unwrap_or(0),
            fixed_clock_ms: parsed("RECEXP_FIXED_CLOCK_MS", var("RECEXP_FIXED_CLOCK_MS"))?,
            id_seed: parsed("RECEXP_ID_SEED", var("RECEXP_ID_SEED"))?,
        })
    }

    pub fn clock(&self) -> Clock {
        match self.fixed_clock_ms {
            Some(ms) => Arc::new(move || ms),
            None => system_clock(),
        }
    }

    pub fn ids(&self) -> IdGenerator {
        match self.id_seed {
            Some(seed) => seeded_ids(seed),
            None => random_ids(),
        }
    }
}
