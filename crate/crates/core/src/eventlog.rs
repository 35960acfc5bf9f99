//! The append-only session event log: one JSON record per line.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, ProtocolError, Result};
use crate::protocol::{Session, SessionEvent};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    /// Position of the event within its session, starting at 1.
    pub seq: u64,
    pub session_id: String,
    /// Server wall-clock time in milliseconds since the Unix epoch.
    pub server_ts: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub idempotency_key: Option<String>,
    #[serde(flatten)]
    pub event: SessionEvent,
}

impl LogRecord {
    pub fn to_line(&self) -> String {
        let mut line = serde_json::to_string(self).expect("log records serialize");
        line.push('\n');
        line
    }
}

pub fn parse_log(text: &str) -> Result<Vec<LogRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                path: "<event log>".into(),
                reason: format!("line {}: {e}", i + 1),
            })
        })
        .collect()
}

pub fn read_log(path: &Path) -> Result<Vec<LogRecord>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_log(&text).map_err(|e| match e {
        Error::Parse { reason, .. } => Error::Parse {
            path: path.to_owned(),
            reason,
        },
        other => other,
    })
}

/// Groups records by session, checks per-session sequence numbers and
/// replays each session. Sessions come out in order of first appearance.
pub fn replay_sessions(records: &[LogRecord]) -> Result<Vec<Session>> {
    let mut order: Vec<&str> = Vec::new();
    let mut by_session: BTreeMap<&str, Vec<&LogRecord>> = BTreeMap::new();
    for r in records {
        let events = by_session.entry(&r.session_id).or_insert_with(|| {
            order.push(&r.session_id);
            Vec::new()
        });
        let expected = events.len() as u64 + 1;
        if r.seq != expected {
            return Err(ProtocolError::OutOfOrder(format!(
                "event {} of session {} (expected sequence number {expected})",
                r.seq, r.session_id
            ))
            .into());
        }
        events.push(r);
    }
    order
        .into_iter()
        .map(|id| {
            let events: Vec<SessionEvent> = by_session[id].iter().map(|r| r.event.clone()).collect();
            Session::replay(id, &events)
        })
        .collect()
}

pub fn complete_sessions(sessions: Vec<Session>) -> Vec<Session> {
    sessions.into_iter().filter(Session::is_complete).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Score;

    #[test]
    fn record_line_round_trip() {
        let rec = LogRecord {
            seq: 3,
            session_id: "s1".into(),
            server_ts: 1_700_000_000_000,
            idempotency_key: Some("k".into()),
            event: SessionEvent::DetailRated {
                trial_index: 0,
                r_prime: Score::new(2).unwrap(),
            },
        };
        let line = rec.to_line();
        assert!(line.ends_with('\n'));
        assert!(line.contains(r#""type":"detail_rated""#));
        assert_eq!(parse_log(&line).unwrap(), vec![rec]);
    }

    #[test]
    fn sequence_gaps_rejected() {
        let rec = |seq| LogRecord {
            seq,
            session_id: "s".into(),
            server_ts: 0,
            idempotency_key: None,
            event: SessionEvent::DetailRated {
                trial_index: 0,
                r_prime: Score::new(2).unwrap(),
            },
        };
        assert!(matches!(
            replay_sessions(&[rec(2)]),
            Err(Error::Protocol(ProtocolError::OutOfOrder(_)))
        ));
        assert!(parse_log("{not json}\n").is_err());
    }
}
