mod common;

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::Path;
use std::process::{Child, Command, Stdio};

use axum::http::StatusCode;
use serde_json::Value;

use common::*;

/// Restarting the store after every acknowledged write leaves the same log
/// as an uninterrupted run.
#[tokio::test]
async fn restart_after_every_write_in_process() {
    let dir = tempfile::tempdir().unwrap();
    let straight_log = dir.path().join("straight.ndjson");
    let straight = app(open_store(&straight_log));
    run_session(&straight).await;
    let expected = std::fs::read_to_string(&straight_log).unwrap();

    let log = dir.path().join("restarted.ndjson");
    let created = call(&app(open_store(&log)), "POST", "/sessions", Some(&participant()), None).await;
    let id = created.json()["session_id"].as_str().unwrap().to_owned();
    let mut step = 0;
    loop {
        let app = app(open_store(&log));
        let next = call(&app, "GET", &format!("/sessions/{id}/next"), None, None)
            .await
            .json();
        let Some((uri, body)) = scripted_write(&id, &next, step) else {
            break;
        };
        let r = call(&app, "POST", &uri, Some(&body), Some(&format!("k{step}"))).await;
        assert_eq!(r.status, StatusCode::OK, "{}", r.text);
        step += 1;
    }
    assert_eq!(step, 60);
    let got = call(&app(open_store(&log)), "GET", "/export?format=ndjson", None, None)
        .await
        .text;
    assert_eq!(got, expected);
}

#[tokio::test]
async fn torn_tail_is_discarded() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("events.ndjson");
    let app1 = app(open_store(&log));
    call(&app1, "POST", "/sessions", Some(&participant()), None).await;
    let before = std::fs::read_to_string(&log).unwrap();
    drop(app1);
    std::fs::OpenOptions::new()
        .append(true)
        .open(&log)
        .unwrap()
        .write_all(b"{\"seq\":2,\"sess")
        .unwrap();
    let store = open_store(&log);
    assert_eq!(store.len(), 1);
    assert_eq!(store.export().unwrap(), before);
}

struct Server {
    child: Child,
    addr: String,
}

impl Server {
    fn start(log: &Path) -> Server {
        let mut child = Command::new(env!("CARGO_BIN_EXE_recexp-service"))
            .env("RECEXP_LISTEN", "127.0.0.1:0")
            .env("RECEXP_EVENT_LOG", log)
            .env("RECEXP_FIXED_CLOCK_MS", FIXED_MS.to_string())
            .env("RECEXP_ID_SEED", "5")
            .env("RUST_LOG", "warn")
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .unwrap();
        let mut line = String::new();
        BufReader::new(child.stdout.take().unwrap())
            .read_line(&mut line)
            .unwrap();
        let addr = line
            .trim()
            .strip_prefix("listening on ")
            .unwrap_or_else(|| panic!("unexpected banner {line:?}"))
            .to_owned();
        Server { child, addr }
    }

    fn request(&self, method: &str, path: &str, body: Option<&Value>, key: Option<&str>) -> (u16, String) {
        let mut stream = TcpStream::connect(&self.addr).unwrap();
        let body = body.map(Value::to_string).unwrap_or_default();
        let key = key.map(|k| format!("Idempotency-Key: {k}\r\n")).unwrap_or_default();
        write!(
            stream,
            "{method} {path} HTTP/1.1\r\nHost: test\r\nConnection: close\r\n{key}Content-Type: application/json\r\nContent-Length: {}\r\n\r\n{body}",
            body.len()
        )
        .unwrap();
        let mut raw = String::new();
        stream.read_to_string(&mut raw).unwrap();
        let (head, payload) = raw.split_once("\r\n\r\n").unwrap();
        let status = head.split_whitespace().nth(1).unwrap().parse().unwrap();
        (status, payload.to_owned())
    }

    fn kill(mut self) {
        self.child.kill().unwrap();
        self.child.wait().unwrap();
    }
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|e| panic!("{e}: {text}"))
}

/// Drives a 61-event session against the binary, killing the process after
/// every acknowledged write when `kill_each` is set. Returns the final export.
fn scripted_run(log: &Path, kill_each: bool) -> String {
    let mut server = Server::start(log);
    let (status, text) = server.request("POST", "/sessions", Some(&participant()), Some("create"));
    assert_eq!(status, 201, "{text}");
    let id = json(&text)["session_id"].as_str().unwrap().to_owned();
    let mut writes = 1;
    let mut step = 0;
    loop {
        if kill_each {
            server.kill();
            server = Server::start(log);
        }
        let (_, next) = server.request("GET", &format!("/sessions/{id}/next"), None, None);
        let Some((uri, body)) = scripted_write(&id, &json(&next), step) else {
            break;
        };
        let (status, text) = server.request("POST", &uri, Some(&body), Some(&format!("k{step}")));
        assert_eq!(status, 200, "{uri}: {text}");
        writes += 1;
        step += 1;
    }
    assert_eq!(writes, 61);
    let (status, export) = server.request("GET", "/export?format=ndjson", None, None);
    assert_eq!(status, 200);
    server.kill();
    export
}

#[test]
fn kill_and_restart_after_every_write() {
    let dir = tempfile::tempdir().unwrap();
    let straight = scripted_run(&dir.path().join("a.ndjson"), false);
    let killed = scripted_run(&dir.path().join("b.ndjson"), true);
    assert_eq!(straight.lines().count(), 61);
    assert_eq!(killed, straight);
}
